"""Generative models with known posteriors, label noise channels, and ground truth.

A model fixes the feature law and the class-1 posterior ``f(x)``. Soft
labels are ``y = f(x)``; noisy labels add zero-mean noise to ``y``.
Ground-truth error rates are exact sums for finite models and adaptive
quadrature for one-dimensional smooth models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np
from scipy import integrate, optimize, stats

from .core import ClassPrior, SoftDataset
from .denoising import NoisyDataset
from .errors import ConfigError, DomainError, InvalidModelError
from .rng import make_rng

Seed = Union[int, np.random.Generator]

QUAD_TOL = 1e-9
MC_ORACLE_SAMPLES = 10_000_000


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else make_rng(seed)


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    return int(n)


@dataclass(frozen=True)
class GroundTruth:
    """Oracle quantities of a model.

    ``p0_mass`` is ``Pr(c = 0) = E[1 - y]``, the normaliser of the false
    positive rate. ``p0_threshold`` is ``Pr(y < 0.5)``, the quantity the
    prior-free estimators' denominators converge to. The two agree only for
    some models; ``threshold_fpr`` is the value the prior-free estimators
    actually converge to, ``E[1{y>=.5}(1-y)] / p0_threshold``.
    """

    rho_fp: float
    rho_fn: float
    p0_mass: float
    p0_threshold: float
    threshold_fpr: float
    method: str
    tolerance: float

    @property
    def priors_agree(self) -> bool:
        return abs(self.p0_mass - self.p0_threshold) <= max(self.tolerance, 1e-12)

    def to_dict(self) -> dict:
        return {
            "rho_fp": self.rho_fp,
            "rho_fn": self.rho_fn,
            "p0_mass": self.p0_mass,
            "p0_threshold": self.p0_threshold,
            "threshold_fpr": None if math.isnan(self.threshold_fpr) else self.threshold_fpr,
            "priors_agree": self.priors_agree,
            "method": self.method,
            "tolerance": self.tolerance,
        }


def _truth(fp, fn, p0_mass, p0_threshold, method, tol) -> GroundTruth:
    fp, fn, p0_mass, p0_threshold = float(fp), float(fn), float(p0_mass), float(p0_threshold)
    p1_mass = 1.0 - p0_mass
    return GroundTruth(
        rho_fp=fp / p0_mass,
        rho_fn=fn / p1_mass,
        p0_mass=p0_mass,
        p0_threshold=p0_threshold,
        threshold_fpr=fp / p0_threshold if p0_threshold > 0 else math.nan,
        method=method,
        tolerance=tol,
    )


class FiniteModel:
    """Features ``{0, ..., k-1}`` with probabilities ``p_x`` and posteriors ``posterior``.

    >>> m = FiniteModel([0.5, 0.5], [0.8, 0.3])
    >>> round(m.truth().rho_fp, 6), m.truth().p0_threshold
    (0.222222, 0.5)
    """

    kind = "finite"
    dim = 1
    categorical = True

    def __init__(self, p_x, posterior):
        p = np.array(p_x, dtype=np.float64)
        q = np.array(posterior, dtype=np.float64)
        if p.ndim != 1 or p.shape != q.shape or p.size < 1:
            raise InvalidModelError("p_x and posterior must be vectors of equal length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidModelError(f"p_x must be a probability vector (sums to {p.sum()!r})")
        if np.any((q < 0) | (q > 1)) or not np.all(np.isfinite(q)):
            raise InvalidModelError("posterior values must lie in [0, 1]")
        p.setflags(write=False)
        q.setflags(write=False)
        self.p_x = p
        self.posterior = q
        p0 = float(np.dot(p, 1.0 - q))
        if not 0.0 < p0 < 1.0:
            raise InvalidModelError(f"class priors must both be positive, got Pr(c=0) = {p0}")

    @property
    def k(self) -> int:
        return len(self.p_x)

    def sample_features(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(self.k, size=n, p=self.p_x)

    def posterior_at(self, x: np.ndarray) -> np.ndarray:
        return self.posterior[x]

    def truth(self) -> GroundTruth:
        p, q = self.p_x, self.posterior
        fp = float(np.sum(p * np.where(q >= 0.5, 1.0 - q, 0.0)))
        fn = float(np.sum(p * np.where(q <= 0.5, q, 0.0)))
        p0_mass = float(np.sum(p * (1.0 - q)))
        p0_threshold = float(np.sum(p * (q < 0.5)))
        return _truth(fp, fn, p0_mass, p0_threshold, "exact", 0.0)

    def to_dict(self) -> dict:
        return {"kind": "finite", "p_x": self.p_x.tolist(), "posterior": self.posterior.tolist()}


# -- smooth models -----------------------------------------------------------


def _sine(x: np.ndarray) -> np.ndarray:
    return 0.5 + 0.4 * np.sin(2.0 * np.pi * x.mean(axis=1))


# name -> (posterior on (n, m) arrays, Holder constant for dimension m, exponent)
POSTERIORS: dict[str, tuple[Callable, Callable[[int], float], float]] = {
    "sine": (_sine, lambda m: 0.8 * math.pi / math.sqrt(m), 1.0),
}


class SmoothModel:
    """Uniform features on ``[0, 1]^dim`` with a Holder-continuous posterior.

    The stock posterior ``"sine"`` is ``0.5 + 0.4 sin(2 pi x)`` (applied to
    the coordinate mean when ``dim > 1``). It crosses 0.5 transversally, so
    labels equal 0.5 with probability zero.

    Parameters
    ----------
    posterior : str or callable
        A registered name, or a function mapping an ``(n, dim)`` array to
        ``n`` values in [0, 1].
    holder_c, holder_beta : float, optional
        Declared Holder constants; required for a custom callable.
    dim : int
    """

    kind = "smooth"
    categorical = False

    def __init__(self, posterior: str | Callable = "sine", holder_c=None, holder_beta=None, dim: int = 1):
        if int(dim) != dim or dim < 1:
            raise InvalidModelError(f"dim must be a positive integer, got {dim}")
        self.dim = int(dim)
        if isinstance(posterior, str):
            if posterior not in POSTERIORS:
                raise InvalidModelError(f"unknown posterior {posterior!r}; choose from {sorted(POSTERIORS)}")
            f, c_of_m, beta = POSTERIORS[posterior]
            self.name = posterior
            self.f = f
            self.holder_c = float(c_of_m(self.dim)) if holder_c is None else float(holder_c)
            self.holder_beta = beta if holder_beta is None else float(holder_beta)
        else:
            if holder_c is None or holder_beta is None:
                raise InvalidModelError("a custom posterior needs declared holder_c and holder_beta")
            self.name = getattr(posterior, "__name__", "custom")
            self.f = posterior
            self.holder_c = float(holder_c)
            self.holder_beta = float(holder_beta)
        if not (self.holder_c > 0 and self.holder_beta > 0):
            raise InvalidModelError("Holder constants must be positive")
        probe = self.posterior_at(make_rng(0).random((4096, self.dim)))
        if np.any((probe < 0) | (probe > 1)):
            raise InvalidModelError("posterior values must lie in [0, 1]")
        cert = self.holder_certificate(grid=1000)
        if cert > self.holder_c * (1 + 1e-9):
            raise InvalidModelError(f"posterior violates its Holder bound: ratio {cert} > C = {self.holder_c}")
        if self.dim == 1:
            t = self.truth()
            if not 0.0 < t.p0_mass < 1.0:
                raise InvalidModelError(f"class priors must both be positive, got Pr(c=0) = {t.p0_mass}")

    def sample_features(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((n, self.dim))

    def posterior_at(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.f(np.asarray(x, dtype=np.float64).reshape(-1, self.dim)), dtype=np.float64)

    def holder_certificate(self, grid: int = 10_000, seed: int = 0) -> float:
        """Largest ``|f(x) - f(x')| / |x - x'|^beta`` found on a dense grid.

        For ``dim == 1`` every pair of a ``grid``-point lattice on [0, 1] is
        checked; otherwise ``grid**2 // 2`` random pairs are used.
        """
        beta = self.holder_beta
        if self.dim == 1:
            t = np.linspace(0.0, 1.0, grid)
            fv = self.posterior_at(t[:, None])
            dx = t[1] - t[0]
            best = 0.0
            for lag in range(1, grid):
                r = np.max(np.abs(fv[lag:] - fv[:-lag])) / (lag * dx) ** beta
                best = max(best, float(r))
            return best
        rng = make_rng(seed)
        best = 0.0
        for _ in range(max(1, grid // 100)):
            a = rng.random((grid * 50, self.dim))
            b = rng.random((grid * 50, self.dim))
            d = np.linalg.norm(a - b, axis=1)
            ok = d > 0
            r = np.abs(self.posterior_at(a) - self.posterior_at(b))[ok] / d[ok] ** beta
            best = max(best, float(r.max()))
        return best

    @cached_property
    def _truth(self) -> GroundTruth:
        if self.dim == 1:
            return self._quadrature_truth()
        return self._monte_carlo_truth()

    def truth(self) -> GroundTruth:
        return self._truth

    def _crossings(self) -> list[float]:
        g = lambda x: float(self.posterior_at(np.array([[x]]))[0]) - 0.5  # noqa: E731
        t = np.linspace(0.0, 1.0, 10_001)
        v = self.posterior_at(t[:, None]) - 0.5
        pts = []
        for i in np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]:
            lo, hi = t[i], t[i + 1]
            if v[i] == 0.0:
                pts.append(lo)
            elif v[i + 1] != 0.0:
                pts.append(optimize.brentq(g, lo, hi, xtol=1e-15))
        return sorted(set([0.0, 1.0, *pts]))

    def _quadrature_truth(self) -> GroundTruth:
        f = lambda x: float(self.posterior_at(np.array([[x]]))[0])  # noqa: E731
        pts = self._crossings()
        fp = fn = mass0 = thr0 = 0.0
        err = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            if hi <= lo:
                continue
            mid = f(0.5 * (lo + hi))
            m0, e0 = integrate.quad(lambda x: 1.0 - f(x), lo, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
            mass0 += m0
            err += e0
            if mid >= 0.5:
                fp += m0
            if mid <= 0.5:
                m1, e1 = integrate.quad(f, lo, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
                fn += m1
                err += e1
            if mid < 0.5:
                thr0 += hi - lo
        return _truth(fp, fn, mass0, thr0, "quadrature", QUAD_TOL)

    def _monte_carlo_truth(self, samples: int = MC_ORACLE_SAMPLES, seed: int = 0) -> GroundTruth:
        rng = make_rng(seed)
        chunk = 1_000_000
        sums = np.zeros(4)
        sq_fp = 0.0
        for start in range(0, samples, chunk):
            y = self.posterior_at(rng.random((min(chunk, samples - start), self.dim)))
            fp_terms = np.where(y >= 0.5, 1.0 - y, 0.0)
            sums += [fp_terms.sum(), np.where(y <= 0.5, y, 0.0).sum(), (1.0 - y).sum(), (y < 0.5).sum()]
            sq_fp += float(np.sum(fp_terms**2))
        fp, fn, mass0, thr0 = (sums / samples).tolist()
        se = math.sqrt(max(sq_fp / samples - fp**2, 0.0) / samples) / mass0
        return _truth(fp, fn, mass0, thr0, "monte-carlo", se)

    def to_dict(self) -> dict:
        d = {"kind": "smooth", "posterior": self.name, "dim": self.dim,
             "holder_c": self.holder_c, "holder_beta": self.holder_beta}
        return d


GenerativeModel = Union[FiniteModel, SmoothModel]


def Smooth1DModel(posterior: str | Callable = "sine", holder_c=None, holder_beta=None) -> SmoothModel:
    return SmoothModel(posterior, holder_c, holder_beta, dim=1)


# -- noise channels ----------------------------------------------------------


@dataclass(frozen=True)
class UniformAdditive:
    """``y~ = y + z`` with ``z ~ Uniform(-sigma, sigma)``."""

    sigma: float
    label_kind = "continuous"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def bounds(self) -> tuple[float, float]:
        return (-self.sigma, 1.0 + self.sigma)

    def apply(self, y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return y + rng.uniform(-self.sigma, self.sigma, size=len(y))

    def to_dict(self) -> dict:
        return {"kind": "uniform", "sigma": self.sigma}


@dataclass(frozen=True)
class TruncGaussSymmetric:
    """Gaussian noise with scale ``sigma`` truncated to ``[-cut, cut]``; zero mean by symmetry."""

    sigma: float
    cut: float
    label_kind = "continuous"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not (self.cut > 0 and math.isfinite(self.cut)):
            raise DomainError(f"cut must be positive, got {self.cut}")

    @property
    def bounds(self) -> tuple[float, float]:
        return (-self.cut, 1.0 + self.cut)

    def apply(self, y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        c = self.cut / self.sigma
        z = stats.truncnorm.rvs(-c, c, scale=self.sigma, size=len(y), random_state=rng)
        return y + z

    def to_dict(self) -> dict:
        return {"kind": "truncgauss", "sigma": self.sigma, "cut": self.cut}


@dataclass(frozen=True)
class BernoulliBinary:
    """``y~ = 1`` with probability ``y``, else 0."""

    label_kind = "binary"

    @property
    def bounds(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def apply(self, y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(len(y)) < y).astype(np.float64)

    def to_dict(self) -> dict:
        return {"kind": "bernoulli"}


NoiseModel = Union[UniformAdditive, TruncGaussSymmetric, BernoulliBinary]


# -- sampling ----------------------------------------------------------------


def sample_soft(model: GenerativeModel, n: int, seed: Seed) -> SoftDataset:
    """Draw ``n`` i.i.d. features and label each with its exact posterior."""
    n = _check_n(n)
    rng = _rng(seed)
    x = model.sample_features(n, rng)
    return SoftDataset(x, model.posterior_at(x))


def sample_noisy(model: GenerativeModel, noise: NoiseModel, n: int, seed: Seed) -> NoisyDataset:
    """:func:`sample_soft`, then independent noise on every label."""
    rng = _rng(seed)
    soft = sample_soft(model, n, rng)
    y = noise.apply(soft.y, rng)
    return NoisyDataset(soft.x, y, noise.bounds, noise.label_kind)


@dataclass(frozen=True)
class ModelPriors:
    p0_mass: float
    p0_threshold: float

    @property
    def prior(self) -> ClassPrior:
        """The class prior ``Pr(c = 0)``, which normalises the false positive rate."""
        return ClassPrior(self.p0_mass)


def exact_prior(model: GenerativeModel) -> ModelPriors:
    """Both notions of the class-0 prior; raises if either is degenerate.

    >>> exact_prior(FiniteModel([0.5, 0.5], [0.8, 0.3]))
    ModelPriors(p0_mass=0.45, p0_threshold=0.5)
    """
    t = model.truth()
    for name, v in (("p0_mass", t.p0_mass), ("p0_threshold", t.p0_threshold)):
        if not 0.0 < v < 1.0:
            raise InvalidModelError(f"{name} = {v} leaves a class with zero probability")
    return ModelPriors(t.p0_mass, t.p0_threshold)


# -- dict specs --------------------------------------------------------------


def _field(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}.{key}: missing required field")
    return d[key]


def model_from_dict(d: dict, where: str = "model") -> GenerativeModel:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = _field(d, "kind", where)
    try:
        if kind == "finite":
            return FiniteModel(_field(d, "p_x", where), _field(d, "posterior", where))
        if kind == "smooth":
            return SmoothModel(
                d.get("posterior", "sine"), d.get("holder_c"), d.get("holder_beta"), d.get("dim", 1)
            )
    except (InvalidModelError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: unknown model kind {kind!r} (expected 'finite' or 'smooth')")


def noise_from_dict(d: dict | None, where: str = "noise") -> NoiseModel | None:
    if d is None:
        return None
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = _field(d, "kind", where)
    try:
        if kind == "uniform":
            return UniformAdditive(float(_field(d, "sigma", where)))
        if kind == "truncgauss":
            return TruncGaussSymmetric(float(_field(d, "sigma", where)), float(_field(d, "cut", where)))
        if kind == "bernoulli":
            return BernoulliBinary()
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: unknown noise kind {kind!r}")
