"""Soft-label estimators of the Bayes classifier's false positive/negative rates.

A soft label is the posterior probability of class 1 at the sample's feature.
The false positive rate of the Bayes classifier can be written as

    rho_FP = E[1{y >= 0.5} (1 - y)] / Pr(c = 0),

which suggests two plug-in estimators: one that divides by a known class-0
prior (:func:`fpr_known_prior`) and one that divides by the empirical count
of class-0 predictions (:func:`fpr_prior_free`). False negative rates are
obtained by flipping every label ``y -> 1 - y``.

Labels at exactly 0.5 always count as predicted class 1.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import DomainError, InvalidModelError

Epsilon = Union[float, str]

THRESHOLD = 0.5


def as_features(x) -> np.ndarray:
    """Validate and normalise a feature array.

    Integer arrays are categorical features and must be one-dimensional and
    nonnegative. Anything else is treated as continuous and returned with
    shape ``(n, m)``; a one-dimensional float array becomes ``(n, 1)``.
    """
    arr = np.asarray(x)
    if arr.dtype.kind in "iub":
        if arr.ndim != 1:
            raise DomainError("categorical features must be a 1-D integer array")
        if arr.size and arr.min() < 0:
            raise DomainError("categorical feature indices must be nonnegative")
        arr = arr.astype(np.int64, copy=True)
    else:
        arr = np.array(arr, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DomainError("continuous features must have shape (n, m)")
        if not np.all(np.isfinite(arr)):
            raise DomainError("continuous features must be finite")
    arr.setflags(write=False)
    return arr


def is_categorical(x: np.ndarray) -> bool:
    return x.dtype.kind in "iu"


def feature_dim(x: np.ndarray) -> int:
    """Dimension ``m`` of continuous features; 1 for categorical ones."""
    return 1 if is_categorical(x) else int(x.shape[1])


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SoftDataset:
    """Samples ``(x_i, y_i)`` whose labels are class-1 posteriors in [0, 1]."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_features(self.x)
        y = _frozen(self.y)
        if y.ndim != 1 or y.size < 1:
            raise DomainError("a soft dataset needs at least one label")
        if len(x) != len(y):
            raise DomainError(f"{len(x)} features but {len(y)} labels")
        if not np.all((y >= 0.0) & (y <= 1.0)):
            raise DomainError("soft labels must lie in [0, 1]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.y)

    def __len__(self) -> int:
        return self.n

    def flipped(self) -> "SoftDataset":
        """The same samples with every label replaced by ``1 - y``."""
        return SoftDataset(self.x, 1.0 - self.y)


@dataclass(frozen=True)
class ClassPrior:
    """Class probabilities ``(p0, 1 - p0)`` with both strictly positive."""

    p0: float

    def __post_init__(self):
        p0 = float(self.p0)
        if not 0.0 < p0 < 1.0:
            raise InvalidModelError(f"class-0 prior must lie in (0, 1), got {p0}")
        object.__setattr__(self, "p0", p0)

    @property
    def p1(self) -> float:
        return 1.0 - self.p0

    def flipped(self) -> "ClassPrior":
        return ClassPrior(self.p1)


@dataclass(frozen=True)
class EstimateResult:
    value: float
    denominator_clamped: bool
    n_used: int
    metadata: Mapping[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "denominator_clamped": self.denominator_clamped,
            "n_used": self.n_used,
            **dict(self.metadata),
        }


def bayes_decide(y: float) -> int:
    """Bayes decision for a class-1 posterior ``y``; ties go to class 1.

    >>> bayes_decide(0.5), bayes_decide(0.0), bayes_decide(0.7)
    (1, 0, 1)
    """
    y = float(y)
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"posterior must lie in [0, 1], got {y}")
    return int(y >= THRESHOLD)


def false_positive_mass(y: np.ndarray) -> np.ndarray:
    """Per-sample terms ``1{y >= 0.5} (1 - y)``."""
    return np.where(y >= THRESHOLD, 1.0 - y, 0.0)


def resolve_epsilon(epsilon: Epsilon, n: int) -> float:
    """Turn ``"auto"`` into ``exp(-n)``, floored at the smallest normal float."""
    if isinstance(epsilon, str):
        if epsilon != "auto":
            raise DomainError(f"epsilon must be a positive number or 'auto', got {epsilon!r}")
        return max(math.exp(-n), sys.float_info.min)
    eps = float(epsilon)
    if not (eps > 0.0 and math.isfinite(eps)):
        raise DomainError(f"epsilon must be positive and finite, got {epsilon}")
    return eps


def ratio_estimate(s: np.ndarray, eps: float) -> tuple[float, bool]:
    """``sum 1{s>=.5}(1-s) / max(eps, sum 1{s<.5})`` and whether eps won.

    Shared by the soft-label and the denoised estimators so that identical
    denoised labels give bit-identical estimates.
    """
    numerator = float(np.sum(false_positive_mass(s)))
    count = float(np.count_nonzero(s < THRESHOLD))
    clamped = eps > count
    denominator = eps if clamped else count
    with np.errstate(over="ignore"):
        value = numerator / denominator
    if not math.isfinite(value):
        # exp(-n) makes the quotient unrepresentable for large all-class-1 samples
        value = math.copysign(sys.float_info.max, numerator)
    return value, clamped


def fpr_known_prior(data: SoftDataset, prior: ClassPrior) -> EstimateResult:
    """False positive rate with a known class-0 prior.

    Unbiased for soft labels, with variance at most ``1 / (16 n p0^2)``.
    """
    value = float(np.sum(false_positive_mass(data.y))) / (data.n * prior.p0)
    return EstimateResult(
        value=value,
        denominator_clamped=False,
        n_used=data.n,
        metadata={"estimator": "psi1", "p0": repr(prior.p0)},
    )


def prior_hat(data: SoftDataset) -> float:
    """Fraction of labels strictly below 0.5."""
    return np.count_nonzero(data.y < THRESHOLD) / data.n


def fpr_prior_free(data: SoftDataset, epsilon: Epsilon = "auto") -> EstimateResult:
    """False positive rate with the class-0 prior replaced by its empirical count.

    Parameters
    ----------
    data : SoftDataset
    epsilon : float or "auto"
        Floor on the denominator. ``"auto"`` uses ``exp(-n)``.

    Returns
    -------
    EstimateResult
        ``denominator_clamped`` is set when no label fell below 0.5 and the
        floor was used instead. The value is not clipped to [0, 1].
    """
    eps = resolve_epsilon(epsilon, data.n)
    value, clamped = ratio_estimate(data.y, eps)
    return EstimateResult(
        value=value,
        denominator_clamped=clamped,
        n_used=data.n,
        metadata={"estimator": "psi2", "epsilon": repr(eps)},
    )


def fnr_known_prior(data: SoftDataset, prior: ClassPrior) -> EstimateResult:
    """False negative rate: :func:`fpr_known_prior` on flipped labels and prior."""
    res = fpr_known_prior(data.flipped(), prior.flipped())
    return _as_fnr(res)


def fnr_prior_free(data: SoftDataset, epsilon: Epsilon = "auto") -> EstimateResult:
    res = fpr_prior_free(data.flipped(), epsilon)
    return _as_fnr(res)


def _as_fnr(res: EstimateResult) -> EstimateResult:
    meta = dict(res.metadata)
    meta["rate"] = "fnr"
    return EstimateResult(res.value, res.denominator_clamped, res.n_used, meta)


def exact_fpr(model) -> float:
    """Ground-truth Bayes false positive rate of a generative model.

    Finite models are summed exactly; one-dimensional smooth models use
    adaptive quadrature (see :meth:`bayesfpr.synthetic.SmoothModel.truth`).
    """
    return model.truth().rho_fp


def exact_fnr(model) -> float:
    return model.truth().rho_fn
