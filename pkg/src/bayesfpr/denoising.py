"""Recover soft labels from noisy ones by local averaging.

Two denoisers are provided:

* :func:`dn` averages the noisy labels of every sample whose feature equals
  the query's feature exactly (finite feature spaces only).
* :func:`nw` is the Nadaraya-Watson estimator with a metric, a kernel
  supported on [0, 1], and a bandwidth ``h``.

With the discrete metric, the triangular kernel ``K(t) = 1 - t`` and
``h = 1``, the two coincide. Both accumulate their sums sequentially in
dataset order, so the coincidence holds bit for bit, not just up to
rounding.

The batch forms :func:`dn_pooled` and :func:`nw_pooled` evaluate each query
against ``reference + [query]``: the query's own label is always part of
the pool, which keeps every denominator positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .core import _frozen, as_features, feature_dim, is_categorical
from .errors import DomainError, UnsupportedFeatureError

LABEL_KINDS = ("continuous", "binary")

# Upper bound on the number of query/reference pairs held in memory at once.
_PAIR_BUDGET = 1 << 22


@dataclass(frozen=True, eq=False)
class NoisyDataset:
    """Samples ``(x_i, y~_i)`` with ``E[y~ | y] = y`` and ``y~`` in ``[a, b]``.

    ``bounds`` defaults to the observed label range.
    """

    x: np.ndarray
    y: np.ndarray
    bounds: tuple[float, float] | None = None
    label_kind: str = "continuous"

    def __post_init__(self):
        x = as_features(self.x)
        y = _frozen(self.y)
        if y.ndim != 1 or y.size < 1:
            raise DomainError("a noisy dataset needs at least one label")
        if len(x) != len(y):
            raise DomainError(f"{len(x)} features but {len(y)} labels")
        if not np.all(np.isfinite(y)):
            raise DomainError("noisy labels must be finite")
        if self.label_kind not in LABEL_KINDS:
            raise DomainError(f"label_kind must be one of {LABEL_KINDS}, got {self.label_kind!r}")
        if self.bounds is None:
            bounds = (0.0, 1.0) if self.label_kind == "binary" else (float(y.min()), float(y.max()))
        else:
            bounds = (float(self.bounds[0]), float(self.bounds[1]))
        a, b = bounds
        if not (math.isfinite(a) and math.isfinite(b) and a <= b):
            raise DomainError(f"bounds must be finite with a <= b, got {bounds}")
        if not np.all((y >= a) & (y <= b)):
            raise DomainError(f"noisy labels fall outside the declared bounds {bounds}")
        if self.label_kind == "binary":
            if bounds != (0.0, 1.0):
                raise DomainError("binary labels must have bounds (0, 1)")
            if not np.all((y == 0.0) | (y == 1.0)):
                raise DomainError("binary labels must be 0 or 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "bounds", bounds)

    @property
    def n(self) -> int:
        return len(self.y)

    def __len__(self) -> int:
        return self.n

    def subset(self, idx) -> "NoisyDataset":
        return NoisyDataset(self.x[idx], self.y[idx], self.bounds, self.label_kind)

    def flipped(self) -> "NoisyDataset":
        """Labels ``1 - y~`` with bounds ``(1 - b, 1 - a)``."""
        a, b = self.bounds
        return NoisyDataset(self.x, 1.0 - self.y, (1.0 - b, 1.0 - a), self.label_kind)


# -- metrics -----------------------------------------------------------------


class DiscreteMetric:
    """``d(u, v) = 0`` if ``u == v`` else 1, for any feature kind."""

    name = "discrete"

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if is_categorical(a):
            return (a[:, None] != b[None, :]).astype(np.float64)
        return np.any(a[:, None, :] != b[None, :, :], axis=2).astype(np.float64)


class EuclideanMetric:
    name = "euclidean"

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if is_categorical(a) or is_categorical(b):
            raise UnsupportedFeatureError("the Euclidean metric needs continuous features")
        return cdist(a, b)


class TableMetric:
    """Metric on ``{0, ..., k-1}`` given by an explicit distance table."""

    name = "table"

    def __init__(self, table):
        t = np.array(table, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DomainError("a metric table must be square")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise DomainError("metric distances must be finite and nonnegative")
        if np.any(np.diag(t) != 0) or np.any(t[~np.eye(len(t), dtype=bool)] <= 0):
            raise DomainError("d(u, v) = 0 must hold exactly when u == v")
        if not np.array_equal(t, t.T):
            raise DomainError("metric table is not symmetric")
        # d(i, j) <= d(i, k) + d(k, j) for every k
        via = (t[:, :, None] + t[None, :, :]).min(axis=1)
        if np.any(t > via * (1 + 1e-12)):
            raise DomainError("metric table violates the triangle inequality")
        t.setflags(write=False)
        self.table = t

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if not (is_categorical(a) and is_categorical(b)):
            raise UnsupportedFeatureError("a table metric needs categorical features")
        k = len(self.table)
        if (a.size and a.max() >= k) or (b.size and b.max() >= k):
            raise DomainError(f"feature index outside the {k}-point metric table")
        return self.table[np.ix_(a, b)]


METRICS = {"discrete": DiscreteMetric, "euclidean": EuclideanMetric}


def get_metric(name: str):
    try:
        return METRICS[name]()
    except KeyError:
        raise DomainError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


# -- kernels -----------------------------------------------------------------

_KERNEL_GRID = 1024


@dataclass(frozen=True)
class KernelSpec:
    """A kernel on [0, 1], zero outside it.

    The rule must be strictly decreasing, ``lipschitz``-Lipschitz, and have
    slope steeper than ``-slope_floor`` everywhere on [0, 1]. These are
    checked by finite differences on a 1,024-point grid when the spec is
    created.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    slope_floor: float
    name: str = "custom"

    def __post_init__(self):
        if not self.slope_floor > 0:
            raise DomainError("the slope floor must be positive")
        t = np.linspace(0.0, 1.0, _KERNEL_GRID)
        k = np.asarray(self.rule(t), dtype=np.float64)
        if k.shape != t.shape or not np.all(np.isfinite(k)):
            raise DomainError(f"kernel {self.name!r} must map arrays elementwise to finite values")
        if not k[0] > 0 or np.any(k < 0):
            raise DomainError(f"kernel {self.name!r} must be nonnegative with K(0) > 0")
        slopes = np.diff(k) / np.diff(t)
        if np.any(slopes >= 0):
            raise DomainError(f"kernel {self.name!r} is not strictly decreasing on [0, 1]")
        if np.max(np.abs(slopes)) > self.lipschitz * (1 + 1e-9):
            raise DomainError(f"kernel {self.name!r} exceeds its Lipschitz constant {self.lipschitz}")
        if np.min(-slopes) <= self.slope_floor:
            raise DomainError(f"kernel {self.name!r} is flatter than its slope floor {self.slope_floor}")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.array(self.rule(np.clip(t, 0.0, 1.0)), dtype=np.float64)
        out[(t < 0.0) | (t > 1.0)] = 0.0
        return out

    @property
    def at_zero(self) -> float:
        return float(self(np.zeros(1))[0])


def triangular() -> KernelSpec:
    """``K(t) = 1 - t``."""
    return KernelSpec(lambda t: 1.0 - t, lipschitz=1.0, slope_floor=0.5, name="triangular")


KERNELS = {"triangular": triangular}


def get_kernel(name: str) -> KernelSpec:
    try:
        return KERNELS[name]()
    except KeyError:
        raise DomainError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


# -- denoisers ---------------------------------------------------------------


def _row_sums(w: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Running (not pairwise) sums along each row. Zero weights add exact
    # zeros, so the result matches an in-order scan over the matching samples,
    # which is how dn_pooled's bincount accumulates.
    num = np.cumsum(w * labels[None, :], axis=1)[:, -1]
    den = np.cumsum(w, axis=1)[:, -1]
    return num, den


def _check_member(qx, qy, data: NoisyDataset) -> np.ndarray:
    qx = as_features(np.asarray([qx]) if np.ndim(qx) == 0 else np.asarray(qx)[None, ...])
    if is_categorical(qx) != is_categorical(data.x) or feature_dim(qx) != feature_dim(data.x):
        raise DomainError("query feature does not match the dataset's feature kind")
    same_x = DiscreteMetric().pairwise(qx, data.x)[0] == 0.0
    if not np.any(same_x & (data.y == float(qy))):
        raise DomainError("the query sample must be a member of the dataset")
    return qx


def dn(query_x, query_y: float, data: NoisyDataset) -> float:
    """Mean noisy label over the samples of ``data`` sharing the query's feature.

    ``data`` must contain the query sample itself, so at least one sample
    matches.

    >>> d = NoisyDataset(np.array([0, 0, 1]), [0.6, 0.4, 0.9])
    >>> round(dn(0, 0.6, d), 12)
    0.5
    """
    if not is_categorical(data.x):
        raise UnsupportedFeatureError("dn needs categorical features; use nw for continuous ones")
    qx = _check_member(query_x, query_y, data)
    w = (data.x == qx[0]).astype(np.float64)[None, :]
    num, den = _row_sums(w, data.y)
    return float(num[0] / den[0])


def _check_bandwidth(h: float) -> float:
    h = float(h)
    if not (h > 0 and math.isfinite(h)):
        raise DomainError(f"bandwidth must be positive and finite, got {h}")
    return h


def nw(query_x, query_y: float, data: NoisyDataset, metric, kernel: KernelSpec, h: float) -> float:
    """Nadaraya-Watson estimate of ``E[y~ | x = query_x]`` over ``data``.

    ``data`` must contain the query sample, whose weight ``K(0)`` keeps the
    denominator positive.
    """
    h = _check_bandwidth(h)
    qx = _check_member(query_x, query_y, data)
    w = kernel(metric.pairwise(qx, data.x) / h)
    num, den = _row_sums(w, data.y)
    return float(num[0] / den[0])


def dn_pooled(query_x: np.ndarray, query_y: np.ndarray, reference: NoisyDataset) -> np.ndarray:
    """:func:`dn` for each query against ``reference + [query]``."""
    query_x = as_features(query_x)
    query_y = np.asarray(query_y, dtype=np.float64)
    if not (is_categorical(query_x) and is_categorical(reference.x)):
        raise UnsupportedFeatureError("dn needs categorical features; use nw for continuous ones")
    k = int(max(query_x.max(initial=-1), reference.x.max(initial=-1))) + 1
    sums = np.bincount(reference.x, weights=reference.y, minlength=k)
    counts = np.bincount(reference.x, minlength=k).astype(np.float64)
    return (sums[query_x] + query_y) / (counts[query_x] + 1.0)


def nw_pooled(
    query_x: np.ndarray,
    query_y: np.ndarray,
    reference: NoisyDataset,
    metric,
    kernel: KernelSpec,
    h: float,
) -> np.ndarray:
    """:func:`nw` for each query against ``reference + [query]``.

    Categorical features are first reduced to per-category label totals.
    Otherwise pairwise distances are computed exactly, in row blocks that
    bound memory.
    """
    h = _check_bandwidth(h)
    query_x = as_features(query_x)
    query_y = np.asarray(query_y, dtype=np.float64)
    k0 = kernel.at_zero
    if is_categorical(query_x) and is_categorical(reference.x):
        # weights depend only on the category pair: sum labels per category
        # once, then weight the k category totals instead of all n samples
        k = int(max(query_x.max(initial=-1), reference.x.max(initial=-1))) + 1
        sums = np.bincount(reference.x, weights=reference.y, minlength=k)
        counts = np.bincount(reference.x, minlength=k).astype(np.float64)
        cats = np.arange(k, dtype=np.int64)
        w = kernel(metric.pairwise(cats, cats) / h)
        num = (w * sums[None, :]).sum(axis=1)
        den = (w * counts[None, :]).sum(axis=1)
        return (num[query_x] + k0 * query_y) / (den[query_x] + k0)
    out = np.empty(len(query_y))
    step = max(1, _PAIR_BUDGET // max(1, reference.n))
    for start in range(0, len(query_y), step):
        sl = slice(start, start + step)
        w = kernel(metric.pairwise(query_x[sl], reference.x) / h)
        num, den = _row_sums(w, reference.y)
        out[sl] = (num + k0 * query_y[sl]) / (den + k0)
    return out


def default_bandwidth(n: int, m: int) -> float:
    """Bandwidth schedule ``(ln n / n) ** (1 / (m + 2))``.

    It tends to zero while ``ln n / (n h^m) = (ln n / n) ** (2 / (m + 2))``
    also tends to zero.
    """
    if n < 2:
        raise DomainError(f"bandwidth schedule needs n >= 2, got {n}")
    if m < 1:
        raise DomainError(f"feature dimension must be >= 1, got {m}")
    return (math.log(n) / n) ** (1.0 / (m + 2))
