"""False positive rate estimators for noisy and binary labels.

The dataset is split into an evaluation part ``D1`` and a reference part
``D2``. Every sample of ``D1`` is denoised against ``D2`` (plus itself) and
the denoised labels are fed to the prior-free soft-label estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EstimateResult, Epsilon, feature_dim, is_categorical, ratio_estimate, resolve_epsilon
from .denoising import (
    DiscreteMetric,
    EuclideanMetric,
    KernelSpec,
    NoisyDataset,
    default_bandwidth,
    dn_pooled,
    nw_pooled,
    triangular,
)
from .errors import DomainError, InsufficientDataError, UnsupportedFeatureError
from .rng import make_rng


@dataclass(frozen=True)
class PartitionSpec:
    """Seeded shuffle-then-split of a dataset; ``ratio = |D1| / n``."""

    ratio: float = 0.5
    seed: int = 0
    scheme: str = "shuffled-split"

    def __post_init__(self):
        if not 0.0 < float(self.ratio) < 1.0:
            raise DomainError(f"partition ratio must lie in (0, 1), got {self.ratio}")
        if self.scheme != "shuffled-split":
            raise DomainError(f"unknown partition scheme {self.scheme!r}")

    def sizes(self, n: int) -> tuple[int, int]:
        """``(|D1|, |D2|)``: ``|D1| = round(ratio * n)`` half-up, both nonempty."""
        if n < 2:
            raise InsufficientDataError(f"partitioning needs at least 2 samples, got {n}")
        n1 = min(max(math.floor(self.ratio * n + 0.5), 1), n - 1)
        return n1, n - n1


def partition_indices(n: int, spec: PartitionSpec) -> tuple[np.ndarray, np.ndarray]:
    n1, _ = spec.sizes(n)
    perm = make_rng(spec.seed).permutation(n)
    return np.sort(perm[:n1]), np.sort(perm[n1:])


def partition(data: NoisyDataset, spec: PartitionSpec) -> tuple[NoisyDataset, NoisyDataset]:
    """Split ``data`` into ``(D1, D2)``; each part keeps the original order."""
    i1, i2 = partition_indices(data.n, spec)
    return data.subset(i1), data.subset(i2)


def _finish(s: np.ndarray, eps: float, d1: NoisyDataset, data: NoisyDataset, meta: dict) -> EstimateResult:
    value, clamped = ratio_estimate(s, eps)
    meta = {
        "epsilon": repr(eps),
        "ratio": repr(d1.n / data.n),
        "label_continuity": "violated" if data.label_kind == "binary" else "ok",
        **meta,
    }
    return EstimateResult(value=value, denominator_clamped=clamped, n_used=d1.n, metadata=meta)


def fpr_denoised(
    data: NoisyDataset,
    spec: PartitionSpec = PartitionSpec(),
    epsilon: Epsilon = "auto",
    clip: bool = False,
) -> EstimateResult:
    """Estimate the FPR after exact-match denoising of the evaluation half.

    Parameters
    ----------
    data : NoisyDataset
        Categorical features only.
    spec : PartitionSpec
    epsilon : float or "auto"
        Denominator floor; ``"auto"`` is ``exp(-|D1|)``.
    clip : bool
        Clip denoised labels into [0, 1] before estimating. Off by default:
        with bounded noise the denoised labels already lie in the label bounds.
    """
    if not is_categorical(data.x):
        raise UnsupportedFeatureError("fpr_denoised needs categorical features; use fpr_nw")
    d1, d2 = partition(data, spec)
    s = dn_pooled(d1.x, d1.y, d2)
    if clip:
        s = np.clip(s, 0.0, 1.0)
    eps = resolve_epsilon(epsilon, d1.n)
    return _finish(s, eps, d1, data, {"estimator": "denoised"})


def fpr_nw(
    data: NoisyDataset,
    spec: PartitionSpec = PartitionSpec(),
    metric=None,
    kernel: KernelSpec | None = None,
    h: float | str = "auto",
    epsilon: Epsilon = "auto",
    clip: bool = False,
) -> EstimateResult:
    """Estimate the FPR after Nadaraya-Watson denoising of the evaluation half.

    ``metric`` defaults to Euclidean for continuous features and discrete
    for categorical ones; ``kernel`` defaults to triangular. ``h="auto"``
    uses :func:`default_bandwidth` on ``|D2|``.
    """
    if metric is None:
        metric = DiscreteMetric() if is_categorical(data.x) else EuclideanMetric()
    kernel = kernel or triangular()
    d1, d2 = partition(data, spec)
    if isinstance(h, str):
        if h != "auto":
            raise DomainError(f"h must be a positive number or 'auto', got {h!r}")
        if d2.n < 2:
            raise InsufficientDataError("automatic bandwidth needs at least 2 reference samples")
        h = default_bandwidth(d2.n, feature_dim(data.x))
    s = nw_pooled(d1.x, d1.y, d2, metric, kernel, h)
    if clip:
        s = np.clip(s, 0.0, 1.0)
    eps = resolve_epsilon(epsilon, d1.n)
    meta = {"estimator": "nw", "h": repr(float(h)), "metric": metric.name, "kernel": kernel.name}
    return _finish(s, eps, d1, data, meta)


def fnr_denoised(data: NoisyDataset, spec: PartitionSpec = PartitionSpec(), epsilon: Epsilon = "auto", clip: bool = False) -> EstimateResult:
    return _as_fnr(fpr_denoised(data.flipped(), spec, epsilon, clip))


def fnr_nw(data: NoisyDataset, spec: PartitionSpec = PartitionSpec(), metric=None, kernel=None, h="auto", epsilon: Epsilon = "auto", clip: bool = False) -> EstimateResult:
    return _as_fnr(fpr_nw(data.flipped(), spec, metric, kernel, h, epsilon, clip))


def _as_fnr(res: EstimateResult) -> EstimateResult:
    return EstimateResult(res.value, res.denominator_clamped, res.n_used, {**res.metadata, "rate": "fnr"})


def binary_to_noisy(x, labels) -> NoisyDataset:
    """Wrap 0/1 labels as noisy labels with ``y~ ~ Bernoulli(y)``, bounds (0, 1)."""
    y = np.asarray(labels, dtype=np.float64)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DomainError("binary labels must be 0 or 1")
    return NoisyDataset(x, y, (0.0, 1.0), "binary")
