import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesfpr import core, noisy
from bayesfpr.denoising import DiscreteMetric, NoisyDataset, triangular
from bayesfpr.errors import DomainError, InsufficientDataError, UnsupportedFeatureError
from bayesfpr.noisy import PartitionSpec


def arrange(d1, d2, spec):
    """Place the ``d1`` and ``d2`` samples where ``spec`` will split them."""
    n = len(d1) + len(d2)
    i1, i2 = noisy.partition_indices(n, spec)
    x = np.empty(n, dtype=np.int64)
    y = np.empty(n)
    x[i1], y[i1] = zip(*d1)
    x[i2], y[i2] = zip(*d2)
    return NoisyDataset(x, y, (-0.2, 1.2))


@pytest.mark.parametrize("n, r, want", [(10, 0.5, (5, 5)), (3, 0.5, (2, 1)), (2, 0.01, (1, 1)), (2, 0.99, (1, 1)), (5, 0.3, (2, 3))])
def test_partition_sizes(n, r, want):
    assert PartitionSpec(r).sizes(n) == want


def test_partition_errors():
    with pytest.raises(InsufficientDataError):
        PartitionSpec().sizes(1)
    for r in (0.0, 1.0, -0.5):
        with pytest.raises(DomainError):
            PartitionSpec(r)


def test_partition_deterministic_and_disjoint():
    spec = PartitionSpec(0.3, seed=17)
    a1, a2 = noisy.partition_indices(50, spec)
    b1, b2 = noisy.partition_indices(50, spec)
    np.testing.assert_array_equal(a1, b1)
    np.testing.assert_array_equal(a2, b2)
    assert sorted(np.concatenate([a1, a2]).tolist()) == list(range(50))
    c1, _ = noisy.partition_indices(50, PartitionSpec(0.3, seed=18))
    assert not np.array_equal(a1, c1)


def test_denoised_hand_example():
    spec = PartitionSpec(0.4, seed=3)
    d = arrange([(0, 0.8), (1, 0.3)], [(0, 0.7), (0, 0.9), (1, 0.1)], spec)
    r = noisy.fpr_denoised(d, spec)
    # dn(a) = (0.7 + 0.9 + 0.8) / 3 = 0.8 and dn(b) = (0.1 + 0.3) / 2 = 0.2
    assert r.value == pytest.approx(0.2, abs=1e-15)
    assert r.n_used == 2 and not r.denominator_clamped
    assert r.metadata["label_continuity"] == "ok"


def test_denoised_all_below_half_is_zero():
    d = NoisyDataset(np.arange(6) % 2, [0.1, 0.2, 0.3, 0.1, 0.0, 0.2])
    assert noisy.fpr_denoised(d).value == 0.0


def test_denoised_needs_categorical_features():
    d = NoisyDataset(np.array([[0.1], [0.2]]), [0.3, 0.4])
    with pytest.raises(UnsupportedFeatureError):
        noisy.fpr_denoised(d)


def test_nw_clamped_when_every_label_high():
    d = NoisyDataset(np.linspace(0, 1, 8)[:, None], np.full(8, 0.9))
    r = noisy.fpr_nw(d, PartitionSpec(0.5, 1))
    assert r.denominator_clamped
    assert float(r.metadata["h"]) == pytest.approx((np.log(4) / 4) ** (1 / 3))


def test_clip_option():
    spec = PartitionSpec(0.5, 0)
    d = arrange([(0, 1.2), (1, -0.2)], [(0, 1.2), (1, -0.2)], spec)
    raw = noisy.fpr_denoised(d, spec)
    clipped = noisy.fpr_denoised(d, spec, clip=True)
    assert raw.value == pytest.approx(-0.2)
    assert clipped.value == 0.0


def test_binary_adapter():
    d = noisy.binary_to_noisy(np.array([0, 1, 1]), [0, 1, 1])
    assert d.bounds == (0.0, 1.0) and d.label_kind == "binary"
    np.testing.assert_array_equal(d.y, [0, 1, 1])
    with pytest.raises(DomainError):
        noisy.binary_to_noisy(np.array([0, 1]), [0, 0.5])
    r = noisy.fpr_denoised(noisy.binary_to_noisy(np.arange(10) % 3, np.arange(10) % 2))
    assert r.metadata["label_continuity"] == "violated"


@st.composite
def finite_noisy(draw):
    k = draw(st.integers(1, 5))
    n = draw(st.integers(2, 40))
    x = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    y = draw(st.lists(st.floats(-0.2, 1.2, allow_nan=False), min_size=n, max_size=n))
    return NoisyDataset(np.array(x, dtype=np.int64), np.array(y), (-0.2, 1.2))


specs = st.builds(PartitionSpec, st.floats(0.05, 0.95), st.integers(0, 2**63 - 1))


@settings(max_examples=300)
@given(finite_noisy(), specs)
def test_nw_with_discrete_unit_bandwidth_reduces_to_denoised(d, spec):
    a = noisy.fpr_nw(d, spec, DiscreteMetric(), triangular(), 1.0)
    b = noisy.fpr_denoised(d, spec)
    assert a.value == b.value
    assert a.denominator_clamped == b.denominator_clamped


@given(st.lists(st.floats(0, 1), min_size=2, max_size=40, unique=True), specs)
def test_identity_denoiser_gives_prior_free_on_d1(ys, spec):
    n = len(ys)
    d = NoisyDataset(np.arange(n, dtype=np.int64), ys, (0.0, 1.0))
    d1, _ = noisy.partition(d, spec)
    want = core.fpr_prior_free(core.SoftDataset(d1.x, d1.y)).value
    assert noisy.fpr_denoised(d, spec).value == want
    cont = NoisyDataset(np.arange(n, dtype=float)[:, None], ys, (0.0, 1.0))
    assert noisy.fpr_nw(cont, spec, h=0.5).value == want


@given(finite_noisy(), specs)
def test_fnr_duality(d, spec):
    assert noisy.fnr_denoised(d, spec).value == noisy.fpr_denoised(d.flipped(), spec).value
    assert noisy.fnr_nw(d, spec, h=1.0).value == noisy.fpr_nw(d.flipped(), spec, h=1.0).value


@given(finite_noisy(), specs)
def test_deterministic(d, spec):
    assert noisy.fpr_denoised(d, spec).value == noisy.fpr_denoised(d, spec).value
