import math

import numpy as np
import pytest
from scipy import integrate

from bayesfpr.errors import ConfigError, DomainError, InvalidModelError
from bayesfpr.synthetic import (
    BernoulliBinary,
    FiniteModel,
    Smooth1DModel,
    SmoothModel,
    TruncGaussSymmetric,
    UniformAdditive,
    exact_prior,
    model_from_dict,
    noise_from_dict,
    sample_noisy,
    sample_soft,
)

TWO = FiniteModel([0.5, 0.5], [0.8, 0.3])


def test_finite_model_validation():
    with pytest.raises(InvalidModelError):
        FiniteModel([0.5, 0.6], [0.1, 0.2])
    with pytest.raises(InvalidModelError):
        FiniteModel([0.5, 0.5], [0.1, 1.2])
    with pytest.raises(InvalidModelError):
        FiniteModel([1.0], [0.0, 0.3])
    with pytest.raises(InvalidModelError):
        FiniteModel([0.5, 0.5], [0.0, 0.0])


def test_exact_prior_examples():
    p = exact_prior(TWO)
    assert p.p0_mass == pytest.approx(0.45, abs=1e-15)
    assert p.p0_threshold == 0.5
    assert p.prior.p0 == pytest.approx(0.45)
    assert exact_prior(FiniteModel([0.5, 0.5], [0.3, 0.7])).p0_threshold == 0.5
    with pytest.raises(InvalidModelError):
        exact_prior(FiniteModel([0.5, 0.5], [0.2, 0.2]))


def test_two_prior_definitions_change_the_limit():
    t = TWO.truth()
    assert t.rho_fp == pytest.approx(0.2 / 0.9)
    assert t.threshold_fpr == pytest.approx(0.2)
    assert not t.priors_agree
    assert FiniteModel([0.5, 0.5], [0.3, 0.7]).truth().priors_agree


def test_fnr_oracle():
    t = TWO.truth()
    assert t.rho_fn == pytest.approx(0.5 * 0.3 / 0.55)


def test_sample_soft():
    d = sample_soft(TWO, 100_000, 5)
    assert set(np.unique(d.y)) <= {0.8, 0.3}
    assert np.mean(d.x == 0) == pytest.approx(0.5, abs=0.01)
    again = sample_soft(TWO, 100_000, 5)
    np.testing.assert_array_equal(d.x, again.x)
    other = sample_soft(TWO, 100_000, 6)
    assert not np.array_equal(d.x, other.x)
    with pytest.raises(DomainError):
        sample_soft(TWO, 0, 1)


def test_noise_supports():
    m = FiniteModel([1.0], [0.5])
    d = sample_noisy(m, UniformAdditive(0.1), 10_000, 1)
    assert d.y.min() >= 0.4 and d.y.max() <= 0.6
    assert d.bounds == pytest.approx((-0.1, 1.1))
    b = sample_noisy(TWO, BernoulliBinary(), 1000, 1)
    assert set(np.unique(b.y)) <= {0.0, 1.0} and b.label_kind == "binary"
    ones = sample_noisy(FiniteModel([0.5, 0.5], [1.0, 0.0]), BernoulliBinary(), 1000, 2)
    np.testing.assert_array_equal(ones.y, 1.0 - ones.x)
    g = sample_noisy(m, TruncGaussSymmetric(0.3, 0.25), 10_000, 1)
    assert g.y.min() >= 0.25 and g.y.max() <= 0.75


def test_bernoulli_mean():
    y = BernoulliBinary().apply(np.full(100_000, 0.3), np.random.default_rng(0))
    assert y.mean() == pytest.approx(0.3, abs=0.005)


@pytest.mark.parametrize("noise", [UniformAdditive(0.2), TruncGaussSymmetric(0.2, 0.3), BernoulliBinary()])
@pytest.mark.parametrize("y", [0.1, 0.5, 0.9])
def test_noise_has_zero_mean(noise, y):
    rng = np.random.default_rng(123)
    out = noise.apply(np.full(1_000_000, y), rng)
    se = out.std(ddof=1) / math.sqrt(out.size)
    assert abs(out.mean() - y) <= 4 * se


def test_noisy_mean_at_feature():
    d = sample_noisy(TWO, UniformAdditive(0.2), 20_000, 3)
    for c, post in enumerate(TWO.posterior):
        ys = d.y[d.x == c]
        assert abs(ys.mean() - post) <= 3 * 0.2 / math.sqrt(ys.size)


def test_noise_validation():
    for bad in (0.0, -0.1, float("inf")):
        with pytest.raises(DomainError):
            UniformAdditive(bad)
    with pytest.raises(DomainError):
        TruncGaussSymmetric(0.1, 0.0)


def test_smooth_model_quadrature_truth():
    m = Smooth1DModel()
    t = m.truth()
    f = lambda x: 0.5 + 0.4 * math.sin(2 * math.pi * x)  # noqa: E731
    # sin >= 0 on [0, 1/2]: false positive mass there, false negative mass on [1/2, 1]
    fp = integrate.quad(lambda x: 1 - f(x), 0, 0.5)[0]
    fn = integrate.quad(f, 0.5, 1)[0]
    assert t.method == "quadrature" and t.tolerance == 1e-9
    assert t.p0_mass == pytest.approx(0.5, abs=1e-9)
    assert t.p0_threshold == pytest.approx(0.5, abs=1e-9)
    assert t.rho_fp == pytest.approx(fp / 0.5, abs=1e-9)
    assert t.rho_fn == pytest.approx(fn / 0.5, abs=1e-9)
    assert t.rho_fp == pytest.approx(0.5 - 0.8 / math.pi, abs=1e-9)


def test_holder_certificate():
    m = Smooth1DModel()
    assert m.holder_c == pytest.approx(0.8 * math.pi)
    assert m.holder_certificate(10_000) <= m.holder_c
    with pytest.raises(InvalidModelError, match="Holder"):
        SmoothModel("sine", holder_c=1.0)
    with pytest.raises(InvalidModelError):
        SmoothModel(lambda x: x[:, 0])


def test_smooth_model_in_two_dimensions():
    m = SmoothModel(dim=2)
    t = m._monte_carlo_truth(200_000, seed=1)
    assert t.method == "monte-carlo"
    assert t.tolerance > 0
    # the coordinate mean of two uniforms is symmetric about 1/2, so the class prior is 1/2
    assert t.p0_mass == pytest.approx(0.5, abs=5e-3)


def test_dict_specs():
    assert model_from_dict(TWO.to_dict()).to_dict() == TWO.to_dict()
    assert noise_from_dict({"kind": "uniform", "sigma": 0.2}) == UniformAdditive(0.2)
    assert noise_from_dict(None) is None
    with pytest.raises(ConfigError, match="model.p_x"):
        model_from_dict({"kind": "finite", "posterior": [0.1]})
    with pytest.raises(ConfigError, match="kind"):
        model_from_dict({"kind": "spline"})
    with pytest.raises(ConfigError, match="sigma"):
        noise_from_dict({"kind": "uniform", "sigma": -1})
