"""Soft labels: estimating the Bayes classifier's error rates directly.

When every sample carries its exact class-1 posterior y = Pr(c=1 | x), the
Bayes classifier predicts 1 exactly when y >= 0.5, and its false positive
rate can be read off the labels without training anything.
"""

import numpy as np

from bayesfpr import ClassPrior, FiniteModel, SoftDataset, exact_prior, sample_soft
from bayesfpr import fnr_prior_free, fpr_known_prior, fpr_prior_free

# Two equally likely feature values with posteriors 0.8 and 0.3.
model = FiniteModel([0.5, 0.5], [0.8, 0.3])
truth = model.truth()
print(f"true FPR {truth.rho_fp:.6f}  true FNR {truth.rho_fn:.6f}")

# The class-0 prior has two readings here: Pr(c=0) = 0.45 normalises the
# error rate, while Pr(y < 0.5) = 0.5 is what a sample can count.
priors = exact_prior(model)
print(f"Pr(c=0) = {priors.p0_mass:.3f}, Pr(y<0.5) = {priors.p0_threshold:.3f}")

for n in (100, 10_000, 1_000_000):
    data = sample_soft(model, n, seed=n)
    known = fpr_known_prior(data, ClassPrior(priors.p0_mass)).value
    free = fpr_prior_free(data).value
    print(f"n={n:>8}  known-prior {known:.5f}  prior-free {free:.5f}  FNR {fnr_prior_free(data).value:.5f}")

# The prior-free estimator counts labels below 0.5 in its denominator, so on
# this model it converges to 0.2 instead of 2/9.
print(f"prior-free limit on this model: {truth.threshold_fpr:.5f}")

# Where the two readings agree, both estimators target the true rate.
sym = FiniteModel([0.5, 0.5], [0.3, 0.7])
data = sample_soft(sym, 1_000_000, seed=0)
print(f"symmetric model: truth {sym.truth().rho_fp:.5f}, prior-free {fpr_prior_free(data).value:.5f}")

# Ties go to class 1, and values are never clipped. With no label below 0.5
# the denominator falls back to exp(-n), pushing the estimate far above 1.
tiny = fpr_prior_free(SoftDataset(np.array([0, 1, 1]), [0.5, 0.6, 0.9]))
print(f"3-sample estimate {tiny.value:.4g}, denominator clamped: {tiny.denominator_clamped}")
