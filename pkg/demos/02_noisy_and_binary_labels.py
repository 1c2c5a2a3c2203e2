"""Noisy and binary labels: denoise first, then estimate.

With noisy labels y~ = y + z (zero-mean z) the posterior is unknown. The
dataset is split in two; each label of the first part is replaced by the
mean label of samples sharing its feature value in the second part (plus
itself), and the prior-free estimator runs on those denoised labels.
"""

from bayesfpr import BernoulliBinary, FiniteModel, PartitionSpec, UniformAdditive
from bayesfpr import fpr_denoised, partition, sample_noisy

model = FiniteModel([0.1] * 10, [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95])
truth = model.truth().rho_fp
print(f"true FPR {truth:.5f}")

noise = UniformAdditive(0.2)
for n in (100, 1_000, 10_000, 100_000):
    data = sample_noisy(model, noise, n, seed=n)
    row = [fpr_denoised(data, PartitionSpec(r, seed=1)).value for r in (0.25, 0.5, 0.75)]
    print(f"n={n:>7}  " + "  ".join(f"r={r}: {v:.5f}" for r, v in zip((0.25, 0.5, 0.75), row)))

data = sample_noisy(model, noise, 20, seed=3)
d1, d2 = partition(data, PartitionSpec(0.5, seed=0))
print(f"partition sizes {d1.n} / {d2.n}; labels may leave [0, 1]: min {data.y.min():.3f}, max {data.y.max():.3f}")

# Hard 0/1 labels are Bernoulli noise around the posterior. The estimator
# still works, but a denoised label can now equal 0.5 exactly, so the result
# carries a flag saying the continuity assumption does not hold.
binary = sample_noisy(model, BernoulliBinary(), 100_000, seed=5)
res = fpr_denoised(binary)
print(f"binary labels, n=100000: {res.value:.5f} (continuity: {res.metadata['label_continuity']})")
