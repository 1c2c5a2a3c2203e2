"""Monte Carlo checks of the known-prior estimator's guarantees.

The harness draws many datasets per sample size and compares the
replicate estimates with the exact error rate: bias, Hoeffding-radius
coverage, the variance bound 1/(16 n p0^2), and closeness to normality.
The same experiment can be run from a JSON file with
``bayesfpr experiment demos/configs/known_prior.json --out report.json``.
"""

import json
from pathlib import Path

from bayesfpr import ExperimentConfig, run_replicates

cfg = ExperimentConfig.from_dict(json.loads((Path(__file__).parent / "configs" / "known_prior.json").read_text()))
report = run_replicates(cfg, workers=4)

for row in report.results:
    print(f"n={row['n']:>6}  mean {row['mean']:.5f}  oracle {row['oracle']:.5f}  "
          f"var {row['variance']:.2e} (bound {row['variance_bound']:.2e})  KS {row['ks_normal']:.4f}")
print()
print("\n".join(report.summary_lines()))
print("all checks passed" if report.passed else f"{len(report.failures)} checks failed")
