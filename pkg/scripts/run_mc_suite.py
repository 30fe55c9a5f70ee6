"""Standardize every built-in process, simulate it and check the fitted conditional moments.

    python3 scripts/run_mc_suite.py --paths 200000 --seed 11

Prints one row per process with the standardized parameters, the worst
|z| over all fitted coefficients and the verdict.
"""

import argparse
import time

import numpy as np

from qharness.sim import PROCESSES, Transformed, sample_ensemble, standardize
from qharness.verify import ABS_TOL, Prediction, compare_to_prediction, fit_conditional_variance

BRIDGE_TIMES = (0.25, 0.5, 0.75)
OPEN_TIMES = (1.5, 2.0, 3.0)


def worst_z(fit):
    """Largest |z|, skipping coefficients already matched to rounding (saturated fits have SE ~ 0)."""
    z = []
    for f in (fit.linear, fit.variance):
        k = list(f.kept)
        off = np.abs(f.fitted[k] - f.predicted[k]) > ABS_TOL
        z.append(f.z[k][off])
    z = np.abs(np.concatenate(z))
    z = z[np.isfinite(z)]
    return float(z.max()) if z.size else 0.0


def run(kind, paths, seed):
    d = PROCESSES[kind]()
    std = standardize(d)
    source = BRIDGE_TIMES if kind in ("dirichlet", "binomial") else OPEN_TIMES
    targets = sorted(std.transform.target_time(x) for x in source)
    y = sample_ensemble(Transformed(d, std.transform), targets, paths, seed)
    rep = compare_to_prediction(fit_conditional_variance(y, *targets), Prediction(std.params, tuple(targets)))
    return std.params.to_float(), worst_z(rep), rep.verdict


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    print(f"{'process':<14}{'eta':>9}{'theta':>9}{'sigma':>9}{'tau':>9}{'gamma':>9}{'max|z|':>9}  verdict")
    for i, kind in enumerate(sorted(PROCESSES)):
        t0 = time.perf_counter()
        p, z, verdict = run(kind, args.paths, args.seed + i)
        row = "".join(f"{x:9.4f}" for x in p.astuple())
        print(f"{kind:<14}{row}{z:9.2f}  {verdict}  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
