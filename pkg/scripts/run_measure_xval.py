"""Cross-check the atom-series and propagation constructions of the limit
measure, then the decay law along the flow.

    python3 scripts/run_measure_xval.py --nu 2
"""

import argparse

from eisenlab.experiments import ExperimentConfig, run_measure_xval, write_report
from eisenlab.psmeasure import PropagationConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=float, default=2.0)
    ap.add_argument("--t", type=float, default=10.0)
    ap.add_argument("--r-grid", type=int, default=1024)
    ap.add_argument("--theta-grid", type=int, default=2048)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    prop = PropagationConfig(t=args.t, r_grid=args.r_grid, theta_grid=args.theta_grid)
    cfg = ExperimentConfig(experiment="measure", nu=args.nu, prop=prop, out=args.out)
    rep = run_measure_xval(cfg)
    csv_path, _ = write_report(rep, args.out, "measure_xval")
    for r in rep.rows:
        print(f"{r.kind:11s} {r.params:28s} lhs={r.lhs:.8g} rhs={r.rhs:.8g} rel_err={r.rel_err:.2e}")
    print(("PASS" if rep.passed else "FAIL"), f"{rep.wall_time:.1f} s ->", csv_path)


if __name__ == "__main__":
    main()
