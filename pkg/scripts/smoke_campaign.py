"""Desk-scale campaign: four entropy sets, replayed quantum bytes, full re-verification.

    python scripts/smoke_campaign.py --out runs/smoke --instances 2 --attempts 2000
"""

import argparse
import os
import time
from pathlib import Path

from qcompose.experiment import ExperimentPlan, QuantumSettings, analyze, render_text, run_experiment
from qcompose.verification import verify_files


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/smoke")
    ap.add_argument("--instances", type=int, default=2)
    ap.add_argument("--attempts", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240101)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    plan = ExperimentPlan(
        instances_per_set=args.instances,
        budget_attempts=args.attempts,
        base_seed=args.seed,
        quantum=QuantumSettings(mode="offline"),
        workers=args.workers,
    )
    t0 = time.perf_counter()
    report, paths = run_experiment(plan, args.out)
    t1 = time.perf_counter()
    print(render_text(report))
    print(f"campaign: {len(paths)} instances in {t1 - t0:.1f} s")

    summary = verify_files(paths)
    print(f"re-verified {summary.passed}/{summary.checked} records in {time.perf_counter() - t1:.1f} s")
    for fen, problems in summary.failures[:10]:
        print(f"  FAIL {fen}: {'; '.join(problems)}")

    same = analyze(Path(args.out) / "records").to_dict() == report.to_dict()
    print(f"analyze over persisted records reproduces the live report: {same}")
    return 0 if summary.ok and same else 1


if __name__ == "__main__":
    raise SystemExit(main())
