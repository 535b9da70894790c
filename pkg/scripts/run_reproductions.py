"""Run every canned reproduction case and summarize the verdicts.

Thin driver over fwlab.runner.reproduce that adds per-case wall times and a
final table. Exits nonzero if any check fails, so it doubles as a smoke
gate in automation.
"""
import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fwlab import CASE_NAMES, reproduce  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fwlab-out/reproductions",
                        help="artifact directory (default: %(default)s)")
    parser.add_argument("--case", default="all",
                        choices=tuple(CASE_NAMES) + ("all",),
                        help="run a single case instead of the full suite")
    args = parser.parse_args()

    names = list(CASE_NAMES) if args.case == "all" else [args.case]
    rows = []
    all_ok = True
    for name in names:
        t0 = time.perf_counter()
        reports = reproduce(name, args.out)
        elapsed = time.perf_counter() - t0
        ok = all(r.passed for r in reports)
        all_ok = all_ok and ok
        n_checks = sum(len(r.check_results) for r in reports)
        rows.append((name, ok, n_checks, elapsed))
        for report in reports:
            for res in report.check_results:
                tag = "PASS" if res.passed else "FAIL"
                print(f"  [{tag}] {report.name} :: {res.kind}: {res.measured}")

    width = max(len(name) for name, *_ in rows)
    print()
    print(f"{'case':<{width}}  verdict  checks  seconds")
    for name, ok, n_checks, elapsed in rows:
        print(f"{name:<{width}}  {'pass' if ok else 'FAIL':<7}  "
              f"{n_checks:>6}  {elapsed:7.2f}")
    print(f"\nartifacts under {args.out}/")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
