"""Median wall time of the correntropy pipeline vs RPCA-IALM by trace length.

    python3 scripts/runtime_table.py --minutes 1,5,10 --repeat 5
"""

import argparse
import csv

from corrdecomp.baselines import rpca_threshold
from corrdecomp.evaluation import benchmark
from corrdecomp.pipeline import correntropy_threshold, synthetic_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--minutes", default="1,5,10")
    ap.add_argument("--w", type=int, default=150)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runtime.csv")
    args = ap.parse_args()

    rows = []
    for minutes in (float(v) for v in args.minutes.split(",")):
        trace, _ = synthetic_case(args.seed, duration_s=60 * minutes,
                                  n_events=max(1, round(2 * minutes)))
        corr = benchmark("correntropy", lambda: correntropy_threshold(trace, args.w, workers=args.workers),
                         args.repeat, args.workers, len(trace))
        rpca = benchmark("rpca", lambda: rpca_threshold(trace, args.w)[1],
                         args.repeat, args.workers, len(trace))
        ratio = rpca.wall_ms / corr.wall_ms
        rows.append(dict(minutes=minutes, samples=len(trace), corr_ms=corr.wall_ms,
                         rpca_ms=rpca.wall_ms, ratio=ratio, rpca_converged=rpca.converged,
                         workers=args.workers))
        print(f"{minutes:5.1f} min  corr {corr.wall_ms:8.1f} ms  rpca {rpca.wall_ms:9.1f} ms  ratio {ratio:6.1f}")
    with open(args.out, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(rows[0]))
        wr.writeheader()
        wr.writerows(rows)
    print(f"-> {args.out}")


if __name__ == "__main__":
    main()
