"""Thresholds from the correntropy model, the embedding transform and RPCA.

One row per seed with the three thresholds and the relative difference
between the correntropy and RPCA values.

    python3 scripts/threshold_comparison.py --seeds 20
"""

import argparse
import csv

from corrdecomp.baselines import embedding_transform, rpca_threshold
from corrdecomp.decomposition import NoEventsError
from corrdecomp.pipeline import correntropy_threshold, synthetic_case


def safe(fn):
    try:
        return fn()
    except NoEventsError:
        return None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--w", type=int, default=150)
    ap.add_argument("--amplitude", type=float, default=4.0)
    ap.add_argument("--out", default="thresholds.csv")
    args = ap.parse_args()

    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["seed", "gamma_corr", "gamma_embedding", "gamma_rpca", "rel_corr_rpca"])
        for seed in range(args.seeds):
            trace, _ = synthetic_case(seed, event_amplitude=args.amplitude)
            gc = safe(lambda: correntropy_threshold(trace, args.w).gamma)
            ge = safe(lambda: embedding_transform(trace, args.w).gamma)
            gr = safe(lambda: rpca_threshold(trace, args.w)[0])
            rel = abs(gc - gr) / gr if gc is not None and gr else None
            wr.writerow([seed, gc, ge, gr, rel])
            print(f"seed {seed:2d}  corr={gc}  embedding={ge}  rpca={gr}  rel={rel}")
    print(f"-> {args.out}")


if __name__ == "__main__":
    main()
