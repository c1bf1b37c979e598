"""Run the detector on each DREAMS spindle excerpt found in ``$DREAMS_DIR``.

The directory is expected to hold ``excerpt<k>.edf`` files (and optionally
``Visual_scoring1_excerpt<k>.txt``). The dataset is not bundled; the script
exits quietly when the variable is unset or the directory is empty.

    DREAMS_DIR=/data/dreams python3 scripts/run_dreams.py
"""

import argparse
import os
import sys
import time
from pathlib import Path

from corrdecomp.decomposition import sweep_w
from corrdecomp.ingest import read_annotations, read_edf
from corrdecomp.pipeline import prepare

AUTO_GRID = range(50, 301, 5)


def excerpts(root: Path):
    return sorted(root.glob("excerpt*.edf"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--channel", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    root = os.environ.get("DREAMS_DIR")
    if not root or not excerpts(Path(root)):
        print("DREAMS_DIR unset or holds no excerpt*.edf; nothing to do")
        return 0
    for path in excerpts(Path(root)):
        t0 = time.perf_counter()
        traces, _ = read_edf(path)
        trace = prepare(traces[args.channel])
        sw = sweep_w(trace, AUTO_GRID, workers=args.workers)
        elapsed = time.perf_counter() - t0
        scoring = path.with_name(f"Visual_scoring1_{path.stem}.txt")
        n_scored = len(read_annotations(scoring)) if scoring.exists() else None
        best = next(p for p in sw.points if p.w == sw.w_star)
        print(f"{path.name}: w*={sw.w_star} gamma={best.gamma:.4g} events={best.n_events} "
              f"scored={n_scored} ({elapsed:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
