"""Command-line entry point: ``corrdecomp {synth,detect,sweep,compare,eval}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, evaluation, ingest
from .correntropy import correntropy_matrix, kernel_config, similarity_vector, windowize
from .decomposition import NoEventsError, detect, sweep_w
from .pipeline import PROCESSING_RATE_HZ, correntropy_threshold, prepare
from .signals import SynthConfig, Trace, synth_trace

log = logging.getLogger("corrdecomp")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BAD_INPUT = 2
EXIT_NO_EVENTS = 3

AUTO_W_GRID = tuple(range(50, 301, 5))


class BadInput(Exception):
    """Unreadable or invalid input; maps to exit code 2."""


@dataclass
class RunConfig:
    input: str | None = None
    rate_hz: float = PROCESSING_RATE_HZ
    band: tuple[float, float] = (11.0, 16.0)
    w: int | str = 150
    m: int = 150
    shrink_factor: float = 1.5
    r: int = 99
    seed: int = 0
    workers: int = 1
    out: str | None = None
    scorer_cols: tuple[int, int] = (0, 1)
    channel: int = 0
    synth: SynthConfig = field(default_factory=SynthConfig)

    @property
    def auto_w(self) -> bool:
        return self.w == "auto"

    def record(self) -> dict:
        """Flags that shaped the run, for the result document."""
        d = asdict(self)
        d.pop("synth")
        d["band"] = list(self.band)
        d["scorer_cols"] = list(self.scorer_cols)
        return d


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--band expects LOW,HIGH, got {text!r}") from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError(f"--band needs 0 < LOW < HIGH, got {text!r}")
    return lo, hi


def _w(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        w = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--w expects an integer or 'auto', got {text!r}") from None
    if w < 2:
        raise argparse.ArgumentTypeError("--w must be >= 2")
    return w


def _cols(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--scorer-cols expects onset,dur indices, got {text!r}") from None
    return a, b


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="EDF or one-column CSV trace (or result JSON for eval)")
    common.add_argument("--rate", type=float, default=PROCESSING_RATE_HZ,
                        help="sampling rate of a CSV input in Hz (EDF files carry their own)")
    common.add_argument("--channel", type=int, default=0, help="EDF signal index")
    common.add_argument("--band", type=_band, default=(11.0, 16.0), metavar="LOW,HIGH")
    common.add_argument("--w", type=_w, default=None, metavar="N|auto")
    common.add_argument("--m", type=_positive_int, default=150, help="snippet length in samples")
    common.add_argument("--shrink", type=float, default=1.5, help="kernel bandwidth divisor")
    common.add_argument("--r", type=int, default=99, help="largest percentile searched")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=_positive_int, default=1)
    common.add_argument("--out", help="output path")
    common.add_argument("--scorer-cols", type=_cols, default=(0, 1), metavar="ONSET,DUR")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="corrdecomp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic trace and its truth file")
    s.add_argument("--duration", type=float, default=600.0, help="seconds")
    s.add_argument("--n-events", type=int, default=20)
    s.add_argument("--amplitude", type=float, default=4.0, help="event amplitude / background RMS")
    s.add_argument("--event-len", type=_positive_int, default=150, help="samples")
    s.add_argument("--event-freq", type=float, default=13.0, help="Hz")

    sub.add_parser("detect", parents=[common], help="decompose a trace and report its threshold")

    sw = sub.add_parser("sweep", parents=[common], help="threshold as a function of window length")
    sw.add_argument("--grid", default=None, help="comma-separated window lengths (default 50..300 step 5)")

    c = sub.add_parser("compare", parents=[common], help="correntropy vs embedding vs RPCA")
    c.add_argument("--repeat", type=int, default=5, help="timed repetitions per method")
    c.add_argument("--grid", default=None, help="window lengths for the threshold-vs-W curve")

    e = sub.add_parser("eval", parents=[common], help="score a result document against a truth file")
    e.add_argument("--truth", required=False, help="annotation file (onset duration per line)")
    e.add_argument("--tol", type=float, default=0.5, help="onset tolerance in seconds")
    e.add_argument("--scorer-id", type=int, default=0)
    return p


def config_from_args(args) -> RunConfig:
    w = 150 if args.w is None else args.w
    cfg = RunConfig(
        input=args.input, rate_hz=args.rate, band=tuple(args.band), w=w, m=args.m,
        shrink_factor=args.shrink, r=args.r, seed=args.seed, workers=args.workers,
        out=args.out, scorer_cols=tuple(args.scorer_cols), channel=args.channel,
    )
    if args.command == "synth":
        cfg.synth = SynthConfig(
            duration_s=args.duration, rate_hz=args.rate, n_events=args.n_events,
            event_freq_hz=args.event_freq, event_dur_samples=args.event_len,
            event_amplitude=args.amplitude, seed=args.seed,
        )
    if not cfg.shrink_factor > 0:
        raise BadInput("--shrink must be > 0")
    if not 1 <= cfg.r <= 99:
        raise BadInput("--r must lie in 1..99")
    return cfg


def load_trace(cfg: RunConfig) -> Trace:
    if not cfg.input:
        raise BadInput("--input is required")
    path = Path(cfg.input)
    if not path.is_file():
        raise BadInput(f"input file not found: {path}")
    try:
        if path.suffix.lower() == ".edf":
            traces, _ = ingest.read_edf(path)
            if not 0 <= cfg.channel < len(traces):
                raise BadInput(f"--channel {cfg.channel} out of range ({len(traces)} signals)")
            return traces[cfg.channel]
        return ingest.read_csv_trace(path, cfg.rate_hz)
    except BadInput:
        raise
    except (ValueError, OSError) as exc:
        raise BadInput(f"ingest_io: {exc}") from exc


def preprocess(trace: Trace, band: tuple[float, float]) -> Trace:
    try:
        return prepare(trace, band)
    except ValueError as exc:
        raise BadInput(f"signal_synth: {exc}") from exc


def _grid(text: str | None) -> tuple[int, ...]:
    if text is None:
        return AUTO_W_GRID
    try:
        grid = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise BadInput(f"--grid expects comma-separated integers, got {text!r}") from None
    if not grid or min(grid) < 2:
        raise BadInput("--grid needs window lengths >= 2")
    return grid


def _out(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.out or default)


def cmd_synth(cfg: RunConfig) -> int:
    try:
        trace, truth = synth_trace(cfg.synth)
    except ValueError as exc:
        raise BadInput(f"signal_synth: {exc}") from exc
    out = _out(cfg, "synth")
    out.mkdir(parents=True, exist_ok=True)
    ingest.write_csv_trace(out / "trace.csv", trace)
    ingest.write_annotations(out / "truth.txt", truth.intervals_s(trace.rate_hz))
    print(f"wrote {out / 'trace.csv'} ({len(trace)} samples) and {len(truth)} events to {out / 'truth.txt'}")
    return EXIT_OK


def cmd_detect(cfg: RunConfig) -> int:
    trace = preprocess(load_trace(cfg), cfg.band)
    sweep = None
    w = cfg.w
    if cfg.auto_w:
        try:
            sweep = sweep_w(trace, AUTO_W_GRID, m=cfg.m, r=cfg.r,
                            shrink_factor=cfg.shrink_factor, workers=cfg.workers)
        except NoEventsError as exc:
            return _no_events(cfg, f"decomposition: {exc}")
        w = sweep.w_star
    try:
        res = detect(trace, w, m=cfg.m, r=cfg.r, shrink_factor=cfg.shrink_factor, workers=cfg.workers)
    except NoEventsError as exc:
        return _no_events(cfg, f"decomposition: {exc}", getattr(exc, "result", None))
    except ValueError as exc:
        raise BadInput(f"decomposition: {exc}") from exc
    doc = ingest.ResultDocument.from_run(res, sweep, config=_doc_config(cfg, w))
    path = _out(cfg, "result.json")
    ingest.write_result(path, doc)
    print(f"w={w} rho*={res.rho_star} gamma={res.gamma:.6g} events={len(res.snippets)} -> {path}")
    return EXIT_OK


def _doc_config(cfg: RunConfig, w) -> dict:
    d = cfg.record()
    d["w_selected"] = int(w)
    d["processing_rate_hz"] = PROCESSING_RATE_HZ
    return d


def _no_events(cfg: RunConfig, message: str, result=None) -> int:
    print(f"no events: {message}", file=sys.stderr)
    doc = ingest.ResultDocument.from_run(result, config=cfg.record(), status="no_events")
    doc.gamma = None
    doc.snippets = []
    ingest.write_result(_out(cfg, "result.json"), doc)
    return EXIT_NO_EVENTS


def cmd_sweep(cfg: RunConfig, grid_text: str | None = None) -> int:
    trace = preprocess(load_trace(cfg), cfg.band)
    grid = _grid(grid_text)
    try:
        sweep = sweep_w(trace, grid, m=cfg.m, r=cfg.r, shrink_factor=cfg.shrink_factor,
                        workers=cfg.workers)
    except NoEventsError as exc:
        return _no_events(cfg, f"decomposition: {exc}")
    doc = ingest.ResultDocument.from_run(sweep=sweep, config=cfg.record())
    path = _out(cfg, "sweep.json")
    ingest.write_result(path, doc)
    for w, g in sweep.curve:
        print(f"{w}\t{'' if g is None else f'{g:.6g}'}")
    print(f"w*={sweep.w_star} -> {path}")
    return EXIT_OK


def _rel(a, b):
    if a is None or b is None or b == 0:
        return None
    return abs(a - b) / abs(b)


def cmd_compare(cfg: RunConfig, repeat: int = 5, grid_text: str | None = None) -> int:
    trace = preprocess(load_trace(cfg), cfg.band)
    w = cfg.w
    sweep = None
    if cfg.auto_w:
        try:
            sweep = sweep_w(trace, _grid(grid_text), m=cfg.m, r=cfg.r,
                            shrink_factor=cfg.shrink_factor, workers=cfg.workers)
        except NoEventsError as exc:
            return _no_events(cfg, f"decomposition: {exc}")
        w = sweep.w_star
    methods = {
        "correntropy": lambda: correntropy_threshold(trace, w, cfg.m, cfg.r, cfg.shrink_factor, cfg.workers),
        "embedding": lambda: baselines.embedding_transform(trace, w, cfg.r),
        "rpca": lambda: baselines.rpca_threshold(trace, w, cfg.m),
    }
    rows = []
    corr_res = None
    for name, fn in methods.items():
        row = {"method": name, "gamma": None, "wall_ms": None, "converged": None,
               "n_events": None, "status": "ok"}
        try:
            out = fn()
            if name == "correntropy":
                corr_res = out
                row["gamma"], row["n_events"] = out.gamma, len(out.snippets)
            elif name == "embedding":
                row["gamma"], row["n_events"] = out.gamma, int(out.s_indices.size)
            else:
                row["gamma"], row["n_events"] = out[0], len(out[2])
                row["converged"] = out[1].converged
            rec = evaluation.benchmark(name, fn, repetitions=repeat, workers=cfg.workers,
                                       trace_len=len(trace))
            row["wall_ms"] = rec.wall_ms
        except Exception as exc:  # recorded per method; the others still run
            row["status"] = f"{type(exc).__name__}: {exc}"
            log.warning("%s failed: %s", name, exc)
        rows.append(row)
    g = {r["method"]: r["gamma"] for r in rows}
    t = {r["method"]: r["wall_ms"] for r in rows}
    pairs = {
        "rel_corr_vs_rpca": _rel(g["correntropy"], g["rpca"]),
        "rel_corr_vs_embedding": _rel(g["correntropy"], g["embedding"]),
        "rel_embedding_vs_rpca": _rel(g["embedding"], g["rpca"]),
        "time_ratio_rpca_over_corr": (t["rpca"] / t["correntropy"]
                                      if t["rpca"] and t["correntropy"] else None),
    }
    out = _out(cfg, "compare")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "methods.csv", "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(rows[0]))
        wr.writeheader()
        wr.writerows(rows)
    with open(out / "pairwise.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["quantity", "value"])
        wr.writerows(pairs.items())
    # sorted similarity vector, for a background-high / events-low view
    kc = kernel_config(trace, cfg.shrink_factor)
    z = similarity_vector(correntropy_matrix(windowize(trace, w), kc.sigma, cfg.workers)).z
    order = np.argsort(z, kind="stable")
    with open(out / "sorted_z.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["rank", "column", "z"])
        wr.writerows((k, int(j), repr(float(z[j]))) for k, j in enumerate(order))
    if sweep is None:
        try:
            sweep = sweep_w(trace, _grid(grid_text), m=cfg.m, r=cfg.r,
                            shrink_factor=cfg.shrink_factor, workers=cfg.workers)
        except NoEventsError:
            sweep = None
    with open(out / "gamma_vs_w.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["w", "gamma"])
        if sweep is not None:
            wr.writerows((pw, "" if pg is None else repr(pg)) for pw, pg in sweep.curve)
    doc = ingest.ResultDocument.from_run(corr_res, sweep, metrics=pairs, config=_doc_config(cfg, w))
    doc.benchmarks = rows
    ingest.write_result(out / "compare.json", doc)
    for r in rows:
        gtxt = "-" if r["gamma"] is None else f"{r['gamma']:.6g}"
        ttxt = "-" if r["wall_ms"] is None else f"{r['wall_ms']:.1f} ms"
        print(f"{r['method']:12s} gamma={gtxt:>10s} time={ttxt:>12s} {r['status']}")
    for k, v in pairs.items():
        print(f"{k} = {'-' if v is None else f'{v:.4g}'}")
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_ERROR


def cmd_eval(cfg: RunConfig, truth: str | None, tol_s: float, scorer_id: int = 0) -> int:
    if not cfg.input or not Path(cfg.input).is_file():
        raise BadInput("eval needs --input pointing at a result document")
    if not truth or not Path(truth).is_file():
        raise BadInput("eval needs --truth pointing at an annotation file")
    if tol_s < 0:
        raise BadInput("--tol must be >= 0")
    try:
        doc = ingest.read_result(cfg.input)
        events = ingest.read_annotations(truth, scorer_id, cols=cfg.scorer_cols)
    except (ValueError, OSError) as exc:
        raise BadInput(f"ingest_io: {exc}") from exc
    rate = float(doc.config.get("processing_rate_hz", PROCESSING_RATE_HZ))
    detected = [(int(s[0]), int(s[1])) for s in doc.snippets]
    counts = evaluation.match_events(detected, events, tol_s=tol_s, rate_hz=rate)
    try:
        p, r, f1 = evaluation.prf(counts)
    except ValueError as exc:
        raise BadInput(f"evaluation: {exc}") from exc
    doc.metrics.update({
        "true_pos": counts.true_pos, "false_pos": counts.false_pos,
        "false_neg": counts.false_neg, "precision": p, "recall": r, "f1": f1, "tol_s": tol_s,
    })
    ingest.write_result(cfg.out or cfg.input, doc, timestamp=False)
    print(f"TP={counts.true_pos} FP={counts.false_pos} FN={counts.false_neg} "
          f"precision={p:.4f} recall={r:.4f} f1={f1:.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "detect":
            return cmd_detect(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.grid)
        if args.command == "compare":
            return cmd_compare(cfg, args.repeat, args.grid)
        return cmd_eval(cfg, args.truth, args.tol, args.scorer_id)
    except BadInput as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
