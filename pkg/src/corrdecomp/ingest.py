"""Readers and writers: EDF (subset), annotation lists, CSV traces, result documents.

EDF support covers plain contiguous EDF: a 256-byte fixed header, 256
bytes per signal, then ``n_records`` data records of little-endian int16
samples. EDF+ annotation channels and discontinuous records are not
handled.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .signals import Trace

__all__ = [
    "EdfError",
    "EdfSignalHeader",
    "EdfHeader",
    "EventAnnotation",
    "ResultDocument",
    "read_edf",
    "write_edf",
    "digital_to_physical",
    "physical_to_digital",
    "read_annotations",
    "write_annotations",
    "read_csv_trace",
    "write_csv_trace",
    "write_result",
    "read_result",
]


class EdfError(ValueError):
    """Malformed or truncated EDF file."""


# (name, width) of the fixed header, then of each per-signal block
_FIXED = [
    ("version", 8), ("patient", 80), ("recording", 80), ("start_date", 8),
    ("start_time", 8), ("header_bytes", 8), ("reserved", 44), ("n_records", 8),
    ("record_dur_s", 8), ("n_signals", 4),
]
_PER_SIGNAL = [
    ("label", 16), ("transducer", 80), ("dimension", 8), ("phys_min", 8),
    ("phys_max", 8), ("dig_min", 8), ("dig_max", 8), ("prefilter", 80),
    ("samples_per_record", 8), ("reserved", 32),
]


@dataclass
class EdfSignalHeader:
    label: str
    transducer: str = ""
    dimension: str = "uV"
    phys_min: float = -1000.0
    phys_max: float = 1000.0
    dig_min: int = -32768
    dig_max: int = 32767
    samples_per_record: int = 200
    prefilter: str = ""

    @property
    def gain(self) -> float:
        return (self.phys_max - self.phys_min) / (self.dig_max - self.dig_min)


@dataclass
class EdfHeader:
    version: str = "0"
    patient: str = ""
    recording: str = ""
    start_date: str = "01.01.00"
    start_time: str = "00.00.00"
    header_bytes: int = 0
    n_records: int = 0
    record_dur_s: float = 1.0
    n_signals: int = 0
    signals: list = field(default_factory=list)

    def rate_hz(self, k: int) -> float:
        return self.signals[k].samples_per_record / self.record_dur_s


def digital_to_physical(dig, sig: EdfSignalHeader):
    dig = np.asarray(dig, dtype=float)
    return sig.phys_min + (dig - sig.dig_min) * sig.gain


def physical_to_digital(phys, sig: EdfSignalHeader) -> np.ndarray:
    phys = np.asarray(phys, dtype=float)
    dig = np.rint(sig.dig_min + (phys - sig.phys_min) / sig.gain)
    return np.clip(dig, sig.dig_min, sig.dig_max).astype(np.int16)


def _field(raw: bytes, offset: int, width: int, name: str) -> str:
    chunk = raw[offset:offset + width]
    if len(chunk) < width:
        raise EdfError(f"header truncated reading '{name}' at byte {offset}")
    try:
        return chunk.decode("ascii").strip()
    except UnicodeDecodeError as exc:
        raise EdfError(f"non-ASCII bytes in '{name}' at byte {offset}") from exc


def _number(text: str, name: str, offset: int, kind=float):
    try:
        return kind(float(text)) if kind is int else kind(text)
    except ValueError:
        raise EdfError(f"field '{name}' at byte {offset} is not a number: {text!r}") from None


def _parse_header(raw: bytes) -> EdfHeader:
    if len(raw) < 256:
        raise EdfError(f"file has {len(raw)} bytes; the fixed EDF header needs 256")
    vals, off = {}, 0
    for name, width in _FIXED:
        vals[name] = (_field(raw, off, width, name), off)
        off += width
    n_signals = _number(vals["n_signals"][0], "n_signals", vals["n_signals"][1], int)
    if n_signals < 1:
        raise EdfError(f"n_signals must be >= 1, got {n_signals}")
    hdr = EdfHeader(
        version=vals["version"][0],
        patient=vals["patient"][0],
        recording=vals["recording"][0],
        start_date=vals["start_date"][0],
        start_time=vals["start_time"][0],
        header_bytes=_number(vals["header_bytes"][0], "header_bytes", vals["header_bytes"][1], int),
        n_records=_number(vals["n_records"][0], "n_records", vals["n_records"][1], int),
        record_dur_s=_number(vals["record_dur_s"][0], "record_dur_s", vals["record_dur_s"][1]),
        n_signals=n_signals,
    )
    expected = 256 * (1 + n_signals)
    if hdr.header_bytes != expected:
        raise EdfError(f"header_bytes at byte 184 is {hdr.header_bytes}, expected {expected}")
    if len(raw) < expected:
        raise EdfError(f"signal headers truncated: file has {len(raw)} bytes, header needs {expected}")
    cols = {}
    off = 256
    for name, width in _PER_SIGNAL:
        cols[name] = []
        for k in range(n_signals):
            cols[name].append((_field(raw, off, width, f"{name}[{k}]"), off))
            off += width
    for k in range(n_signals):
        def num(name, kind=float):
            text, pos = cols[name][k]
            return _number(text, f"{name}[{k}]", pos, kind)

        sig = EdfSignalHeader(
            label=cols["label"][k][0],
            transducer=cols["transducer"][k][0],
            dimension=cols["dimension"][k][0],
            phys_min=num("phys_min"),
            phys_max=num("phys_max"),
            dig_min=num("dig_min", int),
            dig_max=num("dig_max", int),
            samples_per_record=num("samples_per_record", int),
            prefilter=cols["prefilter"][k][0],
        )
        if sig.dig_min >= sig.dig_max:
            raise EdfError(
                f"signal {k} ({sig.label!r}): dig_min {sig.dig_min} must be < dig_max {sig.dig_max} "
                f"(byte {cols['dig_min'][k][1]})"
            )
        if sig.phys_min == sig.phys_max:
            raise EdfError(f"signal {k} ({sig.label!r}): phys_min equals phys_max "
                           f"(byte {cols['phys_min'][k][1]})")
        if sig.samples_per_record < 1:
            raise EdfError(f"signal {k}: samples_per_record must be >= 1")
        hdr.signals.append(sig)
    if not hdr.record_dur_s > 0:
        raise EdfError(f"record duration must be > 0, got {hdr.record_dur_s}")
    return hdr


def read_edf(path) -> tuple[list[Trace], EdfHeader]:
    """Parse an EDF file into one physical-unit :class:`Trace` per signal."""
    raw = Path(path).read_bytes()
    hdr = _parse_header(raw)
    spr = np.array([s.samples_per_record for s in hdr.signals])
    record_bytes = 2 * int(spr.sum())
    body = len(raw) - hdr.header_bytes
    n_rec = hdr.n_records
    if n_rec == -1:
        # unknown count is allowed by the format; infer from full records
        n_rec = body // record_bytes
    if n_rec < 1:
        raise EdfError(f"n_records must be >= 1, got {hdr.n_records}")
    if body < n_rec * record_bytes:
        missing = body // record_bytes
        raise EdfError(
            f"file truncated: data record {missing} of {n_rec} is incomplete or missing "
            f"(expected {n_rec * record_bytes} data bytes, found {body})"
        )
    if body > n_rec * record_bytes:
        raise EdfError(f"file has {body - n_rec * record_bytes} bytes beyond {n_rec} data records")
    hdr.n_records = n_rec
    data = np.frombuffer(raw, dtype="<i2", count=n_rec * record_bytes // 2, offset=hdr.header_bytes)
    data = data.reshape(n_rec, -1)
    bounds = np.concatenate(([0], np.cumsum(spr)))
    traces = []
    for k, sig in enumerate(hdr.signals):
        dig = data[:, bounds[k]:bounds[k + 1]].ravel()
        traces.append(Trace(digital_to_physical(dig, sig), hdr.rate_hz(k)))
    return traces, hdr


def _fmt(value, width: int, name: str) -> bytes:
    if isinstance(value, float):
        text = repr(value) if value != int(value) else str(int(value))
        if len(text) > width:
            text = f"{value:.{max(width - 6, 1)}g}"
    else:
        text = str(value)
    if len(text) > width:
        raise EdfError(f"value {value!r} does not fit the {width}-byte field '{name}'")
    return text.ljust(width).encode("ascii")


def write_edf(path, header: EdfHeader, digital: list) -> None:
    """Write digital int16 samples with ``header``; header byte count and record count are derived."""
    n_signals = len(header.signals)
    if len(digital) != n_signals:
        raise ValueError(f"{len(digital)} sample arrays for {n_signals} signals")
    spr = [s.samples_per_record for s in header.signals]
    n_rec = None
    for k, d in enumerate(digital):
        if len(d) % spr[k]:
            raise ValueError(f"signal {k} length {len(d)} is not a multiple of {spr[k]}")
        r = len(d) // spr[k]
        if n_rec is None:
            n_rec = r
        elif r != n_rec:
            raise ValueError("signals cover different numbers of records")
    header.n_signals = n_signals
    header.header_bytes = 256 * (1 + n_signals)
    header.n_records = n_rec
    out = bytearray()
    fixed = dict(asdict(header), reserved="")
    for name, width in _FIXED:
        out += _fmt(fixed[name], width, name)
    for name, width in _PER_SIGNAL:
        for s in header.signals:
            out += _fmt("" if name == "reserved" else getattr(s, name), width, name)
    recs = [np.asarray(d, dtype="<i2").reshape(n_rec, spr[k]) for k, d in enumerate(digital)]
    out += np.concatenate(recs, axis=1).tobytes()
    Path(path).write_bytes(bytes(out))


@dataclass(frozen=True, order=True)
class EventAnnotation:
    onset_s: float
    duration_s: float
    scorer_id: int = 0

    def __post_init__(self):
        if self.onset_s < 0 or not self.duration_s > 0:
            raise ValueError(f"invalid event: onset {self.onset_s}, duration {self.duration_s}")


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_annotations(path, scorer_id: int = 0, cols: tuple[int, int] = (0, 1),
                     recording_s: float | None = None) -> list[EventAnnotation]:
    """Whitespace-delimited ``onset duration`` lines, in seconds, sorted by onset.

    A first line that does not start with a number is taken as a header.
    """
    events = []
    lines = Path(path).read_text().splitlines()
    for lineno, line in enumerate(lines, start=1):
        toks = line.replace(",", " ").split()
        if not toks:
            continue
        if lineno == 1 and not _is_number(toks[0]):
            continue
        try:
            onset = float(toks[cols[0]])
            dur = float(toks[cols[1]])
        except (ValueError, IndexError):
            raise ValueError(f"{path}:{lineno}: cannot parse annotation line {line!r}") from None
        if onset < 0 or dur < 0:
            raise ValueError(f"{path}:{lineno}: negative onset or duration")
        if dur == 0:
            raise ValueError(f"{path}:{lineno}: zero-length event")
        if recording_s is not None and onset + dur > recording_s:
            raise ValueError(f"{path}:{lineno}: event ends after the recording ({recording_s} s)")
        events.append(EventAnnotation(onset, dur, scorer_id))
    return sorted(events)


def write_annotations(path, events) -> None:
    """``events`` as (onset_s, duration_s) pairs or EventAnnotation objects."""
    with open(path, "w") as fh:
        for ev in events:
            onset, dur = (ev.onset_s, ev.duration_s) if hasattr(ev, "onset_s") else ev
            fh.write(f"{onset!r} {dur!r}\n")


def read_csv_trace(path, rate_hz: float) -> Trace:
    """One sample per line; the first comma-separated field is used."""
    vals = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        tok = line.split(",")[0].strip()
        if not tok:
            continue
        try:
            v = float(tok)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric sample {tok!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"{path}:{lineno}: non-finite sample {tok!r}")
        vals.append(v)
    if not vals:
        raise ValueError(f"{path}: no samples")
    return Trace(np.array(vals), rate_hz)


def write_csv_trace(path, trace: Trace) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{v!r}\n" for v in trace.samples.tolist())


@dataclass
class ResultDocument:
    """Everything a detection run produces, in a form that survives JSON."""

    w_used: int | None = None
    sigma_used: float | None = None
    rho_star: int | None = None
    gamma: float | None = None
    l_indices: list = field(default_factory=list)
    s_indices: list = field(default_factory=list)
    snippets: list = field(default_factory=list)  # [start, length, norm] rows
    sweep: list = field(default_factory=list)  # [w, gamma or None] rows
    w_star: int | None = None
    metrics: dict = field(default_factory=dict)
    benchmarks: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    status: str = "ok"
    generated_at: str | None = None

    @classmethod
    def from_run(cls, result=None, sweep=None, metrics=None, config=None, status="ok"):
        doc = cls(metrics=dict(metrics or {}), config=dict(config or {}), status=status)
        if result is not None:
            doc.w_used = int(result.w_used)
            doc.sigma_used = float(result.sigma_used)
            doc.rho_star = int(result.rho_star)
            doc.gamma = None if result.gamma is None else float(result.gamma)
            doc.l_indices = [int(i) for i in result.l_indices]
            doc.s_indices = [int(i) for i in result.s_indices]
            doc.snippets = [[s.start_sample, s.length, s.norm] for s in result.snippets]
        if sweep is not None:
            doc.sweep = [[p.w, p.gamma] for p in sweep.points]
            doc.w_star = int(sweep.w_star)
        return doc

    def to_dict(self) -> dict:
        return asdict(self)

    def without_timestamp(self) -> dict:
        d = self.to_dict()
        d.pop("generated_at")
        return d


def write_result(path, doc: ResultDocument, timestamp: bool = True) -> None:
    if timestamp and doc.generated_at is None:
        from datetime import datetime, timezone

        doc.generated_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = json.dumps(doc.to_dict(), indent=1, sort_keys=True, allow_nan=False)
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text + "\n")
    os.replace(tmp, path)


def read_result(path) -> ResultDocument:
    d = json.loads(Path(path).read_text())
    known = ResultDocument.__dataclass_fields__
    unknown = set(d) - set(known)
    if unknown:
        raise ValueError(f"{path}: unknown result fields {sorted(unknown)}")
    return ResultDocument(**d)
