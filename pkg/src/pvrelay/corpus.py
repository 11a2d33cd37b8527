"""On-disk corpus: ``manifest.csv`` plus one ``t,ia,ib,ic`` CSV per record.

Samples are written with ``repr`` so a write/read cycle reproduces every
float64 bit-exactly.  Readers match waveform columns by header name, accept
``time`` as an alias for ``t`` and report malformed input with the file and
line number.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Sequence

import numpy as np

from .synth import EventLabel, SynthError, WaveformRecord

MANIFEST_COLUMNS = ("file", "kind", "fault_type", "location", "resistance_ohm",
                    "inception_angle_deg", "priority", "seed")
OPTIONAL_COLUMNS = ("meta",)
WAVE_COLUMNS = ("t", "ia", "ib", "ic")
_ALIASES = {"time": "t"}


class CorpusFormatError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _encode_meta(meta: dict) -> str:
    for k, v in meta.items():
        if any(ch in str(k) + str(v) for ch in ";="):
            raise ValueError(f"meta entry {k}={v} contains a reserved character")
    return ";".join(f"{k}={v}" for k, v in sorted(meta.items()))


def _decode_meta(text: str) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(";"):
        k, sep, v = item.partition("=")
        if not sep:
            raise ValueError(f"meta item {item!r} lacks '='")
        out[k] = v
    return out


def record_filename(index: int) -> str:
    return f"rec_{index:06d}.csv"


def write_waveform(path, record: WaveformRecord) -> None:
    n = record.n_samples
    fs = record.sample_rate_hz
    with open(path, "w", newline="") as fh:
        fh.write("t,ia,ib,ic\n")
        cols = (record.phase_a.tolist(), record.phase_b.tolist(), record.phase_c.tolist())
        for i in range(n):
            fh.write(f"{i / fs!r},{cols[0][i]!r},{cols[1][i]!r},{cols[2][i]!r}\n")


def write_corpus(corpus: Sequence[WaveformRecord], path) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS + OPTIONAL_COLUMNS)
        for i, rec in enumerate(corpus):
            name = record_filename(i)
            lab = rec.label
            meta = dict(rec.meta)
            meta["sample_rate_hz"] = repr(float(rec.sample_rate_hz))
            meta["base_freq_hz"] = repr(float(rec.base_freq_hz))
            w.writerow([name, lab.kind, lab.fault_type, lab.location, repr(float(lab.resistance_ohm)),
                        repr(float(lab.inception_angle_deg)), lab.priority, rec.seed, _encode_meta(meta)])
            write_waveform(root / name, rec)
    return root


def read_waveform(path) -> np.ndarray:
    """``(4, n)`` array of t, ia, ib, ic in that order."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(path, 1, "empty waveform file") from None
        names = [_ALIASES.get(h.strip(), h.strip()) for h in header]
        if sorted(names) != sorted(WAVE_COLUMNS) or len(set(names)) != 4:
            raise CorpusFormatError(path, 1, f"header must name t, ia, ib, ic; got {header}")
        pos = [names.index(c) for c in WAVE_COLUMNS]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise CorpusFormatError(path, line_no, f"expected 4 columns, got {len(row)}")
            try:
                rows.append([float(row[p]) for p in pos])
            except ValueError as exc:
                raise CorpusFormatError(path, line_no, str(exc)) from None
    if not rows:
        raise CorpusFormatError(path, 2, "no samples")
    return np.array(rows).T


def infer_sample_rate(wave: np.ndarray, path="<waveform>") -> float:
    """Sample rate from the time column, rounded to 1e-6 Hz."""
    n = wave.shape[1]
    if n < 2:
        raise CorpusFormatError(path, 3, "cannot infer the sample rate from one sample")
    span = float(wave[0, -1] - wave[0, 0])
    if not span > 0:
        raise CorpusFormatError(path, 2, "time column does not increase")
    return round((n - 1) / span, 6)


def read_corpus(path, base_freq_hz: float = 60.0) -> list[WaveformRecord]:
    root = Path(path)
    manifest = root / "manifest.csv"
    if not manifest.exists():
        raise CorpusFormatError(manifest, 0, "manifest.csv not found")
    records = []
    with open(manifest, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CorpusFormatError(manifest, 1, "empty manifest") from None
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        unknown = [c for c in header if c not in MANIFEST_COLUMNS + OPTIONAL_COLUMNS]
        if missing or unknown:
            raise CorpusFormatError(manifest, 1, f"bad manifest header (missing {missing}, unknown {unknown})")
        col = {c: header.index(c) for c in header}
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CorpusFormatError(manifest, line_no, f"expected {len(header)} columns, got {len(row)}")
            get = lambda c: row[col[c]]  # noqa: E731
            try:
                label = EventLabel(get("kind"), get("fault_type"), get("location"),
                                   float(get("resistance_ohm")), float(get("inception_angle_deg")),
                                   get("priority"))
                seed = int(get("seed"))
                meta = _decode_meta(row[col["meta"]]) if "meta" in col else {}
            except (SynthError, ValueError) as exc:
                raise CorpusFormatError(manifest, line_no, str(exc)) from None
            wave = read_waveform(root / get("file"))
            fs = meta.get("sample_rate_hz")
            if fs is None:
                fs = infer_sample_rate(wave, root / get("file"))
            f0 = float(meta.get("base_freq_hz", base_freq_hz))
            try:
                rec = WaveformRecord(wave[1], wave[2], wave[3], label, seed, float(fs), f0, meta)
            except SynthError as exc:
                raise CorpusFormatError(manifest, line_no, str(exc)) from None
            records.append(rec)
    return records


def corpus_exists(path) -> bool:
    return os.path.exists(os.path.join(path, "manifest.csv"))
