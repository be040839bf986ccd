"""CSV and key/value file formats.

Column layouts are fixed:

    histogram       delta_ns,counts          (delta_ns = lower bin edge)
    trace           applied_freq_mhz,counts
    reconstruction  tau_ns,value
    metrics         key=value per line

Delays are written in ns with picosecond resolution and frequencies in
MHz with Hz resolution, so a file read back and written again is
byte-identical.
"""
from __future__ import annotations

import csv
import math

import numpy as np

from .detection import FrequencyTrace, Histogram
from .reconstruct import Reconstruction

HISTOGRAM_COLUMNS = ("delta_ns", "counts")
TRACE_COLUMNS = ("applied_freq_mhz", "counts")
RECONSTRUCTION_COLUMNS = ("tau_ns", "value")


def _fmt_ns(x: float) -> str:
    return f"{x * 1e9:.3f}"


def _fmt_mhz(x: float) -> str:
    return f"{x * 1e-6:.6f}"


def _fmt_value(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _write(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read(path, header):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        got = tuple(next(r, ()))
        if got != header:
            raise ValueError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
        rows = [row for row in r if row]
    cols = list(zip(*rows)) if rows else [(), ()]
    return cols[0], cols[1]


def _parse_counts(values):
    if all(_is_int(v) for v in values):
        return np.array([int(v) for v in values], dtype=np.int64)
    return np.array([float(v) for v in values], dtype=np.float64)


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def write_histogram(path, hist: Histogram) -> None:
    edges = hist.edges[:-1]
    _write(path, HISTOGRAM_COLUMNS, ((_fmt_ns(e), _fmt_value(c)) for e, c in zip(edges, hist.counts)))


def read_histogram(path) -> Histogram:
    """Read a histogram; bin width and origin come from the edge column."""
    edges_ns, counts = _read(path, HISTOGRAM_COLUMNS)
    edges = np.array([float(v) for v in edges_ns])
    if edges.size < 2:
        raise ValueError(f"{path}: need at least two bins")
    width_ns = round(float(np.mean(np.diff(edges))), 3)
    return Histogram(width_ns * 1e-9, edges[0] * 1e-9, _parse_counts(counts))


def write_trace(path, trace: FrequencyTrace) -> None:
    _write(path, TRACE_COLUMNS, ((_fmt_mhz(f), _fmt_value(c)) for f, c in zip(trace.freqs, trace.counts)))


def read_trace(path) -> FrequencyTrace:
    freqs, counts = _read(path, TRACE_COLUMNS)
    return FrequencyTrace(np.array([float(v) * 1e6 for v in freqs]), _parse_counts(counts), label=str(path))


def write_reconstruction(path, recon: Reconstruction) -> None:
    _write(path, RECONSTRUCTION_COLUMNS,
           ((_fmt_ns(t), _fmt_value(v)) for t, v in zip(recon.tau, recon.values)))


def read_reconstruction(path) -> Reconstruction:
    tau_ns, values = _read(path, RECONSTRUCTION_COLUMNS)
    return Reconstruction(np.array([float(v) * 1e-9 for v in tau_ns]),
                          np.array([float(v) for v in values]), source=str(path))


def write_curve(path, header, x, y, fmt_x) -> None:
    _write(path, header, ((fmt_x(a), _fmt_value(b)) for a, b in zip(x, y)))


def write_metrics(path, metrics: dict) -> None:
    with open(path, "w", newline="") as fh:
        for key, value in metrics.items():
            if isinstance(value, (bool, np.bool_)):
                text = "true" if value else "false"
            elif isinstance(value, float) and math.isnan(value):
                text = "nan"
            elif isinstance(value, (float, np.floating)):
                text = repr(float(value))
            else:
                text = str(value)
            fh.write(f"{key}={text}\n")


def read_metrics(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, text = line.partition("=")
            out[key] = _parse_scalar(text)
    return out


def _parse_scalar(text: str):
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text
