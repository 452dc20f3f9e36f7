"""Artifact file formats.

* CSV: header row, then ``index,<x>,re,im`` with 17 significant digits,
  UTF-8, LF line endings.
* Key-value reports / sidecars: ``key = value`` per line, ``#`` comments.
* 16-bit images: binary PGM (``P5``), row-major, big-endian, maxval 65535.
  Stored pixel ``p`` maps to a physical value ``offset + scale * p``; the
  pair lives in the sidecar as ``count_offset`` / ``count_scale``.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import FormatError

_FMT = "%.17g"


def fmt(value):
    """Deterministic text form of a report value."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return _FMT % v
    if isinstance(value, (tuple, list)):
        return ", ".join(fmt(v) for v in value)
    return str(value)


# ---------------------------------------------------------------------------
# key-value
# ---------------------------------------------------------------------------

def write_keyvalue(path, items, header=None):
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    for key, value in items.items():
        lines.append(f"{key} = {fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_keyvalue(path):
    out = {}
    path = Path(path)
    for lineno, raw in enumerate(path.read_text("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected 'key = value', got {line!r}", lineno, str(path))
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_complex_csv(path, x, values, x_name):
    x = np.asarray(x, dtype=float)
    v = np.asarray(values)
    lines = [f"index,{x_name},re,im"]
    re, im = v.real.astype(float), np.asarray(v.imag, dtype=float)
    for i in range(x.size):
        lines.append(f"{i},{_FMT % x[i]},{_FMT % re[i]},{_FMT % im[i]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_complex_csv(path):
    """Returns ``(x_name, x, values)``."""
    path = Path(path)
    text = path.read_text("utf-8").splitlines()
    if not text:
        raise FormatError("empty CSV file", source=str(path))
    head = text[0].split(",")
    if len(head) != 4 or head[0] != "index" or head[2:] != ["re", "im"]:
        raise FormatError(f"unexpected CSV header {text[0]!r}", 1, str(path))
    data = np.loadtxt(text[1:], delimiter=",", ndmin=2) if len(text) > 1 else np.zeros((0, 4))
    return head[1], data[:, 1], data[:, 2] + 1j * data[:, 3]


def write_table_csv(path, columns):
    """Real-valued columns, ``columns`` is an ordered ``{name: array}``."""
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [",".join(names)]
    for row in zip(*arrays):
        lines.append(",".join(_FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_table_csv(path):
    path = Path(path)
    text = path.read_text("utf-8").splitlines()
    names = text[0].split(",")
    data = np.loadtxt(text[1:], delimiter=",", ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


# ---------------------------------------------------------------------------
# 16-bit PGM
# ---------------------------------------------------------------------------

PGM_MAGIC = b"P5"
PGM_MAXVAL = 65535


def encode_counts(values):
    """Map real values to uint16 pixels; lossless for integer data spanning
    fewer than 65536 levels, otherwise linearly rescaled."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("cannot encode non-finite values")
    lo, hi = float(values.min()), float(values.max())
    integral = np.all(values == np.round(values))
    if integral and hi - lo <= PGM_MAXVAL:
        offset, scale = math.floor(lo), 1.0
    else:
        offset = lo
        scale = (hi - lo) / PGM_MAXVAL if hi > lo else 1.0
    pixels = np.round((values - offset) / scale)
    return np.clip(pixels, 0, PGM_MAXVAL).astype(">u2"), float(offset), float(scale)


def write_pgm(path, pixels, comment=None):
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValueError("PGM needs a 2-D array")
    rows, cols = pixels.shape
    header = PGM_MAGIC + b"\n"
    if comment:
        header += b"# " + comment.encode("ascii") + b"\n"
    header += f"{cols} {rows}\n{PGM_MAXVAL}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels.astype(">u2").tobytes(order="C"))


def _tokens(buf, pos, count):
    out = []
    while len(out) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        out.append(buf[start:pos])
    return out, pos + 1


def read_pgm(path):
    buf = Path(path).read_bytes()
    if buf[:2] != PGM_MAGIC:
        raise FormatError(f"bad magic {buf[:2]!r}, expected {PGM_MAGIC!r}", source=str(path))
    try:
        (w, h, maxval), pos = _tokens(buf, 2, 3)
        cols, rows, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError("malformed PGM header", source=str(path)) from None
    if maxval != PGM_MAXVAL:
        raise FormatError(f"expected 16-bit PGM (maxval {PGM_MAXVAL}), got {maxval}",
                          source=str(path))
    body = buf[pos:]
    if len(body) != rows * cols * 2:
        raise FormatError(f"PGM body has {len(body)} bytes, header implies {rows * cols * 2}",
                          source=str(path))
    return np.frombuffer(body, dtype=">u2").reshape(rows, cols).astype(np.uint16)
