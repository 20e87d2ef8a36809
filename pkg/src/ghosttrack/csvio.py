"""CSV artifacts with ``#``-prefixed ``key=value`` headers.

Vectors are stored one value per line. Tables use a ``#`` header block
followed by a normal CSV header row.
"""

from __future__ import annotations

import csv
import hashlib
import io
from pathlib import Path

import numpy as np

from .sensing import IDEAL, MeasurementVector


def format_header(meta: dict) -> str:
    return "# " + ", ".join(f"{k}={v}" for k, v in meta.items()) + "\n"


def parse_header(lines) -> dict:
    meta = {}
    for line in lines:
        body = line.lstrip("#").strip()
        for part in body.split(","):
            if "=" in part:
                k, v = part.split("=", 1)
                meta[k.strip()] = v.strip()
    return meta


def _fmt(v: float) -> str:
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


def write_vector(path, values, meta: dict) -> None:
    body = "".join(_fmt(v) + "\n" for v in np.asarray(values, dtype=float).ravel())
    Path(path).write_text(format_header(meta) + body)


def read_vector(path):
    """Return (values, header dict)."""
    head, vals = [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            head.append(line)
        elif line.strip():
            vals.append(float(line))
    return np.asarray(vals), parse_header(head)


def write_measurements(path, vec: MeasurementVector, extra: dict | None = None) -> None:
    seed, m, w, h = vec.provenance or (None, len(vec), None, None)
    meta = {"seed": seed, "m": m, "frame": vec.frame_index, "kind": vec.kind,
            "width": w, "height": h}
    if vec.gain is not None:
        meta["gain"] = repr(vec.gain)
    meta.update(extra or {})
    write_vector(path, vec.values, meta)


def read_measurements(path) -> MeasurementVector:
    vals, meta = read_vector(path)

    def _int(key):
        v = meta.get(key)
        return None if v in (None, "None") else int(v)

    prov = (_int("seed"), _int("m"), _int("width"), _int("height"))
    gain = float(meta["gain"]) if "gain" in meta else None
    return MeasurementVector(vals, _int("frame") or 0, meta.get("kind", IDEAL), prov, gain)


def write_table(path, columns, rows, meta: dict) -> None:
    buf = io.StringIO()
    buf.write(format_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    Path(path).write_text(buf.getvalue())


def read_table(path):
    """Return (list of row dicts with string values, header dict)."""
    text = Path(path).read_text().splitlines()
    head = [ln for ln in text if ln.startswith("#")]
    body = [ln for ln in text if not ln.startswith("#") and ln.strip()]
    return list(csv.DictReader(body)), parse_header(head)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
