"""Minimal reader/writer for netpbm greyscale images (P2 ASCII and P5 binary)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import PGMParseError


def _tokens(data: bytes, count: int, start: int = 0):
    """Pull ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset just past the last one.
    """
    out = []
    i = start
    n = len(data)
    while len(out) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise PGMParseError("unexpected end of file in PGM header")
        if data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        out.append(data[i:j])
        i = j
    return out, i


def read_pgm(path) -> np.ndarray:
    """Read a PGM file into a 2-D integer array.

    Returns
    -------
    samples : ndarray, shape (height, width)
    maxval : int
    """
    data = Path(path).read_bytes()
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise PGMParseError(f"{path}: not a P2/P5 PGM file")
    magic = data[:2]
    try:
        (w, h, mv), pos = _tokens(data, 3, 2)
        width, height, maxval = int(w), int(h), int(mv)
    except ValueError as exc:
        raise PGMParseError(f"{path}: bad header: {exc}") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise PGMParseError(f"{path}: invalid header values {width}x{height} max {maxval}")
    npix = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos:]
        if len(raw) < npix * dtype.itemsize:
            raise PGMParseError(f"{path}: truncated raster ({len(raw)} bytes)")
        samples = np.frombuffer(raw, dtype=dtype, count=npix).astype(np.int64)
    else:
        try:
            vals = [int(t) for t in data[pos:].split()]
        except ValueError as exc:
            raise PGMParseError(f"{path}: non-integer sample") from exc
        if len(vals) < npix:
            raise PGMParseError(f"{path}: expected {npix} samples, found {len(vals)}")
        samples = np.asarray(vals[:npix], dtype=np.int64)

    if samples.size and samples.max() > maxval:
        raise PGMParseError(f"{path}: sample exceeds declared max value {maxval}")
    return samples.reshape(height, width), maxval


def write_pgm(path, samples, maxval: int = 255, binary: bool = True, comments=()) -> None:
    samples = np.asarray(samples)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-D array")
    if samples.min(initial=0) < 0 or samples.max(initial=0) > maxval:
        raise ValueError("samples out of range for maxval")
    height, width = samples.shape
    header = "P5\n" if binary else "P2\n"
    for c in comments:
        header += f"# {c}\n"
    header += f"{width} {height}\n{maxval}\n"
    if binary:
        body = samples.astype(np.uint8 if maxval < 256 else ">u2").tobytes()
    else:
        rows = [" ".join(str(int(v)) for v in row) for row in samples]
        body = ("\n".join(rows) + "\n").encode("ascii")
    Path(path).write_bytes(header.encode("ascii") + body)


def write_real_pgm(path, image, comments=()) -> tuple[float, float]:
    """Write a real-valued image as an 8-bit PGM via an affine map.

    Sample ``s`` corresponds to the value ``offset + s * scale``. The mapping
    is also written to a sidecar ``<path>.map`` text file and returned.
    """
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    scale = (hi - lo) / 255.0 if hi > lo else 1.0
    samples = np.rint((image - lo) / scale).clip(0, 255).astype(np.uint8)
    write_pgm(path, samples, comments=comments)
    Path(str(path) + ".map").write_text(
        f"# value = offset + sample * scale\noffset {lo!r}\nscale {scale!r}\n"
    )
    return lo, scale
