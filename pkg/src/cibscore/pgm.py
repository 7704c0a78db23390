"""Minimal reader/writer for binary (P5) portable graymaps.

Only 8-bit maps (maxval <= 255) are supported; that is all the motion
pipeline produces or consumes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM file into a uint8 array of shape (height, width)."""
    path = Path(path)
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise ParseError("not a binary (P5) portable graymap", source=path)

    # Header tokens: magic, width, height, maxval. '#' starts a comment.
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated graymap header", source=path)
        try:
            tokens.append(int(data[start:pos]))
        except ValueError:
            raise ParseError("non-numeric graymap header token", source=path) from None
    pos += 1  # single whitespace byte before the raster

    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise ValidationError(f"invalid graymap dimensions {width}x{height}", source=path)
    if not 0 < maxval <= 255:
        raise ValidationError(f"unsupported graymap maxval {maxval}", source=path)
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise ParseError(
            f"graymap raster holds {len(raster)} bytes, expected {width * height}",
            source=path,
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    """Write a 2-d uint8 array as a binary PGM file."""
    arr = np.asarray(pixels)
    if arr.ndim != 2:
        raise ValidationError("graymap pixels must be a 2-d array")
    arr = arr.astype(np.uint8, casting="unsafe")
    height, width = arr.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())
