"""8-bit grayscale image I/O: binary PGM (P5) and minimal PNG.

The PNG writer emits a fixed-layout grayscale file via zlib so image
output stays dependency-free and byte-deterministic.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np


class ImageError(Exception):
    pass


def read_pgm(path: str | Path) -> np.ndarray:
    """Binary PGM (P5, maxval 255) -> uint8 array of shape (h, w)."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] != b"P5":
        raise ImageError(f"{path}: not a binary PGM (P5) file")
    # Header tokens: width, height, maxval; '#' comments allowed between them.
    tokens: list[int] = []
    i = 2
    while len(tokens) < 3:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if i < len(raw) and raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j : j + 1].isspace():
            j += 1
        if j == i:
            raise ImageError(f"{path}: truncated PGM header")
        tokens.append(int(raw[i:j]))
        i = j
    i += 1  # single whitespace byte after maxval
    width, height, maxval = tokens
    if maxval != 255:
        raise ImageError(f"{path}: PGM maxval must be 255, got {maxval}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=-1, offset=i)
    if pixels.size < width * height:
        raise ImageError(f"{path}: PGM payload shorter than {width}x{height}")
    return pixels[: width * height].reshape(height, width).copy()


def write_pgm(pixels: np.ndarray, path: str | Path) -> None:
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(pixels.tobytes())


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def write_png(pixels: np.ndarray, path: str | Path) -> None:
    """8-bit grayscale PNG, filter type 0 on every row."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)  # grey, no interlace
    rows = np.concatenate(
        [np.zeros((h, 1), dtype=np.uint8), pixels], axis=1
    ).tobytes()
    data = zlib.compress(rows, 6)
    with open(path, "wb") as f:
        f.write(b"\x89PNG\r\n\x1a\n")
        f.write(_png_chunk(b"IHDR", ihdr))
        f.write(_png_chunk(b"IDAT", data))
        f.write(_png_chunk(b"IEND", b""))


def write_image(pixels: np.ndarray, path: str | Path) -> None:
    """Dispatch on extension: .png -> PNG, anything else -> PGM."""
    if Path(path).suffix.lower() == ".png":
        write_png(pixels, path)
    else:
        write_pgm(pixels, path)
