"""Grayscale image file I/O: binary PGM (P5) and IDX datasets.

IDX follows the classic big-endian layout: images carry magic 0x00000803
then count / rows / cols as unsigned 32-bit integers and one byte per
pixel; labels carry magic 0x00000801, a count, and one byte per item.
Pixel bytes map linearly onto [0, 1] (value / 255).
"""

import struct

import numpy as np

from .errors import DataFormatError

__all__ = [
    "read_pgm",
    "write_pgm",
    "read_idx_images",
    "write_idx_images",
    "read_idx_labels",
    "write_idx_labels",
]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def write_pgm(path, pixels):
    """Write a float image in [0, 1] as binary PGM with maxval 255."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise DataFormatError("PGM output needs a 2-D array")
    data = np.rint(np.clip(pixels, 0.0, 1.0) * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _read_pgm_token(data, pos):
    # skip whitespace and '#' comment lines between header tokens
    while pos < len(data):
        c = data[pos:pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise DataFormatError("truncated PGM header", offset=start)
    return data[start:pos], pos


def read_pgm(path):
    """Read a binary PGM into a float array in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise DataFormatError(f"bad PGM magic {data[:2]!r}", offset=0)
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_pgm_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise DataFormatError(f"bad PGM header token {token!r}", offset=pos) from None
    width, height, maxval = fields
    if maxval != 255:
        raise DataFormatError(f"unsupported PGM maxval {maxval}", offset=pos)
    pos += 1  # single whitespace byte after maxval
    expected = width * height
    if len(data) - pos < expected:
        raise DataFormatError(
            f"PGM payload has {len(data) - pos} bytes, expected {expected}", offset=len(data)
        )
    raw = np.frombuffer(data, dtype=np.uint8, count=expected, offset=pos)
    return raw.reshape(height, width).astype(np.float64) / 255.0


def write_idx_images(path, images):
    """Write (n, rows, cols) pixels in [0, 1] as an IDX image file."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3:
        raise DataFormatError("IDX image output needs an (n, rows, cols) array")
    n, rows, cols = images.shape
    data = np.rint(np.clip(images, 0.0, 1.0) * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(data.tobytes())


def read_idx_images(path):
    """Read an IDX image file into (n, rows, cols) floats in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16:
        raise DataFormatError("truncated IDX image header", offset=len(data))
    magic, n, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise DataFormatError(f"bad IDX image magic 0x{magic:08x}", offset=0)
    expected = n * rows * cols
    if len(data) - 16 != expected:
        raise DataFormatError(
            f"IDX payload has {len(data) - 16} bytes, expected {expected}",
            offset=min(len(data), 16 + expected),
        )
    raw = np.frombuffer(data, dtype=np.uint8, offset=16)
    return raw.reshape(n, rows, cols).astype(np.float64) / 255.0


def write_idx_labels(path, labels):
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.min() < 0 or labels.max() > 255:
        raise DataFormatError("IDX labels must be a 1-D array of bytes")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.size))
        fh.write(labels.astype(np.uint8).tobytes())


def read_idx_labels(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise DataFormatError("truncated IDX label header", offset=len(data))
    magic, n = struct.unpack(">II", data[:8])
    if magic != IDX_LABELS_MAGIC:
        raise DataFormatError(f"bad IDX label magic 0x{magic:08x}", offset=0)
    if len(data) - 8 != n:
        raise DataFormatError(
            f"IDX payload has {len(data) - 8} labels, expected {n}",
            offset=min(len(data), 8 + n),
        )
    return np.frombuffer(data, dtype=np.uint8, offset=8).astype(np.int64)
