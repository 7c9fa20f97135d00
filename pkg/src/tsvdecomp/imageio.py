"""Grayscale image and raw float grid I/O.

PGM files are binary P5 with maxval 255 and are read and written here
directly. PNG goes through Pillow; colour PNGs are converted to luma.
"""

import re
import struct

import numpy as np
from PIL import Image

from .grid import MIN_SIZE

RAW_MAGIC = b"TSVF"
SAVE_MODES = ("clamp01", "texture", "normalize")

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


class ImageFormatError(ValueError):
    pass


def _read_pgm(data):
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise ImageFormatError("only binary PGM (P5) is supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width)


def read_gray8(path):
    """Read an 8-bit grayscale image as a ``uint8`` array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P5":
        try:
            return _read_pgm(data)
        except ValueError as exc:
            raise ImageFormatError(f"{path}: {exc}") from None
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        with Image.open(path) as im:
            if im.mode not in ("L", "P", "RGB", "RGBA", "LA"):
                raise ImageFormatError(f"{path}: unsupported PNG mode {im.mode}")
            return np.asarray(im.convert("L"), dtype=np.uint8)
    raise ImageFormatError(f"{path}: not a P5 PGM or PNG file")


def load_image(path):
    """Load a grayscale PGM/PNG image with samples scaled to ``[0, 1]``."""
    img = read_gray8(path)
    if img.shape[0] < MIN_SIZE or img.shape[1] < MIN_SIZE:
        raise ImageFormatError(f"{path}: image must be at least {MIN_SIZE}x{MIN_SIZE}")
    return img.astype(np.float64) / 255.0


def to_gray8(field, mode="clamp01"):
    """Map a float field to 8-bit samples.

    ``clamp01``: ``255 * x`` clipped to ``[0, 1]`` first. ``texture``: zero
    maps to mid-gray via ``x / 2 + 0.5``. ``normalize``: ``[min, max]`` to
    ``[0, 255]``, constant fields map to 0. Rounding is half-up.
    """
    x = np.asarray(field, dtype=np.float64)
    if mode == "clamp01":
        y = np.clip(x, 0.0, 1.0)
    elif mode == "texture":
        y = np.clip(x / 2.0 + 0.5, 0.0, 1.0)
    elif mode == "normalize":
        lo, hi = x.min(), x.max()
        y = (x - lo) / (hi - lo) if hi > lo else np.zeros_like(x)
    else:
        raise ValueError(f"mode must be one of {SAVE_MODES}, got {mode!r}")
    return np.floor(255.0 * y + 0.5).astype(np.uint8)


def write_gray8(img, path):
    path = str(path)
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if path.lower().endswith(".png"):
        Image.fromarray(img, mode="L").save(path)
        return
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


def save_image(field, path, mode="clamp01"):
    """Write `field` as PNG (``.png`` suffix) or P5 PGM (anything else)."""
    write_gray8(to_gray8(field, mode), path)


def save_raw(field, path):
    """Little-endian float64 grid with a 16-byte header (magic, M, N, pad)."""
    x = np.asarray(field, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC + struct.pack("<II", *x.shape) + b"\0" * 4)
        fh.write(np.ascontiguousarray(x).tobytes())


def load_raw(path):
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != RAW_MAGIC:
            raise ImageFormatError(f"{path}: not a TSVF raw file")
        m, n = struct.unpack("<II", header[4:12])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != m * n:
        raise ImageFormatError(f"{path}: expected {m * n} samples, got {data.size}")
    return data.reshape(m, n).astype(np.float64)
