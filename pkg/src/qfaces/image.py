"""Grayscale image I/O and geometric preprocessing.

Images are plain 2-D float64 numpy arrays (rows = height). File I/O uses
the Netpbm PGM formats: textual P2 and binary P5, with ``#`` comments in
the header and big-endian 2-byte samples when maxval > 255. Loaded pixels
are scaled to [0, 1] by the file's maxval.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .validation import as_image


class PgmError(ValueError):
    """Base class for PGM parsing problems."""


class PgmHeaderError(PgmError):
    """Missing or malformed PGM header."""


class PgmDataError(PgmError):
    """Pixel payload truncated or otherwise inconsistent with the header."""


_WS = frozenset(b" \t\n\r\x0b\x0c")
_EOL = (0x0A, 0x0D)


def _header_tokens(data: bytes, count: int):
    """First `count` whitespace/comment-delimited header tokens.

    Returns the tokens and the offset of the delimiter byte that terminated
    the last one (P5 payload starts one byte past it).
    """
    tokens = []
    i, n = 0, len(data)
    while len(tokens) < count:
        while i < n:
            b = data[i]
            if b in _WS:
                i += 1
            elif b == 0x23:  # '#' comment runs to end of line
                while i < n and data[i] not in _EOL:
                    i += 1
            else:
                break
        if i >= n:
            raise PgmHeaderError("unexpected end of file while reading PGM header")
        start = i
        while i < n and data[i] not in _WS and data[i] != 0x23:
            i += 1
        tokens.append(data[start:i])
    return tokens, i


def _parse_dims(tokens):
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise PgmHeaderError(f"non-numeric PGM header fields: {tokens!r}") from None
    if width < 1 or height < 1:
        raise PgmHeaderError(f"invalid PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise PgmHeaderError(f"PGM maxval {maxval} outside [1, 65535]")
    return width, height, maxval


def load_pgm(path) -> np.ndarray:
    """Load a P2 or P5 PGM file as a float64 image scaled to [0, 1]."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        if magic in (b"P1", b"P3", b"P4", b"P6"):
            raise PgmHeaderError(
                f"unsupported Netpbm type {magic.decode('ascii', 'replace')}; "
                "only grayscale PGM (P2/P5) is accepted"
            )
        raise PgmHeaderError(f"not a PGM file: {path}")

    if magic == b"P2":
        # Comments may appear anywhere in a textual file; strip them globally.
        body = re.sub(rb"#[^\n\r]*", b"", data)
        tokens = body.split()
        if len(tokens) < 4:
            raise PgmHeaderError("incomplete PGM header")
        width, height, maxval = _parse_dims(tokens[1:4])
        raster = tokens[4:]
        if len(raster) < width * height:
            raise PgmDataError(
                f"truncated P2 data: expected {width * height} samples, "
                f"found {len(raster)}"
            )
        try:
            samples = np.array(raster[: width * height], dtype=np.float64)
        except ValueError:
            raise PgmDataError("non-numeric sample in P2 raster") from None
        if samples.min() < 0 or samples.max() > maxval:
            raise PgmDataError("P2 sample outside [0, maxval]")
    else:
        (tokens, end) = _header_tokens(data, 4)
        width, height, maxval = _parse_dims(tokens[1:4])
        if end >= len(data) or data[end] not in _WS:
            raise PgmHeaderError("missing whitespace after P5 maxval")
        payload = data[end + 1 :]
        count = width * height
        if maxval > 255:
            if len(payload) < 2 * count:
                raise PgmDataError(
                    f"truncated P5 data: expected {2 * count} bytes, "
                    f"found {len(payload)}"
                )
            samples = np.frombuffer(payload[: 2 * count], dtype=">u2").astype(np.float64)
        else:
            if len(payload) < count:
                raise PgmDataError(
                    f"truncated P5 data: expected {count} bytes, found {len(payload)}"
                )
            samples = np.frombuffer(payload[:count], dtype=np.uint8).astype(np.float64)

    return (samples / maxval).reshape(height, width)


def save_pgm(image, path, maxval: int = 255) -> None:
    """Write a binary P5 PGM; pixels are clamped to [0, 1] and quantized."""
    img = as_image(image)
    if maxval not in (255, 65535):
        raise ValueError(f"maxval must be 255 or 65535, got {maxval}")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval)
    height, width = img.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    payload = q.astype(np.uint8 if maxval == 255 else ">u2").tobytes()
    Path(path).write_bytes(header + payload)


def crop(image, top: int, left: int, h: int, w: int) -> np.ndarray:
    """Extract the h x w sub-image whose top-left corner is (top, left)."""
    img = as_image(image)
    height, width = img.shape
    if h < 1 or w < 1:
        raise ValueError(f"crop size must be positive, got {h}x{w}")
    if top < 0 or left < 0 or top + h > height or left + w > width:
        raise ValueError(
            f"crop rectangle (top={top}, left={left}, h={h}, w={w}) "
            f"outside {height}x{width} image"
        )
    return img[top : top + h, left : left + w].copy()


def resize_bilinear(image, new_h: int, new_w: int) -> np.ndarray:
    """Bilinear resize with corner alignment.

    Sample coordinates map corner pixel centers to corner pixel centers,
    so output values never leave the input's [min, max] range.
    """
    img = as_image(image)
    if new_h < 1 or new_w < 1:
        raise ValueError(f"target size must be positive, got {new_h}x{new_w}")
    h, w = img.shape
    ys = np.linspace(0.0, h - 1.0, new_h)
    xs = np.linspace(0.0, w - 1.0, new_w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - wx) + img[np.ix_(y0, x1)] * wx
    bottom = img[np.ix_(y1, x0)] * (1 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy


def normalize_minmax(image) -> np.ndarray:
    """Affine map onto [0, 1]; constant images map to all zeros."""
    img = as_image(image)
    lo = img.min()
    span = img.max() - lo
    if span == 0.0:
        return np.zeros_like(img)
    return (img - lo) / span
