"""Single-level and multilevel 2-D Haar (db1) transform and inverse.

The transform is separable: rows are filtered with the orthonormal 2-tap
filters and columns downsampled by 2 (even indices kept), then the same
along columns. For even dimensions this reduces to an exact transform of
non-overlapping 2x2 blocks [[a, b], [c, d]]:

    ca = (a + b + c + d) / 2
    ch = ((a + b) - (c + d)) / 2     # vertical differences (horizontal edges)
    cv = ((a + c) - (b + d)) / 2     # horizontal differences (vertical edges)
    cd = ((a - b) - (c - d)) / 2

``idwt2`` inverts these block equations exactly, so reconstruction is
bit-accurate up to float rounding. Odd dimensions are rejected rather than
padded: padding would silently alter coefficient values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_image, check_even_dims

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class HaarFilters:
    """Orthonormal db1 filter bank (decomposition and reconstruction)."""

    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray


HAAR = HaarFilters(
    lo_d=np.array([1.0, 1.0]) / _SQRT2,
    hi_d=np.array([1.0, -1.0]) / _SQRT2,
    lo_r=np.array([1.0, 1.0]) / _SQRT2,
    hi_r=np.array([-1.0, 1.0]) / _SQRT2,
)


@dataclass(frozen=True)
class SubbandSet:
    """One decomposition level: approximation plus three detail matrices."""

    ca: np.ndarray
    ch: np.ndarray
    cv: np.ndarray
    cd: np.ndarray

    def __post_init__(self):
        shape = self.ca.shape
        for name in ("ca", "ch", "cv", "cd"):
            band = getattr(self, name)
            if band.ndim != 2:
                raise ValueError(f"{name} must be 2-D")
            if band.shape != shape:
                raise ValueError(
                    f"subband dimensions differ: ca is {shape}, {name} is {band.shape}"
                )

    @property
    def source_h(self) -> int:
        return 2 * self.ca.shape[0]

    @property
    def source_w(self) -> int:
        return 2 * self.ca.shape[1]

    def bands(self):
        return self.ca, self.ch, self.cv, self.cd


def dwt2(image) -> SubbandSet:
    """Single-level 2-D Haar decomposition of an even-dimension image."""
    img = as_image(image)
    check_even_dims(img)
    a = img[0::2, 0::2]
    b = img[0::2, 1::2]
    c = img[1::2, 0::2]
    d = img[1::2, 1::2]
    return SubbandSet(
        ca=(a + b + c + d) / 2.0,
        ch=(a + b - c - d) / 2.0,
        cv=(a - b + c - d) / 2.0,
        cd=(a - b - c + d) / 2.0,
    )


def idwt2(subbands: SubbandSet) -> np.ndarray:
    """Exact inverse of :func:`dwt2`."""
    ca, ch, cv, cd = subbands.bands()
    h, w = ca.shape
    out = np.empty((2 * h, 2 * w), dtype=np.float64)
    out[0::2, 0::2] = (ca + ch + cv + cd) / 2.0
    out[0::2, 1::2] = (ca + ch - cv - cd) / 2.0
    out[1::2, 0::2] = (ca - ch + cv - cd) / 2.0
    out[1::2, 1::2] = (ca - ch - cv + cd) / 2.0
    return out


def decompose_multilevel(image, levels: int) -> list[SubbandSet]:
    """Repeatedly decompose the approximation band.

    Element k (0-based) holds the level-(k+1) subbands; the level-(k+1)
    decomposition consumes the level-k approximation.
    """
    img = as_image(image)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    h, w = img.shape
    factor = 2**levels
    if h % factor or w % factor:
        raise ValueError(
            f"image dimensions {h}x{w} not divisible by 2^{levels} = {factor}"
        )
    out = []
    current = img
    for _ in range(levels):
        sb = dwt2(current)
        out.append(sb)
        current = sb.ca
    return out


def reconstruct_from_approx(approx, levels: int) -> np.ndarray:
    """Upsample an approximation band through `levels` inverse transforms.

    All detail bands are zero at every level, so this is the low-pass
    reconstruction; output dimensions grow by 2^levels.
    """
    current = as_image(approx, name="approx")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    for _ in range(levels):
        zeros = np.zeros_like(current)
        current = idwt2(SubbandSet(ca=current, ch=zeros, cv=zeros, cd=zeros))
    return current


def tile_subbands(subbands: SubbandSet) -> np.ndarray:
    """Arrange the four bands as one [[ca, ch], [cv, cd]] image."""
    return np.block(
        [[subbands.ca, subbands.ch], [subbands.cv, subbands.cd]]
    )
