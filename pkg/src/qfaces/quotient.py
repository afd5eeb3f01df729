"""Quotient feature images from paired visual/thermal faces.

Two constructions are provided. Method 1 decomposes both images one level
and divides each visual subband by the matching thermal subband; the four
quotient bands are tiled back into a full-size feature image. Method 2
decomposes both images two levels, rebuilds each from the level-2
approximation alone (one inverse level, details zeroed) and divides the
smoothed visual by the smoothed thermal, yielding a half-size feature
image. Because the transforms are linear, a shared illumination scale on
both inputs cancels in the ratio.

Division is regularized with a sign-preserving floor so detail bands that
oscillate around zero keep their sign structure. The absolute-maximum
fusion rule and its element-sum variant are standalone operations that can
optionally replace the thermal denominator before dividing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_image, check_same_shape
from .wavelet import decompose_multilevel, dwt2, reconstruct_from_approx

FUSION_VARIANTS = ("none", "select", "sum")


@dataclass(frozen=True)
class QuotientConfig:
    """Quotient construction parameters.

    ``method`` selects the per-subband (1) or approximation-based (2)
    construction; the decomposition depth is fixed by the method.
    """

    method: int = 2
    epsilon_rel: float = 1e-3

    def __post_init__(self):
        if self.method not in (1, 2):
            raise ValueError(f"method must be 1 or 2, got {self.method}")
        if not self.epsilon_rel > 0:
            raise ValueError(f"epsilon_rel must be positive, got {self.epsilon_rel}")

    @property
    def levels(self) -> int:
        return 1 if self.method == 1 else 2


def regularized_divide(num, den, epsilon_rel: float = 1e-3) -> np.ndarray:
    """Elementwise num/den with a sign-preserving denominator floor.

    The floor is ``epsilon_rel * max(1, max|den|)``; denominators smaller in
    magnitude are replaced by the floor with their sign kept (sign(0) := +1),
    so every output entry is finite and |out| <= max|num| / floor.
    """
    num = as_image(num, name="num")
    den = as_image(den, name="den")
    check_same_shape(num, den)
    if not epsilon_rel > 0:
        raise ValueError(f"epsilon_rel must be positive, got {epsilon_rel}")
    floor = epsilon_rel * max(1.0, float(np.abs(den).max()))
    sign = np.where(den < 0.0, -1.0, 1.0)
    return num / (sign * np.maximum(np.abs(den), floor))


def _fuse_denominator(thermal_part, visual_part, fusion: str):
    if fusion == "none":
        return thermal_part
    if fusion == "select":
        return fuse_maxabs(thermal_part, visual_part)
    if fusion == "sum":
        return fuse_sum(thermal_part, visual_part)
    raise ValueError(f"fusion must be one of {FUSION_VARIANTS}, got {fusion!r}")


def quotient_method1(visual, thermal, cfg: QuotientConfig | None = None,
                     fusion: str = "none") -> np.ndarray:
    """Per-subband quotient at decomposition level 1.

    Both inputs share even dimensions h x w; the result is the h x w tiling
    [[Qa, Qh], [Qv, Qd]] of the four quotient subbands.
    """
    cfg = cfg or QuotientConfig(method=1)
    visual = as_image(visual, name="visual")
    thermal = as_image(thermal, name="thermal")
    check_same_shape(visual, thermal, what="visual/thermal pair")
    v = dwt2(visual)
    t = dwt2(thermal)
    qa, qh, qv, qd = (
        regularized_divide(vb, _fuse_denominator(tb, vb, fusion), cfg.epsilon_rel)
        for vb, tb in zip(v.bands(), t.bands())
    )
    return np.block([[qa, qh], [qv, qd]])


def quotient_method2(visual, thermal, cfg: QuotientConfig | None = None,
                     fusion: str = "none") -> np.ndarray:
    """Quotient of the level-2 low-pass reconstructions.

    Inputs share dimensions divisible by 4; the output is (h/2) x (w/2):
    each image is decomposed two levels, rebuilt one level from its level-2
    approximation, and the smoothed visual is divided by the smoothed thermal.
    """
    cfg = cfg or QuotientConfig(method=2)
    visual = as_image(visual, name="visual")
    thermal = as_image(thermal, name="thermal")
    check_same_shape(visual, thermal, what="visual/thermal pair")
    v_approx = lowpass_approx(visual)
    t_approx = lowpass_approx(thermal)
    den = _fuse_denominator(t_approx, v_approx, fusion)
    return regularized_divide(v_approx, den, cfg.epsilon_rel)


def lowpass_approx(image) -> np.ndarray:
    """Half-size smoothed image: level-2 approximation rebuilt one level."""
    level2 = decompose_multilevel(image, levels=2)[-1]
    return reconstruct_from_approx(level2.ca, levels=1)


def quotient_image(visual, thermal, cfg: QuotientConfig,
                   fusion: str = "none") -> np.ndarray:
    """Dispatch to the configured quotient construction."""
    if cfg.method == 1:
        return quotient_method1(visual, thermal, cfg, fusion=fusion)
    return quotient_method2(visual, thermal, cfg, fusion=fusion)


def fuse_maxabs(t, v) -> np.ndarray:
    """Select, per pixel, whichever of t/v has the larger magnitude.

    Ties go to t (the thermal operand).
    """
    t = as_image(t, name="t")
    v = as_image(v, name="v")
    check_same_shape(t, v)
    return np.where(np.abs(t) >= np.abs(v), t, v)


def fuse_sum(t, v) -> np.ndarray:
    """Elementwise sum variant of the fusion rule."""
    t = as_image(t, name="t")
    v = as_image(v, name="v")
    check_same_shape(t, v)
    return t + v


def gaussian_kernel(radius: int, sigma: float) -> np.ndarray:
    """Normalized (2r+1)^2 Gaussian kernel."""
    if radius < 1:
        raise ValueError(f"kernel_radius must be >= 1, got {radius}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _convolve_replicate(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2-D convolution with edge-replicate boundary (kernel is symmetric)."""
    radius = kernel.shape[0] // 2
    padded = np.pad(image, radius, mode="edge")
    h, w = image.shape
    out = np.zeros_like(image)
    for dy in range(kernel.shape[0]):
        for dx in range(kernel.shape[1]):
            out += kernel[dy, dx] * padded[dy : dy + h, dx : dx + w]
    return out


def self_quotient(image, kernel_radius: int = 3, sigma: float = 1.0,
                  epsilon_rel: float = 1e-3) -> np.ndarray:
    """Single-image baseline: ratio of an image to its Gaussian-smoothed self."""
    img = as_image(image)
    smoothed = _convolve_replicate(img, gaussian_kernel(kernel_radius, sigma))
    return regularized_divide(img, smoothed, epsilon_rel)
