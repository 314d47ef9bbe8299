"""Binarization, basic page properties, and training-time photometric augmentation."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageEnhance, ImageFilter

from .errors import DimensionMismatch
from .pixelio import ColorImage, RasterImage


@dataclass(frozen=True)
class BinaryImage:
    """Foreground mask (True = ink) plus the threshold that produced it."""

    bits: np.ndarray  # (H, W) bool
    threshold: int

    def __post_init__(self):
        if self.bits.ndim != 2 or self.bits.dtype != np.bool_:
            raise ValueError("BinaryImage requires an (H, W) bool array")
        if not 0 <= self.threshold <= 255:
            raise ValueError("threshold must be in [0, 255]")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class BasicProps:
    width: int
    height: int
    aspect_ratio: float
    ink_ratio: float
    mean_intensity: float


@dataclass(frozen=True)
class AugmentPolicy:
    """Photometric augmentation policy; geometric transforms are never applied.

    Factor semantics: brightness/contrast/saturation strength is sampled
    uniformly from [1 - factor, 1 + factor]; hue_factor bounds a fractional
    shift of the hue circle sampled from [-factor/2, +factor/2] scaled so
    factor 0.5 spans a quarter turn either way.
    """

    p_brightness: float = 0.5
    p_contrast: float = 0.5
    p_saturation: float = 0.5
    p_hue: float = 0.5
    p_sharpness: float = 0.5
    p_blur: float = 0.5
    brightness_factor: float = 0.5
    contrast_factor: float = 0.5
    saturation_factor: float = 0.5
    hue_factor: float = 0.5
    sharpness_range: tuple = (0.5, 1.5)
    blur_radius_range: tuple = (0.0, 2.0)

    def __post_init__(self):
        for p in (self.p_brightness, self.p_contrast, self.p_saturation,
                  self.p_hue, self.p_sharpness, self.p_blur):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must be in [0, 1]")


def otsu_threshold(img: RasterImage) -> int:
    """Threshold maximizing between-class variance over the 256-bin histogram.

    Pixels <= t form class 0, pixels > t form class 1. Ties resolve to the
    smallest t. A constant image returns its constant value (binarize then
    yields all-background).
    """
    values = img.intensities
    lo = int(values.min())
    if lo == int(values.max()):
        return lo

    hist = np.bincount(values.ravel(), minlength=256).astype(np.float64)
    n = hist.sum()
    p = hist / n
    omega0 = np.cumsum(p)  # mass of class 0 at threshold t = index
    mu = np.cumsum(p * np.arange(256))
    mu_total = mu[-1]
    omega1 = 1.0 - omega0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(omega0 > 0, mu / omega0, 0.0)
        mu1 = np.where(omega1 > 0, (mu_total - mu) / omega1, 0.0)
    sigma_b = omega0 * omega1 * (mu0 - mu1) ** 2
    return int(np.argmax(sigma_b))  # argmax returns the first (smallest) maximizer


def binarize(img: RasterImage, t: int) -> BinaryImage:
    """Foreground = intensity <= t; constant images are all-background."""
    if not 0 <= t <= 255:
        raise ValueError("threshold must be in [0, 255]")
    values = img.intensities
    if int(values.min()) == int(values.max()):
        bits = np.zeros(values.shape, dtype=bool)
    else:
        bits = values <= t
    return BinaryImage(bits, t)


def basic_props(img: RasterImage, bin_img: BinaryImage) -> BasicProps:
    if (img.height, img.width) != (bin_img.height, bin_img.width):
        raise DimensionMismatch(
            f"raster {img.width}x{img.height} vs mask {bin_img.width}x{bin_img.height}"
        )
    n = img.width * img.height
    return BasicProps(
        width=img.width,
        height=img.height,
        aspect_ratio=img.width / img.height,
        ink_ratio=float(np.count_nonzero(bin_img.bits)) / n,
        mean_intensity=float(img.intensities.mean()),
    )


def augment(img: ColorImage, policy: AugmentPolicy, rng: random.Random) -> ColorImage:
    """Apply the photometric transforms in fixed order, each with its probability.

    Deterministic for a fixed rng seed; output dimensions always equal input
    dimensions.
    """
    pil = Image.fromarray(img.pixels, mode="RGB")

    if rng.random() < policy.p_brightness:
        f = policy.brightness_factor
        pil = ImageEnhance.Brightness(pil).enhance(rng.uniform(1 - f, 1 + f))
    if rng.random() < policy.p_contrast:
        f = policy.contrast_factor
        pil = ImageEnhance.Contrast(pil).enhance(rng.uniform(1 - f, 1 + f))
    if rng.random() < policy.p_saturation:
        f = policy.saturation_factor
        pil = ImageEnhance.Color(pil).enhance(rng.uniform(1 - f, 1 + f))
    if rng.random() < policy.p_hue:
        shift = rng.uniform(-policy.hue_factor / 2, policy.hue_factor / 2)
        pil = _shift_hue(pil, shift)
    if rng.random() < policy.p_sharpness:
        lo, hi = policy.sharpness_range
        pil = ImageEnhance.Sharpness(pil).enhance(rng.uniform(lo, hi))
    if rng.random() < policy.p_blur:
        lo, hi = policy.blur_radius_range
        radius = rng.uniform(lo, hi)
        if radius > 0:
            pil = pil.filter(ImageFilter.GaussianBlur(radius))

    return ColorImage(np.asarray(pil, dtype=np.uint8))


def _shift_hue(pil: Image.Image, fraction: float) -> Image.Image:
    """Rotate the hue channel by a fraction of the full circle."""
    hsv = np.asarray(pil.convert("HSV"), dtype=np.int16)
    delta = int(round(fraction * 256))
    hsv[:, :, 0] = (hsv[:, :, 0] + delta) % 256
    return Image.fromarray(hsv.astype(np.uint8), mode="HSV").convert("RGB")
