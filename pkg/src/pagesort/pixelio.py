"""Image decoding and size normalization.

All rasters are numpy-backed: ColorImage wraps an (H, W, 3) uint8 array,
RasterImage an (H, W) uint8 array. Pixels are row-major, origin top-left.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImage, DegenerateImage, UnreadableFile, UnsupportedFormat

# magic-byte signatures for the supported containers
_SIGNATURES = (
    (b"\x89PNG\r\n\x1a\n", "PNG"),
    (b"\xff\xd8\xff", "JPEG"),
    (b"II*\x00", "TIFF"),
    (b"MM\x00*", "TIFF"),
)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".tif", ".tiff"}


@dataclass(frozen=True)
class ColorImage:
    """Decoded RGB image, (H, W, 3) uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError("ColorImage requires an (H, W, 3) uint8 array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RasterImage:
    """8-bit grayscale image, (H, W) uint8."""

    intensities: np.ndarray

    def __post_init__(self):
        a = self.intensities
        if a.ndim != 2 or a.dtype != np.uint8:
            raise ValueError("RasterImage requires an (H, W) uint8 array")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("RasterImage must have at least one pixel")

    @property
    def width(self) -> int:
        return self.intensities.shape[1]

    @property
    def height(self) -> int:
        return self.intensities.shape[0]


def load_image(path) -> ColorImage:
    """Decode a PNG/JPEG/TIFF file into an RGB ColorImage.

    Grayscale and paletted sources are expanded to RGB; any alpha channel
    is composited over white (scanned paper background).
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise UnreadableFile(f"cannot read {path}: {e}") from e

    if not any(data.startswith(sig) for sig, _ in _SIGNATURES):
        raise UnsupportedFormat(f"{path}: not a PNG, JPEG, or TIFF file")

    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode in ("RGBA", "LA", "PA") or (
                im.mode == "P" and "transparency" in im.info
            ):
                rgba = im.convert("RGBA")
                background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                im = Image.alpha_composite(background, rgba)
            rgb = im.convert("RGB")
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise CorruptImage(f"{path}: decoder failure: {e}") from e

    return ColorImage(np.asarray(rgb, dtype=np.uint8))


def to_grayscale(img: ColorImage) -> RasterImage:
    """BT.601 luma: round(0.299 R + 0.587 G + 0.114 B), half-up."""
    rgb = img.pixels.astype(np.float64)
    luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    gray = np.floor(luma + 0.5).astype(np.uint8)
    return RasterImage(gray)


def resize_max_side(img: RasterImage, max_side: int) -> RasterImage:
    """Bilinear downscale so the longer side equals max_side; never upscales."""
    if max_side < 8:
        raise ValueError("max_side must be >= 8")
    w, h = img.width, img.height
    longest = max(w, h)
    if longest <= max_side:
        return img
    scale = max_side / longest
    new_w = max(1, round(w * scale))
    new_h = max(1, round(h * scale))
    if new_w < 1 or new_h < 1:
        raise DegenerateImage(f"resize to {new_w}x{new_h}")
    pil = Image.fromarray(img.intensities, mode="L")
    resized = pil.resize((new_w, new_h), Image.BILINEAR)
    return RasterImage(np.asarray(resized, dtype=np.uint8))
