"""Hu moments, Haralick GLCM statistics, histograms, and the assembled
fixed-layout page descriptor.

Feature vector layout (283 values):
    [0..4]     width, height, aspect_ratio, ink_ratio, mean_intensity
    [5..11]    Hu moments h1..h7 (raw, no log transform)
    [12..24]   Haralick f1..f13, averaged over the 4 unit offsets
    [25..280]  normalized 256-bin grayscale histogram
    [281..282] normalized 2-bin binary histogram
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyForeground, ImageTooSmall
from .pixelio import ColorImage, RasterImage, resize_max_side, to_grayscale
from .preprocess import BinaryImage, basic_props, binarize, otsu_threshold

FEATURE_DIM = 283
DEFAULT_GLCM_LEVELS = 64
DEFAULT_MAX_SIDE = 1024
# unit displacements (dx, dy): horizontal, diagonal, vertical, anti-diagonal
DEFAULT_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1))


@dataclass(frozen=True)
class CentralMoments:
    raw: dict        # M_pq for p+q <= 3
    central: dict    # mu_pq, centralized
    normalized: dict  # eta_pq = mu_pq / mu00^(1 + (p+q)/2)


@dataclass(frozen=True)
class GlcmMatrix:
    levels: int
    entries: np.ndarray  # (G, G), normalized to sum 1, symmetric


def central_moments(mask: BinaryImage) -> CentralMoments:
    """Raw, central, and normalized moments of the foreground indicator."""
    ys, xs = np.nonzero(mask.bits)
    if xs.size == 0:
        raise EmptyForeground("no foreground pixels")
    x = xs.astype(np.float64)
    y = ys.astype(np.float64)

    raw = {}
    for p in range(4):
        for q in range(4 - p):
            raw[(p, q)] = float(np.sum(x**p * y**q))

    m00 = raw[(0, 0)]
    cx = raw[(1, 0)] / m00
    cy = raw[(0, 1)] / m00
    dx = x - cx
    dy = y - cy
    central = {}
    for p in range(4):
        for q in range(4 - p):
            central[(p, q)] = float(np.sum(dx**p * dy**q))

    normalized = {}
    for (p, q), mu in central.items():
        normalized[(p, q)] = mu / m00 ** (1.0 + (p + q) / 2.0)
    return CentralMoments(raw=raw, central=central, normalized=normalized)


def hu_moments(m: CentralMoments) -> np.ndarray:
    """The seven rotation/scale/translation-invariant moment combinations."""
    n = m.normalized
    n20, n02, n11 = n[(2, 0)], n[(0, 2)], n[(1, 1)]
    n30, n03 = n[(3, 0)], n[(0, 3)]
    n21, n12 = n[(2, 1)], n[(1, 2)]

    h1 = n20 + n02
    h2 = (n20 - n02) ** 2 + 4 * n11**2
    h3 = (n30 - 3 * n12) ** 2 + (3 * n21 - n03) ** 2
    h4 = (n30 + n12) ** 2 + (n21 + n03) ** 2
    h5 = (n30 - 3 * n12) * (n30 + n12) * (
        (n30 + n12) ** 2 - 3 * (n21 + n03) ** 2
    ) + (3 * n21 - n03) * (n21 + n03) * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2)
    h6 = (n20 - n02) * ((n30 + n12) ** 2 - (n21 + n03) ** 2) + 4 * n11 * (
        n30 + n12
    ) * (n21 + n03)
    h7 = (3 * n21 - n03) * (n30 + n12) * (
        (n30 + n12) ** 2 - 3 * (n21 + n03) ** 2
    ) - (n30 - 3 * n12) * (n21 + n03) * (3 * (n30 + n12) ** 2 - (n21 + n03) ** 2)
    return np.array([h1, h2, h3, h4, h5, h6, h7], dtype=np.float64)


def quantize(img: RasterImage, levels: int) -> np.ndarray:
    """Map 8-bit intensities onto [0, levels) via floor(v * levels / 256)."""
    if not 2 <= levels <= 256:
        raise ValueError("levels must be in [2, 256]")
    return (img.intensities.astype(np.int64) * levels) // 256


def glcm(img: RasterImage, levels: int, offsets=DEFAULT_OFFSETS) -> list:
    """One normalized symmetric co-occurrence matrix per offset."""
    q = quantize(img, levels)
    return [_glcm_single(q, levels, off) for off in offsets]


def _glcm_single(q: np.ndarray, levels: int, offset) -> GlcmMatrix:
    dx, dy = offset
    h, w = q.shape
    if abs(dx) >= w or abs(dy) >= h:
        raise ImageTooSmall(f"no pixel pairs for offset {offset} on {w}x{h}")

    # slice out the co-occurring pixel pairs for (dx, dy)
    x0 = slice(max(0, -dx), min(w, w - dx))
    x1 = slice(max(0, dx), min(w, w + dx))
    y0 = slice(max(0, -dy), min(h, h - dy))
    y1 = slice(max(0, dy), min(h, h + dy))
    a = q[y0, x0].ravel()
    b = q[y1, x1].ravel()
    if a.size == 0:
        raise ImageTooSmall(f"no pixel pairs for offset {offset} on {w}x{h}")

    counts = np.bincount(a * levels + b, minlength=levels * levels).astype(np.float64)
    mat = counts.reshape(levels, levels)
    mat = mat + mat.T  # symmetric accumulation of d and -d
    mat /= mat.sum()
    return GlcmMatrix(levels=levels, entries=mat)


def haralick_features(glcms) -> np.ndarray:
    """f1..f13 per matrix, arithmetically averaged across the offsets."""
    if not glcms:
        raise ValueError("at least one GLCM required")
    rows = np.stack([_haralick_single(g.entries) for g in glcms])
    return rows.mean(axis=0)


def _xlog2(p: np.ndarray) -> np.ndarray:
    """p * log2(p) with 0 log 0 := 0."""
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def _haralick_single(p: np.ndarray) -> np.ndarray:
    g = p.shape[0]
    i = np.arange(g, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(np.dot(i, px))
    mu_y = float(np.dot(i, py))
    var_x = float(np.dot((i - mu_x) ** 2, px))
    var_y = float(np.dot((i - mu_y) ** 2, py))

    ii, jj = np.meshgrid(i, i, indexing="ij")
    k_sum = np.arange(2 * g - 1, dtype=np.float64)      # i + j in [0, 2g-2]
    k_diff = np.arange(g, dtype=np.float64)             # |i - j| in [0, g-1]
    p_sum = np.zeros(2 * g - 1)
    np.add.at(p_sum, (ii + jj).astype(int), p)
    p_diff = np.zeros(g)
    np.add.at(p_diff, np.abs(ii - jj).astype(int), p)

    f1 = float(np.sum(p * p))
    f2 = float(np.dot(k_diff**2, p_diff))
    if var_x > 0 and var_y > 0:
        f3 = float((np.sum(ii * jj * p) - mu_x * mu_y) / np.sqrt(var_x * var_y))
    else:
        f3 = 0.0
    f4 = float(np.sum((ii - mu_x) ** 2 * p))
    f5 = float(np.sum(p / (1.0 + (ii - jj) ** 2)))
    f6 = float(np.dot(k_sum, p_sum))
    f7 = float(np.dot((k_sum - f6) ** 2, p_sum))
    f8 = float(-np.sum(_xlog2(p_sum)))
    f9 = float(-np.sum(_xlog2(p)))
    mu_diff = float(np.dot(k_diff, p_diff))
    f10 = float(np.dot((k_diff - mu_diff) ** 2, p_diff))
    f11 = float(-np.sum(_xlog2(p_diff)))

    # information measures of correlation
    hx = float(-np.sum(_xlog2(px)))
    hy = float(-np.sum(_xlog2(py)))
    pxy = np.outer(px, py)
    log_pxy = np.zeros_like(pxy)
    nz = pxy > 0
    log_pxy[nz] = np.log2(pxy[nz])
    hxy1 = float(-np.sum(p * log_pxy))
    hxy2 = float(-np.sum(pxy[nz] * log_pxy[nz]))
    denom = max(hx, hy)
    f12 = (f9 - hxy1) / denom if denom > 0 else 0.0
    arg = 1.0 - np.exp(-2.0 * (hxy2 - f9))
    f13 = float(np.sqrt(arg)) if arg > 0 else 0.0

    return np.array([f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13])


def intensity_histogram(img: RasterImage) -> np.ndarray:
    """256 normalized bins over the 8-bit intensities."""
    hist = np.bincount(img.intensities.ravel(), minlength=256).astype(np.float64)
    return hist / hist.sum()


def binary_histogram(mask: BinaryImage) -> np.ndarray:
    """[background fraction, ink fraction]."""
    n = mask.bits.size
    ink = float(np.count_nonzero(mask.bits))
    return np.array([(n - ink) / n, ink / n])


def extract_features(
    img: ColorImage,
    max_side: int = DEFAULT_MAX_SIDE,
    glcm_levels: int = DEFAULT_GLCM_LEVELS,
) -> np.ndarray:
    """Full descriptor pipeline for one page.

    Degenerate inputs (blank pages, tiny images) resolve to documented
    sentinels instead of raising, so batch runs never abort mid-stream.
    """
    gray = resize_max_side(to_grayscale(img), max_side)
    t = otsu_threshold(gray)
    mask = binarize(gray, t)
    props = basic_props(gray, mask)

    try:
        hu = hu_moments(central_moments(mask))
    except EmptyForeground:
        hu = np.zeros(7)  # blank-page sentinel

    q = quantize(gray, glcm_levels)
    valid_glcms = []
    for off in DEFAULT_OFFSETS:
        try:
            valid_glcms.append(_glcm_single(q, glcm_levels, off))
        except ImageTooSmall:
            continue
    if valid_glcms:
        haralick = haralick_features(valid_glcms)
    else:
        haralick = np.zeros(13)  # image smaller than every offset

    fv = np.concatenate([
        [props.width, props.height, props.aspect_ratio, props.ink_ratio,
         props.mean_intensity],
        hu,
        haralick,
        intensity_histogram(gray),
        binary_histogram(mask),
    ])
    assert fv.shape == (FEATURE_DIM,)
    return fv
