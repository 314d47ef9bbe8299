"""Synthetic page generator for end-to-end exercises.

Produces four visually distinct archetypes that map onto taxonomy labels:
dense typed-text line texture (TEXT_T), ruled table grid (LINE_T), halftone
photo noise (PHOTO), and sparse line drawing (DRAW). The archetypes are
constructed to be separable by the handcrafted feature pipeline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

ARCHETYPES = ("TEXT_T", "LINE_T", "PHOTO", "DRAW")

PAGE_W = 200
PAGE_H = 150


def _paper(rng) -> np.ndarray:
    base = rng.integers(235, 250)
    page = np.full((PAGE_H, PAGE_W), base, dtype=np.int16)
    page += rng.integers(-4, 5, size=page.shape, dtype=np.int16)
    return page


def _text_page(rng) -> np.ndarray:
    page = _paper(rng)
    line_height = int(rng.integers(4, 6))
    gap = int(rng.integers(3, 5))
    y = int(rng.integers(8, 16))
    while y + line_height < PAGE_H - 8:
        x = int(rng.integers(10, 18))
        right = PAGE_W - int(rng.integers(10, 40))
        while x < right:
            word = int(rng.integers(6, 18))
            end = min(x + word, right)
            ink = rng.integers(20, 90, size=(line_height, end - x))
            speckle = rng.random((line_height, end - x)) < 0.75
            block = page[y:y + line_height, x:end]
            page[y:y + line_height, x:end] = np.where(speckle, ink, block)
            x = end + int(rng.integers(2, 5))
        y += line_height + gap
    return page


def _table_page(rng) -> np.ndarray:
    page = _paper(rng)
    step_x = int(rng.integers(22, 32))
    step_y = int(rng.integers(16, 24))
    x0, y0 = int(rng.integers(6, 12)), int(rng.integers(6, 12))
    for x in range(x0, PAGE_W - 4, step_x):
        page[y0:PAGE_H - 6, x:x + 1] = rng.integers(20, 60)
    for y in range(y0, PAGE_H - 4, step_y):
        page[y:y + 1, x0:PAGE_W - 6] = rng.integers(20, 60)
    # light cell entries
    for y in range(y0 + 4, PAGE_H - 10, step_y):
        for x in range(x0 + 3, PAGE_W - 10, step_x):
            if rng.random() < 0.6:
                w = int(rng.integers(6, max(7, step_x - 8)))
                page[y:y + 3, x:x + w] = rng.integers(60, 120)
    return page


def _photo_page(rng) -> np.ndarray:
    page = _paper(rng)
    # full-bleed halftone region with smooth large-scale structure
    yy, xx = np.mgrid[0:PAGE_H, 0:PAGE_W]
    fx, fy = rng.uniform(0.02, 0.08, size=2)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    smooth = 110 + 60 * np.sin(fx * xx + phase[0]) * np.cos(fy * yy + phase[1])
    noise = rng.normal(0, 28, size=page.shape)
    margin = int(rng.integers(4, 12))
    region = smooth + noise
    page[margin:PAGE_H - margin, margin:PAGE_W - margin] = region[
        margin:PAGE_H - margin, margin:PAGE_W - margin
    ]
    return page


def _drawing_page(rng) -> np.ndarray:
    page = _paper(rng)
    n_strokes = int(rng.integers(4, 9))
    for _ in range(n_strokes):
        x = float(rng.uniform(20, PAGE_W - 20))
        y = float(rng.uniform(20, PAGE_H - 20))
        angle = float(rng.uniform(0, 2 * np.pi))
        length = int(rng.integers(40, 160))
        shade = int(rng.integers(20, 80))
        for _ in range(length):
            angle += float(rng.normal(0, 0.12))
            x += np.cos(angle)
            y += np.sin(angle)
            xi, yi = int(round(x)), int(round(y))
            if 1 <= xi < PAGE_W - 1 and 1 <= yi < PAGE_H - 1:
                page[yi, xi] = shade
                page[yi, xi + 1] = shade
    return page


_GENERATORS = {
    "TEXT_T": _text_page,
    "LINE_T": _table_page,
    "PHOTO": _photo_page,
    "DRAW": _drawing_page,
}


def generate_page(archetype: str, rng: np.random.Generator) -> np.ndarray:
    """One (H, W) uint8 page of the requested archetype."""
    page = _GENERATORS[archetype](rng)
    return np.clip(page, 0, 255).astype(np.uint8)


def write_synthetic_dataset(root, pages_per_class: int = 200, seed: int = 0):
    """Write root/<CLASS>/<CLASS>-<page>.png for each archetype."""
    root = Path(root)
    for archetype in ARCHETYPES:
        directory = root / archetype
        directory.mkdir(parents=True, exist_ok=True)
        for i in range(pages_per_class):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed,
                                       spawn_key=(ARCHETYPES.index(archetype), i))
            )
            page = generate_page(archetype, rng)
            Image.fromarray(page, mode="L").save(
                directory / f"{archetype.lower()}-{i + 1:04d}.png"
            )
    return root
