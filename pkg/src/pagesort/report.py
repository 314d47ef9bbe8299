"""Accuracy metrics, top-N confusion matrices, and output artifacts
(CSV tables, SVG confusion-matrix heat maps)."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .dataset import LABELS
from .errors import LengthMismatch, UnwritablePath


@dataclass
class PredictionRow:
    file: str
    page: int
    ranking: list                 # (category, score), scores descending
    probabilities: Optional[dict] = None  # full distribution, for raw output


@dataclass
class ConfusionMatrix:
    categories: tuple
    counts: np.ndarray  # (K, K); rows = true category, cols = predicted
    n: int              # top-N level this matrix was computed at

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))


def _check_lengths(truths, predictions):
    if len(truths) != len(predictions):
        raise LengthMismatch(f"{len(truths)} truths vs {len(predictions)} predictions")


def topn_accuracy(truths, predictions, n: int) -> float:
    """Fraction of samples whose true category is among the top n guesses.

    predictions: per-sample ranked (category, score) lists.
    """
    _check_lengths(truths, predictions)
    if n < 1:
        raise ValueError("n must be >= 1")
    hits = sum(
        1 for truth, ranking in zip(truths, predictions)
        if truth in [c for c, _ in ranking[:n]]
    )
    return hits / len(truths)


def confusion_matrix(truths, predictions, n: int,
                     categories=LABELS) -> ConfusionMatrix:
    """Top-N confusion counts.

    For n = 1 the top-1 prediction is charged. For n > 1 the diagonal is
    credited whenever the truth appears in the top n, otherwise the top-1
    cell is charged; row sums therefore always equal per-category truth
    counts.
    """
    _check_lengths(truths, predictions)
    categories = tuple(categories)
    index = {c: i for i, c in enumerate(categories)}
    counts = np.zeros((len(categories), len(categories)), dtype=np.int64)
    for truth, ranking in zip(truths, predictions):
        top = [c for c, _ in ranking[:n]]
        predicted = truth if (n > 1 and truth in top) else ranking[0][0]
        counts[index[truth], index[predicted]] += 1
    return ConfusionMatrix(categories=categories, counts=counts, n=n)


def _sorted_rows(rows):
    return sorted(rows, key=lambda r: (r.file, r.page))


def _write_text(path, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        raise UnwritablePath(f"cannot write {path}: {e}") from e


def write_topn_csv(rows, n: int, path) -> None:
    """TOP-N table: FILE,PAGE,CLASS-1,SCORE-1,...,CLASS-n,SCORE-n."""
    if not rows:
        raise ValueError("no prediction rows to write")
    header = ["FILE", "PAGE"]
    for i in range(1, n + 1):
        header += [f"CLASS-{i}", f"SCORE-{i}"]
    lines = [",".join(header)]
    for row in _sorted_rows(rows):
        cells = [row.file, str(row.page)]
        for category, score in row.ranking[:n]:
            cells += [category, f"{score:.4f}"]
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


def write_raw_csv(rows, path, categories=LABELS) -> None:
    """Raw probability table: FILE,PAGE plus one column per category."""
    if not rows:
        raise ValueError("no prediction rows to write")
    categories = tuple(categories)
    lines = [",".join(["FILE", "PAGE", *categories])]
    for row in _sorted_rows(rows):
        probs = row.probabilities
        if probs is None:
            probs = dict(row.ranking)
        cells = [row.file, str(row.page)]
        cells += [f"{probs.get(c, 0.0):.6f}" for c in categories]
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


def write_confusion_csv(matrix: ConfusionMatrix, path) -> None:
    """Counts table with category row/column headers."""
    lines = [",".join(["TRUE\\PRED", *matrix.categories])]
    for i, cat in enumerate(matrix.categories):
        lines.append(",".join([cat, *(str(v) for v in matrix.counts[i])]))
    _write_text(path, "\n".join(lines) + "\n")


# --- SVG heat map ---

_CELL = 48
_MARGIN_LEFT = 110
_MARGIN_TOP = 70
_MARGIN_BOTTOM = 90


def _heat_color(value: float) -> str:
    """White (0) to deep blue (1)."""
    frac = min(max(value, 0.0), 1.0)
    r = round(255 - 205 * frac)
    g = round(255 - 175 * frac)
    b = round(255 - 90 * frac)
    return f"#{r:02x}{g:02x}{b:02x}"


def render_confusion_svg(matrix: ConfusionMatrix, path,
                         title: str = "", normalized: bool = False) -> None:
    """Self-contained SVG heat map with per-cell counts.

    normalized=True divides each row by its sum for display (cell text
    then shows two-decimal fractions).
    """
    k = len(matrix.categories)
    width = _MARGIN_LEFT + k * _CELL + 20
    height = _MARGIN_TOP + k * _CELL + _MARGIN_BOTTOM
    counts = matrix.counts.astype(np.float64)
    if normalized:
        row_sums = counts.sum(axis=1, keepdims=True)
        display = np.divide(counts, row_sums, out=np.zeros_like(counts),
                            where=row_sums > 0)
    else:
        display = counts
    peak = display.max()

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:g}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">'
        f'{title or f"Confusion matrix (top-{matrix.n})"}</text>',
    ]
    for row in range(k):
        for col in range(k):
            x = _MARGIN_LEFT + col * _CELL
            y = _MARGIN_TOP + row * _CELL
            value = display[row, col]
            fill = _heat_color(value / peak if peak > 0 else 0.0)
            parts.append(
                f'<rect class="cell" x="{x}" y="{y}" width="{_CELL}" '
                f'height="{_CELL}" fill="{fill}" stroke="#999"/>'
            )
            text = f"{value:.2f}" if normalized else str(int(value))
            parts.append(
                f'<text x="{x + _CELL / 2:g}" y="{y + _CELL / 2 + 4:g}" '
                f'text-anchor="middle" font-family="sans-serif" '
                f'font-size="11">{text}</text>'
            )
    for idx, cat in enumerate(matrix.categories):
        y = _MARGIN_TOP + idx * _CELL + _CELL / 2 + 4
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{y:g}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{cat}</text>'
        )
        x = _MARGIN_LEFT + idx * _CELL + _CELL / 2
        ty = _MARGIN_TOP + k * _CELL + 12
        parts.append(
            f'<text x="{x:g}" y="{ty}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" '
            f'transform="rotate(-60 {x:g} {ty})">{cat}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_LEFT - 8}" y="{_MARGIN_TOP - 10}" text-anchor="end" '
        f'font-family="sans-serif" font-size="12">true \\ predicted</text>'
    )
    parts.append("</svg>")
    _write_text(path, "\n".join(parts) + "\n")


_EXTENSIONS = {"confmat": "svg", "model": "apcf"}


def output_name(kind: str, model_id: str, timestamp: datetime) -> str:
    """"<kind>_<model_id>_<UTC yyyymmdd-HHMMSS>.<ext>" (CSV unless mapped)."""
    if timestamp.tzinfo is None:
        timestamp = timestamp.replace(tzinfo=timezone.utc)
    ts = timestamp.astimezone(timezone.utc).strftime("%Y%m%d-%H%M%S")
    ext = _EXTENSIONS.get(kind, "csv")
    return f"{kind}_{model_id}_{ts}.{ext}"
