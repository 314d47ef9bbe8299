"""Category taxonomy, annotation ingestion, capping, splitting, balanced
batch sampling, and annotated-file sorting."""

from __future__ import annotations

import csv
import io
import random
import shutil
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    BadPageNumber,
    EmptyDataset,
    MissingColumn,
    TooFewCategories,
    UnknownCategory,
)

# the 11 shipped labels, in canonical (taxonomy) order
LABELS = (
    "DRAW", "DRAW_L",
    "LINE_HW", "LINE_P", "LINE_T",
    "PHOTO", "PHOTO_L",
    "TEXT", "TEXT_HW", "TEXT_P", "TEXT_T",
)

GROUP_OF = {
    "PHOTO": "PHOTO", "PHOTO_L": "PHOTO",
    "DRAW": "DRAW", "DRAW_L": "DRAW",
    "LINE_HW": "LINE", "LINE_P": "LINE", "LINE_T": "LINE",
    "TEXT": "TEXT", "TEXT_HW": "TEXT", "TEXT_P": "TEXT", "TEXT_T": "TEXT",
}

# resolution priority for mixed-content pages: photos first, plain text last
GROUP_ORDER = ("PHOTO", "DRAW", "LINE", "TEXT")

GROUP_RANK = {g: i for i, g in enumerate(GROUP_ORDER)}


def priority_sort_key(label: str):
    """Tie-break key: priority group first, then lexicographic.

    Labels outside the taxonomy (custom category sets) rank after all
    taxonomy groups and fall back to plain lexicographic order.
    """
    group = GROUP_OF.get(label, label if label in GROUP_RANK else None)
    return (GROUP_RANK.get(group, len(GROUP_ORDER)), label)


@dataclass(frozen=True)
class AnnotationRecord:
    file: str
    page: int
    category: str


@dataclass
class DatasetSplit:
    train: list
    eval: list
    eval_ratio: float
    seed: int


def parse_annotations(text: str) -> list:
    """Parse annotation CSV with required columns FILE, PAGE, CLASS.

    Column order is free and extra columns are ignored.
    """
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    for col in ("FILE", "PAGE", "CLASS"):
        if col not in header:
            raise MissingColumn(f"annotation CSV is missing column {col}")

    records = []
    for i, row in enumerate(reader, start=1):
        category = (row["CLASS"] or "").strip()
        if category not in LABELS:
            raise UnknownCategory(category, i)
        try:
            page = int(row["PAGE"])
        except (TypeError, ValueError):
            raise BadPageNumber(f"row {i}: PAGE {row['PAGE']!r} is not an integer")
        if page < 1:
            raise BadPageNumber(f"row {i}: PAGE must be >= 1, got {page}")
        records.append(AnnotationRecord(row["FILE"].strip(), page, category))
    return records


def cap_per_category(records, max_per_category: int, seed: int):
    """Uniformly subsample categories above the cap; input order is kept."""
    if max_per_category < 1:
        raise ValueError("max_per_category must be >= 1")
    by_cat = defaultdict(list)
    for idx, rec in enumerate(records):
        by_cat[rec.category].append(idx)

    rng = random.Random(seed)
    keep = set()
    for cat in sorted(by_cat):
        indices = by_cat[cat]
        if len(indices) > max_per_category:
            keep.update(rng.sample(indices, max_per_category))
        else:
            keep.update(indices)
    return [rec for idx, rec in enumerate(records) if idx in keep]


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def stratified_split(records, eval_ratio: float, seed: int) -> DatasetSplit:
    """Per-category seeded shuffle; round(ratio * count) records go to eval."""
    if not 0.0 < eval_ratio < 1.0:
        raise ValueError("eval_ratio must be in (0, 1)")
    if not records:
        raise EmptyDataset("no records to split")

    by_cat = defaultdict(list)
    for idx, rec in enumerate(records):
        by_cat[rec.category].append(idx)

    rng = random.Random(seed)
    eval_idx = set()
    for cat in sorted(by_cat):
        indices = list(by_cat[cat])
        rng.shuffle(indices)
        n_eval = _round_half_up(eval_ratio * len(indices))
        eval_idx.update(indices[:n_eval])

    train = [rec for i, rec in enumerate(records) if i not in eval_idx]
    evals = [rec for i, rec in enumerate(records) if i in eval_idx]
    return DatasetSplit(train=train, eval=evals, eval_ratio=eval_ratio, seed=seed)


class BalancedBatchSampler:
    """Emits batches with a fixed number of distinct labels and a fixed
    number of samples per label.

    Keeps a shuffled index list per label with a persistent cursor; an
    exhausted list is reset and reshuffled, so within one pass of a list
    no index repeats.
    """

    def __init__(self, labels, n_categories: int, n_per_category: int,
                 rng: random.Random):
        if n_per_category < 1:
            raise ValueError("n_per_category must be >= 1")
        self._by_label = defaultdict(list)
        for idx, label in enumerate(labels):
            self._by_label[label].append(idx)
        self._label_set = sorted(self._by_label)
        if n_categories > len(self._label_set):
            raise TooFewCategories(
                f"requested {n_categories} categories, only "
                f"{len(self._label_set)} present"
            )
        self._rng = rng
        self.n_categories = n_categories
        self.n_per_category = n_per_category
        self._cursors = {}
        for label in self._label_set:
            pool = list(self._by_label[label])
            rng.shuffle(pool)
            self._cursors[label] = (pool, 0)

    def _take(self, label: str) -> int:
        pool, pos = self._cursors[label]
        if pos >= len(pool):
            pool = list(pool)
            self._rng.shuffle(pool)
            pos = 0
        self._cursors[label] = (pool, pos + 1)
        return pool[pos]

    def next_batch(self) -> list:
        chosen = self._rng.sample(self._label_set, self.n_categories)
        batch = []
        for label in chosen:
            batch.extend(self._take(label) for _ in range(self.n_per_category))
        return batch


def balanced_batches(labels, n_categories: int, n_per_category: int,
                     rng: random.Random, n_batches: int) -> list:
    """A terminating sequence of balanced batches (index lists)."""
    sampler = BalancedBatchSampler(labels, n_categories, n_per_category, rng)
    return [sampler.next_batch() for _ in range(n_batches)]


@dataclass
class SortReport:
    copied: int = 0
    missing: int = 0
    missing_records: list = field(default_factory=list)


# extensions and page-number paddings probed when resolving a page image
_RESOLVE_EXTS = (".png", ".jpg", ".jpeg", ".tif", ".tiff")


def resolve_page_path(source_root, rec: AnnotationRecord):
    """Locate a page image under either numbering convention.

    Probes <root>/ and <root>/<FILE>/ for <FILE>-<page>.<ext> with both
    zero-padded (pdftoppm) and plain (ImageMagick) page numbers.
    """
    source_root = Path(source_root)
    stems = [f"{rec.file}-{rec.page:04d}", f"{rec.file}-{rec.page}"]
    for directory in (source_root, source_root / rec.file):
        for stem in stems:
            for ext in _RESOLVE_EXTS:
                candidate = directory / (stem + ext)
                if candidate.is_file():
                    return candidate
    return None


def sort_annotated_files(records, source_root, dest_root, mode: str = "copy"
                         ) -> SortReport:
    """Place annotated page images into per-category subdirectories.

    mode="verify" only reports missing files and never writes.
    """
    if mode not in ("copy", "verify"):
        raise ValueError(f"mode must be 'copy' or 'verify', got {mode!r}")
    dest_root = Path(dest_root)
    report = SortReport()
    for rec in records:
        src = resolve_page_path(source_root, rec)
        if src is None:
            report.missing += 1
            report.missing_records.append(rec)
            continue
        if mode == "copy":
            target_dir = dest_root / rec.category
            target_dir.mkdir(parents=True, exist_ok=True)
            shutil.copy2(src, target_dir / src.name)
        report.copied += 1
    return report
