"""From-scratch random forest: weighted-Gini CART trees, bootstrap ensemble,
probability and top-N output, optional hierarchical mode, binary persistence.

Determinism contract: (seed, data, config) fully determines the serialized
model. Each tree derives its own rng from the master seed and its index, so
trees may be built in parallel in any order with identical results.
"""

from __future__ import annotations

import struct
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dataset import GROUP_OF, LABELS, priority_sort_key
from .errors import (
    ChecksumMismatch,
    DimensionMismatch,
    EmptyDataset,
    InvalidN,
    MissingFineModel,
    UnreadableFile,
    VersionMismatch,
)

MAGIC = b"APCF"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Leaf:
    dist: np.ndarray  # weighted category distribution, sums to 1


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 300
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    features_per_split: Optional[int] = None  # None -> floor(sqrt(d))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple
    categories: tuple
    weights: dict          # category -> weight used during training
    n_features: int
    seed: int
    version: int = FORMAT_VERSION

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def compute_category_weights(labels) -> dict:
    """Balanced inverse-frequency weights: N / (K * count_c)."""
    labels = list(labels)
    if not labels:
        raise EmptyDataset("no labels")
    counts = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    n = len(labels)
    k = len(counts)
    return {c: n / (k * cnt) for c, cnt in counts.items()}


def _gini_split_score(x: np.ndarray, y: np.ndarray, w: np.ndarray, k: int,
                      min_leaf: int):
    """Best threshold on one feature, scanning midpoints of distinct values.

    Returns (score, threshold) or None when no valid split exists. The score
    is the weighted sum of child Gini impurities (lower is better).
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.shape[0]
    distinct = xs[:-1] < xs[1:]
    if min_leaf > 1:
        pos = np.arange(1, n)
        distinct = distinct & (pos >= min_leaf) & (n - pos >= min_leaf)
    if not distinct.any():
        return None

    ws = w[order]
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y[order]] = ws
    cum = np.cumsum(onehot, axis=0)[:-1]       # class mass left of each cut
    total = np.cumsum(onehot, axis=0)[-1]
    wl = cum.sum(axis=1)
    wr = total.sum() - wl
    with np.errstate(divide="ignore", invalid="ignore"):
        left_term = wl - np.einsum("ij,ij->i", cum, cum) / wl
        right = total - cum
        right_term = wr - np.einsum("ij,ij->i", right, right) / wr
    score = left_term + right_term
    score[~distinct] = np.inf
    best = int(np.argmin(score))
    if not np.isfinite(score[best]):
        return None
    return float(score[best]), float((xs[best] + xs[best + 1]) / 2.0)


def _leaf(y: np.ndarray, w: np.ndarray, k: int) -> Leaf:
    dist = np.bincount(y, weights=w, minlength=k)
    return Leaf(dist / dist.sum())


def train_tree(x: np.ndarray, y: np.ndarray, w: np.ndarray, k: int,
               config: ForestConfig, rng: np.random.Generator,
               depth: int = 0) -> TreeNode:
    """Greedy CART with weighted Gini impurity on a random feature subset."""
    n, d = x.shape
    if (
        n < 2 * config.min_samples_leaf
        or (config.max_depth is not None and depth >= config.max_depth)
        or np.all(y == y[0])
    ):
        return _leaf(y, w, k)

    m = config.features_per_split or int(np.floor(np.sqrt(d)))
    m = min(m, d)
    candidates = rng.choice(d, size=m, replace=False)

    best = None
    for f in candidates:
        found = _gini_split_score(x[:, f], y, w, k, config.min_samples_leaf)
        if found is not None and (best is None or found[0] < best[0]):
            best = (found[0], int(f), found[1])
    if best is None:
        return _leaf(y, w, k)

    _, feature, threshold = best
    mask = x[:, feature] <= threshold
    return Split(
        feature=feature,
        threshold=threshold,
        left=train_tree(x[mask], y[mask], w[mask], k, config, rng, depth + 1),
        right=train_tree(x[~mask], y[~mask], w[~mask], k, config, rng, depth + 1),
    )


def _tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    # stable per-tree derivation: parallel training is order-independent
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(tree_index,))
    )


_POOL_DATA = {}


def _pool_init(x, y, w, k, config):
    _POOL_DATA.update(x=x, y=y, w=w, k=k, config=config)


def _pool_train_one(tree_index: int) -> TreeNode:
    d = _POOL_DATA
    return _train_one(d["x"], d["y"], d["w"], d["k"], d["config"], tree_index)


def _train_one(x, y, w, k, config, tree_index) -> TreeNode:
    rng = _tree_rng(config.seed, tree_index)
    if config.bootstrap:
        idx = rng.integers(0, x.shape[0], size=x.shape[0])
        x, y, w = x[idx], y[idx], w[idx]
    return train_tree(x, y, w, k, config, rng)


def train_forest(samples, labels, config: ForestConfig,
                 categories=None, weights: Optional[dict] = None,
                 n_workers: int = 1) -> RandomForestModel:
    """Train the ensemble. Deterministic for fixed seed and input order."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    labels = list(labels)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("no training samples")
    if x.shape[0] != len(labels):
        raise DimensionMismatch(f"{x.shape[0]} samples vs {len(labels)} labels")

    if categories is None:
        present = set(labels)
        # taxonomy order when the labels are taxonomy labels, else sorted
        if present <= set(LABELS):
            categories = tuple(c for c in LABELS if c in present)
        else:
            categories = tuple(sorted(present))
    else:
        categories = tuple(categories)
    cat_index = {c: i for i, c in enumerate(categories)}
    y = np.array([cat_index[label] for label in labels], dtype=np.int64)

    if weights is None:
        weights = compute_category_weights(labels)
    w = np.array([weights[label] for label in labels], dtype=np.float64)

    if n_workers > 1:
        with ProcessPoolExecutor(
            max_workers=n_workers,
            initializer=_pool_init,
            initargs=(x, y, w, len(categories), config),
        ) as pool:
            trees = tuple(pool.map(_pool_train_one, range(config.n_trees)))
    else:
        trees = tuple(
            _train_one(x, y, w, len(categories), config, i)
            for i in range(config.n_trees)
        )

    return RandomForestModel(
        trees=trees,
        categories=categories,
        weights={c: weights[c] for c in categories if c in weights},
        n_features=x.shape[1],
        seed=config.seed,
    )


def _tree_proba(node: TreeNode, fv: np.ndarray) -> np.ndarray:
    while isinstance(node, Split):
        node = node.left if fv[node.feature] <= node.threshold else node.right
    return node.dist


def predict_proba(model: RandomForestModel, fv) -> dict:
    """Mean of per-tree leaf distributions; sums to 1."""
    fv = np.asarray(fv, dtype=np.float64)
    if fv.shape != (model.n_features,):
        raise DimensionMismatch(
            f"feature vector length {fv.shape} vs model {model.n_features}"
        )
    acc = np.zeros(len(model.categories))
    for tree in model.trees:
        acc += _tree_proba(tree, fv)
    acc /= len(model.trees)
    return dict(zip(model.categories, acc.tolist()))


def predict_proba_batch(model: RandomForestModel, x) -> np.ndarray:
    """(n, K) probability matrix for a batch of feature vectors."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise DimensionMismatch(f"batch shape {x.shape} vs model {model.n_features}")
    out = np.zeros((x.shape[0], len(model.categories)))

    def route(node, rows):
        if isinstance(node, Leaf):
            out[rows] += node.dist
            return
        go_left = x[rows, node.feature] <= node.threshold
        if go_left.any():
            route(node.left, rows[go_left])
        if (~go_left).any():
            route(node.right, rows[~go_left])

    all_rows = np.arange(x.shape[0])
    for tree in model.trees:
        route(tree, all_rows)
    out /= len(model.trees)
    return out


def rank_distribution(probs: dict) -> list:
    """Sort (category, score) by descending score; ties resolve by the
    taxonomy priority order (PHOTO group first), then lexicographically."""
    return sorted(probs.items(), key=lambda kv: (-kv[1],) + priority_sort_key(kv[0]))


def predict_topn(model: RandomForestModel, fv, n: int) -> list:
    if not 1 <= n <= len(model.categories):
        raise InvalidN(f"n must be in [1, {len(model.categories)}], got {n}")
    return rank_distribution(predict_proba(model, fv))[:n]


def hierarchical_predict(coarse: RandomForestModel, fine: dict, fv) -> list:
    """Coarse group probabilities times within-group fine probabilities."""
    group_probs = predict_proba(coarse, fv)
    scores = {}
    for group, p_group in group_probs.items():
        if group not in fine:
            raise MissingFineModel(f"no fine model for group {group}")
        for category, p_cat in predict_proba(fine[group], fv).items():
            scores[category] = p_group * p_cat
    return rank_distribution(scores)


# --- persistence: little-endian binary, magic "APCF", trailing CRC32 ---

def _pack_tree(node: TreeNode, out: bytearray):
    if isinstance(node, Leaf):
        out += b"\x00"
        out += struct.pack(f"<{len(node.dist)}d", *node.dist)
    else:
        out += b"\x01"
        out += struct.pack("<Id", node.feature, node.threshold)
        _pack_tree(node.left, out)
        _pack_tree(node.right, out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise ChecksumMismatch("model file truncated")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals


def _unpack_tree(r: _Reader, k: int) -> TreeNode:
    (tag,) = r.take("<B")
    if tag == 0:
        return Leaf(np.array(r.take(f"<{k}d")))
    if tag == 1:
        feature, threshold = r.take("<Id")
        left = _unpack_tree(r, k)
        right = _unpack_tree(r, k)
        return Split(feature, threshold, left, right)
    raise ChecksumMismatch(f"bad tree node tag {tag}")


def save_model(model: RandomForestModel, path) -> None:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", model.version)
    out += struct.pack("<I", len(model.categories))
    for c in model.categories:
        raw = c.encode("utf-8")
        out += struct.pack("<H", len(raw)) + raw
    out += struct.pack(
        f"<{len(model.categories)}d",
        *(model.weights.get(c, 1.0) for c in model.categories),
    )
    out += struct.pack("<IIq", model.n_features, model.n_trees, model.seed)
    for tree in model.trees:
        _pack_tree(tree, out)
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    Path(path).write_bytes(bytes(out))


def load_model(path) -> RandomForestModel:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise UnreadableFile(f"cannot read {path}: {e}") from e

    if len(data) < 8 or data[:4] != MAGIC:
        raise VersionMismatch(f"{path}: not a pagesort model file")
    if len(data) < 12:
        raise ChecksumMismatch("model file truncated")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(data[:-4]) != stored_crc:
        raise ChecksumMismatch("model file checksum mismatch")

    r = _Reader(data[:-4])
    r.pos = 4
    (version,) = r.take("<I")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported model format version {version}")
    (n_cats,) = r.take("<I")
    categories = []
    for _ in range(n_cats):
        (length,) = r.take("<H")
        if r.pos + length > len(r.data):
            raise ChecksumMismatch("model file truncated")
        categories.append(r.data[r.pos:r.pos + length].decode("utf-8"))
        r.pos += length
    weights = dict(zip(categories, r.take(f"<{n_cats}d")))
    n_features, n_trees, seed = r.take("<IIq")
    trees = tuple(_unpack_tree(r, n_cats) for _ in range(n_trees))
    if r.pos != len(r.data):
        raise ChecksumMismatch("trailing bytes in model file")
    return RandomForestModel(
        trees=trees,
        categories=tuple(categories),
        weights=weights,
        n_features=n_features,
        seed=seed,
        version=version,
    )
