"""Configuration parsing, command-line surface, filename conventions, and
batched directory inference.

Precedence for every setting: CLI flag > config file > built-in default.
Exit codes: 0 success, 1 usage error, 2 fatal I/O, 3 some files skipped.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import forest as rf
from . import report as rp
from .errors import (
    EmptyDataset,
    InvalidValue,
    MalformedLine,
    NoImagesFound,
    PagesortError,
)
from .features import extract_features
from .pixelio import IMAGE_EXTENSIONS, load_image


@dataclass
class AppConfig:
    # [INPUT]
    directory: str = "input"
    # [OUTPUT]
    results_dir: str = "results"
    model_dir: str = "models"
    viz_dir: str = "viz"
    # [SETUP]
    batch_size: int = 32
    top_n: int = 3
    # [TRAIN]
    dataset_path: str = ""
    images_dir: str = ""       # image root when dataset_path is an annotation CSV
    eval_ratio: float = 0.1
    seed: int = 0
    max_categ: int = 0         # 0 = no cap
    n_trees: int = 300
    max_depth: int = 0         # 0 = unlimited
    min_samples_leaf: int = 1
    features_per_split: int = 0  # 0 = floor(sqrt(d))
    # [MODEL]
    kind: str = "rfc"
    model_path: str = ""
    # [EVAL]
    eval_dir: str = ""
    max_categ_eval: int = 0


def _parse_int(key, value, minimum=None):
    try:
        v = int(value)
    except ValueError:
        raise InvalidValue(key, value)
    if minimum is not None and v < minimum:
        raise InvalidValue(key, value)
    return v


def _parse_ratio(key, value):
    try:
        v = float(value)
    except ValueError:
        raise InvalidValue(key, value)
    if not 0.0 < v < 1.0:
        raise InvalidValue(key, value)
    return v


# (section, key) -> (config attribute, parser)
_CONFIG_KEYS = {
    ("INPUT", "directory"): ("directory", str),
    ("OUTPUT", "results_dir"): ("results_dir", str),
    ("OUTPUT", "model_dir"): ("model_dir", str),
    ("OUTPUT", "viz_dir"): ("viz_dir", str),
    ("SETUP", "batch_size"): ("batch_size", lambda v: _parse_int("batch_size", v, 1)),
    ("SETUP", "top_n"): ("top_n", lambda v: _parse_int("top_n", v, 1)),
    ("TRAIN", "dataset_path"): ("dataset_path", str),
    ("TRAIN", "images_dir"): ("images_dir", str),
    ("TRAIN", "eval_ratio"): ("eval_ratio", lambda v: _parse_ratio("eval_ratio", v)),
    ("TRAIN", "seed"): ("seed", lambda v: _parse_int("seed", v)),
    ("TRAIN", "max_categ"): ("max_categ", lambda v: _parse_int("max_categ", v, 0)),
    ("TRAIN", "n_trees"): ("n_trees", lambda v: _parse_int("n_trees", v, 1)),
    ("TRAIN", "max_depth"): ("max_depth", lambda v: _parse_int("max_depth", v, 0)),
    ("TRAIN", "min_samples_leaf"): (
        "min_samples_leaf", lambda v: _parse_int("min_samples_leaf", v, 1)),
    ("TRAIN", "features_per_split"): (
        "features_per_split", lambda v: _parse_int("features_per_split", v, 0)),
    ("MODEL", "kind"): ("kind", str),
    ("MODEL", "model_path"): ("model_path", str),
    ("EVAL", "eval_dir"): ("eval_dir", str),
    ("EVAL", "max_categ_eval"): (
        "max_categ_eval", lambda v: _parse_int("max_categ_eval", v, 0)),
}

# deep-learning-era keys kept parseable for config-file compatibility
_INERT_KEYS = {"epochs", "lr", "learning_rate", "warmup_ratio", "log_freq",
               "base_model", "revision", "repo", "token"}


def parse_config(path) -> AppConfig:
    """Parse the INI-style config file; absent keys keep their defaults."""
    config = AppConfig()
    section = None
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise MalformedLine(lineno, raw)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if (section, key) in _CONFIG_KEYS:
            attr, parser = _CONFIG_KEYS[(section, key)]
            setattr(config, attr, parser(value))
        elif key in _INERT_KEYS:
            print(f"warning: config key {key!r} is not used by the forest "
                  f"pipeline, ignored", file=sys.stderr)
        else:
            print(f"warning: unknown config key {key!r} in section "
                  f"[{section}], ignored", file=sys.stderr)
    return config


_PAGE_RE = re.compile(r"^(?P<stem>.+)-(?P<page>\d+)$")


@dataclass(frozen=True)
class PageRef:
    stem: str
    page: int
    path: Path


def parse_page_ref(path) -> PageRef:
    """Extract (stem, page) from '<stem>-<digits>.<ext>' names.

    Zero-padded (pdftoppm) and plain (ImageMagick) numbering both parse;
    names without a page suffix fall back to page 1 with a warning.
    """
    path = Path(path)
    m = _PAGE_RE.match(path.stem)
    if m and int(m.group("page")) >= 1:
        return PageRef(stem=m.group("stem"), page=int(m.group("page")), path=path)
    print(f"warning: {path.name!r} has no page suffix, assuming page 1",
          file=sys.stderr)
    return PageRef(stem=path.stem, page=1, path=path)


def _extract_one(path_str: str):
    """Worker: load + featurize one file; returns (path, vector | error)."""
    try:
        return path_str, extract_features(load_image(path_str))
    except PagesortError as e:
        return path_str, f"{type(e).__name__}: {e}"


def _extract_many(paths, workers: int):
    """Featurize in input order; failures come back as message strings."""
    paths = [str(p) for p in paths]
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_extract_one, paths, chunksize=8))
    return [_extract_one(p) for p in paths]


def classify_file(model: rf.RandomForestModel, path, top_n: int) -> rp.PredictionRow:
    """Classify one image and print the ranked guesses."""
    fv = extract_features(load_image(path))
    probs = rf.predict_proba(model, fv)
    ranking = rf.rank_distribution(probs)[:top_n]
    ref = parse_page_ref(path)
    for category, score in ranking:
        print(f"{category}\t{score:.4f}")
    return rp.PredictionRow(file=ref.stem, page=ref.page, ranking=ranking,
                            probabilities=probs)


def _list_images(directory: Path, recursive: bool):
    it = directory.rglob("*") if recursive else directory.glob("*")
    return sorted(p for p in it
                  if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS)


def classify_directory(model: rf.RandomForestModel, directory, recursive: bool,
                       batch_size: int, top_n: int, results_dir,
                       raw: bool = False, workers: int = 1,
                       model_id: str = "rfc", timestamp=None):
    """Batched inference over a directory tree.

    Returns (rows, n_skipped, written paths). Per-file failures are logged
    and skipped; the run continues.
    """
    directory = Path(directory)
    paths = _list_images(directory, recursive)
    if not paths:
        raise NoImagesFound(f"no images under {directory}")

    n_batches = (len(paths) + batch_size - 1) // batch_size
    rows = []
    n_skipped = 0
    for b in range(n_batches):
        chunk = paths[b * batch_size:(b + 1) * batch_size]
        extracted = _extract_many(chunk, workers)
        good = [(p, fv) for p, fv in extracted if not isinstance(fv, str)]
        for p, err in extracted:
            if isinstance(err, str):
                print(f"warning: skipping {p}: {err}", file=sys.stderr)
                n_skipped += 1
        if good:
            probs = rf.predict_proba_batch(model, np.stack([fv for _, fv in good]))
            for (p, _), dist in zip(good, probs):
                ref = parse_page_ref(p)
                prob_map = dict(zip(model.categories, dist.tolist()))
                rows.append(rp.PredictionRow(
                    file=ref.stem, page=ref.page,
                    ranking=rf.rank_distribution(prob_map)[:top_n],
                    probabilities=prob_map,
                ))
        print(f"Processed batch {b + 1}/{n_batches}")

    results_dir = Path(results_dir)
    results_dir.mkdir(parents=True, exist_ok=True)
    timestamp = timestamp or datetime.now(timezone.utc)
    written = []
    topn_path = results_dir / rp.output_name("topn", model_id, timestamp)
    rp.write_topn_csv(rows, top_n, topn_path)
    written.append(topn_path)
    if raw:
        raw_path = results_dir / rp.output_name("raw", model_id, timestamp)
        rp.write_raw_csv(rows, raw_path, categories=model.categories)
        written.append(raw_path)
    return rows, n_skipped, written


def _gather_labeled_images(root: Path):
    """(path, label) pairs from a per-category-subdirectory layout."""
    pairs = []
    for sub in sorted(root.iterdir()):
        if sub.is_dir() and sub.name in ds.LABELS:
            pairs.extend((p, sub.name) for p in _list_images(sub, recursive=True))
    return pairs


def _load_training_records(config: AppConfig):
    """Labeled image paths from either input layout, as AnnotationRecords
    whose `file` field carries the resolved path."""
    root = Path(config.dataset_path)
    if root.is_file() and root.suffix.lower() == ".csv":
        annotations = ds.parse_annotations(root.read_text(encoding="utf-8"))
        images_root = Path(config.images_dir or root.parent)
        records = []
        for rec in annotations:
            resolved = ds.resolve_page_path(images_root, rec)
            if resolved is None:
                print(f"warning: no image for {rec.file} page {rec.page}, skipped",
                      file=sys.stderr)
                continue
            records.append(ds.AnnotationRecord(str(resolved), rec.page, rec.category))
        return records
    pairs = _gather_labeled_images(root)
    return [ds.AnnotationRecord(str(p), 1, label) for p, label in pairs]


def _featurize_records(records, workers: int):
    extracted = _extract_many([r.file for r in records], workers)
    kept, vectors = [], []
    for rec, (path, fv) in zip(records, extracted):
        if isinstance(fv, str):
            print(f"warning: skipping {path}: {fv}", file=sys.stderr)
            continue
        kept.append(rec)
        vectors.append(fv)
    if not vectors:
        raise EmptyDataset("no usable images")
    return kept, np.stack(vectors)


def _category_counts(records):
    counts = {}
    for r in records:
        counts[r.category] = counts.get(r.category, 0) + 1
    return dict(sorted(counts.items()))


def _evaluate(model, records, x, top_n, results_dir, viz_dir, model_id, timestamp):
    """Shared evaluation tail: accuracies + confusion matrices (CSV + SVG)."""
    probs = rf.predict_proba_batch(model, x)
    truths = [r.category for r in records]
    rankings = [
        rf.rank_distribution(dict(zip(model.categories, dist.tolist())))
        for dist in probs
    ]
    results_dir = Path(results_dir)
    viz_dir = Path(viz_dir)
    results_dir.mkdir(parents=True, exist_ok=True)
    viz_dir.mkdir(parents=True, exist_ok=True)

    accuracies = {}
    for n in range(1, top_n + 1):
        accuracies[n] = rp.topn_accuracy(truths, rankings, n)
        print(f"top-{n} accuracy: {accuracies[n]:.4f}")
    for n in (1, top_n) if top_n > 1 else (1,):
        matrix = rp.confusion_matrix(truths, rankings, n,
                                     categories=model.categories)
        base = rp.output_name("confmat", f"{model_id}-top{n}", timestamp)
        rp.render_confusion_svg(matrix, viz_dir / base,
                                title=f"{model_id} confusion matrix (top-{n})")
        rp.write_confusion_csv(
            matrix,
            results_dir / rp.output_name("confmat", f"{model_id}-top{n}",
                                         timestamp).replace(".svg", ".csv"),
        )
    per_category = {}
    top1 = [ranking[0][0] for ranking in rankings]
    for category in model.categories:
        idx = [i for i, t in enumerate(truths) if t == category]
        if idx:
            per_category[category] = sum(top1[i] == truths[i] for i in idx) / len(idx)
    for category, acc in per_category.items():
        print(f"  {category}: top-1 {acc:.4f} ({truths.count(category)} samples)")
    return accuracies


def train_command(config: AppConfig, workers: int = 1) -> Path:
    """Cap, split, featurize, weight, train, persist, and evaluate."""
    records = _load_training_records(config)
    if not records:
        raise EmptyDataset(f"no labeled images under {config.dataset_path}")

    if config.max_categ > 0:
        records = ds.cap_per_category(records, config.max_categ, config.seed)
        print(f"after capping at {config.max_categ}: {_category_counts(records)}")
    else:
        print(f"category counts: {_category_counts(records)}")

    split = ds.stratified_split(records, config.eval_ratio, config.seed)
    print(f"split: {len(split.train)} train / {len(split.eval)} eval")

    train_recs, x_train = _featurize_records(split.train, workers)
    labels = [r.category for r in train_recs]
    weights = rf.compute_category_weights(labels)
    forest_config = rf.ForestConfig(
        n_trees=config.n_trees,
        max_depth=config.max_depth or None,
        min_samples_leaf=config.min_samples_leaf,
        features_per_split=config.features_per_split or None,
        bootstrap=True,
        seed=config.seed,
    )
    model = rf.train_forest(x_train, labels, forest_config,
                            weights=weights, n_workers=workers)

    timestamp = datetime.now(timezone.utc)
    model_dir = Path(config.model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    model_path = Path(config.model_path) if config.model_path else (
        model_dir / rp.output_name("model", config.kind, timestamp)
    )
    rf.save_model(model, model_path)
    print(f"model saved to {model_path}")

    if split.eval:
        eval_recs, x_eval = _featurize_records(split.eval, workers)
        accuracies = _evaluate(model, eval_recs, x_eval, config.top_n,
                               config.results_dir, config.viz_dir,
                               config.kind, timestamp)
        overall = accuracies[1]
        print(f"overall top-1 accuracy: {overall:.4f}")
    return model_path


def eval_command(config: AppConfig, model: rf.RandomForestModel,
                 workers: int = 1) -> dict:
    """Evaluate a trained model on a sorted per-category directory."""
    root = Path(config.eval_dir)
    pairs = _gather_labeled_images(root)
    if not pairs:
        raise EmptyDataset(f"no labeled images under {root}")
    records = [ds.AnnotationRecord(str(p), 1, label) for p, label in pairs]
    if config.max_categ_eval > 0:
        records = ds.cap_per_category(records, config.max_categ_eval, config.seed)
    records, x = _featurize_records(records, workers)
    print(f"evaluating {len(records)} samples")
    timestamp = datetime.now(timezone.utc)
    return _evaluate(model, records, x, config.top_n, config.results_dir,
                     config.viz_dir, config.kind, timestamp)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pagesort",
        description="Classify scanned archive pages with handcrafted features "
                    "and a random forest.",
    )
    parser.add_argument("--config", default="config.txt",
                        help="path to the INI-style config file")
    parser.add_argument("-f", "--file", help="classify a single image file")
    parser.add_argument("-d", "--directory", help="classify a directory of images")
    parser.add_argument("--dir", action="store_true",
                        help="classify the default directory from the config")
    parser.add_argument("--inner", action="store_true",
                        help="recurse into nested subdirectories")
    parser.add_argument("-tn", "--topn", type=int, help="number of top-N guesses")
    parser.add_argument("--raw", action="store_true",
                        help="also write raw per-category probabilities")
    parser.add_argument("--batch_size", type=int, help="inference batch size")
    parser.add_argument("--train", action="store_true",
                        help="train a model from the configured dataset")
    parser.add_argument("--eval", action="store_true",
                        help="evaluate a model on the configured eval directory")
    parser.add_argument("-m", "--model", help="model file path")
    parser.add_argument("-mc", "--max_categ", type=int,
                        help="cap samples per category for training")
    parser.add_argument("-mce", "--max_categ_eval", type=int,
                        help="cap samples per category for evaluation")
    parser.add_argument("--seed", type=int, help="training / sampling seed")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes for feature extraction and training")
    return parser


def _apply_overrides(config: AppConfig, args) -> AppConfig:
    if args.topn is not None:
        if args.topn < 1:
            raise InvalidValue("topn", args.topn)
        config.top_n = args.topn
    if args.batch_size is not None:
        if args.batch_size < 1:
            raise InvalidValue("batch_size", args.batch_size)
        config.batch_size = args.batch_size
    if args.model:
        config.model_path = args.model
    if args.max_categ is not None:
        config.max_categ = args.max_categ
    if args.max_categ_eval is not None:
        config.max_categ_eval = args.max_categ_eval
    if args.seed is not None:
        config.seed = args.seed
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if Path(args.config).is_file():
            config = parse_config(args.config)
        else:
            config = AppConfig()
        config = _apply_overrides(config, args)
    except (MalformedLine, InvalidValue) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        if args.train:
            train_command(config, workers=args.workers)
            return 0

        if args.eval:
            if not config.model_path:
                print("error: --eval requires a model (-m or config MODEL section)",
                      file=sys.stderr)
                return 1
            model = rf.load_model(config.model_path)
            eval_command(config, model, workers=args.workers)
            return 0

        if args.file or args.directory or args.dir:
            if not config.model_path:
                print("error: classification requires a model "
                      "(-m or config MODEL section)", file=sys.stderr)
                return 1
            model = rf.load_model(config.model_path)
            if args.file:
                classify_file(model, args.file, config.top_n)
                return 0
            directory = args.directory if args.directory else config.directory
            _, n_skipped, written = classify_directory(
                model, directory, recursive=args.inner,
                batch_size=config.batch_size, top_n=config.top_n,
                results_dir=config.results_dir, raw=args.raw,
                workers=args.workers,
            )
            for path in written:
                print(f"wrote {path}")
            return 3 if n_skipped else 0

        parser.print_help()
        return 1
    except PagesortError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
