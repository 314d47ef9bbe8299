"""Fixed toy model and inputs behind the checked-in format goldens.

Everything here is hand-specified (no training, no randomness) so the
resulting CSV/SVG bytes are stable across platforms and versions.
"""

import numpy as np

import pagesort.forest as rf
import pagesort.report as rp
from pagesort.dataset import LABELS
from pagesort.features import FEATURE_DIM


def build_toy_model() -> rf.RandomForestModel:
    """Two handcrafted trees splitting on ink ratio (index 3) and mean
    intensity (index 4)."""
    k = len(LABELS)

    def leaf(**probs):
        dist = np.zeros(k)
        for label, p in probs.items():
            dist[LABELS.index(label)] = p
        return rf.Leaf(dist / dist.sum())

    tree1 = rf.Split(
        feature=3, threshold=0.25,
        left=leaf(TEXT_T=6, TEXT_P=2, LINE_T=2),
        right=rf.Split(
            feature=4, threshold=128.0,
            left=leaf(PHOTO=7, PHOTO_L=2, DRAW=1),
            right=leaf(DRAW=5, DRAW_L=3, LINE_HW=2),
        ),
    )
    tree2 = rf.Split(
        feature=3, threshold=0.4,
        left=leaf(TEXT_T=4, TEXT=3, TEXT_HW=3),
        right=leaf(PHOTO=8, DRAW=2),
    )
    return rf.RandomForestModel(
        trees=(tree1, tree2),
        categories=tuple(LABELS),
        weights={c: 1.0 for c in LABELS},
        n_features=FEATURE_DIM,
        seed=0,
    )


def toy_inputs():
    """(file, page, feature vector) triples exercising all three leaves."""
    def fv(ink, mean):
        v = np.zeros(FEATURE_DIM)
        v[3] = ink
        v[4] = mean
        return v

    return [
        ("alpha", 1, fv(0.1, 200.0)),
        ("alpha", 2, fv(0.5, 100.0)),
        ("beta", 1, fv(0.3, 180.0)),
    ]


def toy_rows(model):
    rows = []
    for file, page, fv in toy_inputs():
        probs = rf.predict_proba(model, fv)
        rows.append(rp.PredictionRow(
            file=file, page=page,
            ranking=rf.rank_distribution(probs)[:3],
            probabilities=probs,
        ))
    return rows


def toy_matrix():
    truths = ["TEXT_T", "PHOTO", "PHOTO"]
    model = build_toy_model()
    rankings = [
        rf.rank_distribution(rf.predict_proba(model, fv))
        for _, _, fv in toy_inputs()
    ]
    return rp.confusion_matrix(truths, rankings, 1)
