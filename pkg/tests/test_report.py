import random
from datetime import datetime, timezone

import numpy as np
import pytest

import pagesort.report as rp
from pagesort.dataset import LABELS
from pagesort.errors import LengthMismatch


def ranking_for(*pairs):
    return list(pairs)


def test_topn_accuracy_all_correct():
    truths = ["PHOTO", "DRAW"]
    predictions = [ranking_for(("PHOTO", 0.9)), ranking_for(("DRAW", 0.8))]
    assert rp.topn_accuracy(truths, predictions, 1) == 1.0


def test_topn_accuracy_rank_two():
    truths = ["PHOTO"] * 4
    predictions = [ranking_for(("DRAW", 0.6), ("PHOTO", 0.4))] * 4
    assert rp.topn_accuracy(truths, predictions, 1) == 0.0
    assert rp.topn_accuracy(truths, predictions, 2) == 1.0


def test_topn_accuracy_monotone(rng):
    truths = [LABELS[i % 11] for i in range(50)]
    predictions = []
    for _ in range(50):
        scores = rng.random(11)
        order = np.argsort(-scores)
        predictions.append([(LABELS[j], float(scores[j])) for j in order])
    previous = 0.0
    for n in range(1, 12):
        accuracy = rp.topn_accuracy(truths, predictions, n)
        assert accuracy >= previous
        previous = accuracy


def test_topn_accuracy_length_mismatch():
    with pytest.raises(LengthMismatch):
        rp.topn_accuracy(["A"], [], 1)


def test_confusion_perfect_diagonal():
    truths = list(LABELS)
    predictions = [ranking_for((t, 1.0)) for t in truths]
    m = rp.confusion_matrix(truths, predictions, 1)
    assert m.trace == 11 and m.total == 11


def test_confusion_row_sums_equal_truth_counts(rng):
    truths = [LABELS[int(i)] for i in rng.integers(0, 11, 60)]
    predictions = []
    for _ in range(60):
        scores = rng.random(11)
        order = np.argsort(-scores)
        predictions.append([(LABELS[j], float(scores[j])) for j in order])
    for n in (1, 3):
        m = rp.confusion_matrix(truths, predictions, n)
        for i, category in enumerate(LABELS):
            assert m.counts[i].sum() == truths.count(category)


def test_confusion_topn_trace_monotone(rng):
    truths = [LABELS[int(i)] for i in rng.integers(0, 11, 40)]
    predictions = []
    for _ in range(40):
        scores = rng.random(11)
        order = np.argsort(-scores)
        predictions.append([(LABELS[j], float(scores[j])) for j in order])
    m1 = rp.confusion_matrix(truths, predictions, 1)
    m2 = rp.confusion_matrix(truths, predictions, 2)
    assert m2.trace >= m1.trace


def test_confusion_trace_consistent_with_accuracy(rng):
    truths = [LABELS[int(i)] for i in rng.integers(0, 11, 40)]
    predictions = []
    for _ in range(40):
        scores = rng.random(11)
        order = np.argsort(-scores)
        predictions.append([(LABELS[j], float(scores[j])) for j in order])
    for n in (1, 2, 5):
        m = rp.confusion_matrix(truths, predictions, n)
        assert m.trace / m.total == pytest.approx(
            rp.topn_accuracy(truths, predictions, n))


def _rows():
    return [
        rp.PredictionRow("b", 2, [("PHOTO", 0.5), ("DRAW", 0.3)]),
        rp.PredictionRow("a", 10, [("TEXT", 0.9), ("PHOTO", 0.05)]),
        rp.PredictionRow("a", 2, [("DRAW", 0.6), ("LINE_T", 0.2)]),
    ]


def test_topn_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    rp.write_topn_csv([_rows()[0]], 2, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "FILE,PAGE,CLASS-1,SCORE-1,CLASS-2,SCORE-2"
    assert lines[1] == "b,2,PHOTO,0.5000,DRAW,0.3000"


def test_topn_csv_sorted_and_shuffle_invariant(tmp_path):
    rows = _rows()
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    rp.write_topn_csv(rows, 2, p1)
    shuffled = rows[:]
    random.Random(0).shuffle(shuffled)
    rp.write_topn_csv(shuffled, 2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()[1:]
    assert [line.split(",")[:2] for line in lines] == [
        ["a", "2"], ["a", "10"], ["b", "2"]]


def test_topn_csv_lf_endings(tmp_path):
    path = tmp_path / "t.csv"
    rp.write_topn_csv(_rows(), 1, path)
    assert b"\r" not in path.read_bytes()


def test_raw_csv_columns(tmp_path):
    probs = {c: 0.0 for c in LABELS}
    probs["PHOTO"] = 1.0
    row = rp.PredictionRow("x", 1, [("PHOTO", 1.0)], probabilities=probs)
    path = tmp_path / "r.csv"
    rp.write_raw_csv([row], path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == ["FILE", "PAGE", *LABELS]
    cells = lines[1].split(",")
    assert len(cells) == 13
    assert cells.count("1.000000") == 1


def test_confusion_svg_structure(tmp_path):
    m = rp.confusion_matrix(
        list(LABELS), [[(t, 1.0)] for t in LABELS], 1)
    path = tmp_path / "c.svg"
    rp.render_confusion_svg(m, path, title="toy model top-1")
    text = path.read_text()
    assert text.count('class="cell"') == 121
    assert "toy model top-1" in text
    for category in LABELS:
        assert category in text


def test_confusion_svg_zero_matrix_uniform_color(tmp_path):
    m = rp.ConfusionMatrix(("A", "B"), np.zeros((2, 2), dtype=np.int64), 1)
    path = tmp_path / "z.svg"
    rp.render_confusion_svg(m, path)
    text = path.read_text()
    colors = {part.split('"')[0] for part in text.split('fill="')[2:]}
    assert colors == {"#ffffff"}


def test_confusion_svg_diagonal_peaks(tmp_path):
    counts = np.diag([5, 5]).astype(np.int64)
    m = rp.ConfusionMatrix(("A", "B"), counts, 1)
    path = tmp_path / "d.svg"
    rp.render_confusion_svg(m, path)
    text = path.read_text()
    peak = rp._heat_color(1.0)
    assert text.count(f'fill="{peak}"') == 2


def test_output_name_template():
    ts = datetime(2024, 1, 2, 3, 4, 5, tzinfo=timezone.utc)
    assert rp.output_name("topn", "rfc283", ts) == "topn_rfc283_20240102-030405.csv"
    assert rp.output_name("topn", "rfc283", ts) == rp.output_name("topn", "rfc283", ts)
    assert rp.output_name("confmat", "rfc", ts).endswith(".svg")
