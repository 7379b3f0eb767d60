import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import preds_from_cm
from fusionbench.core import ClassMap, LabelSpace, PredictionRecord, PredictionSet, collapse_preds
from fusionbench.curves import ScoredItem, items_from_arrays, prc, roc, scored_items
from fusionbench.errors import DegenerateInputError, MissingProbabilitiesError, ValidationError
from oracles.concordance import concordance


def random_instance(rng):
    n = int(rng.integers(2, 201))
    # coarse grids make ties common, fine ones make them rare
    scores = rng.integers(0, int(rng.choice([3, 10, 1000])), n) / 1000.0
    labels = rng.random(n) < rng.uniform(0.1, 0.9)
    labels[0], labels[1] = True, False
    return scores, labels


scored = st.lists(st.tuples(st.integers(0, 20), st.booleans()), min_size=2, max_size=60).filter(
    lambda xs: any(y for _, y in xs) and not all(y for _, y in xs))


class TestRoc:
    def test_separated(self):
        c = roc(items_from_arrays([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]))
        assert c.auc == 1.0
        assert c.points[0] == (0.0, 0.0) and c.points[-1] == (1.0, 1.0)

    def test_all_tied_is_diagonal(self):
        c = roc(items_from_arrays([0.5] * 6, [1, 0, 1, 0, 0, 1]))
        assert c.points == ((0.0, 0.0), (1.0, 1.0))
        assert c.auc == 0.5 and c.baseline == 0.5

    def test_worked_pairs(self):
        c = roc(items_from_arrays([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]))
        assert c.auc == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("labels,missing", [([1, 1], "negative"), ([0, 0], "positive")])
    def test_single_class(self, labels, missing):
        with pytest.raises(DegenerateInputError, match=missing):
            roc(items_from_arrays([0.1, 0.2], labels))

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            ScoredItem(float("nan"), True)

    def test_concordance_oracle_500(self):
        rng = np.random.default_rng(12345)
        for _ in range(500):
            s, y = random_instance(rng)
            assert abs(roc(items_from_arrays(s, y)).auc - float(concordance(s, y))) < 1e-9

    @given(scored)
    @settings(max_examples=150, deadline=None)
    def test_x_monotone_and_ends(self, xs):
        c = roc(items_from_arrays(*zip(*xs)))
        assert np.all(np.diff(c.x) >= 0) and np.all(np.diff(c.y) >= 0)
        assert c.points[0] == (0.0, 0.0) and c.points[-1] == (1.0, 1.0)


class TestPrc:
    def test_perfect(self):
        c = prc(items_from_arrays([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]))
        assert c.auc == 1.0
        # every recall level is first reached with no false positive
        best = {}
        for r, p in c.points:
            best[r] = max(best.get(r, 0.0), p)
        assert set(best.values()) == {1.0}

    def test_step_area(self):
        # ranks: +, -, +  -> recall 0.5 at precision 1, recall 1 at precision 2/3
        c = prc(items_from_arrays([0.9, 0.5, 0.2], [1, 0, 1]))
        assert c.points == ((0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3))
        assert c.auc == pytest.approx(0.5 * 1.0 + 0.5 * 2 / 3)

    def test_no_positives(self):
        with pytest.raises(DegenerateInputError, match="positive"):
            prc(items_from_arrays([0.1, 0.2], [0, 0]))

    def test_medico_baseline(self, table4):
        labels = [t == table4.space.index("polyps") for t in preds_from_cm(table4).true_labels()]
        c = prc(items_from_arrays(np.linspace(0, 1, len(labels)), labels))
        assert c.baseline == pytest.approx(423 / 8740, abs=1e-15)
        assert c.baseline == pytest.approx(0.0484, abs=2e-4)

    def test_cvc_baseline(self):
        labels = [True] * 10025 + [False] * 1929
        c = prc(items_from_arrays(np.zeros(len(labels)), labels))
        assert c.baseline == pytest.approx(0.8386, abs=1e-4)

    @given(scored)
    @settings(max_examples=150, deadline=None)
    def test_first_point_when_top_is_positive(self, xs):
        top = max(s for s, _ in xs)
        xs = [(s, y) for s, y in xs if s != top] + [(top + 1, True)]
        c = prc(items_from_arrays(*zip(*xs)))
        assert c.points[0][1] == 1.0


class TestInvariances:
    @given(scored, st.sampled_from(["affine", "cube", "exp", "logistic"]))
    @settings(max_examples=150, deadline=None)
    def test_monotone_transform(self, xs, kind):
        s = np.array([v for v, _ in xs], dtype=float) / 20.0
        y = [b for _, b in xs]
        f = {
            "affine": lambda v: 3 * v + 0.25,
            "cube": lambda v: v**3,
            "exp": np.exp,
            "logistic": lambda v: 1 / (1 + np.exp(-4 * v)),
        }[kind]
        for curve in (roc, prc):
            a, b = curve(items_from_arrays(s, y)), curve(items_from_arrays(f(s), y))
            assert a.points == b.points and a.auc == b.auc

    @given(scored)
    @settings(max_examples=100, deadline=None)
    def test_duplicated_dataset(self, xs):
        for curve in (roc, prc):
            a = curve(items_from_arrays(*zip(*xs)))
            b = curve(items_from_arrays(*zip(*(xs + xs))))
            assert np.allclose(a.points, b.points, rtol=0, atol=1e-15)
            assert a.auc == pytest.approx(b.auc, abs=1e-12)


class TestScoredItems:
    def test_from_collapsed_predictions(self):
        space = LabelSpace(("polyps", "cecum", "z-line"))
        preds = PredictionSet(space, (
            PredictionRecord("a", 0, (0.7, 0.2, 0.1)),
            PredictionRecord("b", 1, (0.3, 0.3, 0.4)),
        ))
        items = scored_items(collapse_preds(preds, ClassMap.one_vs_rest(space, "polyps")), 0)
        assert [(i.score, i.is_positive) for i in items] == [(0.7, True), (0.3, False)]

    def test_labels_only_refused(self):
        ps = PredictionSet(LabelSpace(("a", "b")), (PredictionRecord("x", 0, predicted_label=0),))
        with pytest.raises(MissingProbabilitiesError):
            scored_items(ps, 0)
