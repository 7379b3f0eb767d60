import sys
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from fusionbench.core import ConfusionMatrix, LabelSpace, PredictionRecord, PredictionSet
from fusionbench.io.cmfile import read_cm

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
BAD = FIXTURES / "bad"
EXPERIMENT = FIXTURES / "experiment"
TABLE4 = Path(str(resources.files("fusionbench") / "data" / "table4.cm"))

sys.path.insert(0, str(TESTS))


def space(k: int) -> LabelSpace:
    return LabelSpace(tuple(f"c{i}" for i in range(k)))


def cm_of(rows) -> ConfusionMatrix:
    rows = np.asarray(rows, dtype=np.int64)
    return ConfusionMatrix(space(rows.shape[0]), rows)


def preds_from_cm(cm: ConfusionMatrix) -> PredictionSet:
    """Label-only prediction set whose confusion matrix is ``cm``."""
    recs = []
    for a in range(cm.k):
        for p in range(cm.k):
            for _ in range(int(cm.counts[a, p])):
                recs.append(PredictionRecord(f"r{len(recs)}", a, predicted_label=p))
    return PredictionSet(cm.space, tuple(recs))


@st.composite
def count_matrices(draw, min_k=2, max_k=6, max_count=40, nonempty=True):
    k = draw(st.integers(min_k, max_k))
    cells = draw(st.lists(st.integers(0, max_count), min_size=k * k, max_size=k * k))
    m = np.array(cells, dtype=np.int64).reshape(k, k)
    if nonempty and m.sum() == 0:
        m[0, 0] = 1
    return cm_of(m)


@pytest.fixture(scope="session")
def table4():
    return read_cm(TABLE4)
