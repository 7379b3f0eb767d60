"""Regenerate the synthetic experiment under tests/fixtures/experiment.

Two member "networks" score a 3-class problem with different noise; the
feature files carry two informative attributes and one constant one. Output
is deterministic, so re-running leaves the committed files unchanged.
"""

from pathlib import Path

import numpy as np

from fusionbench.boost import FeatureDataset
from fusionbench.core import LabelSpace, PredictionRecord, PredictionSet
from fusionbench.io.arff import write_arff
from fusionbench.io.predictions import write_predictions

OUT = Path(__file__).parent / "experiment"
SPACE = LabelSpace(("polyps", "normal-cecum", "esophagitis"))


def _probs(rng, labels, strength):
    logits = rng.normal(0.0, 1.0, (len(labels), SPACE.size))
    logits[np.arange(len(labels)), labels] += strength
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    # round to what a text file would carry, then renormalise the last entry
    p = np.round(p, 6)
    p[:, -1] = 1.0 - p[:, :-1].sum(axis=1)
    return p


def _member(labels, probs, prefix):
    recs = tuple(PredictionRecord(f"{prefix}{i:03d}", int(t), tuple(float(v) for v in p))
                 for i, (t, p) in enumerate(zip(labels, probs)))
    return PredictionSet(SPACE, recs)


def main():
    rng = np.random.default_rng(20181)
    for split, n in (("train", 60), ("test", 40)):
        labels = np.arange(n) % SPACE.size
        for member, strength in (("a", 1.6), ("b", 1.0)):
            write_predictions(_member(labels, _probs(rng, labels, strength), f"{split}-"),
                              OUT / f"member_{member}_{split}.csv")
        feats = np.column_stack([
            labels + rng.normal(0.0, 0.45, n),
            (labels == 0) + rng.normal(0.0, 0.6, n),
            np.full(n, 0.5),
        ])
        write_arff(FeatureDataset(SPACE, np.round(feats, 6), labels, ("f_hue", "f_edge", "f_const")),
                   OUT / f"features_{split}.arff", relation=f"synthetic-{split}")


if __name__ == "__main__":
    main()
