"""Brute-force Rk oracle.

Expands a confusion matrix into per-item one-hot rows and evaluates the
covariance-ratio definition directly:

    Rk = cov(X, Y) / sqrt(cov(X, X) * cov(Y, Y))

with cov(A, B) = sum_items sum_classes (A - mean_A)(B - mean_B). It never uses
the trace / marginal closed form, so it stays independent of the library path.

Usage: python gorodkin_rk.py path/to/file.cm
"""

import sys
from fractions import Fraction
import math


def load_cm(path):
    rows = [ln.strip().split(",") for ln in open(path, encoding="utf-8")
            if ln.strip() and not ln.startswith("#")]
    return [[int(v) for v in r[1:]] for r in rows[1:]]


def expand(counts):
    actual, predicted = [], []
    for a, row in enumerate(counts):
        for p, n in enumerate(row):
            actual.extend([a] * n)
            predicted.extend([p] * n)
    return actual, predicted


def rk(counts):
    k = len(counts)
    actual, predicted = expand(counts)
    n = len(actual)
    x = [[1 if c == a else 0 for c in range(k)] for a in actual]
    y = [[1 if c == p else 0 for c in range(k)] for p in predicted]
    mx = [Fraction(sum(r[c] for r in x), n) for c in range(k)]
    my = [Fraction(sum(r[c] for r in y), n) for c in range(k)]

    def cov(a, ma, b, mb):
        return sum((ra[c] - ma[c]) * (rb[c] - mb[c])
                   for ra, rb in zip(a, b) for c in range(k))

    cxy = cov(x, mx, y, my)
    cxx = cov(x, mx, x, mx)
    cyy = cov(y, my, y, my)
    return float(cxy) / math.sqrt(float(cxx) * float(cyy))


if __name__ == "__main__":
    print(repr(rk(load_cm(sys.argv[1]))))
