"""ROC AUC as the fraction of concordant positive/negative pairs.

Every (positive, negative) pair scores 1 if the positive ranks higher, 1/2 on
a tie, 0 otherwise. Quadratic, exact (Fractions), and unaware of curves.
"""

from fractions import Fraction


def concordance(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    credit = Fraction(0)
    for p in pos:
        for n in neg:
            if p > n:
                credit += 1
            elif p == n:
                credit += Fraction(1, 2)
    return credit / (len(pos) * len(neg))
