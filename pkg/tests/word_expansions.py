"""Closed-form operator-word expansions used as independent oracles.

Each entry is ``(coefficient, word, k)`` standing for ``coefficient * word H_k``,
where a word lists ``P``, ``S^p`` and ``L<k>`` tokens left to right.
"""
from fractions import Fraction as F

NORMALIZED = {
    1: [(1, "P", 1)],
    2: [(F(-1, 2), "P L1 S", 1), (1, "P", 2)],
    3: [
        (F(1, 3), "P L1 S L1 S", 1),
        (F(-1, 6), "P L1 S^2 L1 P", 1),
        (-1, "P L1 S", 2),
        (1, "P", 3),
    ],
    4: [
        (F(1, 6), "P L1 S L1 S^2 L1 P", 1),
        (F(-1, 4), "P L1 S L1 S L1 S", 1),
        (F(1, 12), "P L1 S^2 L1 S L1 P", 1),
        (F(1, 8), "P L1 S^2 L1 P L1 S", 1),
        (F(1, 4), "P L1 P L1 S^2 L1 S", 1),
        (F(1, 4), "P L1 P L1 S L1 S^2", 1),
        (F(-1, 6), "P L1 P L1 S^3 L1 P", 1),
        (F(-1, 4), "P L1 P L1 P L1 S^3", 1),
        (F(1, 2), "P L1 S L1 S", 2),
        (F(1, 4), "P L1 S L2 S", 1),
        (F(-1, 4), "P L1 S^2 L1 P", 2),
        (F(-1, 12), "P L1 S^2 L2 P", 1),
        (F(-1, 2), "P L1 P L1 S^2", 2),
        (F(-1, 4), "P L1 P L2 S^2", 1),
        (F(1, 4), "P L2 S L1 S", 1),
        (F(-1, 6), "P L2 S^2 L1 P", 1),
        (F(-1, 2), "P L2 S", 2),
        (-1, "P L1 S", 3),
        (1, "P", 4),
    ],
}

GENERATOR = {
    0: [(1, "S", 1)],
    1: [(1, "S^2 L1 P", 1), (-1, "S L1 S", 1), (2, "S", 2)],
    2: [
        (1, "S L1 S L1 S", 1),
        (-1, "S L1 S^2 L1 P", 1),
        (-1, "S^2 L1 S L1 P", 1),
        (-1, "S^2 L1 P L1 S", 1),
        (-1, "P L1 S L1 S^2", 1),
        (-1, "P L1 S^2 L1 S", 1),
        (1, "P L1 S^3 L1 P", 1),
        (1, "P L1 P L1 S^3", 1),
        (3, "S", 3),
        (-2, "S L1 S", 2),
        (-1, "S L2 S", 1),
        (2, "S^2 L1 P", 2),
        (1, "S^2 L2 P", 1),
        (2, "P L1 S^2", 2),
        (1, "P L2 S^2", 1),
    ],
}

HORI = {
    0: [(1, "P", 1)],
    1: [(1, "P", 2), (-1, "S L1 P", 1), (F(-1, 2), "P L1 S", 1)],
    2: [
        (1, "S L1 S L1 P", 1),
        (F(1, 2), "S L1 P L1 S", 1),
        (F(1, 3), "P L1 S L1 S", 1),
        (F(-2, 3), "P L1 S^2 L1 P", 1),
        (F(-1, 3), "P L1 P L1 S^2", 1),
        (-1, "S L1 P", 2),
        (-1, "S L2 P", 1),
        (1, "P", 3),
    ],
}


def evaluate(H, entries):
    """Sum of ``c * word(H_k)``; words touching absent ``H_j`` are zero."""
    from katodeprit import PolySeries, word_apply
    from katodeprit.kato import parse_word

    acc = PolySeries.zero(H.dim, "birkhoff")
    for c, w, k in entries:
        word = parse_word("+ " + w)
        if k > len(H.terms) or any(j > len(H.terms) for j in word.lie_indices):
            continue
        acc = acc + word_apply(word, H, H.terms[k - 1]).scale(c)
    return acc
