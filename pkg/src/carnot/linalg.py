"""Exact row reduction over the rationals.

``rank`` uses fraction-free (Bareiss) elimination on integer rows; ``rref``
and ``nullspace`` work directly with Fractions, which is plenty for the
desk-scale systems that appear here.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import List, Sequence, Tuple

Matrix = List[List[Fraction]]


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> List[List[int]]:
    out = []
    for row in rows:
        d = lcm(*(Fraction(x).denominator for x in row)) if row else 1
        out.append([int(Fraction(x) * d) for x in row])
    return out


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank via Bareiss fraction-free elimination (all divisions are exact)."""
    a = _integer_rows(rows)
    if not a or not a[0]:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    r = 0
    prev = 1
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = next((i for i in range(r, n_rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, n_rows):
            ai = a[i]
            f = ai[c]
            for j in range(c, n_cols):
                ai[j] = (p * ai[j] - f * a[r][j]) // prev
        prev = p
        r += 1
    return r


def rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns; zero rows are dropped."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    n_rows, n_cols = len(m), len(m[0])
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = next((i for i in range(r, n_rows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], n_cols: int) -> Matrix:
    """Basis of {v : A v = 0}, one vector per free column, in reduced form."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    red, pivots = rref(rows)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def reduce_against(vec: Sequence[Fraction], red: Matrix, pivots: Sequence[int]) -> List[Fraction]:
    """Remainder of ``vec`` after elimination by an RREF basis."""
    v = [Fraction(x) for x in vec]
    for row, pc in zip(red, pivots):
        if v[pc]:
            f = v[pc]
            v = [x - f * y for x, y in zip(v, row)]
    return v
