"""Small exact linear-algebra kit: ranks, inverses, nullspaces over Q.

Vectors destined for the cone engine are scaled to primitive integer tuples
(coordinates coprime) so the hot loops run on plain integers rather than
Fraction objects.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to coprime integers, preserving direction."""
    fracs = [Fraction(v) for v in vec]
    denom_lcm = 1
    for f in fracs:
        d = f.denominator
        denom_lcm = denom_lcm * d // gcd(denom_lcm, d)
    ints = [int(f * denom_lcm) for f in fracs]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def rank(rows: Iterable[Sequence[Fraction]]) -> int:
    """Rank of a list of rational vectors (Gaussian elimination over Q)."""
    mat = [list(map(Fraction, r)) for r in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        pv = mat[r][c]
        for i in range(r + 1, len(mat)):
            f = mat[i][c]
            if f:
                ratio = f / pv
                row_i, row_r = mat[i], mat[r]
                for j in range(c, ncols):
                    row_i[j] -= ratio * row_r[j]
        r += 1
        if r == len(mat):
            break
    return r


def independent_prefix(rows: Sequence[Sequence[int]], need: int) -> list[int]:
    """Indices of the first `need` linearly independent rows, in input order.

    Returns fewer indices if the rows do not reach the requested rank.
    """
    basis: list[list[Fraction]] = []
    chosen: list[int] = []
    for idx, row in enumerate(rows):
        vec = [Fraction(v) for v in row]
        for b in basis:
            lead = next((j for j, v in enumerate(b) if v != 0), None)
            if lead is not None and vec[lead] != 0:
                f = vec[lead] / b[lead]
                for j in range(len(vec)):
                    vec[j] -= f * b[j]
        if any(v != 0 for v in vec):
            basis.append(vec)
            chosen.append(idx)
            if len(chosen) == need:
                break
    return chosen


def inverse(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Exact inverse of a square rational matrix (Gauss-Jordan)."""
    n = len(matrix)
    aug = [
        [Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    for c in range(n):
        pivot = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        aug[c], aug[pivot] = aug[pivot], aug[c]
        pv = aug[c][c]
        aug[c] = [v / pv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def nullspace(rows: Sequence[Sequence[Fraction]], dim: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of {v : row . v = 0 for all rows} in R^dim."""
    mat = [list(map(Fraction, r)) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(dim):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        pv = mat[r][c]
        mat[r] = [v / pv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * dim
        vec[fc] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            vec[pc] = -mat[row_idx][fc]
        basis.append(primitive(vec))
    return basis


def affine_rank(points: Sequence[Sequence[Fraction]], directions: Sequence[Sequence[Fraction]] = ()) -> int:
    """Affine rank of a point set, optionally augmented with ray directions.

    A set with affine rank k spans a (k-1)-dimensional affine subspace; rays
    count as additional difference vectors anchored anywhere on the set.
    """
    pts = [tuple(map(Fraction, p)) for p in points]
    dirs = [tuple(map(Fraction, d)) for d in directions]
    if not pts:
        return rank(dirs)
    base = pts[0]
    rows = [tuple(a - b for a, b in zip(p, base)) for p in pts[1:]]
    rows.extend(dirs)
    return rank(rows) + 1
