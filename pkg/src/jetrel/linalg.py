"""Dense exact linear algebra over Q (fractions.Fraction).

Small systems only: structure-constant solves, multiplier-lattice ranks,
cohomology blocks, membership back-substitution.  Rows are lists of
Fractions; matrices are lists of rows.  Everything is fraction-free in
spirit but implemented directly over Fraction, which is exact and fast
enough at the block sizes this engine produces.
"""

from __future__ import annotations

from fractions import Fraction

F0 = Fraction(0)
F1 = Fraction(1)

Matrix = list[list[Fraction]]


def rref(matrix: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rref, pivot column indices)."""
    m = [row[:] for row in matrix]
    if not m:
        return m, []
    rows, cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = F1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(matrix: Matrix) -> int:
    _, pivots = rref(matrix)
    return len(pivots)


def solve(matrix: Matrix, rhs: list[Fraction]) -> list[Fraction] | None:
    """One solution of A x = b, or None if inconsistent."""
    if not matrix:
        return [] if all(v == 0 for v in rhs) else None
    cols = len(matrix[0])
    aug = [row[:] + [b] for row, b in zip(matrix, rhs)]
    red, pivots = rref(aug)
    for row in red:
        if all(v == 0 for v in row[:-1]) and row[-1] != 0:
            return None
    x = [F0] * cols
    for r, c in enumerate(pivots):
        if c == cols:
            return None  # pivot in the augmented column
        x[c] = red[r][-1]
    return x


def sparse_rank(rows: list[dict[int, Fraction]]) -> int:
    """Exact rank of a sparse matrix given as {column: value} rows.

    Rows are scaled to integers and eliminated fraction-free with content
    stripping, which is much faster than dense Fraction arithmetic on the
    large, very sparse systems produced by the cohomology blocks.
    """
    pivots: dict[int, dict[int, int]] = {}
    rank_ = 0
    for frow in rows:
        row = _int_row(frow)
        while row:
            c = min(row)
            prow = pivots.get(c)
            if prow is None:
                pivots[c] = _strip_content(row)
                rank_ += 1
                break
            a, b = prow[c], row[c]
            new = {k: a * v for k, v in row.items()}
            for k, v in prow.items():
                s = new.get(k, 0) - b * v
                if s:
                    new[k] = s
                else:
                    new.pop(k, None)
            row = _strip_content(new)
    return rank_


def _int_row(frow: dict[int, Fraction]) -> dict[int, int]:
    lcm = 1
    for v in frow.values():
        d = v.denominator
        if d != 1:
            lcm = lcm * d // _gcd(lcm, d)
    return {k: int(v * lcm) for k, v in frow.items() if v}


def _strip_content(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = _gcd(g, abs(v))
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def _gcd(a: int, b: int) -> int:
    import math

    return math.gcd(a, b)


def nullspace(matrix: Matrix, cols: int | None = None) -> list[list[Fraction]]:
    """Basis of the kernel of A (columns inferred from the first row)."""
    if not matrix:
        return [] if not cols else [[F1 if i == j else F0 for i in range(cols)] for j in range(cols)]
    n = len(matrix[0])
    red, pivots = rref(matrix)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [F0] * n
        v[fc] = F1
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis
