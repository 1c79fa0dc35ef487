"""Exact linear algebra over the rationals and over the scalar-function ring.

Two solvers live here:

* plain Gauss-Jordan over `Fraction`, with a Farkas-style infeasibility
  witness (a rational row combination y with y.A = 0 but y.b != 0) when a
  system has no solution, and
* unit-pivot elimination over the scalar-function ring, which only ever
  divides by declared-nonvanishing units and fails loudly otherwise.

Float rank estimation (for probabilistic spanning/transversality checks)
is delegated to numpy.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .symexpr import ScalarFn


class FrameSolveFailure(Exception):
    """Re-expansion in a frame would require division by a non-unit."""


def rat_solve(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> tuple[Optional[list[Fraction]], Optional[list[Fraction]]]:
    """Solve A x = b exactly.

    Returns ``(solution, None)`` for a consistent system (free variables
    set to zero) or ``(None, witness)`` where ``witness . A = 0`` and
    ``witness . b != 0`` certifies infeasibility.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    # track row operations applied to the identity for the witness
    t = [[Fraction(1 if i == j else 0) for j in range(m)] for i in range(m)]
    piv_rows: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        t[r], t[p] = t[p], t[r]
        f = a[r][c]
        a[r] = [x / f for x in a[r]]
        t[r] = [x / f for x in t[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                g = a[i][c]
                a[i] = [x - g * y for x, y in zip(a[i], a[r])]
                t[i] = [x - g * y for x, y in zip(t[i], t[r])]
        piv_rows.append((r, c))
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            return None, [x / a[i][n] for x in t[i]]
    x = [Fraction(0)] * n
    for i, c in piv_rows:
        x[c] = a[i][n]
    return x, None


def rat_nullspace(rows: Sequence[Sequence[Fraction]], n: Optional[int] = None) -> list[list[Fraction]]:
    """Basis of the right nullspace of A (rows over Fraction)."""
    m = len(rows)
    if n is None:
        n = len(rows[0]) if m else 0
    a = [[Fraction(x) for x in row] for row in rows]
    piv: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        f = a[r][c]
        a[r] = [x / f for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                g = a[i][c]
                a[i] = [x - g * y for x, y in zip(a[i], a[r])]
        piv.append((r, c))
        r += 1
        if r == m:
            break
    piv_cols = {c for _, c in piv}
    basis = []
    for c in range(n):
        if c in piv_cols:
            continue
        v = [Fraction(0)] * n
        v[c] = Fraction(1)
        for i, pc in piv:
            v[pc] = -a[i][c]
        basis.append(v)
    return basis


def rat_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    m = len(rows)
    n = len(rows[0]) if m else 0
    return n - len(rat_nullspace(rows, n))


def unit_pivot_solve(
    rows: list[list[ScalarFn]],
    rhs_cols: list[list[ScalarFn]],
    full_column_rank: bool = True,
) -> list[list[ScalarFn]]:
    """Solve M X = B over the scalar-function ring using unit pivots only.

    ``rows`` is an m x n matrix, ``rhs_cols`` a list of right-hand-side
    columns (length m each).  With ``full_column_rank`` every column must
    receive a unit pivot (frame re-expansion); otherwise pivotless columns
    become free variables set to zero and only consistency is enforced.
    Raises FrameSolveFailure when elimination would divide by a non-unit
    or the system is inconsistent.  Returns solution columns (length n).
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [list(r) for r in rows]
    b = [list(col) for col in rhs_cols]  # columns
    piv: list[tuple[int, int]] = []
    used_rows: set[int] = set()
    zero = rows[0][0].chart.zero() if m and n else None
    for c in range(n):
        p = None
        for i in range(m):
            if i not in used_rows and a[i][c].is_unit():
                p = i
                break
        if p is None:
            if full_column_rank:
                for i in range(m):
                    if i not in used_rows and not a[i][c].is_zero():
                        raise FrameSolveFailure(
                            f"no unit pivot available for column {c} "
                            f"(leading candidate: {a[i][c]})"
                        )
                raise FrameSolveFailure(
                    f"column {c} has no pivot: frame not independent"
                )
            continue
        inv = a[p][c].unit_inverse()
        a[p] = [x * inv for x in a[p]]
        for col in b:
            col[p] = col[p] * inv
        for i in range(m):
            if i != p and not a[i][c].is_zero():
                g = a[i][c]
                a[i] = [x - g * y for x, y in zip(a[i], a[p])]
                for col in b:
                    col[i] = col[i] - g * col[p]
        piv.append((p, c))
        used_rows.add(p)
    sols = []
    for col in b:
        for i in range(m):
            if i not in used_rows and not col[i].is_zero():
                raise FrameSolveFailure(
                    f"inconsistent frame expansion: residual {col[i]} in row {i}"
                )
        # free variables are zero, so pivot rows read off directly
        x: list[ScalarFn] = [zero] * n
        for p, c in piv:
            x[c] = col[p]
        sols.append(x)
    return sols


def scalar_det(rows: list[list[ScalarFn]]) -> ScalarFn:
    """Exact determinant of a square ScalarFn matrix (Laplace expansion)."""
    n = len(rows)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return rows[0][0]
    chart = rows[0][0].chart
    total = chart.zero()
    for t in range(n):
        entry = rows[0][t]
        if entry.is_zero():
            continue
        sub = [[row[c] for c in range(n) if c != t] for row in rows[1:]]
        term = entry * scalar_det(sub)
        total = total + (term if t % 2 == 0 else -term)
    return total


def float_rank(rows: Sequence[Sequence[float]], tol: Optional[float] = None) -> int:
    """Numeric rank with numpy's scale-relative tolerance by default."""
    arr = np.array(rows, dtype=float)
    if arr.size == 0:
        return 0
    return int(np.linalg.matrix_rank(arr, tol=tol))
