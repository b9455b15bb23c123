"""Exact feasibility of small linear programs over the integers.

Decides ``{x >= 0 : A x = b}`` with a fraction-free (integer-preserving)
phase-I simplex and Bland's rule.  All tableau entries stay integers, every
division is exact, and nothing is rounded.
"""
from __future__ import annotations

from typing import Sequence

from .boolfn import BooleanFunction, vertex_coordinates


def feasible(A: Sequence[Sequence[int]], b: Sequence[int]) -> bool:
    m = len(A)
    if m == 0:
        return True
    ncol = len(A[0])
    total = ncol + m
    rows = []
    for i in range(m):
        s = -1 if b[i] < 0 else 1
        rows.append([s * int(v) for v in A[i]] + [int(j == i) for j in range(m)] + [s * int(b[i])])
    basis = list(range(ncol, total))
    det = 1  # previous pivot; each row is scaled by it

    while True:
        in_basis = set(basis)
        art_rows = [r for r, bv in zip(rows, basis) if bv >= ncol]
        enter = None
        for j in range(total):
            if j in in_basis:
                continue
            reduced = (det if j >= ncol else 0) - sum(r[j] for r in art_rows)
            if reduced < 0:
                enter = j
                break
        if enter is None:
            break

        leave = None
        for i, r in enumerate(rows):
            a = r[enter]
            if a <= 0:
                continue
            if leave is None:
                leave = i
                continue
            lhs = r[-1] * rows[leave][enter]
            rhs = rows[leave][-1] * a
            if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
                leave = i
        if leave is None:
            # phase I is bounded below by zero; an unbounded ray cannot occur
            raise AssertionError("phase-I simplex found an unbounded direction")

        pivot_row = rows[leave]
        piv = pivot_row[enter]
        for i in range(m):
            if i == leave:
                continue
            r = rows[i]
            f = r[enter]
            rows[i] = [(x * piv - f * y) // det for x, y in zip(r, pivot_row)]
        det = piv
        basis[leave] = enter

    return all(r[-1] == 0 for r, bv in zip(rows, basis) if bv >= ncol)


def hulls_intersect(plus: Sequence[Sequence[int]], minus: Sequence[Sequence[int]]) -> bool:
    """Whether conv(plus) and conv(minus) share a point (integer coordinates)."""
    if not plus or not minus:
        return False
    dim = len(plus[0])
    cols = [list(p) + [1, 0] for p in plus] + [[-c for c in q] + [0, 1] for q in minus]
    A = [[c[r] for c in cols] for r in range(dim + 2)]
    return feasible(A, [0] * dim + [1, 1])


def linearly_separable(f: BooleanFunction) -> bool:
    """True iff some hyperplane strictly separates the true and false vertices.

    Finite point sets are strictly separable exactly when their convex hulls
    are disjoint, which is what the LP decides.
    """
    plus, minus = [], []
    for v in range(f.n_vertices):
        (plus if f.table >> v & 1 else minus).append(vertex_coordinates(f.n, v))
    return not hulls_intersect(plus, minus)
