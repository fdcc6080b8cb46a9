"""Dense phase-one simplex for small feasibility problems ``A x = b, x >= 0``."""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass(frozen=True)
class PhaseOneResult:
    feasible: bool
    x: np.ndarray | None
    # sum of artificial variables at the optimum, i.e. the L1 constraint residual
    infeasibility: float
    iterations: int


def phase_one(A, b, *, feas_tol: float = 1e-8, pivot_tol: float = 1e-12,
              max_iter: int = 20000) -> PhaseOneResult:
    """Find ``x >= 0`` with ``A x = b`` by minimizing the sum of artificials.

    Dantzig's rule is used until ``max_iter // 4`` pivots, then Bland's rule
    takes over so that degenerate cycling cannot stall the solve.

    Returns a :class:`PhaseOneResult`; ``feasible`` is True when the optimal
    artificial sum is at most ``feas_tol``.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).ravel()
    m, n = A.shape
    if b.size != m:
        raise ValueError("A and b have incompatible shapes")
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m)

    it = 0
    bland_after = max_iter // 4
    while it < max_iter:
        red = T[m, :-1]
        if it < bland_after:
            j = int(np.argmin(red))
            if red[j] >= -pivot_tol:
                break
        else:
            cand = np.flatnonzero(red < -pivot_tol)
            if cand.size == 0:
                break
            j = int(cand[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > pivot_tol)
        if rows.size == 0:
            # unbounded direction cannot occur for a phase-one objective bounded by 0
            break
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-15 * max(1.0, abs(best))]
        i = int(ties[np.argmin(basis[ties])])
        T[i] /= T[i, j]
        others = np.arange(m + 1) != i
        T[others] -= np.outer(T[others, j], T[i])
        T[np.abs(T) < 1e-15] = 0.0
        basis[i] = j
        it += 1

    infeas = float(-T[m, -1])
    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    x = np.clip(x[:n], 0.0, None)
    feasible = infeas <= feas_tol
    return PhaseOneResult(feasible, x if feasible else None, max(infeas, 0.0), it)
