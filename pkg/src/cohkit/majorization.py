"""Majorization, doubly stochastic matrices and Birkhoff decompositions.

Permutations are integer arrays ``perm`` with ``perm[j] = pi(j)`` (0-based).
The associated matrix follows ``P[i, j] = 1 if i == pi(j)``, so that
``P @ e_j = e_{pi(j)}``.  All conversions go through
:func:`permutation_to_matrix`.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Sequence

import numpy as np

from . import config
from .errors import NotMajorizedError, ValidationError
from .linalg import as_probs
from .lp import phase_one

# entries below this are treated as structural zeros during decomposition
BIRKHOFF_CUTOFF = 1e-12


def as_permutation(perm, dim: int | None = None) -> np.ndarray:
    p = np.asarray(perm)
    if p.ndim != 1 or (p.size and not np.issubdtype(p.dtype, np.integer)):
        raise ValidationError("permutation must be a 1-d integer sequence")
    p = p.astype(int)
    if dim is not None and p.size != dim:
        raise ValidationError(f"permutation has length {p.size}, expected {dim}")
    if sorted(p.tolist()) != list(range(p.size)):
        raise ValidationError(f"not a permutation of 0..{p.size - 1}: {p.tolist()}")
    return p


def permutation_to_matrix(perm) -> np.ndarray:
    """Matrix ``P`` with ``P[i, j] = delta(i, perm[j])``."""
    p = as_permutation(perm)
    P = np.zeros((p.size, p.size))
    P[p, np.arange(p.size)] = 1.0
    return P


def matrix_to_permutation(P) -> np.ndarray:
    P = np.asarray(P)
    if not (np.all((P == 0) | (P == 1)) and np.all(P.sum(0) == 1) and np.all(P.sum(1) == 1)):
        raise ValidationError("not a permutation matrix")
    return np.argmax(P, axis=0)


def inverse_permutation(perm) -> np.ndarray:
    p = as_permutation(perm)
    inv = np.empty_like(p)
    inv[p] = np.arange(p.size)
    return inv


def stochasticity_residual(D) -> float:
    D = np.asarray(D, dtype=float)
    return float(max(np.abs(D.sum(0) - 1).max(), np.abs(D.sum(1) - 1).max(),
                     max(0.0, -D.min())))


def is_doubly_stochastic(D, tol: float | None = None) -> bool:
    D = np.asarray(D)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        return False
    return stochasticity_residual(D) <= config.tol(tol)


def as_doubly_stochastic(D, tol: float | None = None) -> np.ndarray:
    D = np.array(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.size == 0:
        raise ValidationError(f"doubly stochastic matrix must be square, got {D.shape}")
    r = stochasticity_residual(D)
    if r > config.tol(tol):
        raise ValidationError(f"matrix is not doubly stochastic (residual {r:.3g})")
    return D


def majorizes(x, y, tol: float | None = None) -> bool:
    """True iff ``x`` is majorized by ``y`` (x ≺ y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"dimension mismatch: {x.shape} vs {y.shape}")
    t = config.tol(tol)
    cx = np.cumsum(np.sort(x)[::-1])
    cy = np.cumsum(np.sort(y)[::-1])
    return bool(np.all(cx <= cy + t) and abs(cx[-1] - cy[-1]) <= t)


def prefix_sums(x) -> np.ndarray:
    """Cumulative sums of ``x`` sorted in descending order."""
    return np.cumsum(np.sort(np.asarray(x, dtype=float))[::-1])


def _sort_desc(x: np.ndarray) -> np.ndarray:
    # stable on the original index so ties resolve deterministically
    return np.argsort(-x, kind="stable")


def transfer_matrix(x, y, tol: float | None = None) -> np.ndarray:
    """Doubly stochastic ``D`` with ``D @ y = x`` for ``x ≺ y``.

    Built from at most ``d - 1`` T-transforms acting on the descending
    rearrangements, then conjugated back by the sorting permutations.

    Raises:
        NotMajorizedError: if ``x`` is not majorized by ``y``.
    """
    x = as_probs(x, tol=tol)
    y = as_probs(y, tol=tol)
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not majorizes(x, y, tol):
        raise NotMajorizedError("x is not majorized by y")
    d = x.size
    ix, iy = _sort_desc(x), _sort_desc(y)
    xs, cur = x[ix].copy(), y[iy].copy()
    Ds = np.eye(d)
    eps = 1e-15
    for _ in range(4 * d):
        above = np.flatnonzero(cur > xs + eps)
        if above.size == 0:
            break
        j = above[-1]
        below = np.flatnonzero(cur[j + 1:] < xs[j + 1:] - eps)
        if below.size == 0:
            break
        k = j + 1 + below[0]
        delta = min(cur[j] - xs[j], xs[k] - cur[k])
        lam = 1.0 - delta / (cur[j] - cur[k])
        hit_j = cur[j] - xs[j] <= xs[k] - cur[k]
        # T = lam*I + (1-lam)*(swap j,k) only touches rows j and k
        cj, ck = cur[j], cur[k]
        cur[j], cur[k] = lam * cj + (1 - lam) * ck, lam * ck + (1 - lam) * cj
        if hit_j:
            cur[j] = xs[j]
        else:
            cur[k] = xs[k]
        rj, rk = Ds[j].copy(), Ds[k]
        Ds[j] = lam * rj + (1 - lam) * rk
        Ds[k] = lam * rk + (1 - lam) * rj
    Sx = np.eye(d)[ix]
    Sy = np.eye(d)[iy]
    D = Sx.T @ Ds @ Sy
    res = np.abs(D @ y - x).max()
    if res > config.tol(tol):
        raise NotMajorizedError(f"T-transform construction left residual {res:.3g}")
    return D


@dataclasses.dataclass(frozen=True)
class BirkhoffDecomposition:
    """Convex combination ``sum_n weights[n] * P(perms[n])``."""

    weights: tuple[float, ...]
    perms: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(zip(self.weights, (np.array(p) for p in self.perms)))

    @property
    def dim(self) -> int:
        return len(self.perms[0]) if self.perms else 0

    def matrix(self) -> np.ndarray:
        d = self.dim
        M = np.zeros((d, d))
        for w, p in self:
            M[p, np.arange(d)] += w
        return M


def recompose(decomp: BirkhoffDecomposition) -> np.ndarray:
    return decomp.matrix()


def _augment(col, adj, row_of_col, col_of_row, seen) -> bool:
    # Kuhn's augmenting path search; recursion depth is at most dim
    for r in adj[col]:
        if seen[r]:
            continue
        seen[r] = True
        if col_of_row[r] < 0 or _augment(col_of_row[r], adj, row_of_col, col_of_row, seen):
            row_of_col[col] = r
            col_of_row[r] = col
            return True
    return False


def _perfect_matching(adj, row_of_col: list, col_of_row: list) -> bool:
    """Complete a partial matching in place; ``adj[j]`` lists rows allowed for column j."""
    d = len(adj)
    for j in range(d):
        if row_of_col[j] < 0 and not _augment(j, adj, row_of_col, col_of_row, [False] * d):
            return False
    return True


def birkhoff_decompose(D, tol: float | None = None) -> BirkhoffDecomposition:
    """Write a doubly stochastic matrix as a convex combination of permutations.

    Each round finds a perfect matching on the current support (reusing the
    previous matching and repairing it with augmenting paths), subtracts the
    smallest matched entry, and zeroes entries below ``BIRKHOFF_CUTOFF``.
    Every round moves the remainder to a strictly smaller face of the Birkhoff
    polytope, so at most ``(d-1)**2 + 1`` terms are produced.
    """
    R = as_doubly_stochastic(D, tol).copy()
    d = R.shape[0]
    R[R < BIRKHOFF_CUTOFF] = 0.0
    row_of_col = [-1] * d
    col_of_row = [-1] * d
    cols = np.arange(d)
    weights: list[float] = []
    perms: list[tuple[int, ...]] = []
    remaining = 1.0
    while remaining > BIRKHOFF_CUTOFF:
        support = (R.T > 0).tolist()
        adj = [[i for i, on in enumerate(col) if on] for col in support]
        for j in range(d):
            i = row_of_col[j]
            if i >= 0 and not support[j][i]:
                row_of_col[j] = col_of_row[i] = -1
        if not _perfect_matching(adj, row_of_col, col_of_row):
            if R.max() <= config.tol(tol):
                break
            raise ValidationError("support has no perfect matching; matrix is not doubly stochastic")
        rows = np.array(row_of_col)
        vals = R[rows, cols]
        k = int(np.argmin(vals))
        w = float(vals[k])
        R[rows, cols] -= w
        R[rows[k], k] = 0.0
        R[R < BIRKHOFF_CUTOFF] = 0.0
        weights.append(w)
        perms.append(tuple(row_of_col))
        remaining -= w
    return BirkhoffDecomposition(tuple(weights), tuple(perms))


def _block_labels(blocks: Sequence[Iterable[int]], d: int) -> np.ndarray:
    label = -np.ones(d, dtype=int)
    for b, idx in enumerate(blocks):
        for i in idx:
            if label[i] >= 0:
                raise ValidationError(f"index {i} appears in two blocks")
            label[i] = b
    if np.any(label < 0):
        raise ValidationError("blocks do not cover every index")
    return label


def block_birkhoff_decompose(D, blocks: Sequence[Iterable[int]],
                             tol: float | None = None) -> BirkhoffDecomposition:
    """Birkhoff decomposition whose permutations map every block onto itself.

    Args:
        D: doubly stochastic matrix, block diagonal w.r.t. ``blocks``.
        blocks: partition of ``range(dim)``.
    """
    D = as_doubly_stochastic(D, tol)
    label = _block_labels(blocks, D.shape[0])
    off = label[:, None] != label[None, :]
    if np.any(np.abs(D[off]) > config.tol(tol)):
        raise ValidationError("matrix is not block diagonal with respect to the given blocks")
    D = D.copy()
    D[off] = 0.0
    dec = birkhoff_decompose(D, tol)
    for _, p in dec:
        if np.any(label[p] != label):
            raise ValidationError("decomposition produced a block-mixing permutation")
    return dec


def d_majorizes(p, q, p2, q2, *, return_witness: bool = False,
                tol: float | None = None):
    """Does a column-stochastic ``D`` exist with ``D p = p2`` and ``D q = q2``?

    Solved as a phase-one LP over the ``d*d`` entries of ``D``.  A feasible
    verdict additionally requires the extracted witness to reproduce both
    products to within 1e-8.

    Returns:
        ``bool``, or ``(bool, D_or_None)`` when ``return_witness`` is set.
    """
    vecs = [np.asarray(v, dtype=float) for v in (p, q, p2, q2)]
    if any(v.ndim != 1 for v in vecs) or len({v.size for v in vecs}) != 1:
        raise ValidationError("all four vectors must be 1-d with equal length")
    p, q, p2, q2 = vecs
    d = p.size
    # x[i*d + j] = D[i, j]
    A = np.zeros((3 * d, d * d))
    b = np.zeros(3 * d)
    for i in range(d):
        A[i, i * d:(i + 1) * d] = p
        A[d + i, i * d:(i + 1) * d] = q
        A[2 * d + i, i::d] = 1.0
    b[:d], b[d:2 * d], b[2 * d:] = p2, q2, 1.0
    res = phase_one(A, b, feas_tol=1e-8)
    D = None
    ok = False
    if res.feasible:
        D = res.x.reshape(d, d)
        err = max(np.abs(D @ p - p2).max(), np.abs(D @ q - q2).max(),
                  np.abs(D.sum(0) - 1).max())
        ok = bool(err < 1e-8)
        if not ok:
            D = None
    return (ok, D) if return_witness else ok
