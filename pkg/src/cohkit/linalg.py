"""Pure states, density matrices and probability vectors over a fixed basis.

States are plain numpy arrays: a pure state is a 1-d complex vector, a density
matrix a 2-d complex array, a probability vector a 1-d float array.  The
``as_*`` helpers validate and return read-only copies.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import config
from .errors import ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_state(amplitudes, *, renormalize: bool = False, tol: float | None = None) -> np.ndarray:
    """Validate a pure state and return it as a read-only complex vector.

    Args:
        amplitudes: sequence of complex amplitudes in the incoherent basis.
        renormalize: if True, a state whose squared norm is within
            ``config.tolerances.renorm`` of one is rescaled instead of rejected.
        tol: normalization tolerance (default ``config.tolerances.tol``).
    """
    v = np.array(amplitudes, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"pure state must be a nonempty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("pure state has non-finite amplitudes")
    norm2 = float(np.vdot(v, v).real)
    err = abs(norm2 - 1.0)
    if err > config.tol(tol):
        if renormalize and err <= config.tolerances.renorm and norm2 > 0:
            v = v / np.sqrt(norm2)
        else:
            raise ValidationError(f"pure state is not normalized (|v|^2 = {norm2!r})")
    return _frozen(v)


def as_probs(entries, *, tol: float | None = None) -> np.ndarray:
    p = np.array(entries, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"probability vector must be a nonempty vector, got shape {p.shape}")
    t = config.tol(tol)
    if np.any(p < -t) or not np.all(np.isfinite(p)):
        raise ValidationError("probability vector has negative or non-finite entries")
    if abs(p.sum() - 1.0) > t:
        raise ValidationError(f"probability vector sums to {p.sum()!r}, not 1")
    return _frozen(p)


def density_violation(rho: np.ndarray) -> float:
    """Largest violation of hermiticity, positivity or unit trace."""
    herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return float(max(herm, max(0.0, -evals.min()), abs(np.trace(rho).real - 1.0),
                     abs(np.trace(rho).imag)))


def as_density(matrix, *, tol: float | None = None) -> np.ndarray:
    rho = np.array(matrix, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.size == 0:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValidationError("density matrix has non-finite entries")
    v = density_violation(rho)
    if v > config.tol(tol):
        raise ValidationError(f"not a density matrix (violation {v:.3g})")
    return _frozen(rho)


def is_density_matrix(matrix, tol: float | None = None) -> bool:
    try:
        as_density(matrix, tol=tol)
    except ValidationError:
        return False
    return True


def basis_state(dim: int, index: int) -> np.ndarray:
    """|index> in a ``dim``-dimensional space (0-based index)."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return _frozen(v)


def max_coherent_state(q: int, dim: int | None = None) -> np.ndarray:
    """Uniform superposition of the first ``q`` basis states, padded to ``dim``."""
    dim = q if dim is None else dim
    v = np.zeros(dim, dtype=complex)
    v[:q] = 1 / np.sqrt(q)
    return _frozen(v)


def projector(state) -> np.ndarray:
    v = np.asarray(state, dtype=complex)
    return np.outer(v, v.conj())


def dephase(state) -> np.ndarray:
    """Squared moduli of the amplitudes of a pure state."""
    v = as_state(state)
    p = np.abs(v) ** 2
    return _frozen(p / p.sum())


def support(state, zero_tol: float | None = None) -> np.ndarray:
    """Boolean mask of amplitudes whose modulus exceeds the zero threshold."""
    return np.abs(np.asarray(state)) > config.zero_tol(zero_tol)


def coherence_rank(state, zero_tol: float | None = None) -> int:
    """Number of amplitudes with modulus above the zero threshold."""
    return int(support(as_state(state), zero_tol).sum())


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``.

    Either argument may be a state vector, in which case its projector is used.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1:
        a = projector(a)
    if b.ndim == 1:
        b = projector(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # fixed argument order makes the result exactly symmetric
    if a.tobytes() > b.tobytes():
        a, b = b, a
    diff = a - b
    # hermitian difference: singular values are |eigenvalues|
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


def mix(weights: Sequence[float], states: Sequence) -> np.ndarray:
    """Density matrix sum_i w_i |s_i><s_i|."""
    w = as_probs(weights)
    vs = [as_state(s) for s in states]
    if len(vs) != w.size:
        raise ValidationError("number of weights and states differ")
    dims = {v.size for v in vs}
    if len(dims) != 1:
        raise ValidationError(f"states have different dimensions {sorted(dims)}")
    rho = sum(wi * projector(v) for wi, v in zip(w, vs))
    return _frozen(np.asarray(rho, dtype=complex))


def permutation_apply(perm, vector) -> np.ndarray:
    """Return ``w`` with ``w[perm[j]] = vector[j]`` (i.e. P_perm @ vector)."""
    v = np.asarray(vector)
    out = np.empty_like(v)
    out[np.asarray(perm)] = v
    return out
