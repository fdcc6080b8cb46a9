"""Kraus channels and structural tests for (strictly) incoherent operators."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import config
from .errors import ValidationError
from .linalg import as_density

SIO = "SIO"
ICO = "ICO"
NONE = "none"


def _nonzero(K, zero_tol):
    return np.abs(np.asarray(K)) > config.zero_tol(zero_tol)


def is_incoherent_operator(K, zero_tol: float | None = None) -> bool:
    """Every column has at most one entry above the zero threshold."""
    return bool(np.all(_nonzero(K, zero_tol).sum(axis=0) <= 1))


def is_strictly_incoherent_operator(K, zero_tol: float | None = None) -> bool:
    """Every row and every column has at most one entry above the zero threshold."""
    nz = _nonzero(K, zero_tol)
    return bool(np.all(nz.sum(axis=0) <= 1) and np.all(nz.sum(axis=1) <= 1))


class KrausChannel:
    """A channel ``rho -> sum_j K_j rho K_j^dagger`` on a fixed dimension.

    Operators are stored as read-only complex arrays.  Construction checks that
    ``max |sum K^dagger K - I| < tol`` unless ``check=False``.
    """

    def __init__(self, operators: Iterable, *, check: bool = True, tol: float | None = None):
        ops = []
        for K in operators:
            K = np.array(K, dtype=complex)
            if K.ndim != 2 or K.shape[0] != K.shape[1]:
                raise ValidationError(f"Kraus operators must be square, got {K.shape}")
            K.setflags(write=False)
            ops.append(K)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        if len({K.shape for K in ops}) != 1:
            raise ValidationError("Kraus operators have different dimensions")
        self.operators: tuple[np.ndarray, ...] = tuple(ops)
        if check:
            r = self.completeness_residual()
            if r >= config.tol(tol):
                raise ValidationError(f"Kraus operators are not complete (residual {r:.3g})")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __repr__(self):
        return f"KrausChannel(dim={self.dim}, n_ops={len(self)})"

    def completeness_residual(self) -> float:
        S = sum(K.conj().T @ K for K in self.operators)
        return float(np.abs(S - np.eye(self.dim)).max())

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(self, rho)


def classify_channel(channel: KrausChannel, zero_tol: float | None = None,
                     tol: float | None = None) -> str:
    """Return ``"SIO"``, ``"ICO"`` (incoherent but not strictly) or ``"none"``."""
    r = channel.completeness_residual()
    if r >= config.tol(tol):
        raise ValidationError(f"invalid channel: completeness residual {r:.3g}")
    if all(is_strictly_incoherent_operator(K, zero_tol) for K in channel):
        return SIO
    if all(is_incoherent_operator(K, zero_tol) for K in channel):
        return ICO
    return NONE


def apply_channel(channel: KrausChannel, rho, tol: float | None = None) -> np.ndarray:
    """Apply the channel to a density matrix or a pure state vector."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    rho = as_density(rho, tol=tol)
    if rho.shape[0] != channel.dim:
        raise ValidationError(f"dimension mismatch: state {rho.shape[0]}, channel {channel.dim}")
    out = np.zeros_like(rho)
    for K in channel:
        out += K @ rho @ K.conj().T
    return out


def decompose_sio_operator(K, zero_tol: float | None = None):
    """Split a strictly incoherent operator as ``P_perm^dagger @ diag(k)``.

    Row ``i`` of ``K`` is nonzero only in column ``perm[i]``, with value
    ``k[perm[i]]``.  Zero rows take the smallest column index not yet used.

    Returns:
        ``(perm, k)`` with ``perm`` an integer array and ``k`` a complex vector.
    """
    K = np.asarray(K, dtype=complex)
    if not is_strictly_incoherent_operator(K, zero_tol):
        raise ValidationError("operator is not strictly incoherent")
    nz = _nonzero(K, zero_tol)
    d = K.shape[0]
    perm = -np.ones(d, dtype=int)
    used = np.zeros(d, dtype=bool)
    for i in range(d):
        cols = np.flatnonzero(nz[i])
        if cols.size:
            perm[i] = cols[0]
            used[cols[0]] = True
    free = iter(np.flatnonzero(~used))
    for i in range(d):
        if perm[i] < 0:
            perm[i] = next(free)
    k = np.zeros(d, dtype=complex)
    k[perm] = K[np.arange(d), perm]
    return perm, k


def sio_operator(perm, k) -> np.ndarray:
    """Inverse of :func:`decompose_sio_operator`: ``K[i, perm[i]] = k[perm[i]]``."""
    perm = np.asarray(perm)
    k = np.asarray(k, dtype=complex)
    d = perm.size
    K = np.zeros((d, d), dtype=complex)
    K[np.arange(d), perm] = k[perm]
    return K


def compose(outer: KrausChannel, inner: KrausChannel, drop_tol: float = 0.0) -> KrausChannel:
    """Channel ``outer ∘ inner`` with operators ``{A @ B}``.

    Products whose largest entry is at most ``drop_tol`` are discarded.
    """
    if outer.dim != inner.dim:
        raise ValidationError("cannot compose channels of different dimension")
    prods = [A @ B for A in outer for B in inner]
    kept = [P for P in prods if np.abs(P).max() > drop_tol]
    return KrausChannel(kept or prods[:1], check=False)


def embed(channel: KrausChannel, dim: int, weights: Sequence[float] | None = None) -> KrausChannel:
    """Extend a channel on the first coordinates to ``dim`` dimensions.

    Operator ``j`` becomes ``K_j ⊕ sqrt(w_j) I`` on the extra coordinates,
    which keeps the extension complete whenever ``sum_j w_j = 1``.
    """
    n = channel.dim
    if dim < n:
        raise ValidationError("target dimension smaller than the channel")
    w = np.full(len(channel), 1.0 / len(channel)) if weights is None else np.asarray(weights)
    ops = []
    for K, wj in zip(channel, w):
        E = np.zeros((dim, dim), dtype=complex)
        E[:n, :n] = K
        E[n:, n:] = np.sqrt(wj) * np.eye(dim - n)
        ops.append(E)
    return KrausChannel(ops, check=False)
