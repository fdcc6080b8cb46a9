"""Single-state convertibility tests: pure to pure, qubit ICO, mixed to pure.

Qubit Bloch vectors use the z-axis as the incoherent basis:
``rho = (I + rx X + ry Y + rz Z) / 2``, so ``(0, 0, 1)`` is basis state 0 and
``(0, 0, -1)`` basis state 1 (0-based labels).
"""

from __future__ import annotations

import dataclasses
from typing import Iterator

import numpy as np

from . import config
from .errors import NotMajorizedError, ValidationError
from .linalg import as_density, as_state, dephase
from .majorization import majorizes, transfer_matrix
from .preorder import PairInstance, shared_d_channel
from .sio import KrausChannel

_PAULI = (np.array([[0, 1], [1, 0]], dtype=complex),
          np.array([[0, -1j], [1j, 0]], dtype=complex),
          np.array([[1, 0], [0, -1]], dtype=complex))


@dataclasses.dataclass(frozen=True)
class BlochVector:
    rx: float
    ry: float
    rz: float

    def __post_init__(self):
        n2 = self.rx ** 2 + self.ry ** 2 + self.rz ** 2
        if not np.isfinite(n2) or n2 > 1 + config.tol():
            raise ValidationError(f"Bloch vector has norm^2 {n2!r} > 1")

    @property
    def transverse2(self) -> float:
        return self.rx ** 2 + self.ry ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])


def bloch_to_density(r: BlochVector) -> np.ndarray:
    rho = np.eye(2, dtype=complex) / 2
    for comp, P in zip(r.as_array(), _PAULI):
        rho = rho + comp * P / 2
    return rho


def density_to_bloch(rho) -> BlochVector:
    rho = as_density(rho)
    if rho.shape != (2, 2):
        raise ValidationError("Bloch vectors describe qubits only")
    return BlochVector(*(float(np.trace(rho @ P).real) for P in _PAULI))


def state_to_bloch(state) -> BlochVector:
    v = as_state(state)
    return density_to_bloch(np.outer(v, v.conj()))


def pure_convertible(psi, phi, tol: float | None = None) -> bool:
    """Can ``|psi>`` be turned into ``|phi>`` by a free operation?

    True iff the dephasing of ``psi`` is majorized by that of ``phi``.
    """
    psi, phi = as_state(psi), as_state(phi)
    if psi.size != phi.size:
        raise ValidationError(f"dimension mismatch: {psi.size} vs {phi.size}")
    return majorizes(dephase(psi), dephase(phi), tol)


def pure_conversion_channel(psi, phi, tol: float | None = None) -> KrausChannel:
    """SIO channel mapping ``|psi>`` to ``|phi>``.

    Raises:
        NotMajorizedError: if the conversion is impossible.
    """
    psi, phi = as_state(psi), as_state(phi)
    if not pure_convertible(psi, phi, tol):
        raise NotMajorizedError("source dephasing is not majorized by the target's")
    D = transfer_matrix(dephase(psi), dephase(phi), tol)
    return shared_d_channel(PairInstance(psi, psi, phi, phi), D, tol)


def qubit_ico_convertible(r: BlochVector, s: BlochVector, tol: float | None = None) -> bool:
    """Qubit ICO criterion on Bloch vectors ``r -> s``.

    Requires ``sx²+sy² <= rx²+ry²`` and
    ``sz² <= 1 - (1 - rz²)/(rx²+ry²) * (sx²+sy²)``.  When the source has no
    transverse component the target must have none either.
    """
    t = config.tol(tol)
    rt, st = r.transverse2, s.transverse2
    if rt <= t:
        return bool(st <= t)
    if st > rt + t:
        return False
    return bool(s.rz ** 2 <= 1 - (1 - r.rz ** 2) / rt * st + t)


def incoherent_blocks(rho, zero_tol: float | None = None) -> list[list[int]]:
    """Connected components of the graph with edges where ``|rho_ij|`` is nonzero."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    adj = np.abs(rho) > config.zero_tol(zero_tol)
    seen = np.zeros(d, dtype=bool)
    blocks = []
    for start in range(d):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(int(j))
        blocks.append(sorted(comp))
    return blocks


def _rank_one(sub: np.ndarray, tol: float) -> bool:
    ev = np.linalg.eigvalsh(sub)
    return bool(ev.size < 2 or ev[-2] <= tol)


def _block_ok(rho, block, target, tol) -> bool:
    diag = np.real(np.diag(rho))[block]
    tr = diag.sum()
    if tr <= config.zero_tol():
        return True
    if not _rank_one(rho[np.ix_(block, block)], tol):
        return False
    p = np.zeros(rho.shape[0])
    p[block] = diag / tr
    return majorizes(p, target, tol)


def _partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def mixed_to_pure_convertible(rho, phi, *, partition: str = "support",
                              tol: float | None = None,
                              zero_tol: float | None = None) -> bool:
    """Can the mixed state ``rho`` be turned into ``|phi>`` by an SIO?

    The basis is split into incoherent blocks; every block with nonzero trace
    must compress ``rho`` to a pure state whose dephasing is majorized by that
    of ``phi``.

    Args:
        partition: ``"support"`` uses the connected components of the
            off-diagonal support of ``rho``.  ``"search"`` instead accepts any
            partition of those components into sub-blocks, found by exhaustive
            search (components of size at most 10).  The search also
            recognizes conversions of coherent mixed blocks into incoherent
            targets, which the support partition rejects.
    """
    rho = as_density(rho, tol=tol)
    phi = as_state(phi)
    if rho.shape[0] != phi.size:
        raise ValidationError(f"dimension mismatch: {rho.shape[0]} vs {phi.size}")
    t = config.tol(tol)
    target = dephase(phi)
    comps = incoherent_blocks(rho, zero_tol)
    if partition == "support":
        return all(_block_ok(rho, b, target, t) for b in comps)
    if partition != "search":
        raise ValidationError(f"unknown partition mode {partition!r}")
    for comp in comps:
        if len(comp) > 10:
            raise ValidationError("partition search supports blocks of size <= 10")
        if not any(all(_block_ok(rho, b, target, t) for b in part) for part in _partitions(comp)):
            return False
    return True
