"""Simultaneous SIO transformations of two pure states.

Decides and constructs channels with ``Phi(|phi><phi|) = |alpha><alpha|`` and
``Phi(|psi><psi|) = |beta><beta|``.

Conventions
-----------
Doubly stochastic matrices have rows indexed by input coordinates (those of
``phi``, ``psi``) and columns by output coordinates (``alpha``, ``beta``), so
``D1 @ dephase(alpha) = dephase(phi)``.  A Birkhoff term ``perm`` pairs output
``j`` with input ``perm[j]``, and the matching Kraus operator is nonzero only
at entries ``(j, perm[j])``.

A certificate lives in the caller's coordinates.  Its permutations ``pi1`` and
``pi2`` bring the instance into the *canonical frame*

* inputs  ``[0, s1)``: phi != 0, psi != 0               (block 1)
* inputs  ``[s1, r)``: phi != 0, psi == 0               (block 2)
* inputs  ``[r, r+t2)``: phi == 0, psi != 0, beta != 0   (block 3)
* inputs  ``[r+t2, r+s2)``: phi == 0, psi != 0, beta == 0 (block 4)
* the rest: everything zero                              (block 5)

with ``phi_c = P(pi1) phi`` and ``alpha_c = P(pi2)^T alpha``; the canonical
matrices are ``P(pi1) @ D1 @ P(pi2)``.  The Birkhoff data stored in a
certificate refers to the canonical matrices.  :func:`canonicalize` produces
the contiguous layout above; verification only needs the blocks aligned
(see :func:`canonical_layout`), not contiguous.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging

import numpy as np

from . import config
from .errors import (ConditionsNotMetError, HypothesisError, InternalInconsistencyError,
                     NecessaryConditionError, ValidationError)
from .linalg import as_state, dephase, support, trace_distance
from .lp import phase_one
from .majorization import (BirkhoffDecomposition, as_doubly_stochastic, as_permutation,
                           birkhoff_decompose, block_birkhoff_decompose, inverse_permutation,
                           majorizes, permutation_to_matrix)
from .sio import KrausChannel, apply_channel, decompose_sio_operator

log = logging.getLogger(__name__)

# relative tolerance for the ratio condition
RATIO_RTOL = 1e-8
# channels must reproduce both targets to this trace distance
IMAGE_TOL = 1e-8


@dataclasses.dataclass(frozen=True)
class PairInstance:
    """Source pair ``(phi, psi)`` and target pair ``(alpha, beta)``."""

    phi: np.ndarray
    psi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        for name in ("phi", "psi", "alpha", "beta"):
            object.__setattr__(self, name, as_state(getattr(self, name)))
        if len({self.phi.size, self.psi.size, self.alpha.size, self.beta.size}) != 1:
            raise ValidationError("all four states must have the same dimension")

    @property
    def dim(self) -> int:
        return self.phi.size

    def permuted(self, u, v) -> "PairInstance":
        """Instance with inputs moved by ``P(u)`` and outputs by ``P(v)``."""
        u, v = as_permutation(u, self.dim), as_permutation(v, self.dim)
        iu, iv = inverse_permutation(u), inverse_permutation(v)
        return PairInstance(self.phi[iu], self.psi[iu], self.alpha[iv], self.beta[iv])


@dataclasses.dataclass(frozen=True)
class SpaceDecomposition:
    h1: tuple[int, ...]
    h2: tuple[int, ...]
    h3: tuple[int, ...]
    h4: tuple[int, ...]
    h5: tuple[int, ...]
    # indices with phi = psi = 0 but beta != 0; they fit none of the five blocks
    unclassified: tuple[int, ...] = ()

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return (self.h1, self.h2, self.h3, self.h4, self.h5)

    @property
    def r(self) -> int:
        return len(self.h1) + len(self.h2)

    @property
    def s1(self) -> int:
        return len(self.h1)

    @property
    def s2(self) -> int:
        return len(self.h3) + len(self.h4)

    @property
    def t1(self) -> int:
        return len(self.h1)

    @property
    def t2(self) -> int:
        return len(self.h3)

    def labels(self, dim: int) -> np.ndarray:
        """Block number (1..5) of every index; 0 for unclassified ones."""
        lab = np.zeros(dim, dtype=int)
        for b, idx in enumerate(self.blocks, start=1):
            lab[list(idx)] = b
        return lab


def space_decomposition(phi, psi, beta, zero_tol: float | None = None) -> SpaceDecomposition:
    """Partition basis indices by which of phi, psi, beta vanish there."""
    phi, psi, beta = (np.asarray(v) for v in (phi, psi, beta))
    if not phi.shape == psi.shape == beta.shape:
        raise ValidationError("phi, psi and beta must have the same dimension")
    f, p, b = (support(v, zero_tol) for v in (phi, psi, beta))

    def idx(mask):
        return tuple(int(i) for i in np.flatnonzero(mask))

    dec = SpaceDecomposition(
        h1=idx(f & p), h2=idx(f & ~p), h3=idx(~f & p & b), h4=idx(~f & p & ~b),
        h5=idx(~f & ~p & ~b), unclassified=idx(~f & ~p & b))
    if dec.unclassified:
        log.warning("indices %s have phi = psi = 0 but beta != 0", dec.unclassified)
    return dec


def _contiguous_layout(r, s1, s2, t2, d) -> SpaceDecomposition:
    rng = lambda a, b: tuple(range(a, b))  # noqa: E731
    return SpaceDecomposition(rng(0, s1), rng(s1, r), rng(r, r + t2), rng(r + t2, r + s2),
                              rng(r + s2, d))


def canonicalize(instance: PairInstance, zero_tol: float | None = None):
    """Permute inputs and outputs into the canonical block layout.

    Returns:
        ``(canonical, u, v, layout)`` where ``canonical = instance.permuted(u, v)``.

    Raises:
        HypothesisError: coherence ranks of phi and alpha differ.
        NecessaryConditionError: the supports cannot be aligned (the number of
            indices where phi, psi are both nonzero differs from the number
            where alpha, beta are, or beta has more indices outside the
            alpha-support than psi has outside the phi-support).
    """
    f, p = support(instance.phi, zero_tol), support(instance.psi, zero_tol)
    a, b = support(instance.alpha, zero_tol), support(instance.beta, zero_tol)
    r = int(f.sum())
    if r != int(a.sum()):
        raise HypothesisError(f"coherence ranks differ: r(phi) = {r}, r(alpha) = {int(a.sum())}")
    in_blocks = [f & p, f & ~p, ~f & p, ~f & ~p]
    out_blocks = [a & b, a & ~b, ~a & b, ~a & ~b]
    s1, s2 = int(in_blocks[0].sum()), int(in_blocks[2].sum())
    t1, t2 = int(out_blocks[0].sum()), int(out_blocks[2].sum())
    if s1 != t1:
        raise NecessaryConditionError(
            f"necessary condition failed: {s1} indices with phi, psi != 0 but {t1} with alpha, beta != 0")
    if t2 > s2:
        raise NecessaryConditionError(
            f"necessary condition failed: beta has {t2} indices outside supp(alpha), psi only {s2}")
    in_order = np.concatenate([np.flatnonzero(m) for m in in_blocks])
    out_order = np.concatenate([np.flatnonzero(m) for m in out_blocks])
    u, v = inverse_permutation(in_order), inverse_permutation(out_order)
    layout = _contiguous_layout(r, s1, s2, t2, instance.dim)
    return instance.permuted(u, v), u, v, layout


def canonical_layout(instance: PairInstance, zero_tol: float | None = None) -> SpaceDecomposition:
    """Block layout of an instance whose inputs and outputs are already aligned.

    Blocks need not be contiguous: position ``i`` gets its block from the
    supports of ``phi``, ``psi`` and ``beta`` there.  Alignment requires
    ``supp(alpha) = supp(phi)`` and no position with ``phi = psi = 0`` but
    ``beta != 0``.

    Raises:
        ValidationError: if the supports are not aligned.
    """
    lay = space_decomposition(instance.phi, instance.psi, instance.beta, zero_tol)
    if lay.unclassified:
        raise ValidationError(f"beta is nonzero where phi and psi vanish: {list(lay.unclassified)}")
    if not np.array_equal(support(instance.alpha, zero_tol), support(instance.phi, zero_tol)):
        raise ValidationError("supports of alpha and phi are not aligned")
    return lay


# Allowed (input block, output block) pairs in the canonical frame.  The D1
# pattern is the displayed block diagonal one; T is the transpose of the
# displayed pattern because its rows are inputs here.
D1_BLOCKS = frozenset({(1, 1), (1, 2), (2, 1), (2, 2), (3, 3), (3, 4), (4, 3), (4, 4), (5, 5)})
T_BLOCKS = frozenset({(3, 1), (4, 1), (2, 2), (3, 3), (4, 3), (1, 4), (3, 4), (4, 4), (5, 5)})


def _block_mask(layout: SpaceDecomposition, d: int, allowed) -> np.ndarray:
    lab = layout.labels(d)
    return np.array([[(lab[i], lab[j]) in allowed for j in range(d)] for i in range(d)])


@dataclasses.dataclass(frozen=True)
class PairCertificate:
    """Witness data for a pair transformation.

    ``d1`` and ``t_matrix`` are in the caller's coordinates; ``birkhoff_d1``
    and ``birkhoff_t`` decompose their canonical-frame versions.
    """

    d1: np.ndarray
    c: float
    t_matrix: np.ndarray
    pi1: np.ndarray
    pi2: np.ndarray
    birkhoff_d1: BirkhoffDecomposition
    birkhoff_t: BirkhoffDecomposition
    ratio_t: complex

    @property
    def d2(self) -> np.ndarray:
        return self.c ** 2 * self.d1 + (1 - self.c ** 2) * self.t_matrix

    def canonical(self, M) -> np.ndarray:
        return permutation_to_matrix(self.pi1) @ M @ permutation_to_matrix(self.pi2)


@dataclasses.dataclass(frozen=True)
class VerificationReport:
    ok: bool
    condition: str | None = None
    message: str = ""
    indices: tuple = ()

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {"verified": self.ok, "condition": self.condition, "message": self.message,
                "indices": [list(map(int, i)) if isinstance(i, tuple) else int(i)
                            for i in self.indices]}


def _fail(condition, message, indices=()):
    return VerificationReport(False, condition, message, tuple(indices))


def _ratio_mismatch(lhs: complex, rhs: complex) -> bool:
    return abs(lhs - rhs) > RATIO_RTOL * max(1.0, abs(lhs), abs(rhs))


def verify_certificate(instance: PairInstance, cert: PairCertificate,
                       tol: float | None = None,
                       zero_tol: float | None = None) -> VerificationReport:
    """Check the three structural conditions for a simultaneous SIO.

    (i)   ``D1 Δα = Δφ`` and ``D2 Δβ = Δψ`` with ``D2 = c² D1 + (1 - c²) T``;
    (ii)  in the frame fixed by ``pi1``, ``pi2`` the supports of D1 and T fit
          the allowed block patterns and the Birkhoff data recomposes them;
    (iii) for every Birkhoff term of D1 and every output ``j`` in block 1,
          ``β_j / ψ_{π(j)} = t α_j / φ_{π(j)}`` with the certificate scalar ``t``,
          and ``c |t| = 1`` (``c t = 1`` when β has weight outside supp α).

    Returns a :class:`VerificationReport`; failures name the condition.
    """
    t_ = config.tol(tol)
    d = instance.dim
    c = float(cert.c)
    try:
        D1 = as_doubly_stochastic(cert.d1, t_)
        T = as_doubly_stochastic(cert.t_matrix, t_)
        pi1 = as_permutation(cert.pi1, d)
        pi2 = as_permutation(cert.pi2, d)
    except ValidationError as exc:
        return _fail("stochastic", str(exc))
    if D1.shape != (d, d) or T.shape != (d, d):
        return _fail("stochastic", "matrix dimension does not match the instance")
    if not 0 < c <= 1 + t_:
        return _fail("condition (ii)", f"c = {c} outside (0, 1]")
    c = min(c, 1.0)

    canon = instance.permuted(pi1, inverse_permutation(pi2))
    try:
        lay = canonical_layout(canon, zero_tol)
    except ValidationError as exc:
        return _fail("layout", str(exc))

    dphi, dpsi = dephase(instance.phi), dephase(instance.psi)
    dalpha, dbeta = dephase(instance.alpha), dephase(instance.beta)
    D2 = c ** 2 * D1 + (1 - c ** 2) * T
    r1 = D1 @ dalpha - dphi
    if np.abs(r1).max() > t_:
        return _fail("condition (i)", f"D1 Δα ≠ Δφ (residual {np.abs(r1).max():.3g})",
                     np.flatnonzero(np.abs(r1) > t_))
    r2 = D2 @ dbeta - dpsi
    if np.abs(r2).max() > t_:
        return _fail("condition (i)", f"D2 Δβ ≠ Δψ (residual {np.abs(r2).max():.3g})",
                     np.flatnonzero(np.abs(r2) > t_))

    P1, P2 = permutation_to_matrix(pi1), permutation_to_matrix(pi2)
    D1c, Tc = P1 @ D1 @ P2, P1 @ T @ P2
    checks = [("D1", D1c, D1_BLOCKS, cert.birkhoff_d1)]
    if c < 1:
        checks.append(("T", Tc, T_BLOCKS, cert.birkhoff_t))
    for name, M, allowed, dec in checks:
        mask = _block_mask(lay, d, allowed)
        bad = np.argwhere(~mask & (M > t_))
        if bad.size:
            return _fail("condition (ii)", f"{name} has weight outside its block pattern",
                         [tuple(x) for x in bad])
        if len(dec) == 0 or dec.dim != d:
            return _fail("condition (ii)", f"missing Birkhoff decomposition of {name}")
        if abs(sum(dec.weights) - 1) > t_ or np.abs(dec.matrix() - M).max() > max(t_, 1e-8):
            return _fail("condition (ii)", f"Birkhoff decomposition does not recompose {name}")
        for w, perm in dec:
            if w <= 0 or not all(mask[perm[j], j] for j in range(d)):
                return _fail("condition (ii)", f"a Birkhoff term of {name} leaves the block pattern")

    if lay.s1:
        t = complex(cert.ratio_t)
        if abs(c * abs(t) - 1) > RATIO_RTOL or (lay.t2 and _ratio_mismatch(c * t, 1.0)):
            return _fail("condition (iii) bound", f"ratio t = {t} incompatible with c = {c}")
        h1 = set(lay.h1)
        for n, (_, perm) in enumerate(cert.birkhoff_d1):
            for j in lay.h1:
                i = int(perm[j])
                if i not in h1:
                    return _fail("condition (iii)", f"term {n} pairs output {j} in block 1 with input {i}",
                                 [(n, j)])
                lhs = canon.beta[j] / canon.psi[i]
                rhs = t * canon.alpha[j] / canon.phi[i]
                if _ratio_mismatch(lhs, rhs):
                    return _fail("condition (iii)", f"ratio condition fails for term {n}, output {j}",
                                 [(n, j)])
    return VerificationReport(True, None, "all conditions hold")


def _guarded_div(num, den, zero_tol):
    if abs(den) <= config.zero_tol(zero_tol):
        raise InternalInconsistencyError("construction divides by a vanishing amplitude")
    return num / den


def build_channel_from_certificate(instance: PairInstance, cert: PairCertificate, *,
                                   verify: bool = True, tol: float | None = None,
                                   zero_tol: float | None = None) -> KrausChannel:
    """Kraus operators realizing a verified certificate.

    One operator per Birkhoff term of D1 (weight ``λ``, permutation ``π``):
    output ``i`` takes input ``π(i)`` with coefficient ``√λ α_i/φ_π(i)`` on the
    phi-support, ``c√λ β_i/ψ_π(i)`` on blocks 3-4 and ``c√λ`` on block 5.  One
    operator per Birkhoff term of T, scaled by ``√(1-c²)``: ``√λ β_i/ψ_π(i)``
    on blocks 1, 3, 4, zero on block 2 and ``√λ`` on block 5.
    """
    if verify:
        rep = verify_certificate(instance, cert, tol, zero_tol)
        if not rep:
            raise ConditionsNotMetError(f"certificate rejected: {rep.condition}: {rep.message}")
    d = instance.dim
    c = min(float(cert.c), 1.0)
    pi1, pi2 = as_permutation(cert.pi1, d), as_permutation(cert.pi2, d)
    canon = instance.permuted(pi1, inverse_permutation(pi2))
    # blocks follow the inputs; with verify=False alpha may vanish inside block 1
    lay = space_decomposition(canon.phi, canon.psi, canon.beta, zero_tol)
    if lay.unclassified:
        raise ValidationError("beta is nonzero where phi and psi vanish")
    lab = lay.labels(d)
    phi, psi, alpha, beta = canon.phi, canon.psi, canon.alpha, canon.beta

    ops = []
    for lam, perm in cert.birkhoff_d1:
        K = np.zeros((d, d), dtype=complex)
        for i in range(d):
            j = int(perm[i])
            if lab[i] in (1, 2):
                val = _guarded_div(alpha[i], phi[j], zero_tol)
            elif lab[i] in (3, 4):
                val = c * _guarded_div(beta[i], psi[j], zero_tol)
            else:
                val = c
            K[i, j] = np.sqrt(lam) * val
        ops.append(K)
    if c < 1:
        for lam, perm in cert.birkhoff_t:
            K = np.zeros((d, d), dtype=complex)
            for i in range(d):
                j = int(perm[i])
                if lab[i] in (1, 3, 4):
                    val = _guarded_div(beta[i], psi[j], zero_tol)
                elif lab[i] == 2:
                    val = 0.0
                else:
                    val = 1.0
                K[i, j] = np.sqrt(lam) * val
            ops.append(np.sqrt(1 - c ** 2) * K)

    # back to caller coordinates: K = P(pi2) Kc P(pi1)
    P1, P2 = permutation_to_matrix(pi1), permutation_to_matrix(pi2)
    return KrausChannel([P2 @ K @ P1 for K in ops], tol=tol)


def channel_images_error(channel: KrausChannel, instance: PairInstance) -> float:
    """Largest trace distance between the channel images and the targets."""
    return max(trace_distance(apply_channel(channel, instance.phi), instance.alpha),
               trace_distance(apply_channel(channel, instance.psi), instance.beta))


def derive_d1(channel: KrausChannel, phi, alpha, zero_tol: float | None = None) -> np.ndarray:
    """Doubly stochastic matrix ``sum_n |γ_n|² P(π_n)`` induced by an SIO.

    ``γ_n = <α|K_n φ>`` and ``π_n`` comes from :func:`decompose_sio_operator`.
    """
    phi, alpha = np.asarray(phi, dtype=complex), np.asarray(alpha, dtype=complex)
    d = phi.size
    D = np.zeros((d, d))
    cols = np.arange(d)
    for K in channel:
        perm, _ = decompose_sio_operator(K, zero_tol)
        gamma = np.vdot(alpha, K @ phi)
        # operator row j reads input perm[j]: entry (perm[j], j)
        D[perm, cols] += abs(gamma) ** 2
    return D


def shared_d_channel(instance: PairInstance, D, tol: float | None = None,
                     zero_tol: float | None = None) -> KrausChannel:
    """SIO channel from one doubly stochastic matrix serving both pairs.

    Requires ``D Δα = Δφ`` and ``D Δβ = Δψ``.  For every Birkhoff term the
    operator maps input ``π(i)`` to output ``i`` with coefficient
    ``√λ α_i/φ_π(i)`` where phi is nonzero there, ``√λ β_i/ψ_π(i)`` where only
    psi is, and ``√λ`` elsewhere.  This is complete for any ``D``; it hits both
    targets only when a single ratio ``t`` with ``|t| = 1`` links the two
    coefficient families.  The images are checked and a mismatch raises.

    Raises:
        ConditionsNotMetError: a residual exceeds ``tol``, the ratios
            disagree, or the constructed channel misses a target.
    """
    t_ = config.tol(tol)
    z = config.zero_tol(zero_tol)
    D = as_doubly_stochastic(D, t_)
    if D.shape != (instance.dim, instance.dim):
        raise ValidationError("matrix dimension does not match the instance")
    dphi, dpsi = dephase(instance.phi), dephase(instance.psi)
    dalpha, dbeta = dephase(instance.alpha), dephase(instance.beta)
    res = max(np.abs(D @ dalpha - dphi).max(), np.abs(D @ dbeta - dpsi).max())
    if res > t_:
        raise ConditionsNotMetError(f"D does not map the targets' dephasings onto the sources' ({res:.3g})")
    phi, psi, alpha, beta = instance.phi, instance.psi, instance.alpha, instance.beta
    dec = birkhoff_decompose(D, t_)

    ratio = None
    for _, perm in dec:
        for i in range(instance.dim):
            j = int(perm[i])
            if abs(phi[j]) <= z or abs(psi[j]) <= z:
                continue
            ra, rb = alpha[i] / phi[j], beta[i] / psi[j]
            if ratio is None and abs(ra) > z and abs(rb) > z:
                ratio = rb / ra
            if ratio is not None and _ratio_mismatch(rb, ratio * ra):
                raise ConditionsNotMetError("coefficient ratios differ between Birkhoff terms")
    if ratio is not None and abs(abs(ratio) - 1) > RATIO_RTOL:
        raise ConditionsNotMetError(f"coefficient ratio has modulus {abs(ratio):.6g}, not 1")

    d = instance.dim
    ops = []
    for lam, perm in dec:
        K = np.zeros((d, d), dtype=complex)
        for i in range(d):
            j = int(perm[i])
            if abs(phi[j]) > z:
                val = alpha[i] / phi[j]
            elif abs(psi[j]) > z:
                val = beta[i] / psi[j]
            else:
                val = 1.0
            K[i, j] = np.sqrt(lam) * val
        ops.append(K)
    channel = KrausChannel(ops, tol=max(t_, 1e-8))
    err = channel_images_error(channel, instance)
    if err > IMAGE_TOL:
        raise ConditionsNotMetError(f"shared-D channel misses the targets (trace distance {err:.3g})")
    return channel


def _ratio_candidates(canon: PairInstance, lay: SpaceDecomposition) -> list[complex]:
    h1 = list(lay.h1)
    a = canon.beta[h1] / canon.alpha[h1]      # per output
    b = canon.psi[h1] / canon.phi[h1]         # per input
    cands: list[complex] = []
    for t in (a[None, :] / b[:, None]).ravel():
        if abs(t) < 1 - 1e-9:
            continue
        if lay.t2 and (abs(t.imag) > 1e-9 * abs(t) or t.real <= 0):
            continue
        if lay.t2:
            t = complex(t.real, 0.0)
        if not any(abs(t - s) <= 1e-9 * abs(t) for s in cands):
            cands.append(complex(t))
    cands.sort(key=lambda t: (abs(t), np.angle(t)))
    return cands


def _solve_pattern_lp(canon, lay, d1_mask, t_mask, s_fixed: float | None):
    """Phase-one LP in ``X = c² D1`` and ``Y = (1-c²) T`` on the allowed entries.

    With ``s_fixed=None`` the weight ``s = c²`` is a variable bounded below
    by ``1e-6``.  Returns ``(D1, T, s)`` or None.
    """
    d = canon.dim
    dalpha, dbeta = dephase(canon.alpha), dephase(canon.beta)
    dphi, dpsi = dephase(canon.phi), dephase(canon.psi)
    if s_fixed is not None and s_fixed > 1 - 1e-12:
        s_fixed = 1.0
    use_y = s_fixed is None or s_fixed < 1
    xs = [tuple(ij) for ij in np.argwhere(d1_mask)]
    ys = [tuple(ij) for ij in np.argwhere(t_mask)] if use_y else []
    nx, ny = len(xs), len(ys)
    n = nx + ny + (1 if s_fixed is None else 0)
    s_floor = 1e-6
    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def add(coeffs: dict, s_coef: float, const: float):
        # sum coeffs . vars + s_coef * s = const
        row = np.zeros(n)
        for k, v in coeffs.items():
            row[k] += v
        c0 = const
        if s_fixed is None:
            row[-1] += s_coef
            c0 -= s_coef * s_floor
        else:
            c0 -= s_coef * s_fixed
        rows.append(row)
        rhs.append(c0)

    for axis in (0, 1):
        for k in range(d):
            add({m: 1.0 for m, ij in enumerate(xs) if ij[axis] == k}, -1.0, 0.0)
            if use_y:
                add({nx + m: 1.0 for m, ij in enumerate(ys) if ij[axis] == k}, 1.0, 1.0)
    for i in range(d):
        add({m: dalpha[j] for m, (r, j) in enumerate(xs) if r == i}, -dphi[i], 0.0)
        coeffs = {m: dbeta[j] for m, (r, j) in enumerate(xs) if r == i}
        coeffs.update({nx + m: dbeta[j] for m, (r, j) in enumerate(ys) if r == i})
        add(coeffs, 0.0, dpsi[i])
    res = phase_one(np.array(rows), np.array(rhs), feas_tol=1e-10)
    if not res.feasible:
        return None
    x = res.x
    s = s_fixed if s_fixed is not None else s_floor + x[-1]
    X = np.zeros((d, d))
    for m, ij in enumerate(xs):
        X[ij] = x[m]
    D1 = X / s
    if use_y and s < 1 - 1e-9:
        Y = np.zeros((d, d))
        for m, ij in enumerate(ys):
            Y[ij] = x[nx + m]
        T = Y / (1 - s)
    else:
        T = D1.copy()
        s = 1.0
    return D1, T, float(min(s, 1.0))


def _clean_stochastic(M: np.ndarray) -> np.ndarray:
    M = np.where(M < 1e-13, 0.0, M)
    # one Sinkhorn sweep removes LP round-off without changing the support
    for _ in range(3):
        M = M / M.sum(axis=1, keepdims=True)
        M = M / M.sum(axis=0, keepdims=True)
    return M


def _assemble(u, v, lay, D1c, Tc, c, t) -> PairCertificate:
    blocks = [b for b in (lay.h1, lay.h2, lay.h3 + lay.h4, lay.h5) if b]
    bd1 = block_birkhoff_decompose(D1c, blocks, tol=1e-8)
    bt = birkhoff_decompose(Tc, tol=1e-8) if c < 1 else bd1
    pi1, pi2 = u, inverse_permutation(v)
    P1, P2 = permutation_to_matrix(pi1), permutation_to_matrix(pi2)
    return PairCertificate(d1=P1.T @ bd1.matrix() @ P2.T, c=float(c),
                           t_matrix=P1.T @ bt.matrix() @ P2.T, pi1=pi1, pi2=pi2,
                           birkhoff_d1=bd1, birkhoff_t=bt, ratio_t=complex(t))


def search_certificate(instance: PairInstance, budget: int = 64, *,
                       tol: float | None = None,
                       zero_tol: float | None = None) -> PairCertificate | None:
    """Look for a certificate of the three sufficient conditions.

    The ratio ``t`` can only be one of the quotients
    ``(β_j/α_j) / (ψ_i/φ_i)`` over the common support, and it fixes
    ``c = 1/|t|`` together with the entries of D1 allowed to be nonzero.  For
    each candidate (at most ``budget`` of them, smallest ``|t|`` first) the
    remaining conditions are linear in ``c² D1`` and ``(1-c²) T``, so a
    phase-one LP decides them.  When the common support is empty, a few fixed
    values of ``c²`` are tried before making it an LP variable.

    Returns a verified certificate, or None when nothing was found (which is
    not a proof of infeasibility).

    Raises:
        HypothesisError: coherence ranks of phi and alpha differ.
    """
    if support(instance.phi, zero_tol).sum() != support(instance.alpha, zero_tol).sum():
        raise HypothesisError("coherence ranks of phi and alpha differ")
    if not (majorizes(dephase(instance.phi), dephase(instance.alpha), tol)
            and majorizes(dephase(instance.psi), dephase(instance.beta), tol)):
        return None
    try:
        canon, u, v, lay = canonicalize(instance, zero_tol)
    except NecessaryConditionError:
        return None
    d = instance.dim
    base_d1 = _block_mask(lay, d, D1_BLOCKS - {(1, 2), (2, 1)})
    t_mask = _block_mask(lay, d, T_BLOCKS)

    if lay.s1:
        h1 = list(lay.h1)
        a = canon.beta[h1] / canon.alpha[h1]
        b = canon.psi[h1] / canon.phi[h1]
        trials = []
        for t in _ratio_candidates(canon, lay)[:max(budget, 0)]:
            mask = base_d1.copy()
            for ii, i in enumerate(h1):
                for jj, j in enumerate(h1):
                    mask[i, j] = not _ratio_mismatch(a[jj], t * b[ii])
            trials.append((t, mask, 1.0 / abs(t) ** 2))
    else:
        # no ratio to pin c: try a ladder of weights, then let the LP choose
        trials = [(None, base_d1, s) for s in (1.0, 0.5, 0.25, 0.1, 1e-2, 1e-4)]
        trials.append((None, base_d1, None))

    for t, mask, s in trials:
        sol = _solve_pattern_lp(canon, lay, mask, t_mask, s)
        if sol is None:
            continue
        D1c, Tc, s = sol
        c = float(np.sqrt(s))
        ratio = t if t is not None else 1.0 / c
        try:
            cert = _assemble(u, v, lay, _clean_stochastic(D1c), _clean_stochastic(Tc),
                             c, ratio)
        except ValidationError as exc:
            log.debug("candidate t=%s rejected during assembly: %s", t, exc)
            continue
        if verify_certificate(instance, cert, tol, zero_tol):
            return cert
        log.debug("candidate t=%s produced an unverifiable certificate", t)
    return None


def brute_force_feasible(instance: PairInstance, max_kraus: int | None = None, *,
                         restarts: int = 4, seed: int = 0,
                         residual_tol: float = 1e-7) -> tuple[bool, KrausChannel | None]:
    """Numerical search for an SIO mapping both pairs, for dimension at most 3.

    Every strictly incoherent operator is ``P^T diag(k)`` for some
    permutation, so the search runs over multisets of permutations of size up
    to ``max_kraus`` (default ``min(d², 4)``) and fits the complex ``k`` by
    nonlinear least squares on the output projectors and completeness.

    Returns:
        ``(feasible, channel)``; the channel is None when nothing fit.
    """
    from scipy.optimize import least_squares

    d = instance.dim
    if d > 3:
        raise ValidationError("brute-force search only supports dimension <= 3")
    max_kraus = min(d * d, 4) if max_kraus is None else max_kraus
    rng = np.random.default_rng(seed)
    phi, psi, alpha, beta = instance.phi, instance.psi, instance.alpha, instance.beta
    A, B = np.outer(alpha, alpha.conj()), np.outer(beta, beta.conj())
    perms = [np.array(p) for p in itertools.permutations(range(d))]
    rows = np.arange(d)

    basis = np.eye(d)
    for m in range(1, max_kraus + 1):
        for combo in itertools.combinations_with_replacement(range(len(perms)), m):
            ps = [perms[c] for c in combo]
            # row of operator n that reads input j
            row_of = [inverse_permutation(p) for p in ps]

            def unpack(x):
                return (x[:m * d] + 1j * x[m * d:]).reshape(m, d)

            def resid(x):
                k = unpack(x)
                out_f = -A.copy()
                out_p = -B.copy()
                for n, p in enumerate(ps):
                    # row i reads input p[i] with coefficient k[n, p[i]]
                    kf = k[n, p] * phi[p]
                    kp = k[n, p] * psi[p]
                    out_f += np.outer(kf, kf.conj())
                    out_p += np.outer(kp, kp.conj())
                comp = (np.abs(k) ** 2).sum(axis=0) - 1
                return np.concatenate([out_f.real.ravel(), out_f.imag.ravel(),
                                       out_p.real.ravel(), out_p.imag.ravel(), comp])

            def jac(x):
                k = unpack(x)
                J = np.zeros((4 * d * d + d, 2 * m * d))
                for n, p in enumerate(ps):
                    kf = k[n, p] * phi[p]
                    kp = k[n, p] * psi[p]
                    for j in range(d):
                        e = basis[row_of[n][j]]
                        cols = (n * d + j, m * d + n * d + j)
                        for unit, col in zip((1.0, 1j), cols):
                            gf = np.outer(unit * phi[j] * e, kf.conj())
                            gf = gf + gf.conj().T
                            gp = np.outer(unit * psi[j] * e, kp.conj())
                            gp = gp + gp.conj().T
                            J[:4 * d * d, col] = np.concatenate(
                                [gf.real.ravel(), gf.imag.ravel(), gp.real.ravel(), gp.imag.ravel()])
                            J[4 * d * d + j, col] = 2 * (unit.conjugate() * k[n, j]).real
                return J

            for _ in range(restarts):
                x0 = rng.normal(size=2 * m * d) / np.sqrt(2 * m)
                sol = least_squares(resid, x0, jac=jac, method="lm", xtol=1e-12, ftol=1e-12,
                                    gtol=1e-12, max_nfev=400)
                if np.abs(resid(sol.x)).max() < residual_tol:
                    k = unpack(sol.x)
                    ops = []
                    for n, p in enumerate(ps):
                        K = np.zeros((d, d), dtype=complex)
                        K[rows, p] = k[n, p]
                        ops.append(K)
                    return True, KrausChannel(ops, check=False)
    return False, None
