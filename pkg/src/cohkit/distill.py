"""Distillation of rank-two mixed states into maximally coherent states.

The pipeline has two SIO stages on a ``2d``-dimensional space:

1. a pair transformation sending the two eigen-directions of the input to a
   pair whose mixture lives on the first ``d`` coordinates and splits as a
   weighted sum of ``|d><d|`` and one coherent state ``|a>``;
2. a measure-and-prepare family (one operator per level ``q``) sending ``|a>``
   to ``|Psi_q>`` with probability ``p_q`` and leaving ``|d>`` alone.

Indices are 0-based, so the distinguished incoherent direction ``|d>`` is
basis vector ``d - 1``.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import Sequence

import numpy as np

from . import config
from .errors import (ConditionsNotMetError, HypothesisError, InternalInconsistencyError,
                     ValidationError)
from .linalg import as_probs, as_state, dephase, max_coherent_state, projector, trace_distance
from .majorization import (birkhoff_decompose, block_birkhoff_decompose, majorizes,
                           transfer_matrix)
from .preorder import (PairCertificate, PairInstance, build_channel_from_certificate,
                       channel_images_error, verify_certificate)
from .sio import KrausChannel, apply_channel, compose, embed

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class DistillationParams:
    """Parameters of the rank-two input family.

    ``phi`` and ``psi`` are the ``d - 1`` coherent coefficients; both must be
    unit vectors without zero entries.  ``lambda1`` must lie strictly inside
    (0, 1) so that both eigen-directions carry weight.
    """

    d: int
    gamma: float
    lambda1: float
    c: float
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValidationError(f"d must be an integer >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not 0 < self.gamma < np.pi / 4:
            raise ValidationError(f"gamma must lie in (0, pi/4), got {self.gamma}")
        if not 0 < self.lambda1 < 1:
            raise ValidationError(f"lambda1 must lie in (0, 1), got {self.lambda1}")
        if not 0 < self.c < 1:
            raise ValidationError(f"c must lie in (0, 1), got {self.c}")
        for name in ("phi", "psi"):
            v = as_state(getattr(self, name))
            if v.size != self.d - 1:
                raise ValidationError(f"{name} needs {self.d - 1} coefficients, got {v.size}")
            if np.any(np.abs(v) <= config.zero_tol()):
                raise ValidationError(f"{name} coefficients must all be nonzero")
            object.__setattr__(self, name, v)

    @property
    def lambda2(self) -> float:
        return 1.0 - self.lambda1

    @property
    def p1(self) -> float:
        return self.lambda1 * np.sin(self.gamma) ** 2 + self.lambda2 * np.cos(self.gamma) ** 2


@dataclasses.dataclass(frozen=True)
class MaxCoherentMixture:
    """``incoherent |d><d| + sum_q weights[q-1] |Psi_q><Psi_q|`` in ``dim`` dimensions."""

    dim: int
    weights: tuple[float, ...]
    incoherent: float = 0.0
    # position of |d>; defaults to len(weights)
    incoherent_index: int | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        t = config.tol()
        if np.any(w < -t) or self.incoherent < -t:
            raise ValidationError("mixture weights must be nonnegative")
        if abs(w.sum() + self.incoherent - 1) > t:
            raise ValidationError(f"mixture weights sum to {w.sum() + self.incoherent!r}")
        if len(w) > self.dim:
            raise ValidationError("more levels than dimensions")

    def density(self) -> np.ndarray:
        idx = len(self.weights) if self.incoherent_index is None else self.incoherent_index
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[idx, idx] = self.incoherent
        for q, w in enumerate(self.weights, start=1):
            rho += w * projector(max_coherent_state(q, self.dim))
        return rho


def build_theorem3_input(params: DistillationParams):
    """Input state of the distillation family.

    Returns:
        ``(rho, phi, psi, p1, p2)`` with ``rho = p1 |phi><phi| + p2 |psi><psi|``
        on ``2d`` dimensions.
    """
    d, g, c = params.d, params.gamma, params.c
    l1, l2 = np.sqrt(params.lambda1), np.sqrt(params.lambda2)
    sf = np.zeros(2 * d, dtype=complex)
    sf[:d - 1] = l1 * np.sin(g) * params.phi
    sf[d - 1] = l2 * np.cos(g)
    sp = np.zeros(2 * d, dtype=complex)
    sp[:d - 1] = c * l1 * np.cos(g) * params.phi
    sp[d - 1] = -c * l2 * np.sin(g)
    sp[d:2 * d - 1] = np.sqrt(1 - c ** 2) * l1 * np.cos(g) * params.psi
    sp[2 * d - 1] = -np.sqrt(1 - c ** 2) * l2 * np.sin(g)
    p1 = float(np.vdot(sf, sf).real)
    p2 = float(np.vdot(sp, sp).real)
    phi, psi = sf / np.sqrt(p1), sp / np.sqrt(p2)
    rho = p1 * projector(phi) + p2 * projector(psi)
    return rho, phi, psi, p1, p2


def choose_alpha(params: DistillationParams, alpha: Sequence[float] | None = None) -> np.ndarray:
    """Probability vector of length ``d - 1`` majorizing both coefficient profiles.

    By default the upper envelope of the two sorted prefix-sum curves is
    differenced and sorted, which is the smallest vector (in the majorization
    order) above both profiles when the envelope is concave.  An explicit
    ``alpha`` is validated instead.

    Raises:
        ValidationError: the supplied ``alpha`` does not majorize both profiles.
    """
    f, s = np.abs(params.phi) ** 2, np.abs(params.psi) ** 2
    if alpha is not None:
        a = as_probs(alpha)
        if a.size != params.d - 1:
            raise ValidationError(f"alpha needs {params.d - 1} entries, got {a.size}")
        if not (majorizes(f, a) and majorizes(s, a)):
            raise ValidationError("alpha must majorize both coefficient profiles")
        return a
    env = np.maximum(np.cumsum(np.sort(f)[::-1]), np.cumsum(np.sort(s)[::-1]))
    a = np.sort(np.diff(env, prepend=0.0))[::-1]
    a /= a.sum()
    return a


def _target_pair(params: DistillationParams, alpha_probs: np.ndarray):
    d, g = params.d, params.gamma
    l1, l2 = np.sqrt(params.lambda1), np.sqrt(params.lambda2)
    amp = np.sqrt(alpha_probs)
    a = np.zeros(2 * d, dtype=complex)
    a[:d - 1] = l1 * np.sin(g) * amp
    a[d - 1] = l2 * np.cos(g)
    b = np.zeros(2 * d, dtype=complex)
    b[:d - 1] = l1 * np.cos(g) * amp
    b[d - 1] = -l2 * np.sin(g)
    return a / np.linalg.norm(a), b / np.linalg.norm(b)


def phase1_instance(params: DistillationParams, alpha_probs: np.ndarray) -> PairInstance:
    """Stage-one pair: the input's eigen-directions and their targets."""
    _, phi, psi, _, _ = build_theorem3_input(params)
    return PairInstance(phi, psi, *_target_pair(params, np.asarray(alpha_probs, dtype=float)))


def phase1_certificate(params: DistillationParams, alpha_probs: np.ndarray) -> PairCertificate:
    """Certificate for the first stage; the instance is already canonical.

    Block 1 is the first ``d`` coordinates and block 4 the last ``d``.
    ``D1 = diag(D~1 ⊕ 1, I)``, ``T`` swaps the halves with ``D~2 ⊕ 1`` on the
    way back, and the ratio is ``1/c``.
    """
    d, c = params.d, params.c
    a = np.asarray(alpha_probs, dtype=float)
    Dt1 = transfer_matrix(np.abs(params.phi) ** 2, a)
    Dt2 = transfer_matrix(np.abs(params.psi) ** 2, a)
    up1 = np.zeros((d, d))
    up1[:d - 1, :d - 1] = Dt1
    up1[d - 1, d - 1] = 1.0
    up2 = np.zeros((d, d))
    up2[:d - 1, :d - 1] = Dt2
    up2[d - 1, d - 1] = 1.0
    D1 = np.zeros((2 * d, 2 * d))
    D1[:d, :d] = up1
    D1[d:, d:] = np.eye(d)
    T = np.zeros((2 * d, 2 * d))
    T[:d, d:] = np.eye(d)
    T[d:, :d] = up2
    ident = np.arange(2 * d)
    return PairCertificate(
        d1=D1, c=float(c), t_matrix=T, pi1=ident, pi2=ident,
        birkhoff_d1=block_birkhoff_decompose(D1, [range(d), range(d, 2 * d)]),
        birkhoff_t=birkhoff_decompose(T), ratio_t=complex(1.0 / c))


def phase1_channel(params: DistillationParams, alpha: Sequence[float] | None = None):
    """First stage: SIO sending the input pair ``(phi, psi)`` to ``(alpha, beta)``.

    Returns:
        ``(channel, alpha_state, beta_state)``.
    """
    a = choose_alpha(params, alpha)
    inst = phase1_instance(params, a)
    cert = phase1_certificate(params, a)
    full = bool(np.all(a > config.zero_tol()))
    if full:
        rep = verify_certificate(inst, cert)
        if not rep:
            raise InternalInconsistencyError(
                f"stage-one certificate failed: {rep.condition}: {rep.message}")
    # an alpha with zeros lowers the coherence rank, so the certificate
    # conditions no longer apply verbatim; the operators still work
    channel = build_channel_from_certificate(inst, cert, verify=False)
    err = channel_images_error(channel, inst)
    if err > 1e-8:
        raise InternalInconsistencyError(f"stage-one channel misses its targets by {err:.3g}")
    return channel, inst.alpha, inst.beta


def glay_channel(alpha_tilde, drop_zero: bool = True):
    """Stage two on ``d`` dimensions: ``|a> -> |Psi_q>`` with probability ``p_q``.

    ``alpha_tilde`` is a unit vector whose first ``d - 1`` entries are all
    nonzero and whose last entry is zero.  With ``a`` the moduli sorted in
    descending order, ``p_q = q (a_q^2 - a_{q+1}^2)`` for ``q < d - 1`` and
    ``p_{d-1} = (d-1) a_{d-1}^2``.  Operator ``q`` reads the ``q`` largest
    amplitudes, divides them out and writes ``|Psi_q>`` on the first ``q``
    indices, and fixes ``|d>`` with amplitude ``sqrt(p_q)``.  Operators with
    ``p_q = 0`` are dropped unless ``drop_zero`` is False.

    Returns:
        ``(channel, mixture)``.
    """
    v = as_state(alpha_tilde)
    d = v.size
    if d < 2:
        raise ValidationError("need at least two dimensions")
    if abs(v[d - 1]) > config.zero_tol():
        raise ValidationError("last entry of alpha_tilde must be zero")
    coh = v[:d - 1]
    if np.any(np.abs(coh) <= config.zero_tol()):
        raise ValidationError("division guard: alpha_tilde has a zero coherent entry")
    order = np.argsort(-np.abs(coh), kind="stable")
    a2 = np.abs(coh[order]) ** 2
    n = d - 1
    p = np.empty(n)
    q = np.arange(1, n + 1)
    p[:-1] = q[:-1] * (a2[:-1] - a2[1:])
    p[-1] = n * a2[-1]
    p = np.clip(p, 0.0, None)
    ops = []
    for qi in range(1, n + 1):
        pq = p[qi - 1]
        if drop_zero and pq <= 0:
            continue
        K = np.zeros((d, d), dtype=complex)
        for k in range(qi):
            K[k, order[k]] = 1 / (np.sqrt(qi) * coh[order[k]])
        K[d - 1, d - 1] = 1.0
        ops.append(np.sqrt(pq) * K)
    return KrausChannel(ops, tol=1e-9), MaxCoherentMixture(dim=d, weights=tuple(float(x) for x in p),
                                       incoherent=0.0, incoherent_index=d - 1)


@dataclasses.dataclass(frozen=True)
class DistillationResult:
    channel: KrausChannel
    output: np.ndarray
    mixture: MaxCoherentMixture
    # which parameter weights |d>: "lambda2" (direct expansion) or "lambda1"
    incoherent_label: str
    residuals: dict
    # stage-two weights p_q, q = 1..d-1; they sum to one
    level_weights: tuple[float, ...] = ()


def distill(params: DistillationParams, alpha: Sequence[float] | None = None) -> DistillationResult:
    """Run both stages on the input family and compare with the analytic mixture.

    The split of the intermediate state between ``|d>`` and the coherent
    direction is read off the intermediate state itself.
    """
    d = params.d
    a = choose_alpha(params, alpha)
    rho, *_ = build_theorem3_input(params)
    ch1, alpha_state, beta_state = phase1_channel(params, a)
    p1 = params.p1
    sigma = p1 * projector(alpha_state) + (1 - p1) * projector(beta_state)
    w_incoh = float(sigma[d - 1, d - 1].real)
    w_coh = 1.0 - w_incoh
    label = "lambda2" if abs(w_incoh - params.lambda2) <= abs(w_incoh - params.lambda1) else "lambda1"
    if label != "lambda2":
        log.info("intermediate state puts lambda1 on |d>")

    alpha_tilde = np.zeros(d, dtype=complex)
    alpha_tilde[:d - 1] = np.sqrt(a)
    if np.any(a <= config.zero_tol()):
        raise HypothesisError("stage two needs alpha without zero entries")
    glay, pmix = glay_channel(alpha_tilde)
    # operator q acts as sqrt(p_q) I on the unused half
    kept = [w for w in pmix.weights if w > 0]
    ch2 = embed(glay, 2 * d, kept)
    channel = compose(ch2, ch1, drop_tol=1e-15)
    output = apply_channel(channel, rho)
    mixture = MaxCoherentMixture(dim=2 * d, weights=tuple(w_coh * x for x in pmix.weights),
                                 incoherent=w_incoh, incoherent_index=d - 1)
    target = mixture.density()
    residuals = {
        "completeness": channel.completeness_residual(),
        "trace_distance": trace_distance(output, target),
        "sigma_split": float(np.abs(sigma[:d, :d] - (w_incoh * projector(np.eye(d)[d - 1])
                                                    + w_coh * projector(alpha_tilde))).max()),
        "weights_sum": abs(sum(pmix.weights) - 1.0),
    }
    return DistillationResult(channel, output, mixture, label, residuals, tuple(pmix.weights))


def theorem4_transform(d11, d21, phi, psi, alpha, beta, tau, c: float, p1: float,
                       tol: float | None = None):
    """Rank-two mixed-state conversion built from a pair certificate.

    The ``r``-dimensional data is lifted to ``2r`` dimensions with
    ``phi' = phi ⊕ 0``, ``psi' = c psi ⊕ sqrt(1-c²) tau``, ``alpha' = alpha ⊕ 0``
    and ``beta' = beta ⊕ 0``.  ``D1 = diag(d11, I)`` and ``T`` swaps the halves
    through ``d21``.  The ratio between the beta/psi and alpha/phi
    coefficients along the Birkhoff terms of ``d11`` must have modulus one.

    Returns:
        ``(input, channel, output)`` density matrices and the channel, where
        ``input = p1 |phi'><phi'| + (1-p1) |psi'><psi'|``.

    Raises:
        ConditionsNotMetError: a dephasing relation or the ratio condition fails.
    """
    t_ = config.tol(tol)
    if not 0 < c < 1:
        raise ValidationError(f"c must lie in (0, 1), got {c}")
    if not 0 <= p1 <= 1:
        raise ValidationError(f"p1 must lie in [0, 1], got {p1}")
    states = [as_state(v) for v in (phi, psi, alpha, beta, tau)]
    r = states[0].size
    if any(v.size != r for v in states):
        raise ValidationError("all five states must have the same dimension")
    if any(np.any(np.abs(v) <= config.zero_tol()) for v in states):
        raise ValidationError("all five states must have full coherence rank")
    phi, psi, alpha, beta, tau = states
    D11, D21 = np.asarray(d11, dtype=float), np.asarray(d21, dtype=float)
    for M, x, y, what in ((D11, alpha, phi, "d11 Δα ≠ Δφ"), (D11, beta, psi, "d11 Δβ ≠ Δψ"),
                          (D21, beta, tau, "d21 Δβ ≠ Δτ")):
        if M.shape != (r, r) or np.abs(M @ dephase(x) - dephase(y)).max() > t_:
            raise ConditionsNotMetError(f"precondition failed: {what}")
    dec = birkhoff_decompose(D11, t_)
    ratio = None
    for _, perm in dec:
        for j in range(r):
            i = int(perm[j])
            tj = (beta[j] / psi[i]) / (alpha[j] / phi[i])
            if ratio is None:
                ratio = tj
            elif abs(tj - ratio) > 1e-8 * max(1.0, abs(ratio)):
                raise ConditionsNotMetError("ratio differs between Birkhoff terms")
    if abs(abs(ratio) - 1) > 1e-8:
        raise ConditionsNotMetError(f"ratio has modulus {abs(ratio):.6g}; the lift needs modulus 1")

    z = np.zeros(r, dtype=complex)
    phi2 = np.concatenate([phi, z])
    psi2 = np.concatenate([c * psi, np.sqrt(1 - c ** 2) * tau])
    alpha2, beta2 = np.concatenate([alpha, z]), np.concatenate([beta, z])
    inst = PairInstance(phi2, psi2, alpha2, beta2)
    D1 = np.zeros((2 * r, 2 * r))
    D1[:r, :r] = D11
    D1[r:, r:] = np.eye(r)
    T = np.zeros((2 * r, 2 * r))
    T[:r, r:] = np.eye(r)
    T[r:, :r] = D21
    ident = np.arange(2 * r)
    cert = PairCertificate(d1=D1, c=float(c), t_matrix=T, pi1=ident, pi2=ident,
                           birkhoff_d1=block_birkhoff_decompose(D1, [range(r), range(r, 2 * r)], t_),
                           birkhoff_t=birkhoff_decompose(T, t_), ratio_t=complex(ratio / c))
    channel = build_channel_from_certificate(inst, cert, tol=t_)
    rho_in = p1 * projector(phi2) + (1 - p1) * projector(psi2)
    return rho_in, channel, apply_channel(channel, rho_in)
