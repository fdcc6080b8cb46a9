"""Random states, doubly stochastic matrices and solvable pair instances.

All generators take a ``numpy.random.Generator`` so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from .majorization import birkhoff_decompose, block_birkhoff_decompose, inverse_permutation, permutation_to_matrix
from .preorder import PairCertificate, PairInstance, _contiguous_layout


def random_state(dim: int, rng: np.random.Generator, support_size: int | None = None,
                 real: bool = False) -> np.ndarray:
    """Random pure state; with ``support_size`` only a random subset is nonzero."""
    k = dim if support_size is None else support_size
    v = np.zeros(dim, dtype=complex)
    idx = rng.choice(dim, size=k, replace=False)
    amp = rng.normal(size=k) + (0 if real else 1j * rng.normal(size=k))
    # keep amplitudes away from the zero threshold
    amp = np.where(np.abs(amp) < 1e-3, 1e-3, amp)
    v[idx] = amp
    return v / np.linalg.norm(v)


def random_probs(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(dim))


def random_permutation_mixture(dim: int, rng: np.random.Generator,
                               n_terms: int | None = None) -> np.ndarray:
    """Convex combination of ``n_terms`` random permutation matrices."""
    n = n_terms if n_terms is not None else int(rng.integers(1, dim + 2))
    w = rng.dirichlet(np.ones(n))
    D = np.zeros((dim, dim))
    for wi in w:
        D += wi * permutation_to_matrix(rng.permutation(dim))
    return D


def _phased(mod2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return np.sqrt(np.clip(mod2, 0, None)) * np.exp(2j * np.pi * rng.random(mod2.size))


def _mixture_on(blocks_rows, blocks_cols, dim, rng, perm_fn=None):
    """Random matrix that is a permutation mixture inside each (rows, cols) block pair."""
    D = np.zeros((dim, dim))
    for rows, cols in zip(blocks_rows, blocks_cols):
        rows, cols = np.asarray(rows, int), np.asarray(cols, int)
        if rows.size == 0:
            continue
        sub = random_permutation_mixture(rows.size, rng)
        D[np.ix_(rows, cols)] = sub
    return D


def random_shared_d_instance(dim: int, rng: np.random.Generator, *,
                             with_psi_only: bool | None = None,
                             with_zero_block: bool | None = None,
                             full_support: bool = False):
    """Instance solvable by a single doubly stochastic matrix.

    The basis splits into groups: groups where phi and alpha are nonzero and
    ``psi = g phi``, ``beta = t g alpha`` with ``|t| = 1``; optionally a group
    where phi and alpha vanish and psi, beta are related by their own mixture;
    optionally a group where every state vanishes.

    With ``full_support`` all four states are nonzero everywhere.

    Returns:
        ``(instance, D)`` with ``D Δα = Δφ`` and ``D Δβ = Δψ``.
    """
    psi_only = bool(rng.integers(2)) if with_psi_only is None else with_psi_only
    zero = bool(rng.integers(2)) if with_zero_block is None else with_zero_block
    if full_support:
        psi_only = zero = False
    n_extra = int(psi_only) + int(zero)
    if dim < 1 + n_extra:
        psi_only, zero = False, False
    sizes_extra = []
    rest = dim
    if psi_only:
        sizes_extra.append(int(rng.integers(1, max(2, rest - int(zero)))))
        rest -= sizes_extra[-1]
    if zero:
        z = int(rng.integers(1, rest)) if rest > 1 else 0
        sizes_extra.append(z)
        rest -= z
        zero = z > 0
    # split the main part into groups
    cuts = sorted(rng.choice(np.arange(1, rest), size=int(rng.integers(0, rest)), replace=False)) if rest > 1 else []
    groups = np.split(np.arange(rest), cuts)
    start = rest
    extra_blocks = []
    for s in sizes_extra:
        extra_blocks.append(np.arange(start, start + s))
        start += s
    psi_block = extra_blocks[0] if psi_only else np.array([], int)

    D = _mixture_on(groups + extra_blocks, groups + extra_blocks, dim, rng)
    alpha = np.zeros(dim, complex)
    alpha[:rest] = random_state(rest, rng)
    phi = _phased(D @ np.abs(alpha) ** 2, rng)

    t = 1.0 if psi_only else np.exp(2j * np.pi * rng.random())
    # weights of psi/beta on each group; a group may carry none
    w_groups = rng.dirichlet(np.ones(len(groups)))
    if not full_support:
        w_groups *= rng.random(len(groups)) > 0.3
    w_psi_only = rng.random() if psi_only else 0.0
    if w_groups.sum() == 0 and w_psi_only == 0:
        w_groups[0] = 1.0
    total = w_groups.sum() + w_psi_only
    w_groups, w_psi_only = w_groups / total, w_psi_only / total

    psi = np.zeros(dim, complex)
    beta = np.zeros(dim, complex)
    for g, w in zip(groups, w_groups):
        na = np.linalg.norm(alpha[g]) ** 2
        gain = np.sqrt(w / na) * np.exp(2j * np.pi * rng.random())
        psi[g] = gain * phi[g]
        beta[g] = t * gain * alpha[g]
    if psi_only:
        b = random_state(psi_block.size, rng) * np.sqrt(w_psi_only)
        beta[psi_block] = b
        psi[psi_block] = _phased(D[np.ix_(psi_block, psi_block)] @ np.abs(b) ** 2, rng)
    norm_psi = np.linalg.norm(psi)
    psi, beta = psi / norm_psi, beta / np.linalg.norm(beta)
    return PairInstance(phi, psi, alpha, beta), D


def _perm_with_pattern(out_groups, in_groups, rng, dim):
    """Random permutation (output j reads input perm[j]) respecting group pairs."""
    perm = np.empty(dim, int)
    for outs, ins in zip(out_groups, in_groups):
        perm[np.asarray(outs, int)] = rng.permutation(np.asarray(ins, int))
    return perm


def _t_permutation(lay, rng, dim):
    """Permutation allowed for T: block-1 inputs feed block-4 outputs."""
    h1, h2 = list(lay.h1), list(lay.h2)
    h3, h4, h5 = list(lay.h3), list(lay.h4), list(lay.h5)
    perm = np.empty(dim, int)
    fed = list(rng.choice(h4, size=len(h1), replace=False)) if h1 else []
    perm[fed] = rng.permutation(h1) if h1 else []
    outs = h1 + h3 + [j for j in h4 if j not in fed]
    perm[outs] = rng.permutation(h3 + h4)
    if h2:
        perm[h2] = rng.permutation(h2)
    if h5:
        perm[h5] = rng.permutation(h5)
    return perm


def random_certificate_instance(dim: int, rng: np.random.Generator, *,
                                shuffle: bool = True, allow_h4: bool = True,
                                max_terms: int = 3, attempts: int = 200):
    """Random instance together with a certificate that verifies for it.

    Block sizes, D1, T, ``c`` and the ratio are drawn first and the four states
    are then solved from the three conditions.  With ``shuffle`` the result is
    moved out of the canonical frame by random permutations.

    Returns:
        ``(instance, certificate)``.
    """
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    for _ in range(attempts):
        r = int(rng.integers(1, dim + 1))
        s1 = int(rng.integers(0, r + 1))
        s2 = int(rng.integers(0, dim - r + 1))
        t2 = int(rng.integers(0, s2 + 1))
        if not allow_h4:
            t2 = s2
        if s1 + t2 == 0:
            continue
        c = 1.0 if rng.random() < 0.25 else float(rng.uniform(0.2, 0.95))
        if c < 1 and s1 > s2 - t2:
            c = 1.0
        if c == 1.0 and s2 > 0 and t2 == 0:
            # psi would vanish on block 4 without T
            continue
        lay = _contiguous_layout(r, s1, s2, t2, dim)
        h1 = np.array(lay.h1, int)
        # block 1 splits into ratio groups; D1 never mixes groups
        cuts = sorted(rng.choice(np.arange(1, s1), size=int(rng.integers(0, s1)), replace=False)) if s1 > 1 else []
        groups1 = np.split(h1, cuts) if s1 else []
        D1_groups = groups1 + [g for g in (lay.h2, lay.h3 + lay.h4, lay.h5) if g]
        D1 = np.zeros((dim, dim))
        terms = int(rng.integers(1, max_terms + 1))
        for w in rng.dirichlet(np.ones(terms)):
            D1 += w * permutation_to_matrix(_perm_with_pattern(D1_groups, D1_groups, rng, dim))
        T = D1.copy()
        if c < 1:
            T = np.zeros((dim, dim))
            for w in rng.dirichlet(np.ones(terms)):
                T += w * permutation_to_matrix(_t_permutation(lay, rng, dim))

        theta = 0.0 if t2 else 2 * np.pi * rng.random()
        ratio = np.exp(1j * theta) / c
        alpha = np.zeros(dim, complex)
        alpha[:r] = random_state(r, rng)
        phi = np.zeros(dim, complex)
        phi[:r] = _phased(D1[:r, :r] @ np.abs(alpha[:r]) ** 2, rng)

        frac = 0.0 if s1 == 0 else (1.0 if t2 == 0 else float(rng.uniform(0.1, 0.9)))
        beta = np.zeros(dim, complex)
        psi = np.zeros(dim, complex)
        if s1:
            raw = rng.uniform(0.3, 1.0, len(groups1)) * np.exp(2j * np.pi * rng.random(len(groups1)))
            mass = sum(abs(g) ** 2 * np.linalg.norm(alpha[grp]) ** 2 for g, grp in zip(raw, groups1))
            gains = raw * np.sqrt(frac / (abs(ratio) ** 2 * mass))
            for g, grp in zip(gains, groups1):
                psi[grp] = g * phi[grp]
                beta[grp] = ratio * g * alpha[grp]
        if t2:
            h3 = list(lay.h3)
            beta[h3] = random_state(t2, rng) * np.sqrt(1 - frac)
        D2 = c ** 2 * D1 + (1 - c ** 2) * T
        mid = list(lay.h3 + lay.h4)
        if mid:
            m2 = (D2 @ np.abs(beta) ** 2)[mid]
            if m2.min() < 1e-4:
                continue
            psi[mid] = _phased(m2, rng)
        if abs(np.linalg.norm(psi) - 1) > 1e-9 or abs(np.linalg.norm(beta) - 1) > 1e-9:
            continue
        canon = PairInstance(phi, psi, alpha, beta)
        bd1 = block_birkhoff_decompose(D1, [g for g in D1_groups if len(g)])
        bt = birkhoff_decompose(T) if c < 1 else bd1
        D1, T = bd1.matrix(), (bt.matrix() if c < 1 else bd1.matrix())
        u = rng.permutation(dim) if shuffle else np.arange(dim)
        v = rng.permutation(dim) if shuffle else np.arange(dim)
        pi1, pi2 = u, inverse_permutation(v)
        P1, P2 = permutation_to_matrix(pi1), permutation_to_matrix(pi2)
        inst = canon.permuted(inverse_permutation(u), inverse_permutation(v))
        cert = PairCertificate(d1=P1.T @ D1 @ P2.T, c=c, t_matrix=P1.T @ T @ P2.T,
                               pi1=pi1, pi2=pi2, birkhoff_d1=bd1, birkhoff_t=bt,
                               ratio_t=complex(ratio))
        return inst, cert
    raise RuntimeError("could not draw a consistent random certificate")


def random_distillation_params(d: int, rng: np.random.Generator):
    """Random valid parameters for the rank-two distillation family."""
    from .distill import DistillationParams

    return DistillationParams(
        d=d, gamma=float(rng.uniform(0.05, np.pi / 4 - 0.05)),
        lambda1=float(rng.uniform(0.05, 0.95)), c=float(rng.uniform(0.05, 0.95)),
        phi=random_state(d - 1, rng), psi=random_state(d - 1, rng))


def random_theorem4_instance(r: int, rng: np.random.Generator) -> dict:
    """Keyword arguments for ``theorem4_transform`` satisfying its hypotheses."""
    inst, D11 = random_shared_d_instance(r, rng, full_support=True)
    D21 = random_permutation_mixture(r, rng)
    tau = _phased(D21 @ np.abs(inst.beta) ** 2, rng)
    return dict(d11=D11, d21=D21, phi=inst.phi, psi=inst.psi, alpha=inst.alpha,
                beta=inst.beta, tau=tau, c=float(rng.uniform(0.05, 0.95)),
                p1=float(rng.uniform(0, 1)))
