import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from cohkit.distill import choose_alpha, phase1_certificate, phase1_instance
from cohkit.errors import (ConditionsNotMetError, HypothesisError, NecessaryConditionError,
                           ValidationError)
from cohkit.linalg import dephase
from cohkit.majorization import (birkhoff_decompose, inverse_permutation, majorizes,
                                 transfer_matrix)
from cohkit.preorder import (PairCertificate, PairInstance, brute_force_feasible,
                             build_channel_from_certificate, canonicalize,
                             channel_images_error, derive_d1, search_certificate,
                             shared_d_channel, space_decomposition, verify_certificate)
from cohkit.sampling import (random_certificate_instance, random_distillation_params,
                             random_shared_d_instance, random_state)
from cohkit.sio import classify_channel

from conftest import seeds

S = 1 / np.sqrt(2)
PLUS = np.array([S, S])
ZERO, ONE = np.array([1.0, 0]), np.array([0, 1.0])


def trivial_certificate(d, D1=None, t=1.0) -> PairCertificate:
    D1 = np.eye(d) if D1 is None else D1
    ident = np.arange(d)
    return PairCertificate(d1=D1, c=1.0, t_matrix=D1, pi1=ident, pi2=ident,
                           birkhoff_d1=birkhoff_decompose(D1), birkhoff_t=birkhoff_decompose(D1),
                           ratio_t=t)


def pair(phi, psi, alpha, beta) -> PairInstance:
    return PairInstance(*(np.asarray(v, dtype=complex) for v in (phi, psi, alpha, beta)))


def test_pair_instance_validation():
    with pytest.raises(ValidationError):
        pair(ZERO, ONE, ZERO, [1, 0, 0])
    with pytest.raises(ValidationError):
        pair(ZERO, ONE, ZERO, [1, 1])


# space decomposition

def test_space_decomposition_mixed_pattern():
    a, b = np.sqrt([0.3, 0.7])
    lay = space_decomposition([a, b, 0, 0], [a, 0, b, 0], [a, 0, b, 0])
    assert (lay.h1, lay.h2, lay.h3, lay.h4, lay.h5) == ((0,), (1,), (2,), (), (3,))


def test_space_decomposition_full_support():
    v = np.ones(4) / 2
    lay = space_decomposition(v, v, v)
    assert lay.h1 == (0, 1, 2, 3) and not (lay.h2 or lay.h3 or lay.h4 or lay.h5)


def test_space_decomposition_orthogonal_inputs():
    lay = space_decomposition(ZERO, ONE, ZERO)
    assert lay.h2 == (0,) and lay.h4 == (1,) and not lay.h1


def test_space_decomposition_flags_unclassified():
    lay = space_decomposition([1, 0, 0], [1, 0, 0], [S, 0, S])
    assert lay.unclassified == (2,)


# canonicalize

def test_canonicalize_already_canonical():
    inst = pair([S, S, 0], [S, 0, S], [S, S, 0], [S, 0, S])
    canon, u, v, lay = canonicalize(inst)
    assert list(u) == [0, 1, 2] and list(v) == [0, 1, 2]
    assert np.allclose(canon.phi, inst.phi) and np.allclose(canon.beta, inst.beta)
    assert (lay.h1, lay.h2, lay.h3) == ((0,), (1,), (2,))


def test_canonicalize_shuffled_roundtrip(rng):
    inst, _ = random_certificate_instance(6, rng, shuffle=True)
    canon, u, v, lay = canonicalize(inst)
    back = canon.permuted(inverse_permutation(u), inverse_permutation(v))
    for name in ("phi", "psi", "alpha", "beta"):
        assert np.array_equal(getattr(back, name), getattr(inst, name))
    # layout is contiguous in the canonical frame
    assert lay.h1 == tuple(range(lay.s1))


def test_canonicalize_s2_less_than_t2():
    # psi has nothing outside supp(phi) but beta does
    inst = pair([1, 0], [1, 0], [1, 0], [S, S])
    with pytest.raises(NecessaryConditionError, match="necessary condition failed"):
        canonicalize(inst)


def test_canonicalize_rank_mismatch():
    with pytest.raises(HypothesisError):
        canonicalize(pair(PLUS, PLUS, ZERO, ZERO))


# verify_certificate

def test_verify_identity_certificate(rng):
    phi, psi = random_state(3, rng), random_state(3, rng)
    rep = verify_certificate(pair(phi, psi, phi, psi), trivial_certificate(3))
    assert rep.ok and rep.condition is None


def test_verify_ratio_bound_violation(rng):
    phi, psi = random_state(3, rng), random_state(3, rng)
    rep = verify_certificate(pair(phi, psi, phi, psi), trivial_certificate(3, t=1.2))
    assert not rep.ok and rep.condition == "condition (iii) bound"


def test_verify_condition_one_failure():
    rep = verify_certificate(pair([0.6, 0.8], PLUS, [0.8, 0.6], PLUS), trivial_certificate(2))
    assert not rep.ok and rep.condition == "condition (i)"


def test_verify_ratio_failure_names_term():
    a = np.array([np.sqrt(0.6), np.sqrt(0.4)])
    inst = pair(a, a, a, a * [1, -1])
    rep = verify_certificate(inst, trivial_certificate(2))
    assert not rep.ok and rep.condition == "condition (iii)"
    assert rep.as_dict()["indices"]


def test_verify_theorem3_certificate(rng):
    for d in (2, 3, 5):
        params = random_distillation_params(d, rng)
        a = choose_alpha(params)
        assert verify_certificate(phase1_instance(params, a), phase1_certificate(params, a)).ok


def test_verify_bad_matrix_reports_stochastic(rng):
    phi, psi = random_state(2, rng), random_state(2, rng)
    cert = trivial_certificate(2)
    bad = PairCertificate(**{**cert.__dict__, "d1": np.array([[0.9, 0.9], [0.1, 0.1]])})
    assert verify_certificate(pair(phi, psi, phi, psi), bad).condition == "stochastic"


# build_channel_from_certificate

def test_build_identity_certificate(rng):
    phi, psi = random_state(3, rng), random_state(3, rng)
    ch = build_channel_from_certificate(pair(phi, psi, phi, psi), trivial_certificate(3))
    assert len(ch) == 1 and np.allclose(ch.operators[0], np.eye(3))


def test_build_single_state_nontrivial_d1():
    inst = pair(PLUS, PLUS, PLUS, PLUS)
    ch = build_channel_from_certificate(inst, trivial_certificate(2, np.full((2, 2), 0.5)))
    assert len(ch) == 2 and classify_channel(ch) == "SIO"
    assert channel_images_error(ch, inst) < 1e-12


def test_build_theorem3_phase_one(rng):
    params = random_distillation_params(4, rng)
    a = choose_alpha(params)
    inst = phase1_instance(params, a)
    ch = build_channel_from_certificate(inst, phase1_certificate(params, a))
    assert classify_channel(ch) == "SIO"
    assert channel_images_error(ch, inst) < 1e-8


def test_build_rejects_invalid_certificate(rng):
    phi, psi = random_state(2, rng), random_state(2, rng)
    with pytest.raises(ConditionsNotMetError):
        build_channel_from_certificate(pair(phi, psi, phi, psi), trivial_certificate(2, t=1.2))


# shared_d_channel

def test_shared_d_identity(rng):
    phi, psi = random_state(3, rng), random_state(3, rng)
    ch = shared_d_channel(pair(phi, psi, phi, psi), np.eye(3))
    assert len(ch) == 1 and np.allclose(ch.operators[0], np.eye(3))


def test_shared_d_dim2_example():
    alpha = np.sqrt([0.8, 0.2])
    phi = np.sqrt([0.6, 0.4])
    D = transfer_matrix(dephase(phi), dephase(alpha))
    assert np.allclose(D, np.array([[2, 1], [1, 2]]) / 3)
    # the ratio condition across both Birkhoff terms forces psi, beta to be
    # phase-shifted copies of phi, alpha
    inst = pair(phi, 1j * phi, alpha, -alpha)
    ch = shared_d_channel(inst, D)
    assert classify_channel(ch) == "SIO"
    assert channel_images_error(ch, inst) < 1e-8


def test_shared_d_rejects_random_beta(rng):
    inst, D = random_shared_d_instance(3, rng, full_support=True)
    bad = pair(inst.phi, inst.psi, inst.alpha, random_state(3, rng))
    with pytest.raises(ConditionsNotMetError):
        shared_d_channel(bad, D)


# search_certificate

def test_search_identity_instance(rng):
    phi, psi = random_state(3, rng), random_state(3, rng)
    inst = pair(phi, psi, phi, psi)
    cert = search_certificate(inst, budget=1)
    assert cert is not None and verify_certificate(inst, cert).ok


def test_search_theorem3_instance(rng):
    for d in (2, 3, 4):
        params = random_distillation_params(d, rng)
        inst = phase1_instance(params, choose_alpha(params))
        cert = search_certificate(inst)
        assert cert is not None and verify_certificate(inst, cert).ok


def test_search_majorization_violation_is_empty():
    # alpha is more coherent than phi, which no free operation achieves
    inst = pair([0.6, 0.8], PLUS, PLUS, PLUS)
    assert not majorizes(dephase(inst.phi), dephase(inst.alpha))
    assert search_certificate(inst) is None


def test_search_rank_mismatch():
    with pytest.raises(HypothesisError):
        search_certificate(pair(PLUS, PLUS, ZERO, ZERO))


# brute_force_feasible

def test_brute_force_identity(rng):
    phi, psi = random_state(2, rng), random_state(2, rng)
    ok, ch = brute_force_feasible(pair(phi, psi, phi, psi))
    assert ok and channel_images_error(ch, pair(phi, psi, phi, psi)) < 1e-6


def test_brute_force_equal_inputs_distinct_outputs():
    ok, ch = brute_force_feasible(pair(PLUS, PLUS, ZERO, ONE))
    assert not ok and ch is None


def test_brute_force_agrees_with_shared_d(rng):
    for _ in range(5):
        inst, D = random_shared_d_instance(2, rng)
        shared_d_channel(inst, D)
        assert brute_force_feasible(inst)[0]


def test_brute_force_dimension_limit(rng):
    v = random_state(4, rng)
    with pytest.raises(ValidationError):
        brute_force_feasible(pair(v, v, v, v))


# properties

@given(seeds, st.integers(2, 8))
def test_certificate_channels_are_sound(seed, d):
    rng = np.random.default_rng(seed)
    inst, cert = random_certificate_instance(d, rng)
    assert verify_certificate(inst, cert).ok
    ch = build_channel_from_certificate(inst, cert)
    assert classify_channel(ch) == "SIO"
    assert channel_images_error(ch, inst) < 1e-8


@given(seeds, st.integers(2, 8))
def test_shared_d_channels_are_sound(seed, d):
    rng = np.random.default_rng(seed)
    inst, D = random_shared_d_instance(d, rng)
    ch = shared_d_channel(inst, D)
    assert classify_channel(ch) == "SIO"
    assert channel_images_error(ch, inst) < 1e-8


@given(seeds, st.integers(2, 8))
def test_certificate_roundtrip_without_h4(seed, d):
    rng = np.random.default_rng(seed)
    inst, cert = random_certificate_instance(d, rng, allow_h4=False)
    ch = build_channel_from_certificate(inst, cert)
    assert np.abs(derive_d1(ch, inst.phi, inst.alpha) - cert.d1).max() < 1e-8


@given(seeds, st.integers(2, 8))
def test_search_finds_certificates(seed, d):
    rng = np.random.default_rng(seed)
    inst, _ = random_certificate_instance(d, rng)
    cert = search_certificate(inst)
    assert cert is not None and verify_certificate(inst, cert).ok


@given(seeds, st.integers(2, 3))
def test_necessary_condition_filter(seed, d):
    rng = np.random.default_rng(seed)
    inst = pair(*(random_state(d, rng) for _ in range(4)))
    assume(not majorizes(dephase(inst.phi), dephase(inst.alpha)))
    assert search_certificate(inst) is None
    assert not brute_force_feasible(inst, max_kraus=2, restarts=1)[0]
