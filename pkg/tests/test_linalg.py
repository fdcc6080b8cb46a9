import numpy as np
import pytest
from hypothesis import given

from cohkit import config
from cohkit.errors import ValidationError
from cohkit.linalg import (as_density, as_probs, as_state, coherence_rank, dephase,
                           is_density_matrix, mix, trace_distance)
from cohkit.sampling import random_state

from conftest import basis, dims, proj, seeds

PLUS = np.array([1, 1]) / np.sqrt(2)
MINUS = np.array([1, -1]) / np.sqrt(2)


def test_dephase_basis_state():
    assert np.allclose(dephase([1, 0]), [1, 0])


def test_dephase_uniform():
    assert np.allclose(dephase(PLUS), [0.5, 0.5])


def test_dephase_complex_amplitudes():
    assert np.allclose(dephase([np.sqrt(0.6), -1j * np.sqrt(0.4)]), [0.6, 0.4])


def test_dephase_rejects_unnormalized():
    with pytest.raises(ValidationError):
        dephase([1, 1])


def test_renormalize_flag():
    v = as_state([1 + 1e-8, 0], renormalize=True)
    assert abs(np.linalg.norm(v) - 1) < 1e-15
    with pytest.raises(ValidationError):
        as_state([1.1, 0], renormalize=True)


def test_states_are_read_only():
    v = as_state([1, 0])
    with pytest.raises(ValueError):
        v[0] = 0


@pytest.mark.parametrize("amps, rank", [
    ([1, 0, 0], 1),
    (np.ones(3) / np.sqrt(3), 3),
    ([np.sqrt(0.5), 1e-14, np.sqrt(0.5)], 2),
])
def test_coherence_rank(amps, rank):
    assert coherence_rank(amps) == rank


def test_coherence_rank_threshold_is_configurable():
    amps = [np.sqrt(0.5), 1e-14, np.sqrt(0.5)]
    assert coherence_rank(amps, zero_tol=1e-15) == 3
    with config.override(zero=1e-15):
        assert coherence_rank(amps) == 3


def test_trace_distance_examples():
    rho = proj(PLUS)
    assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)
    assert trace_distance(proj(basis(2, 0)), proj(basis(2, 1))) == pytest.approx(1)
    # pure states: sqrt(1 - |<a|b>|^2)
    assert trace_distance(proj(PLUS), proj(basis(2, 0))) == pytest.approx(1 / np.sqrt(2))


def test_trace_distance_dim_mismatch():
    with pytest.raises(ValidationError):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_mix_examples():
    assert np.allclose(mix([1.0], [basis(2, 0)]), proj(basis(2, 0)))
    assert np.allclose(mix([0.5, 0.5], [basis(2, 0), basis(2, 1)]), np.eye(2) / 2)
    assert np.allclose(mix([0.5, 0.5], [PLUS, MINUS]), np.eye(2) / 2)


@pytest.mark.parametrize("weights, states", [
    ([0.7, 0.7], [basis(2, 0), basis(2, 1)]),
    ([-0.5, 1.5], [basis(2, 0), basis(2, 1)]),
    ([0.5, 0.5], [basis(2, 0), basis(3, 1)]),
])
def test_mix_rejects_bad_input(weights, states):
    with pytest.raises(ValidationError):
        mix(weights, states)


def test_as_probs_and_density_validation():
    with pytest.raises(ValidationError):
        as_probs([0.5, 0.6])
    with pytest.raises(ValidationError):
        as_probs([1.5, -0.5])
    with pytest.raises(ValidationError):
        as_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        as_density(np.array([[0.5, 0.5], [0, 0.5]]))
    assert is_density_matrix(np.eye(3) / 3)


@given(seeds, dims)
def test_dephase_is_probability_vector(seed, d):
    v = random_state(d, np.random.default_rng(seed))
    p = dephase(v)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) < 1e-12


@given(seeds, dims)
def test_trace_distance_is_a_metric(seed, d):
    rng = np.random.default_rng(seed)
    rhos = [mix(rng.dirichlet(np.ones(3)), [random_state(d, rng) for _ in range(3)])
            for _ in range(3)]
    a, b, c = rhos
    assert trace_distance(a, b) == trace_distance(b, a)
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12
    assert 0 <= trace_distance(a, b) <= 1 + 1e-12


@given(seeds, dims, dims)
def test_mix_output_is_density(seed, d, k):
    rng = np.random.default_rng(seed)
    rho = mix(rng.dirichlet(np.ones(k)), [random_state(d, rng) for _ in range(k)])
    assert is_density_matrix(rho)
