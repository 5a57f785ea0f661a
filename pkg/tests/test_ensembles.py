import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cftbench.channels import average_fidelity, check_choi
from cftbench.ensembles import (
    StateEnsemble,
    WeightedStates,
    bayes_joint,
    check_povm,
    effective_eb_channel,
    inverse_sqrt_states,
    mutually_unbiased_bases,
    sandwich_choi,
    separable_state,
    separable_werner_state,
    sqrt_povm,
    support_completion,
    targets_from_tau_prime,
    uniform_ensemble,
)
from cftbench.exceptions import ContractError, DimensionError
from cftbench.operators import vectorize
from cftbench.sampling import random_kets, random_povm, random_probabilities, random_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_ensemble(d, n, rng, d_out=None):
    d_out = d if d_out is None else d_out
    return StateEnsemble(random_probabilities(n, rng=rng), random_kets(n, d, rng=rng), random_kets(n, d_out, rng=rng))


def test_ensemble_validation():
    k = np.eye(2, dtype=complex)
    with pytest.raises(ContractError):
        StateEnsemble([0.6, 0.6], k, k)
    with pytest.raises(ContractError):
        StateEnsemble([0.5, 0.5], 2 * k, k)
    with pytest.raises(DimensionError):
        StateEnsemble([1.0], k, k)
    with pytest.raises(ContractError):
        StateEnsemble([1.5, -0.5], k, k)


def test_from_projectors_round_trip(rng):
    ens = random_ensemble(3, 4, rng)
    again = StateEnsemble.from_projectors(ens.priors, ens.input_projectors, ens.target_projectors)
    assert np.abs(again.input_projectors - ens.input_projectors).max() < 1e-10
    assert np.abs(again.tau - ens.tau).max() < 1e-12


@given(st.integers(2, 4), st.integers(2, 6), seeds)
def test_sqrt_povm_completeness_and_weights(d, n, seed):
    ens = random_ensemble(d, n, np.random.default_rng(seed))
    S = sqrt_povm(ens)
    check_povm(S, support=support_completion(ens))
    assert np.abs(np.einsum("xij,ji->x", S, ens.tau).real - ens.priors).max() < 1e-12


def test_sqrt_povm_on_rank_deficient_support(rng):
    kets = np.zeros((3, 3), dtype=complex)
    kets[:, :2] = random_kets(3, 2, rng=rng)
    ens = StateEnsemble(np.full(3, 1 / 3), kets, kets)
    S = sqrt_povm(ens)
    P = support_completion(ens)
    assert abs(np.trace(P).real - 2) < 1e-10
    assert np.abs(S.sum(axis=0) - P).max() < 1e-10
    with pytest.raises(ContractError):
        check_povm(S)


@given(st.integers(2, 4), seeds)
def test_inverse_sqrt_states_resolve_tau(d, seed):
    rng = np.random.default_rng(seed)
    ens = random_ensemble(d, 5, rng)
    povm = random_povm(d, 4, rng=rng)
    ws = inverse_sqrt_states(povm, ens.tau)
    assert np.abs(ws.average() - ens.tau).max() < 1e-12
    assert np.abs(ws.weights - np.einsum("yij,ji->y", povm, ens.tau).real).max() < 1e-12
    for phi in ws.states:
        assert abs(np.trace(phi) - 1) < 1e-12


def test_inverse_sqrt_states_drop_null_outcomes():
    tau = np.diag([1.0, 0.0]).astype(complex)
    povm = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)
    with pytest.warns(UserWarning, match="zero probability"):
        ws = inverse_sqrt_states(povm, tau)
    assert len(ws.weights) == 1


def test_weighted_states_validation():
    with pytest.raises(ContractError):
        WeightedStates([0.3, 0.3], np.array([np.eye(2) / 2] * 2))
    with pytest.raises(DimensionError):
        WeightedStates([1.0], np.eye(2))


@given(st.integers(2, 3), seeds)
def test_bayes_routes_agree(d, seed):
    rng = np.random.default_rng(seed)
    ens = random_ensemble(d, 4, rng)
    povm = random_povm(d, 3, rng=rng)
    tables = [bayes_joint(ens, povm, r) for r in ("simultaneous", "alice_prepares", "bob_prepares")]
    for t in tables[1:]:
        assert np.abs(t - tables[0]).max() < 1e-12
    assert np.abs(tables[0].sum(axis=0) - np.einsum("yij,ji->y", povm, ens.tau).real).max() < 1e-12


def test_bayes_unknown_route(rng):
    ens = random_ensemble(2, 2, rng)
    with pytest.raises(ValueError):
        bayes_joint(ens, random_povm(2, 2, rng=rng), "telepathy")


@given(st.integers(2, 4), seeds)
def test_effective_channel_sandwich_identity(d, seed):
    ens = random_ensemble(d, 5, np.random.default_rng(seed))
    ch = effective_eb_channel(ens)
    check_choi(ch.choi, d, d)
    assert np.abs(sandwich_choi(ens, ch.choi) - separable_state(ens)).max() < 1e-12


def test_effective_channel_fidelity_matches_sqrt_fidelity(rng):
    # average fidelity of the effective channel is the double sum with Sqrt POVM and target states
    ens = random_ensemble(3, 4, rng)
    S = sqrt_povm(ens)
    click = np.einsum("yij,xji->xy", S, ens.input_projectors).real
    overlap = np.abs(ens.targets.conj() @ ens.targets.T) ** 2
    want = float(np.einsum("x,xy,yx->", ens.priors, click, overlap))
    assert abs(average_fidelity(effective_eb_channel(ens), ens) - want) < 1e-12


def test_effective_channel_rectangular(rng):
    ens = random_ensemble(2, 3, rng, d_out=3)
    ch = effective_eb_channel(ens)
    assert (ch.d_in, ch.d_out) == (2, 3)
    check_choi(ch.choi, 2, 3)


def test_targets_from_tau_prime_diagonal(rng):
    kets = random_kets(3, 2, rng=rng)
    pri = np.full(3, 1 / 3)
    ens = targets_from_tau_prime(pri, kets, [0.8, 0.2])
    tp = np.einsum("x,xij->ij", ens.priors, ens.target_projectors)
    # targets resolve tau' with the target priors p'_x = Tr(S_x tau')
    S = sqrt_povm(ens)
    p_prime = np.einsum("xij,ji->x", S, np.diag([0.8, 0.2])).real
    assert np.abs(np.einsum("x,xij->ij", p_prime, ens.target_projectors) - np.diag([0.8, 0.2])).max() < 1e-12
    assert tp.shape == (2, 2)


def test_targets_from_tau_prime_nondiagonal_warns(rng):
    kets = random_kets(3, 2, rng=rng)
    U = random_unitary(2, rng=rng)
    tp = U @ np.diag([0.7, 0.3]) @ U.conj().T
    with pytest.warns(UserWarning, match="not diagonal"):
        ens = targets_from_tau_prime(np.full(3, 1 / 3), kets, tp)
    ref = targets_from_tau_prime(np.full(3, 1 / 3), kets, [0.7, 0.3])
    assert np.abs(ens.target_projectors - ref.target_projectors).max() < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_mubs_are_mutually_unbiased(d):
    bases = mutually_unbiased_bases(d)
    assert len(bases) == d + 1
    for i, B in enumerate(bases):
        assert np.abs(B @ B.conj().T - np.eye(d)).max() < 1e-12
        for C in bases[i + 1 :]:
            assert np.abs(np.abs(B.conj() @ C.T) ** 2 - 1 / d).max() < 1e-12


def test_mubs_unavailable_dimension():
    with pytest.raises(ValueError):
        mutually_unbiased_bases(6)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_uniform_ensemble_is_two_design(d):
    ens = uniform_ensemble(d)
    second = sum(p * np.kron(P, P) for p, P in zip(ens.priors, ens.input_projectors))
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1
    assert np.abs(second - (np.eye(d * d) + swap) / (d * (d + 1))).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_uniform_effective_choi_is_scaled_werner(d):
    ch = effective_eb_channel(uniform_ensemble(d))
    assert np.abs(ch.choi - d * separable_werner_state(d)).max() < 1e-12
    v = vectorize(np.eye(d))
    assert np.abs(separable_werner_state(d) - (np.eye(d * d) + np.outer(v, v)) / (d * (d + 1))).max() < 1e-15
