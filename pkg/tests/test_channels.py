import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cftbench.channels import (
    Channel,
    MapChannelSpec,
    aqpt_reconstruct,
    aqpt_state,
    average_fidelity,
    check_choi,
    choi_from_kraus,
    choi_to_process,
    depolarizing_kraus,
    map_channel,
    map_fidelity,
    process_from_kraus,
    process_to_choi,
    unitary_channel,
)
from cftbench.ensembles import StateEnsemble
from cftbench.exceptions import ContractError, DimensionError
from cftbench.operators import beta_reshuffle, check_psd, partial_transpose, projector
from cftbench.sampling import random_density, random_kets, random_kraus, random_povm, random_probabilities, random_unitary

dims = st.integers(min_value=2, max_value=4)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random_map(d, n, rng):
    povm = random_povm(d, n, rng=rng)
    prepared = np.array([projector(k) for k in random_kets(n, d, rng=rng)])
    return povm, prepared


@given(dims, seeds)
def test_choi_process_round_trip(d, seed):
    ops = random_kraus(d, rng=np.random.default_rng(seed))
    lam = process_from_kraus(ops)
    chi = choi_from_kraus(ops)
    assert np.abs(beta_reshuffle(lam) - chi).max() < 1e-12
    assert np.abs(choi_to_process(process_to_choi(lam, d, d), d, d) - lam).max() < 1e-12


def test_rectangular_channel_round_trip(rng):
    ops = random_kraus(2, 3, rng=rng)
    ch = Channel.from_kraus(ops)
    assert ch.process.shape == (9, 4)
    assert np.abs(ch.choi - choi_from_kraus(ops)).max() < 1e-12
    back = Channel.from_choi(ch.choi, 2, 3)
    assert np.abs(back.process - ch.process).max() < 1e-12


@given(dims, seeds)
def test_apply_matches_kraus_and_preserves_trace(d, seed):
    rng = np.random.default_rng(seed)
    ops = random_kraus(d, rng=rng)
    ch = Channel.from_kraus(ops)
    rho = random_density(d, rng=rng)
    out = ch.apply(rho)
    assert np.abs(out - sum(E @ rho @ E.conj().T for E in ops)).max() < 1e-12
    assert abs(np.trace(out) - 1) < 1e-10
    check_psd(out)
    many = ch.apply_many(np.array([rho, rho]))
    assert np.abs(many[1] - out).max() < 1e-14


@given(dims, seeds)
def test_adjoint_duality(d, seed):
    rng = np.random.default_rng(seed)
    ch = Channel.from_kraus(random_kraus(d, rng=rng))
    rho, A = random_density(d, rng=rng), random_density(d, rng=rng)
    assert abs(np.trace(A @ ch.apply(rho)) - np.trace(ch.adjoint(A) @ rho)) < 1e-12
    assert np.abs(ch.adjoint(np.eye(d)) - np.eye(d)).max() < 1e-12


def test_identity_and_unitary(rng):
    rho = random_density(3, rng=rng)
    assert np.allclose(Channel.identity(3).apply(rho), rho)
    U = random_unitary(3, rng=rng)
    assert np.abs(unitary_channel(U).apply(rho) - U @ rho @ U.conj().T).max() < 1e-12
    dep = Channel.from_kraus(depolarizing_kraus())
    assert np.abs(dep.apply(random_density(2, rng=rng)) - np.eye(2) / 2).max() < 1e-12


def test_choi_validation_errors(rng):
    with pytest.raises(ContractError):
        Channel.from_kraus([2 * np.eye(2)])
    with pytest.raises(DimensionError):
        check_choi(np.eye(3), 2, 2)
    with pytest.raises(ContractError):
        check_choi(np.eye(4), 2, 2)  # trace 2 on each input block
    bad = np.diag([1.0, 0, 0, -1.0]) + np.eye(4) * 0.5
    with pytest.raises(ContractError):
        check_choi(bad, 2, 2)
    with pytest.raises(DimensionError):
        Channel(np.eye(4), 2, 3)


def test_apply_rejects_wrong_shape(rng):
    ch = Channel.identity(2)
    with pytest.raises(DimensionError):
        ch.apply(np.eye(3))
    with pytest.raises(DimensionError):
        ch.adjoint(np.eye(3))


@given(dims, seeds)
def test_aqpt_round_trip(d, seed):
    rng = np.random.default_rng(seed)
    ch = Channel.from_kraus(random_kraus(d, rng=rng))
    tau = random_density(d, rng=rng)
    res = aqpt_reconstruct(aqpt_state(ch, tau), tau)
    assert not res.partial and not res.support_violation
    assert np.abs(res.choi - ch.choi).max() < 1e-9


def test_aqpt_maximally_mixed_probe(rng):
    ch = Channel.from_kraus(random_kraus(3, rng=rng))
    tau = np.eye(3) / 3
    rho_ab = aqpt_state(ch, tau)
    assert abs(np.trace(rho_ab) - 1) < 1e-12
    assert np.abs(aqpt_reconstruct(rho_ab, tau).choi - ch.choi).max() < 1e-10


def test_aqpt_rank_deficient_probe(rng):
    ch = Channel.from_kraus(random_kraus(3, rng=rng))
    tau = random_density(3, rank=2, rng=rng)
    res = aqpt_reconstruct(aqpt_state(ch, tau), tau)
    assert res.partial
    assert res.support_residual < 1e-10
    P = np.kron(np.eye(3), aqpt_state.__globals__["support_projector"](tau.T))
    assert np.abs(res.choi - P @ ch.choi @ P).max() < 1e-9


def test_aqpt_detects_inconsistent_state(rng):
    tau = np.diag([1.0, 0.0]).astype(complex)
    rho_ab = random_density(4, rng=rng)
    assert aqpt_reconstruct(rho_ab, tau).support_violation


@given(dims, seeds)
def test_map_channel_is_entanglement_breaking(d, seed):
    rng = np.random.default_rng(seed)
    povm, prepared = _random_map(d, 3, rng)
    ch = map_channel(povm, prepared)
    check_choi(ch.choi, d, d)
    assert np.abs(choi_to_process(ch.choi, d, d) - ch.process).max() < 1e-12
    rho_ab = aqpt_state(ch, random_density(d, rng=rng))
    check_psd(partial_transpose(rho_ab, (d, d)))


def test_map_channel_action(rng):
    povm, prepared = _random_map(3, 4, rng)
    rho = random_density(3, rng=rng)
    want = sum(np.trace(P @ rho) * xi for P, xi in zip(povm, prepared))
    assert np.abs(map_channel(povm, prepared).apply(rho) - want).max() < 1e-12


def test_map_fidelity_double_sum(rng):
    d, n = 3, 4
    kets = random_kets(5, d, rng=rng)
    targets = random_kets(5, d, rng=rng)
    ens = StateEnsemble(random_probabilities(5, rng=rng), kets, targets)
    povm, prepared = _random_map(d, n, rng)
    assert abs(map_fidelity(ens, povm, prepared) - average_fidelity(map_channel(povm, prepared), ens)) < 1e-12


def test_map_spec_validation(rng):
    povm, prepared = _random_map(2, 2, rng)
    spec = MapChannelSpec(povm, prepared)
    assert spec.channel().d_in == 2
    with pytest.raises(ContractError):
        MapChannelSpec(povm * 0.5, prepared)
    with pytest.raises(ContractError):
        MapChannelSpec(povm, np.array([np.eye(2) / 2, prepared[1]]))
    with pytest.raises(DimensionError):
        MapChannelSpec(povm, prepared[:1])


def test_average_fidelity_identity(rng):
    kets = random_kets(4, 3, rng=rng)
    ens = StateEnsemble(np.full(4, 0.25), kets, kets)
    assert abs(average_fidelity(Channel.identity(3), ens) - 1) < 1e-12
    with pytest.raises(DimensionError):
        average_fidelity(Channel.identity(2), ens)
