import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cftbench.bloch import QubitScenario, bloch_from_state, closed_form_cft, helstrom_pair, scenario_ensemble, states_from_bloch
from cftbench.channels import average_fidelity, map_channel
from cftbench.ensembles import StateEnsemble, effective_eb_channel, sqrt_povm, uniform_ensemble
from cftbench.exceptions import DimensionError, SolverError
from cftbench.operators import lambda_max_batched, projector
from cftbench.sampling import random_kets, random_povm, random_probabilities
from cftbench.solvers import (
    certify,
    cross_norm_objective,
    deterministic_cft_qubit,
    fibonacci_sphere,
    fidelity_for_povm,
    fidelity_for_povm_bayes,
    fidelity_for_povm_eb,
    helstrom_bound,
    probabilistic_cft,
    werner_cft,
    werner_channel,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_ensemble(d, n, rng):
    return StateEnsemble(random_probabilities(n, rng=rng), random_kets(n, d, rng=rng), random_kets(n, d, rng=rng))


def bloch_sup_oracle(ens, n=200_000):
    """Brute-force sup of ||eps(Phi)|| over a dense sphere lattice (qubit inputs)."""
    ch = effective_eb_channel(ens)
    return float(lambda_max_batched(ch.apply_many(states_from_bloch(fibonacci_sphere(n)))).max())


@given(st.integers(2, 3), seeds)
def test_fixed_povm_fidelity_three_routes(d, seed):
    rng = np.random.default_rng(seed)
    ens = random_ensemble(d, 4, rng)
    povm = random_povm(d, 3, rng=rng)
    f = fidelity_for_povm(ens, povm)
    assert abs(f - fidelity_for_povm_bayes(ens, povm)) < 1e-12
    assert abs(f - fidelity_for_povm_eb(ens, povm)) < 1e-12


def test_fixed_povm_fidelity_is_best_preparation(rng):
    ens = random_ensemble(3, 4, rng)
    povm = random_povm(3, 3, rng=rng)
    best = fidelity_for_povm(ens, povm)
    for _ in range(30):
        prepared = np.array([projector(k) for k in random_kets(3, 3, rng=rng)])
        assert average_fidelity(map_channel(povm, prepared), ens) <= best + 1e-12


def test_fibonacci_sphere():
    pts = fibonacci_sphere(500)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1)
    assert np.abs(pts.mean(axis=0)).max() < 1e-2


@pytest.mark.parametrize(
    "scenario",
    [
        QubitScenario("pair", math.pi / 4, math.pi / 4, 0.0),
        QubitScenario("pair", 0.4, 1.3, 0.6),
        QubitScenario("symmetric", 0.6, 1.1, n=4),
        QubitScenario("mirror", math.pi / 3),
        QubitScenario("two_pairs", 0.3, 1.2),
    ],
)
def test_deterministic_matches_closed_form_and_witness(scenario):
    ens = scenario_ensemble(scenario)
    res = deterministic_cft_qubit(ens)
    cf = closed_form_cft(scenario)
    assert abs(res.value - cf.det_value) < 1e-8
    dec = res.witness
    assert abs(dec.weights.sum() - 1) < 1e-10 and np.all(dec.weights >= 0)
    assert np.abs(np.einsum("y,yij->ij", dec.weights, dec.states) - ens.tau).max() < 1e-8
    ch = effective_eb_channel(ens)
    assert abs(np.dot(dec.weights, lambda_max_batched(ch.apply_many(dec.states))) - res.value) < 1e-10
    assert res.report["dual_bound"] >= res.value - 1e-12
    povm = dec.induced_povm()
    assert np.abs(povm.sum(axis=0) - np.eye(2)).max() < 1e-8


def test_refinement_never_lowers_the_lp_value():
    ens = scenario_ensemble(QubitScenario("pair", 0.7, 1.1, 0.4))
    refined = deterministic_cft_qubit(ens).value
    for grid in (50, 200, 800, 2000):
        raw = deterministic_cft_qubit(ens, grid=grid, refine=False).value
        assert raw <= refined + 1e-12
    assert refined - deterministic_cft_qubit(ens, grid=2000, refine=False).value < 1e-3


def test_deterministic_rejects_non_qubit(rng):
    with pytest.raises(DimensionError):
        deterministic_cft_qubit(random_ensemble(3, 3, rng))


@given(seeds)
@settings(max_examples=10)
def test_sqrt_and_map_strategies_below_deterministic(seed):
    rng = np.random.default_rng(seed)
    ens = random_ensemble(2, 3, rng)
    det = deterministic_cft_qubit(ens).value
    assert fidelity_for_povm(ens, sqrt_povm(ens)) <= det + 1e-9
    for _ in range(10):
        povm = random_povm(2, 3, rng=rng)
        prepared = np.array([projector(k) for k in random_kets(3, 2, rng=rng)])
        assert average_fidelity(map_channel(povm, prepared), ens) <= det + 1e-9
    assert det <= probabilistic_cft(ens, restarts=8).value + 1e-9


def test_helstrom_degeneration():
    for delta in (0.0, 0.3):
        s = QubitScenario("pair", 0.8, math.pi / 2, delta)
        res = deterministic_cft_qubit(scenario_ensemble(s))
        assert abs(res.value - helstrom_pair(s)) < 1e-9


def test_helstrom_povm_is_sigma_x_for_equal_priors():
    res = deterministic_cft_qubit(scenario_ensemble(QubitScenario("pair", 0.8, math.pi / 2, 0.0)))
    for P in res.witness.induced_povm():
        r = bloch_from_state(P / np.trace(P).real)
        assert abs(abs(r[0]) - 1) < 1e-6


def test_helstrom_bound_values():
    assert helstrom_bound(0.5, 0.0) == 1.0
    assert abs(helstrom_bound(0.5, 1.0) - 0.5) < 1e-15
    with pytest.raises(ValueError):
        helstrom_bound(1.2, 0.5)


@given(seeds)
@settings(max_examples=8)
def test_seesaw_against_sphere_oracle(seed):
    ens = random_ensemble(2, 3, np.random.default_rng(seed))
    res = probabilistic_cft(ens, restarts=16)
    oracle = bloch_sup_oracle(ens)
    assert res.value >= oracle - 1e-9
    assert res.value - oracle < 1e-4
    assert res.report["monotone"]


def test_seesaw_witness_and_determinism(rng):
    ens = random_ensemble(3, 5, rng)
    a = probabilistic_cft(ens, restarts=6, seed=3)
    b = probabilistic_cft(ens, restarts=6, seed=3)
    assert a.value == b.value and a.report["per_restart"] == b.report["per_restart"]
    psi, phi = a.witness
    ch = effective_eb_channel(ens)
    assert abs(cross_norm_objective(ch.choi, psi, phi, 3, 3) - a.value) < 1e-10
    assert abs(a.report["witness_value"] - a.value) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_werner_threshold(d):
    assert werner_cft(d) == 2 / (d + 1)
    assert abs(probabilistic_cft(werner_channel(d), restarts=4).value - 2 / (d + 1)) < 1e-10


def test_uniform_qubit_deterministic_equals_werner():
    assert abs(deterministic_cft_qubit(uniform_ensemble(2)).value - 2 / 3) < 1e-9


def test_certify_classes():
    assert certify(0.8, 2 / 3, 2 / 3).classification == "quantum_domain_even_probabilistic"
    assert certify(0.9, 0.93301, 1.0).classification == "classical_compatible"
    assert certify(0.95, 0.93301, 1.0).classification == "quantum_domain"
    assert certify(0.93301, 0.93301, 1.0).classification == "classical_compatible"
    assert certify(1.0, 0.8, 0.9).classification == "quantum_domain_even_probabilistic"
    assert certify(0.5, None, 0.9).classification == "undetermined"
    v = certify(0.95, 0.9, 1.0)
    assert abs(v.margins["det"] - 0.05) < 1e-12 and abs(v.margins["prob"] + 0.05) < 1e-12
    with pytest.raises(ValueError):
        certify(1.2, 0.5, 0.6)
    with pytest.raises(SolverError):
        certify(0.5, 0.9, 0.6)
