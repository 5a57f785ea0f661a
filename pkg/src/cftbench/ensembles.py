"""Input/target ensembles, the square-root measurement and the effective EB channel."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channels import Channel
from .exceptions import ContractError, DimensionError
from .operators import (
    check_hermitian,
    check_psd,
    dagger,
    hermitian_eigensystem,
    psd_inv_sqrt,
    psd_sqrt,
    support_projector,
    vectorize,
)

PRIOR_ATOL = 1e-12
POVM_ATOL = 1e-10
TABLE_ATOL = 1e-10
ZERO_WEIGHT = 1e-14


def _unit_kets(kets, name):
    kets = np.asarray(kets, dtype=complex)
    if kets.ndim != 2:
        raise DimensionError(f"{name} must be an (n, d) array of kets")
    norms = np.linalg.norm(kets, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ContractError(f"{name} are not normalized")
    return kets / norms[:, None]


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    """Priors ``p_x`` with pure inputs ``|Psi_x>`` and pure targets ``|Psi'_x>``.

    Kets are stored as rows; the projector views are derived.
    """

    priors: np.ndarray
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float).reshape(-1)
        inp = _unit_kets(self.inputs, "inputs")
        tgt = _unit_kets(self.targets, "targets")
        if not (len(p) == len(inp) == len(tgt)):
            raise DimensionError("priors, inputs and targets must have equal length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > PRIOR_ATOL:
            raise ContractError(f"priors must be a probability vector (sum {p.sum():.15f})")
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "inputs", inp)
        object.__setattr__(self, "targets", tgt)

    @classmethod
    def from_projectors(cls, priors, inputs, targets):
        from .operators import pure_state_ket

        return cls(priors, [pure_state_ket(P) for P in inputs], [pure_state_ket(P) for P in targets])

    def __len__(self):
        return len(self.priors)

    @property
    def dim(self):
        return self.inputs.shape[1]

    @property
    def target_dim(self):
        return self.targets.shape[1]

    @cached_property
    def input_projectors(self):
        return np.einsum("xi,xj->xij", self.inputs, self.inputs.conj())

    @cached_property
    def target_projectors(self):
        return np.einsum("xi,xj->xij", self.targets, self.targets.conj())

    @cached_property
    def tau(self):
        return average_state(self)


@dataclass(frozen=True, eq=False)
class WeightedStates:
    """A resolution ``sum_y weights[y] * states[y]`` of a density matrix."""

    weights: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        s = np.asarray(self.states, dtype=complex)
        if s.ndim != 3 or len(s) != len(w):
            raise DimensionError("one state per weight required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > PRIOR_ATOL:
            raise ContractError("weights must form a probability vector")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", s)

    def average(self):
        return np.einsum("y,yij->ij", self.weights, self.states)


def check_povm(elements, support=None, atol=POVM_ATOL):
    """Validate positivity and completeness (on ``support`` if a projector is given)."""
    elements = np.asarray(elements, dtype=complex)
    if elements.ndim != 3:
        raise DimensionError("POVM must be an (n, d, d) array")
    for E in elements:
        check_psd(E)
    target = np.eye(elements.shape[1]) if support is None else support
    if np.abs(elements.sum(axis=0) - target).max() > atol:
        raise ContractError("POVM elements are not complete")
    return elements


def average_state(ens):
    """``tau = sum_x p_x Psi_x``."""
    return np.einsum("x,xij->ij", ens.priors, ens.input_projectors)


def sqrt_povm_from(priors, input_projectors, tau):
    T = psd_inv_sqrt(tau)
    return np.einsum("x,ij,xjk,kl->xil", priors, T, input_projectors, T)


def sqrt_povm(ens):
    """Square-root measurement ``S_x = p_x tau^-1/2 Psi_x tau^-1/2``, complete on ``support(tau)``."""
    return sqrt_povm_from(ens.priors, ens.input_projectors, ens.tau)


def inverse_sqrt_states(povm, tau):
    """``Phi_y = tau^1/2 Pi_y tau^1/2 / p_y`` with ``p_y = Tr(Pi_y tau)``; null outcomes are dropped."""
    povm = np.asarray(povm, dtype=complex)
    R = psd_sqrt(tau)
    p = np.einsum("yij,ji->y", povm, tau).real
    keep = p > ZERO_WEIGHT
    if not keep.all():
        warnings.warn(f"dropping {int((~keep).sum())} POVM outcome(s) with zero probability", stacklevel=2)
    states = np.einsum("ij,yjk,kl->yil", R, povm[keep], R) / p[keep, None, None]
    return WeightedStates(p[keep] / p[keep].sum(), states)


def effective_eb_channel(ens):
    """Effective entanglement-breaking channel ``lam = sum_x |Psi'_x>><<S_x|``.

    Its Choi matrix is ``sum_x Psi'_x (x) S_x^*``; both forms are attached.
    """
    S = sqrt_povm(ens)
    T = ens.target_projectors
    n = len(ens)
    lam = np.einsum("xi,xj->ij", T.reshape(n, -1), S.reshape(n, -1).conj())
    chi = sum(np.kron(T[x], S[x].conj()) for x in range(n))
    ch = Channel(lam, ens.dim, ens.target_dim)
    ch.__dict__["choi"] = chi
    return ch


def separable_state(ens):
    """``rho_AB = sum_x p_x Psi'_x (x) Psi_x^*``."""
    return sum(p * np.kron(T, P.conj()) for p, T, P in zip(ens.priors, ens.target_projectors, ens.input_projectors))


def sandwich_choi(ens, chi):
    """``(I (x) (tau^*)^1/2) chi (I (x) (tau^*)^1/2)``; equals :func:`separable_state` for the EB Choi."""
    R = np.kron(np.eye(ens.target_dim), psd_sqrt(ens.tau.conj()))
    return R @ chi @ R


def bayes_joint(ens, povm, route="simultaneous"):
    """Joint table ``p(x, y)`` computed along one of the three equivalent routes.

    * ``simultaneous``: ``<<tau^1/2| S_x (x) Pi_y^* |tau^1/2>>``
    * ``alice_prepares``: ``p_x <<Pi_y|Psi_x>>``
    * ``bob_prepares``: ``p_y <<S_x|Phi_y>>`` (zero-probability outcomes give zero columns)
    """
    povm = check_povm(povm)
    S = sqrt_povm(ens)
    nx, ny = len(ens), len(povm)
    if route == "simultaneous":
        v = vectorize(psd_sqrt(ens.tau))
        table = np.empty((nx, ny))
        for x in range(nx):
            for y in range(ny):
                table[x, y] = np.vdot(v, np.kron(S[x], povm[y].conj()) @ v).real
    elif route == "alice_prepares":
        table = ens.priors[:, None] * np.einsum("yij,xij->xy", povm.conj(), ens.input_projectors).real
    elif route == "bob_prepares":
        tau = ens.tau
        R = psd_sqrt(tau)
        p_y = np.einsum("yij,ji->y", povm, tau).real
        table = np.zeros((nx, ny))
        for y in np.flatnonzero(p_y > ZERO_WEIGHT):
            phi = R @ povm[y] @ R / p_y[y]
            table[:, y] = p_y[y] * np.einsum("xij,ij->x", S.conj(), phi).real
    else:
        raise ValueError(f"unknown route {route!r}")
    if np.abs(table.sum(axis=1) - ens.priors).max() > TABLE_ATOL:
        raise ContractError("joint table does not marginalize to the priors")
    return table


def targets_from_tau_prime(priors, inputs, tau_prime):
    """Ensemble whose targets are ``tau'^1/2 S_x tau'^1/2 / Tr(S_x tau')``.

    ``inputs`` are kets (rows). A non-diagonal ``tau_prime`` is replaced by the
    diagonal matrix of its eigenvalues (descending), which changes the targets by
    a common unitary and leaves every threshold unchanged.
    """
    tau_prime = np.asarray(tau_prime, dtype=complex)
    if tau_prime.ndim == 1:
        tau_prime = np.diag(tau_prime)
    tau_prime = check_hermitian(tau_prime)
    off = tau_prime - np.diag(np.diag(tau_prime))
    if np.abs(off).max() > 1e-12:
        warnings.warn("tau_prime is not diagonal; using its spectral (diagonal) form", stacklevel=2)
        tau_prime = np.diag(hermitian_eigensystem(tau_prime).eigenvalues).astype(complex)
    kets = np.asarray(inputs, dtype=complex)
    P = np.einsum("xi,xj->xij", kets, kets.conj())
    priors = np.asarray(priors, dtype=float)
    tau = np.einsum("x,xij->ij", priors, P)
    S = sqrt_povm_from(priors, P, tau)
    R = psd_sqrt(tau_prime)
    p_prime = np.einsum("xij,ji->x", S, tau_prime).real
    if np.any(p_prime <= ZERO_WEIGHT):
        raise ContractError("tau_prime annihilates a square-root measurement element")
    targets = []
    for x in range(len(priors)):
        spec = hermitian_eigensystem(R @ S[x] @ R / p_prime[x])
        if spec.eigenvalues.size > 1 and spec.eigenvalues[1] > 1e-8:
            raise ContractError("generated target is not pure (rank-one S_x and full-rank tau' required)")
        targets.append(spec.eigenvectors[:, 0])
    return StateEnsemble(priors, kets, np.array(targets))


def mutually_unbiased_bases(d):
    """Complete set of ``d + 1`` MUBs for prime ``d`` or ``d = 4``; each basis is a ``(d, d)`` array of row kets."""
    if d == 2:
        s = 1 / np.sqrt(2)
        return [
            np.eye(2, dtype=complex),
            np.array([[s, s], [s, -s]], dtype=complex),
            np.array([[s, 1j * s], [s, -1j * s]], dtype=complex),
        ]
    if d == 4:
        from .bloch import IDENTITY, PAULIS

        X, Y, Z = PAULIS
        I = IDENTITY
        triples = [
            (np.kron(Z, I), np.kron(I, Z)),
            (np.kron(X, I), np.kron(I, X)),
            (np.kron(Y, I), np.kron(I, Y)),
            (np.kron(X, Z), np.kron(Y, X)),
            (np.kron(Y, Z), np.kron(Z, X)),
        ]
        bases = []
        for A, B in triples:
            # eigenvalues +-1 +-2 are non-degenerate, so the eigenbasis is the joint one
            _, v = np.linalg.eigh(A + 2 * B)
            bases.append(v.T.copy())
        return bases
    if d < 2 or any(d % k == 0 for k in range(2, int(np.sqrt(d)) + 1)):
        raise ValueError(f"MUB construction available for prime d and d = 4, not {d}")
    n = np.arange(d)
    omega = np.exp(2j * np.pi / d)
    bases = [np.eye(d, dtype=complex)]
    for k in range(d):
        bases.append(np.array([omega ** ((k * n * n + j * n) % d) for j in range(d)]) / np.sqrt(d))
    return bases


def uniform_ensemble(d):
    """Finite ensemble reproducing the Haar second moment (a complex projective 2-design).

    Targets equal inputs; all ``d (d + 1)`` states carry equal prior.
    """
    kets = np.concatenate(mutually_unbiased_bases(d))
    n = len(kets)
    return StateEnsemble(np.full(n, 1.0 / n), kets, kets)


def separable_werner_state(d):
    """``(I (x) I + |I>><<I|) / (d (d + 1))``."""
    v = vectorize(np.eye(d))
    return (np.eye(d * d) + np.outer(v, v)) / (d * (d + 1))


def support_completion(ens):
    """Projector onto ``support(tau)``: the identity the square-root POVM resolves."""
    return support_projector(ens.tau)


__all__ = [
    "StateEnsemble",
    "WeightedStates",
    "average_state",
    "sqrt_povm",
    "inverse_sqrt_states",
    "effective_eb_channel",
    "separable_state",
    "sandwich_choi",
    "bayes_joint",
    "targets_from_tau_prime",
    "check_povm",
    "uniform_ensemble",
    "mutually_unbiased_bases",
    "separable_werner_state",
    "support_completion",
]
