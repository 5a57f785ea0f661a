"""Qubit Bloch representation, affine channel maps and the four qubit benchmark scenarios.

Scenario conventions:

``pair``
    Two inputs with ``|<Psi+|Psi->|^2 = cos^2 alpha`` and priors ``(1 +- delta)/2``,
    whose square-root measurement is ``(I +- sigma_x)/2``; targets
    ``(I +- sin(beta) sigma_x + cos(beta) sigma_z)/2``.
``symmetric``
    ``N`` inputs ``O(2 pi i/N, z) (sin alpha, 0, cos alpha)`` with equal priors; targets
    the same with ``beta``.
``mirror``
    Inputs ``+z`` and ``(+-sin alpha, 0, cos alpha)`` with equal priors; targets equal inputs.
``two_pairs``
    The four states ``(+-sin alpha, 0, +-cos alpha)`` (two orthogonal pairs), equal
    priors; targets the same with ``beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .exceptions import ContractError, DimensionError
from .operators import check_hermitian, pure_state_ket

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

BLOCH_ATOL = 1e-12


def state_from_bloch(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise DimensionError("Bloch vector must have three components")
    if np.linalg.norm(r) > 1 + BLOCH_ATOL:
        raise ContractError(f"Bloch vector of length {np.linalg.norm(r):.6f} lies outside the ball")
    return 0.5 * (IDENTITY + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def states_from_bloch(rs):
    rs = np.asarray(rs, dtype=float)
    return 0.5 * (IDENTITY + np.einsum("nk,kij->nij", rs, np.array(PAULIS)))


def bloch_from_state(rho):
    rho = check_hermitian(rho)
    if rho.shape != (2, 2):
        raise DimensionError("not a qubit operator")
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def ket_from_bloch(r):
    return pure_state_ket(state_from_bloch(np.asarray(r, float) / np.linalg.norm(r)))


@dataclass(frozen=True)
class AffineMap:
    """``r -> eta @ r + c`` acting on Bloch vectors."""

    eta: np.ndarray
    c: np.ndarray

    def __call__(self, r):
        return self.eta @ np.asarray(r, dtype=float) + self.c


def affine_from_channel(channel, n_check=200, atol=1e-10, rng=None):
    """Extract the Bloch-ball affine map of a qubit channel.

    ``c`` is the image of ``I/2``; column ``i`` of ``eta`` is the image of
    ``(I + sigma_i)/2`` minus ``c``. The result is checked against direct channel
    application on ``n_check`` random input states.
    """
    if channel.d_in != 2 or channel.d_out != 2:
        raise DimensionError("affine maps are defined for qubit-to-qubit channels")
    c = bloch_from_state(channel.apply(IDENTITY / 2))
    eta = np.column_stack([bloch_from_state(channel.apply(state_from_bloch(e))) - c for e in np.eye(3)])
    amap = AffineMap(eta, c)
    if n_check:
        rng = np.random.default_rng(0) if rng is None else rng
        rs = rng.normal(size=(n_check, 3))
        rs *= (rng.random(n_check) ** (1 / 3) / np.linalg.norm(rs, axis=1))[:, None]
        outs = channel.apply_many(states_from_bloch(rs))
        got = np.einsum("nij,kji->nk", outs, np.array(PAULIS)).real
        want = rs @ eta.T + c
        if np.abs(got - want).max() > atol:
            raise ContractError("affine map does not reproduce the channel action")
    return amap


def affine_from_process(lam, **kwargs):
    from .channels import Channel

    return affine_from_channel(Channel(np.asarray(lam, dtype=complex), 2, 2), **kwargs)


def rotation_matrix(omega, axis=(0.0, 0.0, 1.0)):
    """``O(omega, n) = cos(w) I + (1 - cos w) n n^T - sin(w) [n]_x``.

    For ``n = z`` this is ``[[cos, sin, 0], [-sin, cos, 0], [0, 0, 1]]``.
    """
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ContractError("rotation axis must be nonzero")
    n = n / norm
    K = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return math.cos(omega) * np.eye(3) + (1 - math.cos(omega)) * np.outer(n, n) - math.sin(omega) * K


def rotation_unitary(omega, axis=(0.0, 0.0, 1.0)):
    """Qubit unitary whose conjugation action on Bloch vectors is ``rotation_matrix(omega, axis)``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    return expm(0.5j * omega * sum(ni * s for ni, s in zip(n, PAULIS)))


KINDS = ("pair", "symmetric", "mirror", "two_pairs")
_HALF_PI = math.pi / 2 + 1e-12


@dataclass(frozen=True)
class QubitScenario:
    kind: str
    alpha: float = math.pi / 4
    beta: float = math.pi / 4
    delta: float = 0.0
    n: int = 3
    priors: tuple = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if not 0 < self.alpha <= _HALF_PI:
            raise ValueError("alpha must lie in (0, pi/2]")
        if self.kind in ("pair", "symmetric", "two_pairs") and not 0 < self.beta <= _HALF_PI:
            raise ValueError("beta must lie in (0, pi/2]")
        if self.kind == "pair" and not -1 < self.delta < 1:
            raise ValueError("delta must lie in (-1, 1)")
        if self.kind == "symmetric" and self.n < 3:
            raise ValueError("symmetric scenario needs N >= 3")
        if self.priors is not None and self.kind != "mirror":
            raise ValueError("custom priors are only supported for the mirror scenario")

    def replace(self, **kw):
        from dataclasses import replace

        return replace(self, **kw)

    def params(self):
        out = {"alpha": self.alpha}
        if self.kind in ("pair", "symmetric", "two_pairs"):
            out["beta"] = self.beta
        if self.kind == "pair":
            out["delta"] = self.delta
        if self.kind == "symmetric":
            out["n"] = self.n
        if self.priors is not None:
            out["priors"] = list(self.priors)
        return out


def _xz(angle, sx=1.0, sz=1.0):
    return np.array([sx * math.sin(angle), 0.0, sz * math.cos(angle)])


def scenario_bloch(s):
    """Priors with input and target Bloch vectors (rows) of a built-in scenario."""
    a, b = s.alpha, s.beta
    if s.kind == "pair":
        raise ValueError("the pair scenario is specified through tau and its square-root POVM")
    if s.kind == "symmetric":
        w = 2 * math.pi * np.arange(s.n) / s.n
        inp = np.array([rotation_matrix(wi) @ _xz(a) for wi in w])
        tgt = np.array([rotation_matrix(wi) @ _xz(b) for wi in w])
        return np.full(s.n, 1.0 / s.n), inp, tgt
    if s.kind == "mirror":
        inp = np.array([[0.0, 0.0, 1.0], _xz(a), _xz(a, sx=-1)])
        pri = np.full(3, 1 / 3) if s.priors is None else np.asarray(s.priors, float)
        return pri, inp, inp.copy()
    signs = [(1, 1), (-1, -1), (-1, 1), (1, -1)]
    inp = np.array([_xz(a, *sg) for sg in signs])
    tgt = np.array([_xz(b, *sg) for sg in signs])
    return np.full(4, 0.25), inp, tgt


def pair_tau(s):
    return state_from_bloch([s.delta, 0.0, math.sqrt(1 - s.delta**2) * math.cos(s.alpha)])


def scenario_ensemble(s):
    from .ensembles import StateEnsemble
    from .operators import psd_sqrt

    if s.kind == "pair":
        # inputs from tau and the square-root POVM (I +- sigma_x)/2 by the inverse transform
        tau = pair_tau(s)
        R = psd_sqrt(tau)
        priors, inputs = [], []
        for sign in (1, -1):
            S = 0.5 * (IDENTITY + sign * SIGMA_X)
            p = np.trace(tau @ S).real
            priors.append(p)
            inputs.append(pure_state_ket(R @ S @ R / p))
        targets = [ket_from_bloch(_xz(s.beta, sx=sign)) for sign in (1, -1)]
        return StateEnsemble(np.array(priors), np.array(inputs), np.array(targets))
    pri, inp, tgt = scenario_bloch(s)
    return StateEnsemble(pri, np.array([ket_from_bloch(r) for r in inp]), np.array([ket_from_bloch(r) for r in tgt]))


def mirror_coefficients(alpha):
    """``(eta_xx, eta_zz, c_z, r0)`` of the mirror-symmetric effective channel (equal priors)."""
    r0 = (1 + 2 * math.cos(alpha)) / 3
    s2 = math.sin(alpha) ** 2
    eta_xx = 2 * s2 / (3 * math.sqrt(1 - r0**2))
    eta_zz = (1 + 2 * math.cos(alpha) ** 2 - 3 * r0**2) / (3 * (1 - r0**2))
    c_z = 2 * r0 * s2 / (3 * (1 - r0**2))
    return eta_xx, eta_zz, c_z, r0


def mirror_square_completion(alpha):
    """Constants with ``eta_xx^2 (1 - z^2) + (eta_zz z + c_z)^2 == a^2 - (b z - c)^2``."""
    exx, ezz, cz, _ = mirror_coefficients(alpha)
    b = math.sqrt(exx**2 - ezz**2)
    c = cz * ezz / b
    a = math.sqrt(exx**2 + cz**2 + c**2)
    return a, b, c


def two_pairs_branch(alpha, beta, atol=1e-12):
    """``'xx'`` if cos(a-b)cos(a+b) < 0, ``'zz'`` if > 0, ``'boundary'`` otherwise."""
    v = math.cos(alpha - beta) * math.cos(alpha + beta)
    if abs(v) <= atol:
        return "boundary"
    return "xx" if v < 0 else "zz"


@dataclass(frozen=True)
class ClosedForm:
    det: object  # float, or (low, high) at the two-pairs sign boundary
    prob: float
    branch: str = ""

    @property
    def det_value(self):
        return self.det[0] if isinstance(self.det, tuple) else self.det


def closed_form_cft(s):
    """Analytic deterministic and probabilistic thresholds of a built-in scenario.

    ``symmetric`` uses the channel contraction ``sin(beta)/2`` in the x-y plane,
    which reproduces ``(1 + sqrt(cos^2 b + sin^4 a / 4))/2`` at ``alpha == beta``.
    ``mirror`` supports equal priors only.
    """
    a, b = s.alpha, s.beta
    if s.kind == "pair":
        rz = math.sqrt(1 - s.delta**2) * math.cos(a)
        det = 0.5 * (1 + math.sqrt(1 - math.sin(b) ** 2 * rz**2))
        return ClosedForm(det, 1.0)
    if s.kind == "symmetric":
        k = 0.25 * math.sin(b) ** 2
        det = 0.5 * (1 + math.sqrt(math.cos(b) ** 2 + k * math.sin(a) ** 2))
        prob = 0.5 * (1 + math.sqrt(math.cos(b) ** 2 + k))
        return ClosedForm(det, prob)
    if s.kind == "mirror":
        if s.priors is not None:
            raise ValueError("closed forms are tabulated for equal priors only")
        big_a, big_b, small_c = mirror_square_completion(a)
        r0 = mirror_coefficients(a)[3]
        det = 0.5 * (1 + math.sqrt(big_a**2 - (big_b * r0 - small_c) ** 2))
        z_star = small_c / big_b
        if abs(z_star) <= 1:
            top = big_a
        else:
            top = max(math.sqrt(max(big_a**2 - (big_b * z - small_c) ** 2, 0.0)) for z in (-1.0, 1.0))
        return ClosedForm(det, 0.5 * (1 + top))
    exx = math.sin(a) * math.sin(b)
    ezz = math.cos(a) * math.cos(b)
    branch = two_pairs_branch(a, b)
    vxx, vzz = 0.5 * (1 + abs(exx)), 0.5 * (1 + abs(ezz))
    if branch == "boundary":
        return ClosedForm((min(vxx, vzz), max(vxx, vzz)), max(vxx, vzz), branch)
    v = vxx if branch == "xx" else vzz
    return ClosedForm(v, v, branch)


def helstrom_pair(s):
    """Minimum-error success probability for the two inputs of a ``pair`` scenario."""
    from .solvers import helstrom_bound

    p_plus = (1 + s.delta) / 2
    return helstrom_bound(p_plus, math.cos(s.alpha) ** 2)
