"""Channel representations (Kraus, Choi, process), measure-and-prepare channels and AQPT.

A channel from ``H_in`` (dim ``d_in``) to ``H_out`` (dim ``d_out``) with Kraus
operators ``E_m`` (each ``d_out x d_in``) has

* Choi matrix ``chi = sum_m |E_m>><<E_m|`` on ``H_out (x) H_in``;
* process matrix ``lam = sum_m E_m (x) E_m^*`` of shape ``(d_out^2, d_in^2)``,
  acting as ``vec(eps(rho)) = lam @ vec(rho)``.

The two are exchanged by :func:`cftbench.operators.beta_reshuffle`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import ContractError, DimensionError
from .operators import (
    beta_reshuffle,
    check_hermitian,
    check_psd,
    dagger,
    partial_trace,
    psd_inv_sqrt,
    psd_sqrt,
    support_projector,
)

TP_ATOL = 1e-10
CHOI_PSD_RTOL = 1e-9


def process_to_choi(lam, d_in, d_out):
    return beta_reshuffle(lam, (d_out, d_out, d_in, d_in))


def choi_to_process(chi, d_in, d_out):
    return beta_reshuffle(chi, (d_out, d_in, d_out, d_in))


def _kraus_stack(kraus_ops):
    ops = np.asarray(kraus_ops, dtype=complex)
    if ops.ndim == 2:
        ops = ops[None]
    if ops.ndim != 3:
        raise DimensionError("Kraus operators must be a list of matrices")
    return ops


def check_trace_preserving(kraus_ops, atol=TP_ATOL):
    ops = _kraus_stack(kraus_ops)
    s = np.einsum("mki,mkj->ij", ops.conj(), ops)
    if np.abs(s - np.eye(ops.shape[2])).max() > atol:
        raise ContractError("Kraus operators are not trace preserving")
    return ops


def choi_from_kraus(kraus_ops):
    ops = check_trace_preserving(kraus_ops)
    vecs = ops.reshape(ops.shape[0], -1)
    return np.einsum("mi,mj->ij", vecs, vecs.conj())


def process_from_kraus(kraus_ops):
    ops = check_trace_preserving(kraus_ops)
    return sum(np.kron(E, E.conj()) for E in ops)


def check_choi(chi, d_in, d_out, rtol=CHOI_PSD_RTOL, atol=TP_ATOL):
    """Validate that ``chi`` is the Choi matrix of a CPTP map and return it symmetrized."""
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (d_out * d_in, d_out * d_in):
        raise DimensionError(f"Choi matrix shape {chi.shape} does not match d_out*d_in = {d_out * d_in}")
    w, _ = np.linalg.eigh(check_hermitian(chi))
    if w[0] < -rtol * max(w[-1], 1.0):
        raise ContractError(f"Choi matrix is not positive (min eigenvalue {w[0]:.3e})")
    red = partial_trace(chi, (d_out, d_in), keep=[1])
    if np.abs(red - np.eye(d_in)).max() > atol:
        raise ContractError("Choi matrix does not describe a trace-preserving map")
    return 0.5 * (chi + dagger(chi))


def apply_process(lam, rho, d_out=None):
    rho = np.asarray(rho, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    if lam.shape[1] != rho.size:
        raise DimensionError(f"process matrix {lam.shape} cannot act on a {rho.shape} operator")
    if d_out is None:
        d_out = int(round(np.sqrt(lam.shape[0])))
    return (lam @ rho.reshape(-1)).reshape(d_out, d_out)


@dataclass(frozen=True, eq=False)
class Channel:
    """A CPTP map stored by its process matrix, with the Choi form derived on demand."""

    process: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        lam = np.asarray(self.process, dtype=complex)
        if lam.shape != (self.d_out**2, self.d_in**2):
            raise DimensionError(f"process matrix shape {lam.shape} inconsistent with dims ({self.d_in}, {self.d_out})")
        object.__setattr__(self, "process", lam)

    @classmethod
    def from_kraus(cls, kraus_ops):
        ops = _kraus_stack(kraus_ops)
        return cls(process_from_kraus(ops), ops.shape[2], ops.shape[1])

    @classmethod
    def from_choi(cls, chi, d_in, d_out=None, validate=True):
        d_out = d_in if d_out is None else d_out
        if validate:
            chi = check_choi(chi, d_in, d_out)
        ch = cls(choi_to_process(chi, d_in, d_out), d_in, d_out)
        ch.__dict__["choi"] = np.asarray(chi, dtype=complex)
        return ch

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d * d, dtype=complex), d, d)

    @cached_property
    def choi(self):
        return process_to_choi(self.process, self.d_in, self.d_out)

    def validate(self):
        check_choi(self.choi, self.d_in, self.d_out)
        return self

    def apply(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.d_in, self.d_in):
            raise DimensionError(f"input of shape {rho.shape} for a channel on dimension {self.d_in}")
        return apply_process(self.process, rho, self.d_out)

    def apply_many(self, rhos):
        """Apply to a stack of inputs of shape ``(n, d_in, d_in)``."""
        rhos = np.asarray(rhos, dtype=complex)
        out = rhos.reshape(rhos.shape[0], -1) @ self.process.T
        return out.reshape(-1, self.d_out, self.d_out)

    def adjoint(self, A):
        """Heisenberg-picture map: ``Tr(A eps(rho)) == Tr(adjoint(A) rho)``."""
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.d_out, self.d_out):
            raise DimensionError(f"observable of shape {A.shape} for output dimension {self.d_out}")
        v = self.process.T @ A.T.reshape(-1)
        return v.reshape(self.d_in, self.d_in).T


@dataclass(frozen=True, eq=False)
class MapChannelSpec:
    """Measure with ``povm`` (elements ``Pi_y``) and prepare the pure state ``prepared[y]``."""

    povm: np.ndarray
    prepared: np.ndarray

    def __post_init__(self):
        povm = np.asarray(self.povm, dtype=complex)
        prep = np.asarray(self.prepared, dtype=complex)
        if povm.ndim != 3 or prep.ndim != 3 or povm.shape[0] != prep.shape[0]:
            raise DimensionError("need one prepared state per POVM element")
        d = povm.shape[1]
        for E in povm:
            check_psd(E)
        if np.abs(povm.sum(axis=0) - np.eye(d)).max() > TP_ATOL:
            raise ContractError("POVM elements do not sum to the identity")
        for xi in prep:
            # rank one and unit trace
            w = np.linalg.eigvalsh(check_hermitian(xi))
            if abs(w[-1] - 1.0) > 1e-8 or abs(w[:-1]).max(initial=0.0) > 1e-8:
                raise ContractError("prepared states must be pure")
        object.__setattr__(self, "povm", povm)
        object.__setattr__(self, "prepared", prep)

    def channel(self):
        return map_channel(self.povm, self.prepared)


def map_channel(povm, prepared):
    """Measure-and-prepare channel: ``chi = sum_y xi_y (x) Pi_y^*``, ``lam = sum_y |xi_y>><<Pi_y|``."""
    povm = np.asarray(povm, dtype=complex)
    prepared = np.asarray(prepared, dtype=complex)
    d_in = povm.shape[1]
    d_out = prepared.shape[1]
    if np.abs(povm.sum(axis=0) - np.eye(d_in)).max() > TP_ATOL:
        raise ContractError("POVM elements do not sum to the identity")
    lam = np.einsum("yi,yj->ij", prepared.reshape(len(prepared), -1), povm.reshape(len(povm), -1).conj())
    chi = sum(np.kron(xi, P.conj()) for xi, P in zip(prepared, povm))
    ch = Channel(lam, d_in, d_out)
    ch.__dict__["choi"] = chi
    return ch


def aqpt_state(channel, tau):
    """Bipartite output ``(eps (x) I)(|tau^1/2>><<tau^1/2|)``, computed from the Choi matrix."""
    root_t = np.kron(np.eye(channel.d_out), psd_sqrt(np.asarray(tau).T))
    return root_t @ channel.choi @ root_t


@dataclass(frozen=True, eq=False)
class AqptResult:
    choi: np.ndarray
    partial: bool
    support_residual: float

    @property
    def support_violation(self):
        return self.support_residual > 1e-9


def aqpt_reconstruct(rho_ab, tau, d_out=None):
    """Recover a Choi matrix from the AQPT output state ``rho_ab`` and the probe density ``tau``.

    When ``tau`` is rank deficient only the block on ``support(tau^T)`` is returned
    and ``partial`` is set; ``support_residual`` measures weight of ``rho_ab`` lying
    outside the probed support (nonzero means ``rho_ab`` is inconsistent with ``tau``).
    """
    tau = np.asarray(tau, dtype=complex)
    rho_ab = np.asarray(rho_ab, dtype=complex)
    d_in = tau.shape[0]
    if d_out is None:
        d_out = rho_ab.shape[0] // d_in
    if rho_ab.shape != (d_out * d_in, d_out * d_in):
        raise DimensionError(f"rho_ab shape {rho_ab.shape} does not match d_out*d_in")
    check_psd(rho_ab)
    tT = tau.T
    P = np.kron(np.eye(d_out), support_projector(tT))
    inv_root = np.kron(np.eye(d_out), psd_inv_sqrt(tT))
    chi = inv_root @ rho_ab @ inv_root
    residual = float(np.abs(rho_ab - P @ rho_ab @ P).max())
    rank = int(np.trace(support_projector(tT)).real.round())
    return AqptResult(chi, rank < d_in, residual)


def average_fidelity(channel, ensemble):
    """``sum_x p_x Tr[target_x eps(input_x)]``."""
    if channel.d_in != ensemble.dim or channel.d_out != ensemble.target_dim:
        raise DimensionError("channel and ensemble dimensions differ")
    outs = channel.apply_many(ensemble.input_projectors)
    vals = np.einsum("nij,nji->n", ensemble.target_projectors, outs).real
    return float(np.dot(ensemble.priors, vals))


def map_fidelity(ensemble, povm, prepared):
    """Double sum ``sum_xy p_x Tr[Pi_y Psi_x] Tr[xi_y Psi'_x]`` for a measure-and-prepare strategy."""
    povm = np.asarray(povm)
    prepared = np.asarray(prepared)
    click = np.einsum("yij,xji->xy", povm, ensemble.input_projectors).real
    overlap = np.einsum("yij,xji->xy", prepared, ensemble.target_projectors).real
    return float(np.einsum("x,xy,xy->", ensemble.priors, click, overlap))


def unitary_channel(U):
    return Channel.from_kraus([np.asarray(U, dtype=complex)])


def depolarizing_kraus(d=2):
    """Kraus set of the completely depolarizing qubit channel (``d`` must be 2)."""
    if d != 2:
        raise DimensionError("only the qubit Pauli form is provided")
    from .bloch import PAULIS, IDENTITY

    return [0.5 * IDENTITY] + [0.5 * s for s in PAULIS]


__all__ = [
    "Channel",
    "MapChannelSpec",
    "AqptResult",
    "choi_from_kraus",
    "process_from_kraus",
    "process_to_choi",
    "choi_to_process",
    "check_choi",
    "apply_process",
    "map_channel",
    "aqpt_state",
    "aqpt_reconstruct",
    "average_fidelity",
    "map_fidelity",
    "unitary_channel",
]
