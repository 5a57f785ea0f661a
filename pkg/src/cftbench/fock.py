"""Truncated Fock space: coherent and thermal states, displacements, and the Gaussian coherent-state ensemble.

States are kets or density matrices on ``span{|0>, ..., |N-1>}``. Conventions:
``|alpha> = exp(-|alpha|^2/2) sum_n alpha^n / sqrt(n!) |n>`` and
``D(alpha) = exp(alpha a^dagger - alpha^* a)`` so that ``D(alpha)|0> = |alpha>``.

Phase-space integrals ``int d^2 beta / pi`` use Gauss-Laguerre nodes in
``u = |beta|^2`` (the Gaussian factor of the integrand is absorbed into the weight)
times a uniform trapezoid in angle. For integrands that are a Gaussian times a
polynomial in ``beta, beta^*`` this is exact once the node counts exceed the
polynomial degrees, which the truncation fixes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_genlaguerre, gammainc, gammaln, roots_laguerre

from .exceptions import DimensionError, TruncationError
from .operators import operator_norm, trace_distance

COHERENT_TAIL_TOL = 1e-10
THERMAL_TAIL_TOL = 1e-6
DEFAULT_RADIAL = 64
DEFAULT_ANGULAR = 64


@dataclass(frozen=True)
class FockSpace:
    """Levels ``|0> .. |N-1>``."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DimensionError("Fock truncation must be an integer >= 2")

    def annihilation(self):
        return np.diag(np.sqrt(np.arange(1, self.N)), 1).astype(complex)

    def creation(self):
        return self.annihilation().conj().T

    def number(self):
        return np.diag(np.arange(self.N)).astype(complex)

    def basis(self, n):
        v = np.zeros(self.N, dtype=complex)
        v[n] = 1.0
        return v

    def projector(self, n):
        return np.outer(self.basis(n), self.basis(n))


@dataclass(frozen=True)
class GaussianEnsembleSpec:
    """Prior ``p(alpha) = eta exp(-eta |alpha|^2)`` over ``|alpha>``, targets ``|g alpha>``."""

    eta: float
    g: float

    def __post_init__(self):
        if not self.eta > 0 or not self.g > 0:
            raise ValueError("eta and g must be positive")

    @property
    def kappa(self):
        return self.g / math.sqrt(1 + self.eta)

    @property
    def kappa2(self):
        return self.g**2 / (1 + self.eta)


def _space(space):
    return space if isinstance(space, FockSpace) else FockSpace(int(space))


# -- states --------------------------------------------------------------------


def coherent_tail(alpha, N):
    """Mass ``sum_{n >= N} |c_n|^2`` that truncation drops (a regularized incomplete gamma)."""
    x = abs(alpha) ** 2
    return float(gammainc(N, x)) if x > 0 else 0.0


def required_truncation(alpha, tol=COHERENT_TAIL_TOL):
    N = 2
    while coherent_tail(alpha, N) >= tol:
        N += max(1, N // 8)
    return N


def coherent_amplitudes(alphas, N):
    """Rows of truncated coherent amplitudes for an array of complex amplitudes (computed in log space)."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    n = np.arange(N)
    r = np.abs(alphas)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):  # r == 0 rows are set below
        logmag = -0.5 * r**2 + n * np.log(r) - 0.5 * gammaln(n + 1)
    amp = np.exp(logmag) * np.exp(1j * n * np.angle(alphas)[:, None])
    amp[np.abs(alphas) == 0] = np.eye(1, N)[0]
    return amp


def coherent_state(alpha, space, tail_tol=COHERENT_TAIL_TOL):
    sp = _space(space)
    tail = coherent_tail(alpha, sp.N)
    if tail >= tail_tol:
        need = required_truncation(alpha, tail_tol)
        raise TruncationError(f"|alpha|^2 = {abs(alpha) ** 2:.3g} needs N >= {need} (tail {tail:.2e})", need)
    return coherent_amplitudes([alpha], sp.N)[0]


def thermal_weights(nbar, N):
    if nbar < 0:
        raise ValueError("mean photon number must be non-negative")
    if nbar == 0:
        return np.eye(1, N)[0]
    q = nbar / (1 + nbar)
    return (1 - q) * q ** np.arange(N)


def thermal_tail(nbar, N):
    return (nbar / (1 + nbar)) ** N if nbar > 0 else 0.0


def thermal_state(nbar, space, tail_tol=THERMAL_TAIL_TOL):
    """``N x N`` block of the thermal state with mean ``nbar`` (trace ``1 - tail``; not renormalized)."""
    sp = _space(space)
    tail = thermal_tail(nbar, sp.N)
    if tail >= tail_tol:
        need = math.ceil(math.log(tail_tol) / math.log(nbar / (1 + nbar)))
        raise TruncationError(f"thermal tail {tail:.2e} at N={sp.N}; need N >= {need}", need)
    return np.diag(thermal_weights(nbar, sp.N)).astype(complex)


def mean_photon_from_t(t):
    """Thermal-family parameter ``t <= -1`` to mean photon number ``-(1 + t)/2``."""
    if t > -1:
        raise ValueError("physical thermal states need t <= -1")
    return -(1 + t) / 2


# -- displacement ----------------------------------------------------------------


@lru_cache(maxsize=16)
def _generator_eigh(M):
    # H = i(a^dagger - a) is Hermitian and exp(r (a^dagger - a)) = exp(-i r H)
    a = np.diag(np.sqrt(np.arange(1, M)), 1)
    H = 1j * (a.T - a)
    mu, V = np.linalg.eigh(H)
    return mu, V


def _padded_dim(N, alpha):
    r = abs(alpha)
    pad = 32 + int(math.ceil(r * r + 12 * r))
    return 16 * math.ceil((N + pad) / 16)


def _displacement_big(alpha, M):
    mu, V = _generator_eigh(M)
    r, phi = abs(alpha), float(np.angle(alpha))
    Dr = (V * np.exp(-1j * r * mu)) @ V.conj().T
    ph = np.exp(1j * phi * np.arange(M))
    return ph[:, None] * Dr * ph.conj()[None, :]


def displacement_operator(alpha, space, tail_tol=COHERENT_TAIL_TOL):
    """``D(alpha)`` on the truncated space: the ``N x N`` block of the operator exponentiated in a padded space.

    The block is unitary on levels whose displaced image stays inside the
    truncation; the coherent-state tail check guards the vacuum column.
    """
    sp = _space(space)
    if coherent_tail(alpha, sp.N) >= tail_tol:
        need = required_truncation(alpha, tail_tol)
        raise TruncationError(f"displacement by |alpha| = {abs(alpha):.3g} needs N >= {need}", need)
    if alpha == 0:
        return np.eye(sp.N, dtype=complex)
    M = _padded_dim(sp.N, alpha)
    return _displacement_big(alpha, M)[: sp.N, : sp.N]


def displacement_analytic(alpha, N):
    """Reference matrix elements ``<m|D|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^(m-n)(|alpha|^2)`` for ``m >= n``."""
    x = abs(alpha) ** 2
    D = np.zeros((N, N), dtype=complex)
    for m in range(N):
        for n in range(m + 1):
            k = m - n
            lg = 0.5 * (gammaln(n + 1) - gammaln(m + 1)) - 0.5 * x
            val = np.exp(lg) * alpha**k * eval_genlaguerre(n, k, x)
            D[m, n] = val
            if k:
                D[n, m] = np.exp(lg) * (-np.conj(alpha)) ** k * eval_genlaguerre(n, k, x)
    return D


def well_represented_levels(alpha, N, tol=1e-10):
    """Largest ``k`` such that ``D(alpha)|n>`` for every ``n < k`` keeps weight below ``tol`` outside the truncation."""
    M = _padded_dim(N, alpha)
    D = _displacement_big(alpha, M)
    leak = np.sum(np.abs(D[N:, :N]) ** 2, axis=0)
    bad = np.flatnonzero(leak >= tol)
    return int(bad[0]) if bad.size else N


# -- phase-space quadrature --------------------------------------------------------


def quadrature_counts(N, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """Node counts raised to ``(N, 2N)`` where needed for exactness on the truncated space."""
    return max(int(radial), N), max(int(angular), 2 * N)


def phase_space_nodes(scale, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """Nodes ``beta_j`` and weights ``W_j`` so that ``sum_j W_j F(beta_j) ~ int d^2 beta / pi F(beta)``.

    Exact for ``F = exp(-scale |beta|^2) * P(beta, beta^*)`` when ``radial`` exceeds
    half the radial degree and ``angular`` exceeds the largest angular frequency.
    """
    if not scale > 0:
        raise ValueError("Gaussian scale must be positive")
    x, w = roots_laguerre(radial)
    wmod = np.exp(np.log(w) + x) / (scale * angular)
    u = x / scale
    phi = 2 * np.pi * np.arange(angular) / angular
    betas = (np.sqrt(u)[:, None] * np.exp(1j * phi)[None, :]).reshape(-1)
    weights = np.repeat(wmod, angular)
    return betas, weights


def gaussian_p_normalization(spec, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """``int d^2 alpha / pi  p(alpha)`` evaluated on the nodes (should be 1)."""
    betas, W = phase_space_nodes(spec.eta, radial, angular)
    return float(np.dot(W, spec.eta * np.exp(-spec.eta * np.abs(betas) ** 2)))


def _mixture(weights, kets):
    # sum_j weights_j |k_j><k_j|
    return (kets.T * weights) @ kets.conj()


def gaussian_tau(spec, space, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """Average input state ``int d^2 alpha/pi p(alpha) |alpha><alpha|`` by quadrature."""
    sp = _space(space)
    R, K = quadrature_counts(sp.N, radial, angular)
    betas, W = phase_space_nodes(1 + spec.eta, R, K)
    amps = coherent_amplitudes(betas, sp.N)
    return _mixture(W * spec.eta * np.exp(-spec.eta * np.abs(betas) ** 2), amps)


def gaussian_tau_closed(spec, space, tail_tol=THERMAL_TAIL_TOL):
    return thermal_state(1 / spec.eta, space, tail_tol)


def gaussian_sqrt_povm_check(spec, space, levels=None, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """Max deviation of ``int d^2 alpha/pi (1+eta) |sqrt(1+eta) alpha><..|`` from the identity on the first levels."""
    sp = _space(space)
    levels = sp.N if levels is None else levels
    R, K = quadrature_counts(sp.N, radial, angular)
    s = 1 + spec.eta
    # |sqrt(s) alpha> carries exp(-s |alpha|^2) in its squared amplitudes
    alphas, W = phase_space_nodes(s, R, K)
    total = _mixture(W * s, coherent_amplitudes(np.sqrt(s) * alphas, sp.N))
    return float(np.abs(total[:levels, :levels] - np.eye(levels)).max())


def sqrt_povm_weight(spec, alpha, space):
    """``Tr[tau S(alpha)]`` for the Gaussian ensemble, evaluated in the truncated space."""
    sp = _space(space)
    k = coherent_amplitudes([math.sqrt(1 + spec.eta) * alpha], sp.N)[0]
    tau = gaussian_tau_closed(spec, sp)
    return float((1 + spec.eta) * np.vdot(k, tau @ k).real)


class GaussianEbChannel:
    """Effective channel ``rho -> int d^2 beta/pi <beta|rho|beta> |kappa beta><kappa beta|`` on a truncated space.

    Applied functionally on fixed quadrature nodes; exact on the truncated
    space because node counts are raised to ``(N, 2N)``.
    """

    def __init__(self, spec, space, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
        self.spec = spec
        self.space = _space(space)
        N = self.space.N
        self.radial, self.angular = quadrature_counts(N, radial, angular)
        k = spec.kappa
        betas, W = phase_space_nodes(1 + k * k, self.radial, self.angular)
        self.weights = W
        self.inputs = coherent_amplitudes(betas, N)
        self.outputs = coherent_amplitudes(k * betas, N)
        self.d_in = self.d_out = N

    def apply(self, rho):
        rho = np.asarray(rho, dtype=complex)
        q = ((self.inputs.conj() @ rho) * self.inputs).sum(axis=1).real
        return _mixture(self.weights * q, self.outputs)

    def adjoint(self, A):
        A = np.asarray(A, dtype=complex)
        q = ((self.outputs.conj() @ A) * self.outputs).sum(axis=1).real
        return _mixture(self.weights * q, self.inputs)


def apply_gaussian_eb(spec, rho, space=None, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    rho = np.asarray(rho)
    space = rho.shape[0] if space is None else space
    return GaussianEbChannel(spec, space, radial, angular).apply(rho)


def coherent_eb_output_vacuum(spec, space, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """``eps_EB(|0><0|)`` by quadrature; analytically the thermal state with mean ``kappa^2``."""
    sp = _space(space)
    return GaussianEbChannel(spec, sp, radial, angular).apply(sp.projector(0))


def coherent_cft(spec):
    """Probabilistic threshold ``(1 + eta)/(1 + eta + g^2)`` of the Gaussian coherent-state ensemble."""
    return (1 + spec.eta) / (1 + spec.eta + spec.g**2)


def coherent_cft_numeric(spec, space, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    return operator_norm(coherent_eb_output_vacuum(spec, space, radial, angular))


def coherent_seesaw(spec, space, restarts=2, seed=0, max_iter=3000, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """See-saw maximization of ``<psi|eps_EB(phi)|psi>`` on the truncated space (cross-check)."""
    from .solvers import seesaw

    ch = GaussianEbChannel(spec, space, radial, angular)
    return seesaw(ch.apply, ch.adjoint, ch.d_in, restarts=restarts, seed=seed, tol=1e-13, max_iter=max_iter)


def displaced_thermal(beta, nbar, space):
    """``D(beta) T(nbar) D(beta)^dagger`` computed in a padded space and cropped."""
    sp = _space(space)
    M = _padded_dim(sp.N, beta) + 16 * math.ceil(8 * (nbar + 1) / 16)
    T = np.diag(thermal_weights(nbar, M))
    D = _displacement_big(beta, M) if beta != 0 else np.eye(M)
    return (D @ T @ D.conj().T)[: sp.N, : sp.N]


def expanding_rule_check(s, t, alpha, space, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR):
    """Trace distance between ``T(alpha, s)`` and ``2/(t-s) int d^2 beta/pi exp(-2|alpha-beta|^2/(t-s)) T(beta, t)``.

    Both sides are evaluated at the origin in a padded space and moved to
    ``alpha`` by ``D(alpha)`` conjugation. The right side integrates displaced
    thermal states over radial nodes; the angular average of a rotated operator
    is its diagonal.
    """
    if not t > s:
        raise ValueError("the expanding rule needs t > s")
    sp = _space(space)
    nbar_t, nbar_s = mean_photon_from_t(t), mean_photon_from_t(s)
    width = 2.0 / (t - s)
    scale = width + 1.0 / (1.0 + nbar_t)
    R, _ = quadrature_counts(sp.N, radial, angular)
    x, w = roots_laguerre(R)
    u = x / scale
    wmod = np.exp(np.log(w) + x) / scale
    M = _padded_dim(sp.N, alpha)
    rhs = np.zeros(M)
    for ui, wi in zip(u, wmod):
        rhs += wi * width * math.exp(-width * ui) * np.diag(displaced_thermal(math.sqrt(ui), nbar_t, M)).real
    lhs = thermal_weights(nbar_s, M)
    D = _displacement_big(alpha, M) if alpha != 0 else np.eye(M)
    lhs_op = (D @ np.diag(lhs) @ D.conj().T)[: sp.N, : sp.N]
    rhs_op = (D @ np.diag(rhs) @ D.conj().T)[: sp.N, : sp.N]
    return trace_distance(lhs_op, rhs_op)


@dataclass(frozen=True)
class TruncationReport:
    N: int
    trace_distance_to_thermal: float
    norm: float
    norm_closed_form: float
    norm_shift_doubled: float
    block_shift_doubled: float
    thermal_tail: float

    def to_dict(self):
        return {k: (float(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def truncation_report(spec, N=48, radial=DEFAULT_RADIAL, angular=DEFAULT_ANGULAR, tail_tol=THERMAL_TAIL_TOL):
    """Vacuum-output diagnostics at ``N`` and at ``2N``."""
    out = coherent_eb_output_vacuum(spec, N, radial, angular)
    out2 = coherent_eb_output_vacuum(spec, 2 * N, radial, angular)
    ref = thermal_state(spec.kappa2, N, tail_tol)
    n1, n2 = operator_norm(out), operator_norm(out2)
    return TruncationReport(
        N=int(N),
        trace_distance_to_thermal=trace_distance(out, ref),
        norm=n1,
        norm_closed_form=coherent_cft(spec),
        norm_shift_doubled=abs(n2 - n1),
        block_shift_doubled=float(np.abs(out2[:N, :N] - out).max()),
        thermal_tail=float(thermal_tail(spec.kappa2, N)),
    )
