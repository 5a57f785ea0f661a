"""Classical fidelity thresholds: fixed-POVM fidelity, deterministic (LP) and probabilistic (see-saw)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bloch import PAULIS, IDENTITY, states_from_bloch
from .channels import Channel
from .ensembles import StateEnsemble, effective_eb_channel, inverse_sqrt_states, separable_werner_state
from .exceptions import DimensionError, SolverError
from .operators import dagger, lambda_max_batched, psd_inv_sqrt
from .simplex import simplex_max

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Pure-state resolution ``sum_y weights[y] * states[y] == target_tau``."""

    weights: np.ndarray
    states: np.ndarray
    target_tau: np.ndarray
    residual: float

    def induced_povm(self):
        """``Pi_y = p_y tau^-1/2 Phi_y tau^-1/2``."""
        T = psd_inv_sqrt(self.target_tau)
        return np.einsum("y,ij,yjk,kl->yil", self.weights, T, self.states, T)


@dataclass(frozen=True, eq=False)
class CftResult:
    value: float
    witness: object
    report: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Verdict:
    measured_fidelity: float
    det_threshold: float | None
    prob_threshold: float
    classification: str

    @property
    def margins(self):
        det = None if self.det_threshold is None else self.measured_fidelity - self.det_threshold
        return {"det": det, "prob": self.measured_fidelity - self.prob_threshold}

    def to_dict(self):
        return {
            "measured_fidelity": self.measured_fidelity,
            "det_threshold": self.det_threshold,
            "prob_threshold": self.prob_threshold,
            "classification": self.classification,
            "margins": self.margins,
        }


def _channel_of(source):
    return source if isinstance(source, Channel) else effective_eb_channel(source)


# -- fixed measurement -------------------------------------------------------


def fidelity_for_povm(ens, povm):
    """``sum_y lambda_1(A_y)`` with ``A_y = sum_x p_x Tr[Pi_y Psi_x] Psi'_x``: best preparation for this POVM."""
    povm = np.asarray(povm, dtype=complex)
    click = np.einsum("yij,xji->xy", povm, ens.input_projectors).real
    A = np.einsum("x,xy,xij->yij", ens.priors, click, ens.target_projectors)
    return float(lambda_max_batched(A).sum())


def fidelity_for_povm_bayes(ens, povm):
    """Same quantity via ``sum_y p_y lambda_1(rho_y)``, ``rho_y = sum_x p(x|y) Psi'_x``."""
    povm = np.asarray(povm, dtype=complex)
    joint = ens.priors[:, None] * np.einsum("yij,xji->xy", povm, ens.input_projectors).real
    p_y = joint.sum(axis=0)
    keep = p_y > 1e-14
    cond = joint[:, keep] / p_y[keep]
    rho_y = np.einsum("xy,xij->yij", cond, ens.target_projectors)
    return float(np.dot(p_y[keep], lambda_max_batched(rho_y)))


def fidelity_for_povm_eb(ens, povm):
    """Same quantity as ``sum_y p_y ||eps_EB(Phi_y)||`` over the inverse square-root states."""
    ch = effective_eb_channel(ens)
    ws = inverse_sqrt_states(povm, ens.tau)
    return float(np.dot(ws.weights, lambda_max_batched(ch.apply_many(ws.states))))


def decomposition_fidelity(channel, weights, states):
    return float(np.dot(weights, lambda_max_batched(channel.apply_many(states))))


# -- deterministic threshold for qubit inputs --------------------------------


def fibonacci_sphere(n):
    """Quasi-uniform unit vectors: ``z_k = 1 - (2k + 1)/n``, azimuth advancing by the golden angle."""
    k = np.arange(n)
    z = 1.0 - (2 * k + 1) / n
    rho = np.sqrt(np.clip(1 - z * z, 0.0, None))
    phi = k * GOLDEN_ANGLE
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


class _BlochObjective:
    """``r -> lambda_1(eps(Phi(r)))`` evaluated through the four images ``eps(I/2), eps(sigma_k/2)``."""

    def __init__(self, channel):
        self.base = channel.apply(IDENTITY / 2)
        self.lin = np.array([channel.apply(s / 2) for s in PAULIS])
        self.d_out = channel.d_out

    def outputs(self, rs):
        return self.base + np.einsum("nk,kij->nij", np.atleast_2d(rs), self.lin)

    def many(self, rs):
        return lambda_max_batched(self.outputs(rs))

    def __call__(self, r):
        if self.d_out == 2:
            # entries of the 2x2 output are affine in r; closed-form top eigenvalue
            if not hasattr(self, "_coef"):
                M = np.concatenate([self.base[None], self.lin])
                self._coef = [list(M[:, 0, 0].real + M[:, 1, 1].real), list(M[:, 0, 0].real - M[:, 1, 1].real),
                              list(M[:, 0, 1].real), list(M[:, 0, 1].imag)]
            x, y, z = r
            t, u, br, bi = ((c[0] + c[1] * x + c[2] * y + c[3] * z) for c in self._coef)
            return 0.5 * t + math.sqrt(0.25 * u * u + br * br + bi * bi)
        M = self.base + np.tensordot(r, self.lin, axes=1)
        return float(np.linalg.eigvalsh(0.5 * (M + dagger(M)))[-1])


def _tangent_frame(r):
    helper = np.array([1.0, 0.0, 0.0]) if abs(r[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(r, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(r, e1)


def _maximize_on_sphere(fun, r0, tol=1e-13):
    """Local ascent of ``fun`` on the unit sphere via BFGS in tangent coordinates at ``r0``."""
    r0 = r0 / np.linalg.norm(r0)
    e1, e2 = _tangent_frame(r0)

    def point(uv):
        v = r0 + uv[0] * e1 + uv[1] * e2
        return v / np.linalg.norm(v)

    res = minimize(lambda uv: -fun(point(uv)), np.zeros(2), method="BFGS", options={"gtol": tol, "eps": 1e-9})
    r = point(res.x)
    return r, fun(r)


def _polish_support(fobj, rs, ws, r_tau):
    """Jointly move support points and weights (SLSQP) keeping ``sum w = 1``, ``sum w r = r_tau``."""
    k = len(rs)
    unit = lambda v: v / np.linalg.norm(v, axis=1, keepdims=True)

    def split(x):
        return unit(x[: 3 * k].reshape(k, 3)), x[3 * k :]

    def neg(x):
        r, w = split(x)
        return -sum(wi * fobj(ri) for wi, ri in zip(w, r))

    cons = {"type": "eq", "fun": lambda x: np.concatenate([[split(x)[1].sum() - 1], split(x)[1] @ split(x)[0] - r_tau])}
    x0 = np.concatenate([rs.reshape(-1), ws])
    bounds = [(None, None)] * (3 * k) + [(0.0, 1.0)] * k
    res = minimize(neg, x0, method="SLSQP", constraints=[cons], bounds=bounds, options={"ftol": 1e-15, "maxiter": 200})
    return split(res.x)[0]


def _augment_near(points, r_tau):
    # guarantee r_tau lies inside the hull, even when tau is (nearly) pure
    norm = np.linalg.norm(r_tau)
    if norm < 1e-12:
        return points
    u = r_tau / norm
    extra = [u]
    gap = math.acos(min(norm, 1.0))
    if gap > 0:
        e1, e2 = _tangent_frame(u)
        eps = 0.5 * gap
        for t in np.linspace(0, 2 * math.pi, 6, endpoint=False):
            extra.append(math.cos(eps) * u + math.sin(eps) * (math.cos(t) * e1 + math.sin(t) * e2))
    return np.vstack([points, np.array(extra)])


def deterministic_cft_qubit(ens, grid=2000, refine=True, tol=1e-10, stall_tol=1e-10, max_rounds=25, n_starts=4):
    """Deterministic threshold ``sup_{sum p_y Phi_y = tau} sum_y p_y ||eps_EB(Phi_y)||`` for qubit inputs.

    A linear program over pure states on a Fibonacci grid (variables: weights;
    constraints: normalization and the Bloch vector of ``tau``) gives a lower
    bound. With ``refine`` the LP dual prices drive column generation: new pure
    states are found by local ascent of the reduced cost on the sphere and the LP
    is re-solved until no state has reduced cost above ``tol``. ``report`` carries
    the dual upper bound ``value + max reduced cost`` found on the final pool.
    """
    if ens.dim != 2:
        raise DimensionError("deterministic LP solver handles qubit inputs only")
    channel = effective_eb_channel(ens)
    fobj = _BlochObjective(channel)
    tau = ens.tau
    r_tau = np.array([np.trace(tau @ s).real for s in PAULIS])
    base = fibonacci_sphere(grid)
    points = _augment_near(base, r_tau)
    fvals = fobj.many(points)
    b = np.concatenate([[1.0], r_tau])

    def solve(points, fvals):
        A = np.vstack([np.ones(len(points)), points.T])
        return simplex_max(fvals, A, b)

    lp = solve(points, fvals)
    rounds, total_pivots, added, stalled = 0, lp.iterations, 0, False
    max_rc = float("nan")
    while refine:
        # price out: local ascent of the reduced cost from the best pool points and the support
        y = lp.duals

        def reduced(r, y=y):
            return fobj(r) - y[0] - y[1:] @ r

        rc = fvals - y[0] - points @ y[1:]
        support = lp.basis[lp.x[lp.basis] > 0]
        starts = list(dict.fromkeys(list(np.argsort(-rc)[:n_starts]) + list(support)))
        new, found = [], [float(rc.max())]
        for idx in starts:
            r_new, val = _maximize_on_sphere(reduced, points[idx])
            found.append(val)
            if val > tol and not any(np.linalg.norm(r_new - q) < 1e-12 for q in new):
                new.append(r_new)
        max_rc = max(max(found), 0.0)
        if not new or stalled:
            break
        if rounds == max_rounds:
            warnings.warn("column generation hit the round limit", stacklevel=2)
            break
        rounds += 1
        on = lp.x > 1e-12
        new.extend(_polish_support(fobj, points[on], lp.x[on], r_tau))
        points = np.vstack([points, np.array(new)])
        fvals = np.concatenate([fvals, fobj.many(np.array(new))])
        added += len(new)
        previous = lp.value
        lp = solve(points, fvals)
        total_pivots += lp.iterations
        stalled = lp.value - previous < stall_tol

    support = np.flatnonzero(lp.x > 1e-15)
    weights = lp.x[support] / lp.x[support].sum()
    states = states_from_bloch(points[support])
    residual = float(np.abs(np.einsum("y,yij->ij", weights, states) - tau).max())
    value = decomposition_fidelity(channel, weights, states)
    report = {
        "grid": int(grid),
        "refined": bool(refine),
        "rounds": int(rounds),
        "columns_added": int(added),
        "pivots": int(total_pivots),
        "lp_value": lp.value,
        "constraint_residual": residual,
        "support_size": int(support.size),
    }
    if refine:
        report["dual_bound"] = lp.value + max_rc
        report["max_reduced_cost"] = max_rc
    return CftResult(value, Decomposition(weights, states, tau, residual), report)


# -- probabilistic threshold (injective cross norm) --------------------------


def _top_vec(M):
    w, v = np.linalg.eigh(0.5 * (M + dagger(M)))
    return w[-1], v[:, -1]


def seesaw(apply, adjoint, d_in, restarts=32, seed=0, tol=1e-14, max_iter=5000):
    """Maximize ``<psi| eps(phi phi^dagger) |psi>`` by alternating top-eigenvector updates.

    ``apply`` maps an input density matrix to the output; ``adjoint`` is the
    Heisenberg-picture map. Each restart begins from a Haar-random ``phi``.
    """
    rng = np.random.default_rng(seed)
    best = (-np.inf, None, None)
    per_restart, iters, monotone, converged = [], [], True, True
    for _ in range(restarts):
        phi = rng.normal(size=d_in) + 1j * rng.normal(size=d_in)
        phi /= np.linalg.norm(phi)
        prev = -np.inf
        history = []
        for it in range(max_iter):
            _, psi = _top_vec(apply(np.outer(phi, phi.conj())))
            val, phi = _top_vec(adjoint(np.outer(psi, psi.conj())))
            history.append(val)
            if val < prev - 1e-12:
                monotone = False
            if val - prev < tol:
                break
            prev = val
        else:
            converged = False
        per_restart.append(float(history[-1]))
        iters.append(it + 1)
        if history[-1] > best[0]:
            best = (float(history[-1]), psi, phi)
    if not converged:
        warnings.warn("see-saw reached the iteration cap in at least one restart", stacklevel=2)
    report = {
        "restarts": int(restarts),
        "seed": int(seed),
        "per_restart": per_restart,
        "iterations": iters,
        "monotone": monotone,
        "converged": converged,
    }
    return CftResult(best[0], (best[1], best[2]), report)


def probabilistic_cft(source, restarts=32, seed=0, tol=1e-14, max_iter=5000):
    """``sup_{|phi|=1} ||eps_EB(phi)||``: the injective cross norm of the effective Choi matrix.

    ``source`` is a :class:`StateEnsemble` or an explicit :class:`Channel`. The
    witness is the pair ``(psi, phi)`` of output and input kets.
    """
    ch = _channel_of(source)
    res = seesaw(ch.apply, ch.adjoint, ch.d_in, restarts=restarts, seed=seed, tol=tol, max_iter=max_iter)
    psi, phi = res.witness
    res.report["witness_value"] = float(np.vdot(psi, ch.apply(np.outer(phi, phi.conj())) @ psi).real)
    return res


def cross_norm_objective(chi, psi, phi, d_out, d_in):
    """``Tr[(psi psi^dagger (x) (phi phi^dagger)^*) chi]``."""
    P = np.kron(np.outer(psi, psi.conj()), np.outer(phi, phi.conj()).conj())
    return float(np.trace(P @ chi).real)


# -- references ---------------------------------------------------------------


def werner_cft(d):
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return 2.0 / (d + 1)


def werner_channel(d):
    """Effective channel with Choi matrix ``d * rho_Werner^sep``."""
    return Channel.from_choi(d * separable_werner_state(d), d)


def helstrom_bound(p_plus, overlap2):
    """Minimum-error success probability ``(1 + sqrt(1 - 4 p+ p- |<+|->|^2))/2``."""
    if not 0 <= p_plus <= 1 or not 0 <= overlap2 <= 1 + 1e-15:
        raise ValueError("probability and squared overlap must lie in [0, 1]")
    return 0.5 * (1 + math.sqrt(max(0.0, 1 - 4 * p_plus * (1 - p_plus) * overlap2)))


def certify(measured_fidelity, det_threshold, prob_threshold, atol=1e-9):
    """Classify a measured average fidelity against both thresholds (equality counts as classical).

    With ``det_threshold=None`` (no deterministic solver for the ensemble) a
    fidelity at or below the probabilistic threshold is ``undetermined``.
    """
    F = float(measured_fidelity)
    if not 0 <= F <= 1:
        raise ValueError("measured fidelity must lie in [0, 1]")
    if det_threshold is not None and det_threshold > prob_threshold + atol:
        raise SolverError("deterministic threshold exceeds the probabilistic one")
    if F > prob_threshold:
        cls = "quantum_domain_even_probabilistic"
    elif det_threshold is None:
        cls = "undetermined"
    elif F > det_threshold:
        cls = "quantum_domain"
    else:
        cls = "classical_compatible"
    return Verdict(F, det_threshold, prob_threshold, cls)


def certify_ensemble(ens, measured_fidelity, grid=2000, restarts=32, seed=0):
    det = deterministic_cft_qubit(ens, grid=grid).value if ens.dim == 2 else None
    prob = probabilistic_cft(ens, restarts=restarts, seed=seed).value
    if det is not None:
        det = min(det, prob)
    return certify(measured_fidelity, det, prob)


__all__ = [
    "StateEnsemble",
    "Decomposition",
    "CftResult",
    "Verdict",
    "fidelity_for_povm",
    "fidelity_for_povm_bayes",
    "fidelity_for_povm_eb",
    "deterministic_cft_qubit",
    "probabilistic_cft",
    "seesaw",
    "werner_cft",
    "werner_channel",
    "helstrom_bound",
    "certify",
    "certify_ensemble",
    "fibonacci_sphere",
]
