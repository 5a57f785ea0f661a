"""Random states, channels and measurements for property tests and sweeps."""

import numpy as np
from scipy.stats import unitary_group

from .operators import dagger, psd_inv_sqrt


def rng_from(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(d, rng=None):
    rng = rng_from(rng)
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(2j * np.pi * rng.random()).reshape(1, 1)


def random_ket(d, rng=None):
    rng = rng_from(rng)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_kets(n, d, rng=None):
    rng = rng_from(rng)
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_density(d, rank=None, rng=None):
    rng = rng_from(rng)
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ dagger(G)
    return rho / np.trace(rho).real


def random_matrix(rows, cols=None, rng=None):
    rng = rng_from(rng)
    cols = rows if cols is None else cols
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_hermitian(d, rng=None):
    A = random_matrix(d, rng=rng)
    return 0.5 * (A + dagger(A))


def random_kraus(d_in, d_out=None, n_ops=None, rng=None):
    """Kraus operators of a random CPTP map, cut from a Haar-random isometry."""
    rng = rng_from(rng)
    d_out = d_in if d_out is None else d_out
    n_ops = d_in * d_out if n_ops is None else n_ops
    U = random_unitary(d_out * n_ops, rng)
    V = U[:, :d_in]
    return [V[k * d_out:(k + 1) * d_out, :] for k in range(n_ops)]


def random_povm(d, n, rank_one=False, rng=None):
    """``n`` random positive operators normalized to sum to the identity."""
    rng = rng_from(rng)
    if rank_one:
        kets = random_kets(n, d, rng)
        elems = np.einsum("ni,nj->nij", kets, kets.conj()) * rng.uniform(0.2, 1.0, size=(n, 1, 1))
    else:
        G = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
        elems = G @ dagger(G)
    T = psd_inv_sqrt(elems.sum(axis=0))
    return np.array([T @ E @ T for E in elems])


def random_probabilities(n, rng=None):
    rng = rng_from(rng)
    return rng.dirichlet(np.ones(n))
