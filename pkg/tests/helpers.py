"""Random valid states and brute-force oracles shared by the tests."""

import numpy as np
from scipy.linalg import expm

from gaussent.state import KernelParams, MomentSet


def random_spd(rng, n, lo=0.5, hi=2.0):
    o, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return (o * rng.uniform(lo, hi, n)) @ o.T


def symplectic_form(n):
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def random_symplectic(rng, n, scale=0.3):
    h = rng.normal(size=(2 * n, 2 * n))
    return expm(symplectic_form(n) @ (scale * (h + h.T)))


def random_moments(rng, n, mu=None, with_means=True):
    """Physical state: thermal-like diagonal covariance pushed through a random symplectic map."""
    mu = rng.uniform(1.0, 3.0, n) if mu is None else np.asarray(mu, float)
    sym = random_symplectic(rng, n)
    gamma = sym @ np.diag(np.concatenate([mu, mu]) / 2) @ sym.T
    means = rng.normal(size=2 * n) if with_means else np.zeros(2 * n)
    return MomentSet(gamma[:n, :n], gamma[n:, n:], gamma[:n, n:], means[:n], means[n:])


def random_moments_s0(rng, n, mu=None):
    """Physical ``S = 0`` state; its symplectic values are exactly ``mu``."""
    mu = rng.uniform(1.0, 4.0, n) if mu is None else np.asarray(mu, float)
    x = random_spd(rng, n, 0.5, 2.0) @ np.linalg.qr(rng.normal(size=(n, n)))[0]
    x_inv = np.linalg.inv(x)
    q = 0.5 * (x * mu) @ x.T
    p = 0.5 * (x_inv.T * mu) @ x_inv
    return MomentSet(0.5 * (q + q.T), 0.5 * (p + p.T))


def random_kernel(rng, n, imag=True):
    """Valid physical kernel: A' SPD, C' = A'^1/2 R diag(eta) R^T A'^1/2 with eta < 0.9."""
    a = random_spd(rng, n)
    w, v = np.linalg.eigh(a)
    root = (v * np.sqrt(w)) @ v.T
    r, _ = np.linalg.qr(rng.normal(size=(n, n)))
    c = root @ (r * rng.uniform(0.0, 0.9, n)) @ r.T @ root
    a_imag = c_imag = None
    if imag:
        a_imag = rng.normal(scale=0.3, size=(n, n))
        a_imag = 0.5 * (a_imag + a_imag.T)
        c_imag = rng.normal(scale=0.05, size=(n, n))
        c_imag = 0.5 * (c_imag - c_imag.T)
    return KernelParams(a, 0.5 * (c + c.T), a_imag, c_imag, rng.normal(size=n), rng.normal(size=n))


def quadrature_moments(theta, points=121, halfwidth=9.0):
    """Moments of ``theta`` by direct grid integration of the kernel and its derivatives.

    Uses tr(O rho) = int (O_q rho)(q, q) dq with the derivatives of the
    exponent evaluated analytically; N <= 2.
    """
    n = theta.n_modes
    axis = np.linspace(-halfwidth, halfwidth, points)
    h = axis[1] - axis[0]
    q = np.stack([g.ravel() for g in np.meshgrid(*([axis] * n), indexing="ij")], axis=1)
    a, c, d = theta.a, theta.c, theta.d
    amc = theta.a_real - theta.c_real
    log_norm = 0.5 * (np.log(np.linalg.det(amc)) - n * np.log(np.pi))
    log_norm -= theta.d_real @ np.linalg.solve(amc, theta.d_real)
    diag = np.exp(log_norm - np.einsum("ai,ij,aj->a", q, amc, q) + 2 * q @ theta.d_real) * h**n
    g = -q @ (a - c).T + d
    total = diag.sum()
    mean_q = q.T @ diag
    mean_p = np.real(-1j * g.T @ diag)
    second_q = (q * diag[:, None]).T @ q
    second_p = np.real(-(g * diag[:, None]).T @ g + a * total)
    sym_qp = np.real(-1j * (q * diag[:, None]).T @ g - 0.5j * np.eye(n) * total)
    return {
        "norm": total,
        "q": second_q - np.outer(mean_q, mean_q),
        "p": second_p - np.outer(mean_p, mean_p),
        "s": sym_qp - np.outer(mean_q, mean_p),
        "mean_q": mean_q,
        "mean_p": mean_p,
    }


def rel_err(x, y):
    x, y = np.asarray(x), np.asarray(y)
    return float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300))
