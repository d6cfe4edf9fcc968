"""Time evolution of Gaussian states under a quadratic Hamiltonian.

The equations of motion ``q'' + Omega q = force`` close on the moments:

    dQ/dt   = S + S^T
    dP/dt   = -(Omega S + (Omega S)^T)
    dS/dt   = P - Q Omega
    d<q>/dt = <p>
    d<p>/dt = -Omega <q> + force

The kernel parameters are evolved by converting to moments, integrating and
converting back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, ValidationError
from .state import KernelParams, MomentSet, moments_from_params, params_from_moments


@dataclass(frozen=True)
class QuadraticModel:
    """Coupling matrix ``Omega`` (need not be positive) and an external force."""

    omega_mat: np.ndarray
    force: np.ndarray | None = None

    def __post_init__(self):
        omega = np.array(np.atleast_2d(self.omega_mat), dtype=float)
        n = omega.shape[0]
        if omega.shape != (n, n):
            raise ValidationError(f"Omega must be square, got {omega.shape}")
        scale = max(float(np.max(np.abs(omega))), 1e-300)
        if np.max(np.abs(omega - omega.T)) > 1e-12 * scale:
            raise ValidationError("Omega must be symmetric")
        omega.setflags(write=False)
        force = np.zeros(n) if self.force is None else np.array(self.force, dtype=float)
        if force.shape != (n,):
            raise ValidationError(f"force has shape {force.shape}, expected {(n,)}")
        force.setflags(write=False)
        object.__setattr__(self, "omega_mat", omega)
        object.__setattr__(self, "force", force)

    @property
    def n_modes(self) -> int:
        return self.omega_mat.shape[0]

    def ground_state(self) -> MomentSet:
        """Exact stationary ground state; requires ``Omega`` positive definite."""
        w, v = np.linalg.eigh(self.omega_mat)
        if w[0] <= 0:
            raise ValidationError("ground state needs a positive-definite Omega")
        root = np.sqrt(w)
        q = 0.5 * (v / root) @ v.T
        p = 0.5 * (v * root) @ v.T
        mean_q = np.linalg.solve(self.omega_mat, self.force)
        return MomentSet(q, p, None, mean_q, None)


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    states: tuple[MomentSet, ...]
    step: float
    n_steps: int
    method: str = "rk4"

    @property
    def final(self) -> MomentSet:
        return self.states[-1]


def moment_derivatives(xi_set: MomentSet, model: QuadraticModel) -> MomentSet:
    """Time derivatives of all moments, packed as a :class:`MomentSet`."""
    if xi_set.n_modes != model.n_modes:
        raise DomainError(f"state has {xi_set.n_modes} modes, model has {model.n_modes}")
    n = xi_set.n_modes
    return _unpack(_rhs(_pack(xi_set), n, model.omega_mat, model.force), n)


def _pack(xi_set: MomentSet) -> np.ndarray:
    return np.concatenate([a.ravel() for a in xi_set._arrays()])


def _unpack(vec: np.ndarray, n: int) -> MomentSet:
    nn = n * n
    q = vec[:nn].reshape(n, n)
    p = vec[nn:2 * nn].reshape(n, n)
    s = vec[2 * nn:3 * nn].reshape(n, n)
    return MomentSet(q, p, s, vec[3 * nn:3 * nn + n], vec[3 * nn + n:])


def _rhs(vec: np.ndarray, n: int, omega: np.ndarray, force: np.ndarray) -> np.ndarray:
    nn = n * n
    q = vec[:nn].reshape(n, n)
    p = vec[nn:2 * nn].reshape(n, n)
    s = vec[2 * nn:3 * nn].reshape(n, n)
    mq = vec[3 * nn:3 * nn + n]
    mp = vec[3 * nn + n:]
    omega_s = omega @ s
    return np.concatenate([
        (s + s.T).ravel(),
        (-(omega_s + omega_s.T)).ravel(),
        (p - q @ omega).ravel(),
        mp,
        -omega @ mq + force,
    ])


def _symmetrize(vec: np.ndarray, n: int) -> None:
    nn = n * n
    for lo in (0, nn):
        block = vec[lo:lo + nn].reshape(n, n)
        block[...] = 0.5 * (block + block.T)


def evolve(
    xi0: MomentSet,
    model: QuadraticModel,
    t_final: float,
    dt: float,
    sample_every: int = 1,
) -> Trajectory:
    """Integrate the moment equations with the classical fourth-order Runge-Kutta scheme.

    The step is ``t_final / ceil(t_final / dt)`` so the last sample lands
    exactly on ``t_final``.  Samples are kept every ``sample_every`` steps and
    at the final time.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not t_final >= 0:
        raise DomainError("t_final must be non-negative")
    if sample_every < 1:
        raise DomainError("sample_every must be at least 1")
    if xi0.n_modes != model.n_modes:
        raise DomainError(f"state has {xi0.n_modes} modes, model has {model.n_modes}")

    n = xi0.n_modes
    n_steps = math.ceil(t_final / dt - 1e-9) if t_final > 0 else 0
    h = t_final / n_steps if n_steps else dt
    omega, force = model.omega_mat, model.force

    times, states = [0.0], [xi0]
    y = _pack(xi0)
    for step in range(1, n_steps + 1):
        # overflow is reported below as a DivergenceError
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = _rhs(y, n, omega, force)
            k2 = _rhs(y + 0.5 * h * k1, n, omega, force)
            k3 = _rhs(y + 0.5 * h * k2, n, omega, force)
            k4 = _rhs(y + h * k3, n, omega, force)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        _symmetrize(y, n)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"non-finite moments at t = {step * h:.6g}")
        if step % sample_every == 0 or step == n_steps:
            times.append(step * h if step < n_steps else float(t_final))
            states.append(_unpack(y.copy(), n))
    return Trajectory(tuple(times), tuple(states), h, n_steps)


def evolve_params(
    theta0: KernelParams, model: QuadraticModel, t_final: float, dt: float
) -> KernelParams:
    """Evolve kernel parameters by passing through the moment representation."""
    # only the endpoint is needed
    traj = evolve(moments_from_params(theta0), model, t_final, dt, sample_every=2**62)
    return params_from_moments(traj.final)
