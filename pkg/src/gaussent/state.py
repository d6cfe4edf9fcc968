"""Gaussian density matrices in kernel form and in moment form.

A Gaussian density matrix of ``N`` oscillators is written in position space as

    rho(q, q') = norm * exp[-1/2 (q A q + q' A* q') + q C q' + d q + d* q']

with ``A`` complex symmetric, ``C`` Hermitian and ``d`` a complex vector
(:class:`KernelParams`).  The same state is fixed by its first and second
moments ``Q``, ``P``, ``S``, ``<q>``, ``<p>`` (:class:`MomentSet`).  The two
maps between them are closed form and mutually inverse:

    Q   = 1/2 (A' - C')^-1
    S   = -Q (A'' + C'')
    P   = 1/2 (A' + C') + (A'' - C'') Q (A'' + C'')
    <q> = 2 Q d'
    <p> = d'' - (A'' - C'') <q>

where primes denote real parts and double primes imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConditioningError, SingularStateError, ValidationError

SYMMETRY_TOL = 1e-12
POSITIVITY_TOL = 1e-12
PHYSICAL_TOL = 1e-9
MAX_CONDITION = 1e12


def _frozen(arr, ndim: int, name: str) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    if out.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {out.shape}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class KernelParams:
    """Kernel parameters ``{A, C, d}`` split into real and imaginary parts."""

    a_real: np.ndarray
    c_real: np.ndarray
    a_imag: np.ndarray | None = None
    c_imag: np.ndarray | None = None
    d_real: np.ndarray | None = None
    d_imag: np.ndarray | None = None

    def __post_init__(self):
        a = _frozen(np.atleast_2d(self.a_real), 2, "a_real")
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValidationError(f"a_real must be square, got {a.shape}")
        object.__setattr__(self, "a_real", a)
        for name in ("c_real", "a_imag", "c_imag"):
            value = getattr(self, name)
            value = np.zeros((n, n)) if value is None else np.atleast_2d(value)
            value = _frozen(value, 2, name)
            if value.shape != (n, n):
                raise ValidationError(f"{name} has shape {value.shape}, expected {(n, n)}")
            object.__setattr__(self, name, value)
        for name in ("d_real", "d_imag"):
            value = getattr(self, name)
            value = np.zeros(n) if value is None else np.atleast_1d(value)
            value = _frozen(value, 1, name)
            if value.shape != (n,):
                raise ValidationError(f"{name} has shape {value.shape}, expected {(n,)}")
            object.__setattr__(self, name, value)

    @property
    def n_modes(self) -> int:
        return self.a_real.shape[0]

    @property
    def a(self) -> np.ndarray:
        return self.a_real + 1j * self.a_imag

    @property
    def c(self) -> np.ndarray:
        return self.c_real + 1j * self.c_imag

    @property
    def d(self) -> np.ndarray:
        return self.d_real + 1j * self.d_imag

    @classmethod
    def from_complex(cls, a, c, d=None) -> "KernelParams":
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        c = np.atleast_2d(np.asarray(c, dtype=complex))
        d = np.zeros(a.shape[0], dtype=complex) if d is None else np.atleast_1d(np.asarray(d, dtype=complex))
        return cls(a.real, c.real, a.imag, c.imag, d.real, d.imag)

    def to_dict(self) -> dict:
        """JSON-ready form: row-major nested lists plus ``n_modes``."""
        return {
            "n_modes": self.n_modes,
            "a_real": self.a_real.tolist(),
            "a_imag": self.a_imag.tolist(),
            "c_real": self.c_real.tolist(),
            "c_imag": self.c_imag.tolist(),
            "d_real": self.d_real.tolist(),
            "d_imag": self.d_imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KernelParams":
        theta = cls(
            data["a_real"],
            data["c_real"],
            data.get("a_imag"),
            data.get("c_imag"),
            data.get("d_real"),
            data.get("d_imag"),
        )
        if "n_modes" in data and int(data["n_modes"]) != theta.n_modes:
            raise ValidationError(
                f"n_modes={data['n_modes']} does not match matrix size {theta.n_modes}"
            )
        return theta


@dataclass(frozen=True)
class MomentSet:
    """Second moments ``Q``, ``P``, ``S`` and first moments of a Gaussian state.

    ``S[i, j]`` is the symmetrised covariance of ``q_i`` with ``p_j`` and need
    not be symmetric.
    """

    q_mat: np.ndarray
    p_mat: np.ndarray
    s_mat: np.ndarray | None = None
    mean_q: np.ndarray | None = None
    mean_p: np.ndarray | None = None

    def __post_init__(self):
        q = _frozen(np.atleast_2d(self.q_mat), 2, "q_mat")
        n = q.shape[0]
        if q.shape != (n, n):
            raise ValidationError(f"q_mat must be square, got {q.shape}")
        object.__setattr__(self, "q_mat", q)
        for name in ("p_mat", "s_mat"):
            value = getattr(self, name)
            value = np.zeros((n, n)) if value is None else np.atleast_2d(value)
            value = _frozen(value, 2, name)
            if value.shape != (n, n):
                raise ValidationError(f"{name} has shape {value.shape}, expected {(n, n)}")
            object.__setattr__(self, name, value)
        for name in ("mean_q", "mean_p"):
            value = getattr(self, name)
            value = np.zeros(n) if value is None else np.atleast_1d(value)
            value = _frozen(value, 1, name)
            if value.shape != (n,):
                raise ValidationError(f"{name} has shape {value.shape}, expected {(n,)}")
            object.__setattr__(self, name, value)

    @property
    def n_modes(self) -> int:
        return self.q_mat.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        """Phase-space covariance in (q_1..q_N, p_1..p_N) ordering."""
        return np.block([[self.q_mat, self.s_mat], [self.s_mat.T, self.p_mat]])

    def with_means(self, mean_q=None, mean_p=None) -> "MomentSet":
        return MomentSet(self.q_mat, self.p_mat, self.s_mat, mean_q, mean_p)

    def max_abs_diff(self, other: "MomentSet") -> float:
        return max(
            float(np.max(np.abs(a - b), initial=0.0))
            for a, b in zip(self._arrays(), other._arrays())
        )

    def _arrays(self):
        return (self.q_mat, self.p_mat, self.s_mat, self.mean_q, self.mean_p)


class Check(NamedTuple):
    name: str
    passed: bool
    violation: float


@dataclass(frozen=True)
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def violations(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_failed(self) -> None:
        if not self.ok:
            text = ", ".join(f"{c.name} (violation {c.violation:.3g})" for c in self.violations)
            raise ValidationError(f"invalid state: {text}")


def _asymmetry(mat: np.ndarray, sign: int = 1) -> float:
    """Largest entry of ``mat - sign * mat.T`` relative to the largest entry of ``mat``."""
    scale = float(np.max(np.abs(mat), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(mat - sign * mat.T))) / scale


def _symmetry_check(name: str, mat: np.ndarray, sign: int = 1) -> Check:
    v = _asymmetry(mat, sign)
    return Check(name, v <= SYMMETRY_TOL, v)


def _positivity_check(name: str, mat: np.ndarray) -> Check:
    w = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    passed = bool(w[0] > -POSITIVITY_TOL * abs(w[-1])) and bool(w[-1] > 0)
    return Check(name, passed, float(max(0.0, -w[0])) if not passed else 0.0)


def _condition_check(name: str, mat: np.ndarray, bound: float) -> Check:
    w = np.abs(np.linalg.eigvalsh(0.5 * (mat + mat.T)))
    cond = float(w[-1] / w[0]) if w[0] > 0 else np.inf
    return Check(name, cond <= bound, cond if cond > bound else 0.0)


def _finite_check(arrays) -> Check:
    bad = sum(int(np.count_nonzero(~np.isfinite(a))) for a in arrays)
    return Check("finite", bad == 0, float(bad))


def validate(state: KernelParams | MomentSet, max_condition: float = MAX_CONDITION) -> ValidationReport:
    """Check every structural invariant of ``state`` without raising."""
    if isinstance(state, KernelParams):
        arrays = (state.a_real, state.a_imag, state.c_real, state.c_imag, state.d_real, state.d_imag)
        finite = _finite_check(arrays)
        if not finite.passed:
            return ValidationReport([finite])
        checks = [
            finite,
            _symmetry_check("a_real symmetric", state.a_real),
            _symmetry_check("a_imag symmetric", state.a_imag),
            _symmetry_check("c_real symmetric", state.c_real),
            _symmetry_check("c_imag antisymmetric", state.c_imag, sign=-1),
            _positivity_check("a_real positive definite", state.a_real),
            _positivity_check("a_real - c_real positive definite", state.a_real - state.c_real),
        ]
        return ValidationReport(checks)

    finite = _finite_check(state._arrays())
    if not finite.passed:
        return ValidationReport([finite])
    checks = [
        finite,
        _symmetry_check("q_mat symmetric", state.q_mat),
        _symmetry_check("p_mat symmetric", state.p_mat),
        _positivity_check("q_mat positive definite", state.q_mat),
        _positivity_check("p_mat positive definite", state.p_mat),
        _condition_check("q_mat conditioning", state.q_mat, max_condition),
    ]
    try:
        mu = symplectic_values(state)
        worst = float(max(0.0, 1.0 - mu.min()))
        checks.append(Check("physical (mu >= 1)", worst <= PHYSICAL_TOL, worst))
    except SingularStateError:
        checks.append(Check("physical (mu >= 1)", False, np.inf))
    return ValidationReport(checks)


def spd_inverse(mat: np.ndarray, label: str, max_condition: float | None = None) -> np.ndarray:
    """Invert a symmetric positive-definite matrix through its eigendecomposition."""
    w, v = np.linalg.eigh(0.5 * (mat + mat.T))
    if w[0] <= 0:
        raise SingularStateError(f"{label} is not positive definite: eigenvalue {w[0]:.6g}")
    if max_condition is not None and w[-1] / w[0] > max_condition:
        raise ConditioningError(
            f"{label} condition number {w[-1] / w[0]:.3g} exceeds {max_condition:.3g}"
        )
    inv = (v / w) @ v.T
    return 0.5 * (inv + inv.T)


def moments_from_params(theta: KernelParams, strict: bool = False) -> MomentSet:
    """Map kernel parameters to the moment set they describe."""
    if strict:
        validate(theta).raise_if_failed()
    q = 0.5 * spd_inverse(theta.a_real - theta.c_real, "A' - C'")
    plus = theta.a_imag + theta.c_imag
    minus = theta.a_imag - theta.c_imag
    s = -q @ plus
    p = 0.5 * (theta.a_real + theta.c_real) + minus @ q @ plus
    mean_q = 2.0 * q @ theta.d_real
    mean_p = theta.d_imag - minus @ mean_q
    return MomentSet(q, 0.5 * (p + p.T), s, mean_q, mean_p)


def params_from_moments(
    xi: MomentSet, strict: bool = False, max_condition: float = MAX_CONDITION
) -> KernelParams:
    """Recover the kernel parameters from a moment set."""
    if strict:
        validate(xi, max_condition).raise_if_failed()
    q_inv = spd_inverse(xi.q_mat, "Q", max_condition)
    s = xi.s_mat
    qi_s = q_inv @ s
    st_qi = s.T @ q_inv
    st_qi_s = st_qi @ s
    st_qi_s = 0.5 * (st_qi_s + st_qi_s.T)
    a_real = xi.p_mat + 0.25 * q_inv - st_qi_s
    c_real = xi.p_mat - 0.25 * q_inv - st_qi_s
    a_imag = -0.5 * (st_qi + qi_s)
    c_imag = 0.5 * (st_qi - qi_s)
    d_real = 0.5 * q_inv @ xi.mean_q
    d_imag = xi.mean_p + (a_imag - c_imag) @ xi.mean_q
    return KernelParams(
        0.5 * (a_real + a_real.T),
        0.5 * (c_real + c_real.T),
        0.5 * (a_imag + a_imag.T),
        0.5 * (c_imag - c_imag.T),
        d_real,
        d_imag,
    )


def symplectic_values(xi: MomentSet) -> np.ndarray:
    """Williamson values ``mu_i = 2 nu_i`` of the full covariance, sorted descending.

    ``mu = 1`` for every mode of a pure state.  Works for any ``S``.
    """
    n = xi.n_modes
    gamma = xi.covariance
    gamma = 0.5 * (gamma + gamma.T)
    try:
        chol = np.linalg.cholesky(gamma)
    except np.linalg.LinAlgError as exc:
        raise SingularStateError("phase-space covariance is not positive definite") from exc
    j = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    m = chol.T @ j @ chol
    w = np.linalg.eigvalsh(1j * (m - m.T) / 2)
    return np.sort(2.0 * w[n:])[::-1]
