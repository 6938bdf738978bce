"""Independent oracles for the discrete maps.

Continuous vector fields with a fixed-step RK4 integrator, extended-precision
evaluation of the steps, residuals of the defining bilinear relations, and a
least-squares convergence-order estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import mpmath
import numpy as np

from .errors import DegenerateFit, DegenerateStep, StepBudgetExceeded
from .model3 import DET_TOL, BodyOmega, Inertia3, PlanarState
from .modeln import NDInertia, continuous_rhs_nd

EXTENDED_DPS = 34
MAX_STEPS = 10_000_000


@dataclass(frozen=True)
class OdeSystem:
    """Autonomous ODE ``dstate/dt = rhs(state)`` on R^dimension."""

    dimension: int
    rhs: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConvergenceReport:
    eps_levels: tuple[float, ...]
    errors: tuple[float, ...]
    estimated_order: float


def continuous_rhs_3d(omega: BodyOmega, inertia: Inertia3) -> BodyOmega:
    w1, w2 = omega.omega1, omega.omega2
    return BodyOmega(
        (-inertia.I13 * w1 * w2 - inertia.I23 * w2 * w2) / inertia.I1,
        (inertia.I13 * w1 * w1 + inertia.I23 * w1 * w2) / inertia.I2,
    )


def continuous_rhs_planar(planar: PlanarState, inertia: Inertia3) -> PlanarState:
    x, y = planar.x, planar.y
    return PlanarState(x * y / inertia.product, -x * x)


def suslov3d_system(inertia: Inertia3) -> OdeSystem:
    def rhs(state):
        d = continuous_rhs_3d(BodyOmega(state[0], state[1]), inertia)
        return np.array([d.omega1, d.omega2])

    return OdeSystem(2, rhs)


def planar_system(inertia: Inertia3) -> OdeSystem:
    def rhs(state):
        d = continuous_rhs_planar(PlanarState(state[0], state[1]), inertia)
        return np.array([d.x, d.y])

    return OdeSystem(2, rhs)


def nd_system(inertia: NDInertia) -> OdeSystem:
    return OdeSystem(inertia.n - 1, lambda state: continuous_rhs_nd(state, inertia))


def rk4_integrate(
    system: OdeSystem, state0, t_end: float, dt: float, max_steps: int = MAX_STEPS
) -> np.ndarray:
    """Classical fixed-step RK4 from t = 0 to ``t_end``.

    The final step is shortened if ``t_end`` is not a multiple of ``dt``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end!r}")
    n_full = int(math.floor(t_end / dt + 1e-9))
    rest = t_end - n_full * dt
    if abs(rest) <= 1e-9 * dt:
        rest = 0.0
    if n_full + (rest > 0) > max_steps:
        raise StepBudgetExceeded(f"{n_full} steps exceed the budget of {max_steps}")
    f = system.rhs
    y = np.array(state0, dtype=float)

    def advance(y, h):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    for _ in range(n_full):
        y = advance(y, dt)
    if rest > 0:
        y = advance(y, rest)
    return y


def euler_step_planar(planar: PlanarState, inertia: Inertia3, eps: float) -> PlanarState:
    """Explicit Euler step; first-order control for :func:`estimate_order`."""
    d = continuous_rhs_planar(planar, inertia)
    return PlanarState(planar.x + eps * d.x, planar.y + eps * d.y)


def iterate(step: Callable, state, eps: float, t_end: float):
    """Apply ``step(state, eps)`` enough times to reach ``t_end``."""
    n = round(t_end / eps)
    if not math.isclose(n * eps, t_end, rel_tol=1e-9):
        raise ValueError(f"t_end={t_end!r} is not a multiple of eps={eps!r}")
    for _ in range(n):
        state = step(state, eps)
    return state


def estimate_order(
    map_family: Callable[[float], Sequence[float]],
    reference_solution: Union[Sequence[float], Callable[[float], Sequence[float]]],
    eps_levels: Sequence[float],
    floor: float = 1e-13,
) -> ConvergenceReport:
    """Fit ``log(error) = p*log(eps) + const`` by least squares.

    ``map_family(eps)`` returns the terminal state produced with step
    ``eps``. ``reference_solution`` is either a fixed terminal state or a
    callable returning one for a given ``eps``.
    """
    levels = tuple(float(e) for e in eps_levels)
    if len(levels) < 4:
        raise ValueError("at least four step sizes are needed")
    for big, small in zip(levels, levels[1:]):
        if not math.isclose(small, big / 2, rel_tol=1e-12):
            raise ValueError(f"step sizes must halve: {levels}")
    errors = []
    for eps in levels:
        ref = reference_solution(eps) if callable(reference_solution) else reference_solution
        approx = np.asarray(tuple(map_family(eps)), dtype=float)
        errors.append(float(np.max(np.abs(approx - np.asarray(tuple(ref), dtype=float)))))
    if min(errors) <= floor:
        raise DegenerateFit(f"errors {errors} reach the floor {floor:g}")
    slope, _ = np.polyfit(np.log(levels), np.log(errors), 1)
    return ConvergenceReport(levels, tuple(errors), float(slope))


def extended_precision_step(omega: BodyOmega, inertia: Inertia3, eps: float) -> BodyOmega:
    """Same closed-form step as :func:`model3.hk_step`, in 34-digit arithmetic.

    Inputs are converted exactly from their binary values.
    """
    with mpmath.workdps(EXTENDED_DPS):
        mpf = mpmath.mpf
        w1, w2 = mpf(omega.omega1), mpf(omega.omega2)
        I1, I2, I13, I23 = (mpf(v) for v in (inertia.I1, inertia.I2, inertia.I13, inertia.I23))
        e = mpf(eps)
        if I13 == 0 and I23 == 0:
            return omega
        det = (1 + e * I13 / (2 * I1) * w2) * (1 - e * I23 / (2 * I2) * w1) + e**2 / (
            I1 * I2
        ) * (I13 * w1 / 2 + I23 * w2) * (I13 * w1 + I23 * w2 / 2)
        if abs(det) <= DET_TOL:
            raise DegenerateStep(f"|delta| = {float(abs(det)):.3e}")
        n1 = w1 - e * I23 / (2 * I2) * w1**2 - e * I13 / (2 * I1) * w1 * w2 - e * I23 / I1 * w2**2
        n2 = w2 + e * I13 / (2 * I1) * w2**2 + e * I23 / (2 * I2) * w1 * w2 + e * I13 / I2 * w1**2
        return BodyOmega(float(n1 / det), float(n2 / det))


def _rel(terms: Sequence[float], lhs_minus_rhs: float) -> float:
    scale = sum(abs(t) for t in terms)
    return abs(lhs_minus_rhs) / scale if scale else abs(lhs_minus_rhs)


def ds1_residual(
    omega: BodyOmega, omega_next: BodyOmega, inertia: Inertia3, eps: float
) -> tuple[float, float]:
    """Relative residuals of the two bilinear step relations.

    Each residual is divided by the sum of magnitudes of the terms entering
    that relation, so it measures cancellation error rather than size.
    """
    w1, w2 = omega.omega1, omega.omega2
    v1, v2 = omega_next.omega1, omega_next.omega2
    I1, I2, I13, I23 = inertia.I1, inertia.I2, inertia.I13, inertia.I23
    t1 = (I1 * v1, -I1 * w1, eps * I13 / 2 * v1 * w2, eps * I13 / 2 * w1 * v2, eps * I23 * w2 * v2)
    t2 = (I2 * v2, -I2 * w2, -eps * I23 / 2 * v1 * w2, -eps * I23 / 2 * w1 * v2, -eps * I13 * w1 * v1)
    return _rel(t1, math.fsum(t1)), _rel(t2, math.fsum(t2))


def xy1_residual(
    planar: PlanarState, planar_next: PlanarState, inertia: Inertia3, eps: float
) -> tuple[float, float]:
    x, y = planar.x, planar.y
    xn, yn = planar_next.x, planar_next.y
    k = eps / (2 * inertia.product)
    t1 = (xn, -x, -k * xn * y, -k * x * yn)
    t2 = (yn, -y, eps * xn * x)
    return _rel(t1, math.fsum(t1)), _rel(t2, math.fsum(t2))


def dsn_terms(omega, omega_next, inertia: NDInertia, eps: float) -> list[list]:
    """Signed terms of each step relation, moved to one side (sum = 0)."""
    w = list(omega)
    v = list(omega_next)
    p = list(inertia.off)
    d = [inertia.diag[i] + inertia.diag[-1] for i in range(inertia.n - 1)]
    rows = []
    for i in range(inertia.n - 1):
        terms = [d[i] * v[i], -d[i] * w[i]]
        terms += [eps * p[i] * v[j] * w[j] for j in range(len(w))]
        terms += [-eps * p[j] * v[j] * w[i] / 2 for j in range(len(w))]
        terms += [-eps * p[j] * w[j] * v[i] / 2 for j in range(len(w))]
        rows.append(terms)
    return rows


def dsn_residual(omega, omega_next, inertia: NDInertia, eps: float) -> float:
    """Largest relative residual over the n-1 step relations."""
    return max(_rel(t, math.fsum(t)) for t in dsn_terms(omega, omega_next, inertia, eps))


def extended_precision_step_nd(omega, inertia: NDInertia, eps: float) -> np.ndarray:
    """Solve the n-dimensional step relations in 34-digit arithmetic.

    The matrix is assembled by probing the (affine in the new state) relations
    with unit vectors, independently of :func:`modeln.build_step_matrix`.
    """
    m = inertia.n - 1
    with mpmath.workdps(EXTENDED_DPS):
        mp_inertia = _MpNDInertia(inertia)
        w = [mpmath.mpf(float(v)) for v in omega]
        e = mpmath.mpf(eps)
        zero = [mpmath.mpf(0)] * m
        base = [sum(t) for t in dsn_terms(w, zero, mp_inertia, e)]
        A = mpmath.matrix(m, m)
        for j in range(m):
            unit = [mpmath.mpf(1) if k == j else mpmath.mpf(0) for k in range(m)]
            col = [sum(t) for t in dsn_terms(w, unit, mp_inertia, e)]
            for i in range(m):
                A[i, j] = col[i] - base[i]
        b = mpmath.matrix([-v for v in base])
        sol = mpmath.lu_solve(A, b)
        return np.array([float(sol[i]) for i in range(m)])


class _MpNDInertia:
    """NDInertia look-alike holding mpmath numbers."""

    def __init__(self, inertia: NDInertia):
        self.diag = [mpmath.mpf(v) for v in inertia.diag]
        self.off = [mpmath.mpf(v) for v in inertia.off]
        self.n = inertia.n
