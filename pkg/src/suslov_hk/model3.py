"""Hirota-Kimura discretization of the reduced three-dimensional Suslov problem.

The body axis carrying the constraint is e3, so the reduced state is the pair
(omega1, omega2) with omega3 identically zero. One step of the map solves a
2x2 linear system whose closed-form solution is coded in :func:`hk_step`.

The planar coordinates

    x = I13*omega1 + I23*omega2
    y = I23*I1*omega1 - I13*I2*omega2

turn the map into the simpler system handled by :func:`planar_step`. The line
x = 0 consists of fixed points (discrete steady-state rotations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import DegenerateInertia, DegenerateStep

DET_TOL = 1e-12


@dataclass(frozen=True)
class Inertia3:
    """Reduced inertia data of a body with constraint axis e3.

    ``I3`` does not enter the reduced equations and is kept only so that a
    full inertia tensor can be described.
    """

    I1: float
    I2: float
    I13: float
    I23: float
    I3: Optional[float] = None

    def __post_init__(self):
        values = (self.I1, self.I2, self.I13, self.I23)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"inertia entries must be finite, got {values}")
        if self.I1 <= 0 or self.I2 <= 0:
            raise ValueError(f"I1 and I2 must be positive, got {self.I1}, {self.I2}")

    @property
    def is_degenerate(self) -> bool:
        return self.I13 == 0 and self.I23 == 0

    @property
    def jac(self) -> float:
        """Jacobian determinant of the planar change of coordinates."""
        return -(self.I13 * self.I13 * self.I2 + self.I23 * self.I23 * self.I1)

    @property
    def product(self) -> float:
        return self.I1 * self.I2


@dataclass(frozen=True, slots=True)
class BodyOmega:
    omega1: float
    omega2: float

    def __post_init__(self):
        if not (math.isfinite(self.omega1) and math.isfinite(self.omega2)):
            raise ValueError(f"non-finite angular velocity ({self.omega1}, {self.omega2})")

    def __iter__(self):
        yield self.omega1
        yield self.omega2


@dataclass(frozen=True, slots=True)
class PlanarState:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite planar state ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class TrajectorySample:
    n: int
    t: float
    omega: BodyOmega
    planar: PlanarState
    F: float
    energy: float
    constraint: float


def delta(omega: BodyOmega, inertia: Inertia3, eps: float) -> float:
    """Determinant of the linear system solved by one step."""
    w1, w2 = omega.omega1, omega.omega2
    I1, I2, I13, I23 = inertia.I1, inertia.I2, inertia.I13, inertia.I23
    return (1 + eps * I13 / (2 * I1) * w2) * (1 - eps * I23 / (2 * I2) * w1) + (
        eps * eps / (I1 * I2)
    ) * (I13 * w1 / 2 + I23 * w2) * (I13 * w1 + I23 * w2 / 2)


def hk_step(omega: BodyOmega, inertia: Inertia3, eps: float) -> BodyOmega:
    """Advance the reduced angular velocity by one step of size ``eps``.

    Negative ``eps`` runs the map backwards; the map is its own inverse under
    ``eps -> -eps``.

    Raises
    ------
    DegenerateStep
        If ``|delta| <= DET_TOL``, i.e. the state sits on a pole of the map.
    """
    if inertia.is_degenerate:
        return omega
    w1, w2 = omega.omega1, omega.omega2
    I1, I2, I13, I23 = inertia.I1, inertia.I2, inertia.I13, inertia.I23
    a = eps * I13 / (2 * I1)
    b = eps * I23 / (2 * I2)
    det = (1 + a * w2) * (1 - b * w1) + (eps * eps / (I1 * I2)) * (I13 * w1 / 2 + I23 * w2) * (
        I13 * w1 + I23 * w2 / 2
    )
    if abs(det) <= DET_TOL:
        raise DegenerateStep(f"|delta| = {abs(det):.3e} at omega = ({w1!r}, {w2!r})")
    n1 = w1 - b * w1 * w1 - a * w1 * w2 - eps * I23 / I1 * w2 * w2
    n2 = w2 + a * w2 * w2 + b * w1 * w2 + eps * I13 / I2 * w1 * w1
    return BodyOmega(n1 / det, n2 / det)


def first_integral(omega: BodyOmega, inertia: Inertia3, eps: float) -> float:
    """Quantity conserved exactly by :func:`hk_step`.

    Tends to ``energy / (2*I1*I2)`` as ``eps -> 0``.
    """
    w1, w2 = omega.omega1, omega.omega2
    I1, I2 = inertia.I1, inertia.I2
    x = inertia.I13 * w1 + inertia.I23 * w2
    return (I1 * w1 * w1 + I2 * w2 * w2) / (4 * I1 * I2 + eps * eps * x * x)


def energy(omega: BodyOmega, inertia: Inertia3) -> float:
    """Kinetic energy of the continuous reduced system (not conserved by the map)."""
    return 0.5 * (inertia.I1 * omega.omega1**2 + inertia.I2 * omega.omega2**2)


def constraint_residual(omega: BodyOmega, inertia: Inertia3) -> float:
    """Distance-like measure from the steady-state line, I13*omega1 + I23*omega2."""
    return inertia.I13 * omega.omega1 + inertia.I23 * omega.omega2


def to_planar(omega: BodyOmega, inertia: Inertia3) -> PlanarState:
    w1, w2 = omega.omega1, omega.omega2
    return PlanarState(
        inertia.I13 * w1 + inertia.I23 * w2,
        inertia.I23 * inertia.I1 * w1 - inertia.I13 * inertia.I2 * w2,
    )


def from_planar(planar: PlanarState, inertia: Inertia3) -> BodyOmega:
    """Inverse of :func:`to_planar`.

    Raises
    ------
    DegenerateInertia
        If I13 = I23 = 0.
    """
    d = -inertia.jac
    if d == 0:
        raise DegenerateInertia("I13 = I23 = 0: planar coordinates collapse to (0, 0)")
    x, y = planar.x, planar.y
    I13, I23 = inertia.I13, inertia.I23
    return BodyOmega(
        (I13 * inertia.I2 * x + I23 * y) / d,
        (I23 * inertia.I1 * x - I13 * y) / d,
    )


def planar_step(planar: PlanarState, inertia: Inertia3, eps: float) -> PlanarState:
    """One step of the map in planar coordinates.

    Solves ``x' - x = eps/(2 I1 I2) (x' y + x y')`` and ``y' - y = -eps x' x``
    by substituting the second relation into the first.
    """
    x, y = planar.x, planar.y
    p2 = 2 * inertia.I1 * inertia.I2
    den = p2 - eps * y + eps * eps * x * x
    if abs(den) <= DET_TOL:
        raise DegenerateStep(f"planar denominator {den:.3e} at ({x!r}, {y!r})")
    xn = x * (p2 + eps * y) / den
    return PlanarState(xn, y - eps * xn * x)


def first_integral_planar(planar: PlanarState, inertia: Inertia3, eps: float) -> float:
    """First integral in planar coordinates.

    This is ``-jac`` times :func:`first_integral` of the corresponding
    angular velocity, because the change of coordinates is not orthogonal.
    Its level sets are the curves on which the closed-form orbits live.
    """
    x, y = planar.x, planar.y
    p = inertia.I1 * inertia.I2
    return (p * x * x + y * y) / (4 * p + eps * eps * x * x)


def find_pole(direction: BodyOmega, inertia: Inertia3, eps: float) -> BodyOmega:
    """Smallest positive multiple of ``direction`` at which ``delta`` vanishes.

    ``delta`` restricted to a ray is a quadratic polynomial in the scale, so
    the root is found in closed form. Raises ValueError if the ray never meets
    a pole.
    """
    d1, d2 = direction.omega1, direction.omega2
    I1, I2, I13, I23 = inertia.I1, inertia.I2, inertia.I13, inertia.I23
    a = eps * I13 / (2 * I1) * d2
    b = -eps * I23 / (2 * I2) * d1
    q = a * b + (eps * eps / (I1 * I2)) * (I13 * d1 / 2 + I23 * d2) * (I13 * d1 + I23 * d2 / 2)
    lin = a + b
    if q == 0:
        roots = [-1.0 / lin] if lin != 0 else []
    else:
        disc = lin * lin - 4 * q
        if disc < 0:
            roots = []
        else:
            sq = math.sqrt(disc)
            # stable pair: one root from the quadratic formula, the other via Vieta
            r1 = (-lin - math.copysign(sq, lin)) / (2 * q)
            roots = [r1, 1.0 / (q * r1)] if r1 != 0 else []
    positive = sorted(r for r in roots if r > 0)
    if not positive:
        raise ValueError("no pole of the step map along this direction")
    s = positive[0]
    return BodyOmega(s * d1, s * d2)


def trajectory(
    omega0: BodyOmega, inertia: Inertia3, eps: float, steps: int, t0: float = 0.0
) -> Iterator[TrajectorySample]:
    """Yield samples n = 0..steps of the orbit starting at ``omega0``.

    A pole met along the way propagates as DegenerateStep after the samples
    computed so far have been yielded.
    """
    omega = omega0
    for n in range(steps + 1):
        if n:
            omega = hk_step(omega, inertia, eps)
        planar = to_planar(omega, inertia)
        yield TrajectorySample(
            n=n,
            t=t0 + n * eps,
            omega=omega,
            planar=planar,
            F=first_integral(omega, inertia, eps),
            energy=energy(omega, inertia),
            constraint=planar.x,
        )
