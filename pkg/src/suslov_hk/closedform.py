"""Exact orbits of the discrete Suslov map.

On the level set ``first_integral_planar = h`` the map reduces to a scalar
recursion for an angle-like variable ``u``. Its admissible branch is solved by
``u(n) = sinh(k1*n*eps + k2)``, and the corresponding planar orbit is

    x(n) = sign_x * 2*sqrt(h*P/(P - h*eps**2)) / cosh(k1*n*eps + k2)
    y(n) = 2*sqrt(h*P) * tanh(k1*n*eps + k2)

with ``P = I1*I2`` and ``sinh(-k1*eps) = c(h)``. The orbit tends to the
steady-state line x = 0 in both time directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import DegenerateInertia, FixedPointState, LevelOutOfRange
from .model3 import (
    BodyOmega,
    Inertia3,
    PlanarState,
    first_integral_planar,
    from_planar,
    to_planar,
)

Branch = Literal["first", "second"]


def _check_level(h: float, inertia: Inertia3, eps: float) -> float:
    p = inertia.product
    gap = p - h * eps * eps
    if not (h > 0 and gap > 0):
        raise LevelOutOfRange(f"level h={h!r} outside (0, {p / (eps * eps)!r})")
    return gap


def c_of_h(h: float, inertia: Inertia3, eps: float) -> float:
    gap = _check_level(h, inertia, eps)
    return 2 * eps * math.sqrt(inertia.product * h) / gap


def k1_of_h(h: float, inertia: Inertia3, eps: float) -> float:
    """Exponential rate of the orbit on level ``h``; always negative."""
    return -math.asinh(c_of_h(h, inertia, eps)) / eps


@dataclass(frozen=True)
class ClosedFormParams:
    """One member of the hyperbolic family of exact orbits.

    The time origin is folded into ``k2``. ``h = 0`` is allowed only with
    ``k1 = 0`` and describes the origin.
    """

    h: float
    k1: float
    k2: float
    sign_x: int
    eps: float
    inertia: Inertia3

    def __post_init__(self):
        if self.sign_x not in (1, -1):
            raise ValueError(f"sign_x must be +1 or -1, got {self.sign_x!r}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        if self.h == 0:
            if self.k1 != 0:
                raise ValueError("level h = 0 requires k1 = 0")
            return
        c = c_of_h(self.h, self.inertia, self.eps)
        if abs(math.sinh(-self.k1 * self.eps) - c) > 1e-14 * c:
            raise ValueError(f"k1={self.k1!r} does not satisfy sinh(-k1*eps) = {c!r}")

    @classmethod
    def from_level(
        cls, h: float, k2: float, inertia: Inertia3, eps: float, sign_x: int = 1
    ) -> "ClosedFormParams":
        return cls(h, k1_of_h(h, inertia, eps), k2, sign_x, eps, inertia)

    @property
    def c(self) -> float:
        return math.sinh(-self.k1 * self.eps)

    def phase(self, n: int) -> float:
        return self.k1 * n * self.eps + self.k2


def u_step(u: float, c: float, branch: Branch = "first") -> float:
    """Next value of ``u`` on one of the two roots of the rationalized recursion.

    The ``"first"`` branch solves ``u*sqrt(v**2+1) - v*sqrt(u**2+1) = c``,
    reduces to the identity as ``c -> 0`` and is the one realised by orbits of
    the map. The ``"second"`` branch solves the same relation with both signs
    flipped, ``u*sqrt(v**2+1) + v*sqrt(u**2+1) = -c``; it tends to ``-u`` as
    ``c -> 0`` and has no continuous limit.
    """
    root_u = math.sqrt(u * u + 1)
    root_c = math.sqrt(c * c + 1)
    if branch == "first":
        return -c * root_u + u * root_c
    if branch == "second":
        return -c * root_u - u * root_c
    raise ValueError(f"unknown branch {branch!r}")


def u_closed(n: int, params: ClosedFormParams) -> float:
    return math.sinh(params.phase(n))


def level_point(phi: float, h: float, inertia: Inertia3, eps: float) -> PlanarState:
    """Point of the level curve ``first_integral_planar = h`` at angle ``phi``."""
    _check_level(h, inertia, eps)
    p = inertia.product
    cos_phi = math.cos(phi)
    s = p - h * eps * eps * cos_phi * cos_phi
    return PlanarState(
        2 * math.sqrt(p * h / s) * cos_phi,
        2 * p * math.sqrt(h / s) * math.sin(phi),
    )


def planar_closed(n: int, params: ClosedFormParams) -> PlanarState:
    if params.h == 0:
        return PlanarState(0.0, 0.0)
    p = params.inertia.product
    hp = params.h * p
    theta = params.phase(n)
    amp_x = 2 * math.sqrt(hp / (p - params.h * params.eps**2))
    return PlanarState(
        params.sign_x * amp_x / math.cosh(theta),
        2 * math.sqrt(hp) * math.tanh(theta),
    )


def omega_closed(n: int, params: ClosedFormParams) -> BodyOmega:
    """Angular velocity on the exact orbit, obtained by inverting the planar map."""
    return from_planar(planar_closed(n, params), params.inertia)


def fit_params(omega0: BodyOmega, inertia: Inertia3, eps: float) -> ClosedFormParams:
    """Parameters of the exact orbit through ``omega0`` at n = 0.

    Raises
    ------
    FixedPointState
        If ``omega0`` is on the steady-state line (including the origin).
    LevelOutOfRange
        If the level of ``omega0`` is not in (0, I1*I2/eps**2).
    DegenerateInertia
        If I13 = I23 = 0; every state is then fixed.
    """
    if inertia.is_degenerate:
        raise DegenerateInertia("I13 = I23 = 0: every state is a fixed point")
    planar = to_planar(omega0, inertia)
    if planar.x == 0:
        raise FixedPointState(f"omega0 = {tuple(omega0)} lies on the steady-state line")
    h = first_integral_planar(planar, inertia, eps)
    gap = _check_level(h, inertia, eps)
    # u = y / (|x| sqrt(P - h eps^2)) equals sinh(k2) on the exact orbit
    k2 = math.asinh(planar.y / (abs(planar.x) * math.sqrt(gap)))
    return ClosedFormParams.from_level(h, k2, inertia, eps, sign_x=1 if planar.x > 0 else -1)
