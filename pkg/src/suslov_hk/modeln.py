"""Discrete Suslov problem on so(n).

Only the velocities ``omega[i] = Omega_{i,n}`` (i = 1..n-1) are free; the
remaining entries of the angular-velocity matrix are held at zero by the
constraints. The Hirota-Kimura step is linear in the new state,
``A(omega) @ omega_next = omega``, and is solved densely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularStepMatrix

COND_MAX = 1e12


@dataclass(frozen=True)
class NDInertia:
    """Inertia data of the n-dimensional body.

    ``diag`` holds I_11..I_nn and ``off`` holds I_1n..I_{n-1,n}.
    """

    diag: tuple[float, ...]
    off: tuple[float, ...]

    def __post_init__(self):
        diag = tuple(float(v) for v in self.diag)
        off = tuple(float(v) for v in self.off)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)
        if len(diag) < 3:
            raise ValueError(f"dimension must be at least 3, got {len(diag)}")
        if len(off) != len(diag) - 1:
            raise ValueError(f"expected {len(diag) - 1} off-diagonal entries, got {len(off)}")
        if not all(math.isfinite(v) for v in diag + off):
            raise ValueError("inertia entries must be finite")
        if min(self.denominators) <= 0:
            raise ValueError("I_ii + I_nn must be positive for every i < n")

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def denominators(self) -> np.ndarray:
        """I_ii + I_nn for i = 1..n-1."""
        return np.asarray(self.diag[:-1]) + self.diag[-1]


def _as_omega(omega, inertia: NDInertia) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.shape != (inertia.n - 1,):
        raise ValueError(f"omega must have shape ({inertia.n - 1},), got {w.shape}")
    return w


def build_step_matrix(omega, inertia: NDInertia, eps: float) -> np.ndarray:
    """Matrix A with ``A @ omega_next = omega``.

    A_ii = 1 - eps * sum_{j != i} I_jn w_j / (2 d_i)
    A_ij = eps * (2 I_in w_j - I_jn w_i) / (2 d_i),   j != i
    where d_i = I_ii + I_nn.
    """
    w = _as_omega(omega, inertia)
    p = np.asarray(inertia.off)
    scale = eps / (2 * inertia.denominators)
    # the off-diagonal formula evaluated at j == i gives eps*p_i*w_i/(2 d_i),
    # which is exactly the j == i term missing from the diagonal sum
    A = scale[:, None] * (2 * np.outer(p, w) - np.outer(w, p))
    A[np.diag_indices_from(A)] += 1 - scale * (p @ w)
    return A


def hk_step_nd(omega, inertia: NDInertia, eps: float) -> np.ndarray:
    """One Hirota-Kimura step; raises SingularStepMatrix at a pole."""
    w = _as_omega(omega, inertia)
    A = build_step_matrix(w, inertia, eps)
    cond = np.linalg.cond(A)
    if not cond < COND_MAX:
        raise SingularStepMatrix(f"step matrix condition number {cond:.3e}")
    try:
        return np.linalg.solve(A, w)
    except np.linalg.LinAlgError as exc:
        raise SingularStepMatrix(str(exc)) from exc


def continuous_rhs_nd(omega, inertia: NDInertia) -> np.ndarray:
    """Time derivative of omega for the continuous constrained system."""
    w = _as_omega(omega, inertia)
    p = np.asarray(inertia.off)
    return (-p * (w @ w) + (p @ w) * w) / inertia.denominators


def energy_nd(omega, inertia: NDInertia) -> float:
    """Kinetic energy of the continuous system.

    Conserved by the flow but not by the discrete map; reported as a
    diagnostic only.
    """
    w = _as_omega(omega, inertia)
    return 0.5 * float(inertia.denominators @ (w * w))


def steady_state(c: float, inertia: NDInertia) -> np.ndarray:
    """Velocity proportional to (I_1n, ..., I_{n-1,n}); fixed under the map."""
    return c * np.asarray(inertia.off)
