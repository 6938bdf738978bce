import math

import numpy as np
import pytest

from suslov_hk import BodyOmega, DegenerateFit, DegenerateStep, PlanarState, StepBudgetExceeded, hk_step, to_planar
from suslov_hk.model3 import delta, energy, find_pole
from suslov_hk.reference import (
    OdeSystem,
    continuous_rhs_3d,
    continuous_rhs_planar,
    estimate_order,
    euler_step_planar,
    extended_precision_step,
    iterate,
    planar_system,
    rk4_integrate,
    suslov3d_system,
)

from conftest import FIG1, FIG1_EPS, random_inertia


class TestVectorFields:
    def test_origin(self):
        assert continuous_rhs_3d(BodyOmega(0.0, 0.0), FIG1) == BodyOmega(0.0, 0.0)

    def test_steady_state_hand_value(self):
        d = continuous_rhs_3d(BodyOmega(0.3, -0.5), FIG1)
        assert abs(d.omega1) < 1e-16 and abs(d.omega2) < 1e-16

    def test_planar_values(self):
        assert continuous_rhs_planar(PlanarState(0.0, 2.5), FIG1) == PlanarState(0.0, 0.0)
        d = continuous_rhs_planar(PlanarState(1.0, 0.0), FIG1)
        assert d == PlanarState(0.0, -1.0)

    def test_pushforward(self, rng):
        for _ in range(200):
            inertia = random_inertia(rng)
            w = BodyOmega(*rng.uniform(-2, 2, 2))
            # to_planar is linear, so its pushforward is to_planar itself
            lhs = to_planar(continuous_rhs_3d(w, inertia), inertia)
            rhs = continuous_rhs_planar(to_planar(w, inertia), inertia)
            scale = max(1.0, abs(rhs.x), abs(rhs.y))
            assert abs(lhs.x - rhs.x) <= 1e-12 * scale and abs(lhs.y - rhs.y) <= 1e-12 * scale


class TestRK4:
    def test_zero_field(self):
        system = OdeSystem(2, lambda s: np.zeros(2))
        assert np.array_equal(rk4_integrate(system, [1.5, -2.0], 3.0, 0.1), [1.5, -2.0])

    def test_decay_fourth_order(self):
        system = OdeSystem(1, lambda s: -s)
        errs = [abs(rk4_integrate(system, [1.0], 2.0, dt)[0] - math.exp(-2.0)) for dt in (0.2, 0.1, 0.05)]
        ratios = [a / b for a, b in zip(errs, errs[1:])]
        assert all(14 < r < 18 for r in ratios)
        assert errs[-1] < 1e-6

    def test_partial_last_step(self):
        system = OdeSystem(1, lambda s: -s)
        assert rk4_integrate(system, [1.0], 1.05, 0.1)[0] == pytest.approx(math.exp(-1.05), rel=1e-6)

    def test_budget(self):
        with pytest.raises(StepBudgetExceeded):
            rk4_integrate(OdeSystem(1, lambda s: -s), [1.0], 1.0, 1e-3, max_steps=100)

    def test_energy_conservation_fig1(self):
        state = rk4_integrate(suslov3d_system(FIG1), [1.0, 1.0], 10.0, 1e-3)
        e0 = energy(BodyOmega(1.0, 1.0), FIG1)
        assert abs(energy(BodyOmega(*state), FIG1) - e0) < 1e-8

    def test_continuous_asymptotics(self):
        system = suslov3d_system(FIG1)
        state = np.array([1.0, 1.0])
        residuals = []
        for _ in range(40):
            state = rk4_integrate(system, state, 1.0, 1e-2)
            residuals.append(abs(FIG1.I13 * state[0] + FIG1.I23 * state[1]))
        tail = residuals[5:]
        assert all(a > b for a, b in zip(tail, tail[1:]))
        assert tail[-1] < 1e-3 * residuals[0]


class TestOrderEstimate:
    levels = (0.1, 0.05, 0.025, 0.0125)

    def test_euler_control(self):
        p0 = to_planar(BodyOmega(1.0, 1.0), FIG1)
        ref = rk4_integrate(planar_system(FIG1), tuple(p0), 1.0, 1e-4)
        rep = estimate_order(
            lambda eps: iterate(lambda p, e: euler_step_planar(p, FIG1, e), p0, eps, 1.0), ref, self.levels
        )
        assert 0.85 <= rep.estimated_order <= 1.15
        assert rep.eps_levels == self.levels and len(rep.errors) == 4

    def test_hk_second_order(self):
        ref = rk4_integrate(suslov3d_system(FIG1), [1.0, 1.0], 1.0, 1e-4)
        rep = estimate_order(
            lambda eps: iterate(lambda w, e: hk_step(w, FIG1, e), BodyOmega(1.0, 1.0), eps, 1.0), ref, self.levels
        )
        assert rep.estimated_order >= 1.9

    def test_exact_map_is_degenerate_fit(self):
        with pytest.raises(DegenerateFit):
            estimate_order(lambda eps: [1.0, 2.0], [1.0, 2.0], self.levels)

    def test_level_validation(self):
        with pytest.raises(ValueError):
            estimate_order(lambda eps: [0.0], [1.0], (0.1, 0.05, 0.025))
        with pytest.raises(ValueError):
            estimate_order(lambda eps: [0.0], [1.0], (0.1, 0.05, 0.02, 0.01))

    def test_iterate_requires_multiple(self):
        with pytest.raises(ValueError):
            iterate(lambda s, e: s, 0.0, 0.3, 1.0)


class TestExtendedPrecision:
    def test_origin(self):
        assert extended_precision_step(BodyOmega(0.0, 0.0), FIG1, 0.2) == BodyOmega(0.0, 0.0)

    def test_agrees_with_double(self, rng):
        for _ in range(200):
            inertia = random_inertia(rng)
            w = BodyOmega(*rng.uniform(-2, 2, 2))
            eps = rng.uniform(0.01, 0.5)
            if abs(delta(w, inertia, eps)) < 0.1:
                continue
            a, b = hk_step(w, inertia, eps), extended_precision_step(w, inertia, eps)
            scale = max(abs(b.omega1), abs(b.omega2))
            assert abs(a.omega1 - b.omega1) <= 1e-14 * scale and abs(a.omega2 - b.omega2) <= 1e-14 * scale

    def test_pole(self):
        pole = find_pole(BodyOmega(-0.5, math.sqrt(3) / 2), FIG1, FIG1_EPS)
        with pytest.raises(DegenerateStep):
            extended_precision_step(pole, FIG1, FIG1_EPS)

    def test_conditioning_probe(self):
        """Near a pole the double-precision step loses digits; logged, not bounded."""
        pole = find_pole(BodyOmega(-0.5, math.sqrt(3) / 2), FIG1, FIG1_EPS)
        near = BodyOmega(pole.omega1 * (1 - 1e-8), pole.omega2 * (1 - 1e-8))
        assert abs(delta(near, FIG1, FIG1_EPS)) < 1e-6
        a, b = hk_step(near, FIG1, FIG1_EPS), extended_precision_step(near, FIG1, FIG1_EPS)
        rel = max(abs(a.omega1 - b.omega1), abs(a.omega2 - b.omega2)) / max(abs(b.omega1), abs(b.omega2))
        print(f"near-pole relative disagreement: {rel:.3e}")
        assert math.isfinite(rel)
