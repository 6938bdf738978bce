import numpy as np
import pytest

from suslov_hk import (
    BodyOmega,
    Inertia3,
    NDInertia,
    SingularStepMatrix,
    build_step_matrix,
    continuous_rhs_nd,
    hk_step,
    hk_step_nd,
)
from suslov_hk.modeln import energy_nd, steady_state
from suslov_hk.reference import continuous_rhs_3d, dsn_residual, extended_precision_step_nd


def random_nd(rng, n):
    return NDInertia(rng.uniform(0.5, 3.0, n), rng.uniform(-1, 1, n - 1))


def so3_identification(nd: NDInertia):
    """Map n = 3 data to the reduced 3D problem.

    Derived by matching the two vector fields term by term; any sign choice
    (a, b) with omega_23 = a*omega1, omega_13 = b*omega2 works provided
    I23 = a*I_23 and I13 = -b*I_13. The so(3) hat map gives a = -1, b = 1.
    """
    I11, I22, I33 = nd.diag
    I13n, I23n = nd.off
    inertia = Inertia3(I22 + I33, I11 + I33, -I13n, -I23n)

    def to3(w):
        return BodyOmega(-w[1], w[0])

    def from3(omega):
        return np.array([omega.omega2, -omega.omega1])

    return inertia, to3, from3


class TestStepMatrix:
    def test_zero_velocity(self, rng):
        nd = random_nd(rng, 5)
        assert np.array_equal(build_step_matrix(np.zeros(4), nd, 0.3), np.eye(4))

    def test_zero_products(self, rng):
        nd = NDInertia(rng.uniform(0.5, 3.0, 5), np.zeros(4))
        assert np.array_equal(build_step_matrix(rng.uniform(-1, 1, 4), nd, 0.3), np.eye(4))

    def test_printed_corner_entries(self, rng):
        n = 6
        nd = random_nd(rng, n)
        w = rng.uniform(-1, 1, n - 1)
        eps = 0.37
        A = build_step_matrix(w, nd, eps)
        I = nd.diag
        p = nd.off
        m = n - 1
        assert A[0, 0] == pytest.approx(1 - eps * (p[1:] @ w[1:]) / (2 * (I[0] + I[-1])), rel=1e-14)
        assert A[0, m - 1] == pytest.approx(eps * (2 * p[0] * w[m - 1] - p[m - 1] * w[0]) / (2 * (I[0] + I[-1])), rel=1e-14)
        assert A[1, 0] == pytest.approx(eps * (2 * p[1] * w[0] - p[0] * w[1]) / (2 * (I[1] + I[-1])), rel=1e-14)
        assert A[1, m - 1] == pytest.approx(eps * (2 * p[1] * w[m - 1] - p[m - 1] * w[1]) / (2 * (I[1] + I[-1])), rel=1e-14)
        assert A[m - 1, 0] == pytest.approx(eps * (2 * p[m - 1] * w[0] - p[0] * w[m - 1]) / (2 * (I[m - 1] + I[-1])), rel=1e-14)
        assert A[m - 1, m - 1] == pytest.approx(1 - eps * (p[: m - 1] @ w[: m - 1]) / (2 * (I[m - 1] + I[-1])), rel=1e-14)

    def test_residual_of_solution(self, rng):
        nd = random_nd(rng, 4)
        w = rng.uniform(-1, 1, 3)
        A = build_step_matrix(w, nd, 0.2)
        v = np.linalg.solve(A, w)
        assert dsn_residual(w, v, nd, 0.2) < 1e-12


class TestStep:
    def test_zero(self, rng):
        assert np.array_equal(hk_step_nd(np.zeros(3), random_nd(rng, 4), 0.5), np.zeros(3))

    @pytest.mark.parametrize("n", [3, 4, 6, 10])
    def test_particular_solution(self, rng, n):
        for _ in range(20):
            nd = random_nd(rng, n)
            w = steady_state(rng.uniform(-3, 3), nd)
            assert np.allclose(hk_step_nd(w, nd, rng.uniform(0.01, 1.0)), w, rtol=1e-13, atol=1e-13 * np.abs(w).max())

    def test_matches_extended_precision(self, rng):
        for _ in range(30):
            nd = random_nd(rng, 4)
            w = rng.uniform(-1, 1, 3)
            eps = rng.uniform(0.05, 0.5)
            assert np.allclose(hk_step_nd(w, nd, eps), extended_precision_step_nd(w, nd, eps), rtol=1e-12, atol=1e-14)

    def test_residual_certificate(self, rng):
        for n in (3, 5, 8):
            for _ in range(30):
                nd = random_nd(rng, n)
                w = rng.uniform(-2, 2, n - 1)
                eps = rng.uniform(0.01, 0.5)
                assert dsn_residual(w, hk_step_nd(w, nd, eps), nd, eps) <= 1e-11

    def test_reversibility(self, rng):
        for _ in range(50):
            nd = random_nd(rng, 5)
            w = rng.uniform(-2, 2, 4)
            eps = rng.uniform(0.01, 0.5)
            back = hk_step_nd(hk_step_nd(w, nd, eps), nd, -eps)
            assert np.max(np.abs(back - w)) <= 1e-10 * max(1.0, np.abs(w).max())

    def test_singular_matrix(self):
        # n = 3 with zero first row at eps = 1: A[0,0] = 1 - I_23 w_2 / (2 d_1) = 0
        nd = NDInertia((1.0, 1.0, 1.0), (0.0, 1.0))
        w = np.array([0.0, 4.0])
        A = build_step_matrix(w, nd, 1.0)
        assert np.allclose(A[0], 0.0)
        with pytest.raises(SingularStepMatrix):
            hk_step_nd(w, nd, 1.0)

    def test_shape_checked(self, rng):
        with pytest.raises(ValueError):
            hk_step_nd(np.zeros(5), random_nd(rng, 4), 0.1)


class TestContinuous:
    def test_zero(self, rng):
        assert np.array_equal(continuous_rhs_nd(np.zeros(4), random_nd(rng, 5)), np.zeros(4))

    def test_steady_family(self, rng):
        nd = random_nd(rng, 6)
        assert np.allclose(continuous_rhs_nd(steady_state(1.7, nd), nd), 0.0, atol=1e-15)

    def test_forward_difference_first_order(self, rng):
        nd = random_nd(rng, 5)
        w = rng.uniform(-1, 1, 4)
        f = continuous_rhs_nd(w, nd)
        errs = [np.linalg.norm((hk_step_nd(w, nd, eps) - w) / eps - f) for eps in (1e-2, 5e-3, 2.5e-3)]
        ratios = [a / b for a, b in zip(errs, errs[1:])]
        assert all(1.8 < r < 2.2 for r in ratios)

    def test_symmetric_difference(self, rng):
        for _ in range(30):
            nd = random_nd(rng, 5)
            w = rng.uniform(-1, 1, 4)
            eps = 1e-4
            dd = (hk_step_nd(w, nd, eps) - hk_step_nd(w, nd, -eps)) / (2 * eps)
            f = continuous_rhs_nd(w, nd)
            assert np.linalg.norm(dd - f) <= 1e-6 * np.linalg.norm(f)

    def test_energy_conserved_by_flow(self, rng):
        nd = random_nd(rng, 5)
        w = rng.uniform(-1, 1, 4)
        f = continuous_rhs_nd(w, nd)
        assert float(nd.denominators @ (w * f)) == pytest.approx(0.0, abs=1e-14)
        assert energy_nd(w, nd) > 0


class TestReductionToThreeDimensions:
    def test_vector_fields_agree(self, rng):
        for _ in range(50):
            nd = random_nd(rng, 3)
            inertia, to3, from3 = so3_identification(nd)
            w = rng.uniform(-2, 2, 2)
            lhs = continuous_rhs_3d(to3(w), inertia)
            rhs = to3(continuous_rhs_nd(w, nd))
            assert np.allclose(tuple(lhs), tuple(rhs), rtol=1e-12, atol=1e-14)

    def test_discrete_maps_agree(self, rng):
        for _ in range(50):
            nd = random_nd(rng, 3)
            inertia, to3, from3 = so3_identification(nd)
            w = rng.uniform(-2, 2, 2)
            eps = rng.uniform(0.01, 0.5)
            assert np.allclose(from3(hk_step(to3(w), inertia, eps)), hk_step_nd(w, nd, eps), rtol=1e-12, atol=1e-14)

    def test_identification_fixture(self):
        nd = NDInertia((1.0, 2.0, 3.0), (0.5, -0.25))
        inertia, to3, from3 = so3_identification(nd)
        assert inertia == Inertia3(5.0, 4.0, -0.5, 0.25)
        assert to3(np.array([0.1, 0.2])) == BodyOmega(-0.2, 0.1)
        assert np.array_equal(from3(BodyOmega(-0.2, 0.1)), [0.1, 0.2])


def test_inertia_validation():
    with pytest.raises(ValueError):
        NDInertia((1.0, 1.0), (0.1,))
    with pytest.raises(ValueError):
        NDInertia((1.0, 1.0, 1.0), (0.1,))
    with pytest.raises(ValueError):
        NDInertia((-2.0, 1.0, 1.0), (0.1, 0.2))
