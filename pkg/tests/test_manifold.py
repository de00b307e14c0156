import numpy as np
import pytest

from expgeo import (
    chart,
    chart_inverse,
    cumulant,
    cumulant_derivatives,
    expect,
    kl_divergence,
    nabla_K,
    nabla_K_derivative,
    transition_map,
)
from conftest import random_coordinate, random_density, random_space


def fd1(p, u, v, h=1e-4):
    return (cumulant(p, u + h * v) - cumulant(p, u - h * v)) / (2 * h)


def fd2(p, u, v1, v2, h=1e-4):
    # polarization of the central second difference
    pp = cumulant(p, u + h * (v1 + v2))
    pm = cumulant(p, u + h * (v1 - v2))
    mp = cumulant(p, u - h * (v1 - v2))
    mm = cumulant(p, u - h * (v1 + v2))
    return (pp - pm - mp + mm) / (4 * h * h)


def fd3(p, u, v1, v2, v3, h=1e-4):
    # difference the exact second derivative: third differences of K itself
    # drown in roundoff at h = 1e-4
    plus = cumulant_derivatives(p, u + h * v3, [v1, v2])
    minus = cumulant_derivatives(p, u - h * v3, [v1, v2])
    return (plus - minus) / (2 * h)


class TestCumulant:
    def test_zero(self, two_point):
        _, p, _ = two_point
        assert cumulant(p, np.zeros(2)) == 0.0

    @pytest.mark.parametrize("t", [1.0, 2.0])
    def test_two_point_closed_form(self, two_point, t):
        _, p, f = two_point
        assert cumulant(p, t * f.values) == pytest.approx(np.log(np.cosh(t)), abs=1e-14)

    def test_positive_away_from_zero(self, rng):
        for _ in range(30):
            space = random_space(rng)
            p = random_density(rng, space)
            u = random_coordinate(rng, p)
            if np.max(np.abs(u.values)) > 1e-8:
                assert cumulant(p, u) > 0.0

    def test_convex_along_segments(self, rng):
        for _ in range(30):
            space = random_space(rng)
            p = random_density(rng, space)
            u1 = random_coordinate(rng, p, scale=2.0).values
            u2 = random_coordinate(rng, p, scale=2.0).values
            lam = rng.uniform()
            mixed = cumulant(p, lam * u1 + (1 - lam) * u2)
            assert mixed <= lam * cumulant(p, u1) + (1 - lam) * cumulant(p, u2) + 1e-12

    def test_large_coordinates_do_not_overflow(self, two_point):
        _, p, f = two_point
        assert np.isfinite(cumulant(p, 500.0 * f.values))

    def test_rejects_uncentered(self, two_point):
        _, p, _ = two_point
        with pytest.raises(ValueError):
            cumulant(p, np.array([1.0, 0.0]))


class TestCharts:
    def test_inverse_at_zero(self, two_point):
        _, p, _ = two_point
        assert np.allclose(chart_inverse(p, np.zeros(2)).values, p.values)

    def test_two_point_inverse(self, two_point):
        _, p, f = two_point
        q = chart_inverse(p, f.values)
        e = np.e
        expected = np.array([2 * e / (e + 1 / e), 2 / e / (e + 1 / e)])
        assert np.allclose(q.values, expected, atol=1e-12)

    def test_chart_of_base_is_zero(self, two_point):
        _, p, _ = two_point
        assert np.allclose(chart(p, p).values, 0.0, atol=1e-14)

    def test_round_trips(self, rng):
        for _ in range(30):
            space = random_space(rng)
            p = random_density(rng, space)
            u = random_coordinate(rng, p, scale=1.5)
            back = chart(p, chart_inverse(p, u))
            assert np.max(np.abs(back.values - u.values)) < 1e-10
            q = random_density(rng, space)
            again = chart_inverse(p, chart(p, q))
            assert np.max(np.abs(again.values - q.values)) < 1e-10

    def test_cumulant_of_chart_is_reverse_kl(self, rng):
        # K_p(s_p(q)) = E_p[ln(p/q)] = D(p || q)
        for _ in range(20):
            space = random_space(rng)
            p = random_density(rng, space)
            q = random_density(rng, space)
            assert cumulant(p, chart(p, q)) == pytest.approx(kl_divergence(p, q), abs=1e-12)


class TestCumulantDerivatives:
    def test_first_at_zero_vanishes(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        v = random_coordinate(rng, p)
        assert cumulant_derivatives(p, np.zeros(space.size), [v]) == pytest.approx(0.0, abs=1e-14)

    def test_two_point_closed_forms(self, two_point):
        _, p, f = two_point
        u = f.values
        assert cumulant_derivatives(p, u, [u]) == pytest.approx(np.tanh(1.0), abs=1e-14)
        assert cumulant_derivatives(p, u, [u, u]) == pytest.approx(
            1.0 - np.tanh(1.0) ** 2, abs=1e-14
        )

    def test_matches_finite_differences(self, rng):
        for _ in range(25):
            space = random_space(rng)
            p = random_density(rng, space)
            u = random_coordinate(rng, p).values
            v1 = random_coordinate(rng, p).values
            v2 = random_coordinate(rng, p).values
            v3 = random_coordinate(rng, p).values
            assert cumulant_derivatives(p, u, [v1]) == pytest.approx(fd1(p, u, v1), abs=1e-6)
            assert cumulant_derivatives(p, u, [v1, v2]) == pytest.approx(
                fd2(p, u, v1, v2), abs=1e-6
            )
            assert cumulant_derivatives(p, u, [v1, v2, v3]) == pytest.approx(
                fd3(p, u, v1, v2, v3), abs=1e-6
            )

    def test_symmetric_in_directions(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        u = random_coordinate(rng, p).values
        v1 = random_coordinate(rng, p).values
        v2 = random_coordinate(rng, p).values
        assert cumulant_derivatives(p, u, [v1, v2]) == pytest.approx(
            cumulant_derivatives(p, u, [v2, v1]), abs=1e-14
        )

    def test_arity_checked(self, two_point):
        _, p, f = two_point
        with pytest.raises(ValueError):
            cumulant_derivatives(p, f.values, [])


class TestTransitionMap:
    def test_identity_at_same_base(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        u = random_coordinate(rng, p)
        assert np.allclose(transition_map(p, p, u).values, u.values, atol=1e-12)

    def test_chart_compatibility(self, rng):
        # e_q(transition(p, q, u)) = e_p(u)
        for _ in range(20):
            space = random_space(rng)
            p = random_density(rng, space)
            q = random_density(rng, space)
            u = random_coordinate(rng, p)
            lhs = chart_inverse(q, transition_map(p, q, u).values)
            rhs = chart_inverse(p, u)
            assert np.max(np.abs(lhs.values - rhs.values)) < 1e-12

    def test_cocycle(self, rng):
        for _ in range(20):
            space = random_space(rng)
            p, q, r = (random_density(rng, space) for _ in range(3))
            u = random_coordinate(rng, p)
            via_q = transition_map(q, r, transition_map(p, q, u).values)
            direct = transition_map(p, r, u)
            assert np.max(np.abs(via_q.values - direct.values)) < 1e-12

    def test_affine_with_recentring_linear_part(self, rng):
        # transition(u) - (u - E_q[u]) is a constant vector independent of u
        space = random_space(rng)
        p = random_density(rng, space)
        q = random_density(rng, space)
        offsets = []
        for _ in range(5):
            u = random_coordinate(rng, p).values
            linear = u - expect(q, u)
            offsets.append(transition_map(p, q, u).values - linear)
        for off in offsets[1:]:
            assert np.allclose(off, offsets[0], atol=1e-12)


class TestNablaK:
    def test_zero_at_zero(self, two_point):
        _, p, _ = two_point
        assert np.allclose(nabla_K(p, np.zeros(2)).values, 0.0)

    def test_two_point_value(self, two_point):
        _, p, f = two_point
        grad = nabla_K(p, f.values)
        assert np.allclose(grad.values, [np.tanh(1.0), -np.tanh(1.0)], atol=1e-12)

    def test_represents_first_derivative(self, rng):
        # E_p[(q/p - 1) v] = dK_p(u) v for all directions
        for _ in range(20):
            space = random_space(rng)
            p = random_density(rng, space)
            u = random_coordinate(rng, p).values
            v = random_coordinate(rng, p).values
            grad = nabla_K(p, u)
            assert expect(p, grad.values * v) == pytest.approx(
                cumulant_derivatives(p, u, [v]), abs=1e-12
            )

    def test_monotone(self, rng):
        for _ in range(30):
            space = random_space(rng)
            p = random_density(rng, space)
            u1 = random_coordinate(rng, p, scale=1.5).values
            u2 = random_coordinate(rng, p, scale=1.5).values
            gap = nabla_K(p, u1).values - nabla_K(p, u2).values
            assert expect(p, gap * (u1 - u2)) >= -1e-12

    def test_weak_derivative_formula(self, rng):
        for _ in range(15):
            space = random_space(rng)
            p = random_density(rng, space)
            u = random_coordinate(rng, p).values
            w = random_coordinate(rng, p).values
            h = 1e-4
            fd = (nabla_K(p, u + h * w).values - nabla_K(p, u - h * w).values) / (2 * h)
            assert np.max(np.abs(fd - nabla_K_derivative(p, u, w))) < 1e-6

    def test_kl_identity(self, rng):
        # D(q || p) = dK_p(u) u - K_p(u)
        for _ in range(20):
            space = random_space(rng)
            p = random_density(rng, space)
            u = random_coordinate(rng, p).values
            q = chart_inverse(p, u)
            lhs = cumulant_derivatives(p, u, [u]) - cumulant(p, u)
            assert lhs == pytest.approx(kl_divergence(q, p), abs=1e-12)

    def test_base_mismatch_rejected(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        other = random_density(rng, space)
        u = random_coordinate(rng, p)
        with pytest.raises(ValueError):
            cumulant(other, u)
