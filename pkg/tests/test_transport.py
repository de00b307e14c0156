import numpy as np
import pytest

from expgeo import (
    Density,
    center,
    chart_inverse,
    duality,
    e_transport,
    expect,
    hilbert_transport_derivative_check,
    isometric_transport,
    l2_norm,
    m_transport,
)
from conftest import random_coordinate, random_density, random_space


class TestExponentialTransport:
    def test_identity_at_same_base(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        u = random_coordinate(rng, p)
        assert np.allclose(e_transport(p, p, u).values, u.values, atol=1e-14)

    def test_two_point_example(self, two_point):
        space, p, f = two_point
        q = Density(space, [1.6, 0.4])
        moved = e_transport(p, q, center(p, f.values))
        assert np.allclose(moved.values, [0.4, -1.6], atol=1e-15)

    def test_transitive(self, rng):
        for _ in range(20):
            space = random_space(rng)
            p, q, r = (random_density(rng, space) for _ in range(3))
            u = random_coordinate(rng, p)
            via = e_transport(q, r, e_transport(p, q, u))
            direct = e_transport(p, r, u)
            assert np.max(np.abs(via.values - direct.values)) < 1e-12

    def test_linear(self, rng):
        space = random_space(rng)
        p, q = random_density(rng, space), random_density(rng, space)
        u = random_coordinate(rng, p).values
        v = random_coordinate(rng, p).values
        combo = e_transport(p, q, 2.0 * u - 3.0 * v).values
        parts = 2.0 * e_transport(p, q, u).values - 3.0 * e_transport(p, q, v).values
        assert np.allclose(combo, parts, atol=1e-12)


class TestMixtureTransport:
    def test_identity_at_same_base(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        v = random_coordinate(rng, p)
        assert np.allclose(m_transport(p, p, v).values, v.values, atol=1e-14)

    def test_two_point_example(self, two_point):
        space, p, f = two_point
        q = Density(space, [1.6, 0.4])
        moved = m_transport(p, q, center(p, f.values))
        assert np.allclose(moved.values, [1 / 1.6, -1 / 0.4], atol=1e-14)

    def test_result_centered_at_target(self, rng):
        for _ in range(20):
            space = random_space(rng)
            p, q = random_density(rng, space), random_density(rng, space)
            v = random_coordinate(rng, p)
            assert abs(expect(q, m_transport(p, q, v).values)) < 1e-12

    def test_transitive(self, rng):
        space = random_space(rng)
        p, q, r = (random_density(rng, space) for _ in range(3))
        v = random_coordinate(rng, p)
        via = m_transport(q, r, m_transport(p, q, v))
        assert np.allclose(via.values, m_transport(p, r, v).values, atol=1e-12)


class TestDuality:
    def test_zero(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        v = random_coordinate(rng, p)
        zero = center(p, np.zeros(space.size))
        assert duality(zero, v) == 0.0

    def test_two_point(self, two_point):
        _, p, f = two_point
        v = center(p, f.values)
        assert duality(v, v) == pytest.approx(1.0, abs=1e-15)

    def test_transport_invariance(self, rng):
        # <m-transport v, e-transport w>_q = <v, w>_p, exactly
        for _ in range(25):
            space = random_space(rng)
            p, q = random_density(rng, space), random_density(rng, space)
            v = random_coordinate(rng, p)
            w = random_coordinate(rng, p)
            before = duality(v, w)
            after = duality(m_transport(p, q, v), e_transport(p, q, w))
            assert after == pytest.approx(before, abs=1e-12)

    def test_base_mismatch_rejected(self, rng):
        space = random_space(rng)
        p, q = random_density(rng, space), random_density(rng, space)
        with pytest.raises(ValueError):
            duality(random_coordinate(rng, p), random_coordinate(rng, q))


class TestIsometricTransport:
    def test_identity_at_same_base(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        v = random_coordinate(rng, p)
        assert np.allclose(isometric_transport(p, p, v).values, v.values, atol=1e-13)

    def test_norm_preserved_and_centered(self, rng):
        for _ in range(25):
            space = random_space(rng)
            p, q = random_density(rng, space), random_density(rng, space)
            v = random_coordinate(rng, p)
            moved = isometric_transport(p, q, v)
            assert abs(expect(q, moved.values)) < 1e-12
            assert l2_norm(q, moved.values) == pytest.approx(l2_norm(p, v.values), abs=1e-12)

    def test_round_trip(self, rng):
        for _ in range(25):
            space = random_space(rng)
            p, q = random_density(rng, space), random_density(rng, space)
            v = random_coordinate(rng, p)
            back = isometric_transport(q, p, isometric_transport(p, q, v))
            assert np.max(np.abs(back.values - v.values)) < 1e-10

    def test_adjoint_is_reverse_transport(self, rng):
        for _ in range(15):
            space = random_space(rng)
            p, q = random_density(rng, space), random_density(rng, space)
            u = random_coordinate(rng, p)
            w = random_coordinate(rng, q)
            lhs = expect(q, isometric_transport(p, q, u).values * w.values)
            rhs = expect(p, u.values * isometric_transport(q, p, w).values)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_not_transitive(self):
        # one concrete triple where composing differs from the direct map
        rng = np.random.default_rng(3)
        space = random_space(rng, 5)
        p, q, r = (random_density(rng, space) for _ in range(3))
        v = random_coordinate(rng, p)
        via = isometric_transport(q, r, isometric_transport(p, q, v))
        direct = isometric_transport(p, r, v)
        assert np.max(np.abs(via.values - direct.values)) > 1e-3


class TestChainInclusions:
    def test_l1_below_l2_and_pairing_bound(self, rng):
        for _ in range(20):
            space = random_space(rng)
            p = random_density(rng, space)
            v = random_coordinate(rng, p).values
            w = random_coordinate(rng, p).values
            l1 = expect(p, np.abs(v))
            assert l1 <= l2_norm(p, v) + 1e-12
            assert abs(expect(p, v * w)) <= l2_norm(p, v) * l2_norm(p, w) + 1e-12


class TestHilbertDerivative:
    @staticmethod
    def _setup(seed=11, n=6):
        rng = np.random.default_rng(seed)
        space = random_space(rng, n)
        p = random_density(rng, space)
        direction = random_coordinate(rng, p).values
        f = rng.normal(size=n)

        def curve(t):
            return chart_inverse(p, t * direction)

        def field(d):
            return center(d, f)

        return curve, field

    def test_constant_curve_gives_zero(self, rng):
        space = random_space(rng)
        p = random_density(rng, space)
        f = rng.normal(size=space.size)
        assert hilbert_transport_derivative_check(lambda t: p, lambda d: center(d, f), 0.3) == 0.0

    def test_small_residual_on_exponential_curve(self):
        curve, field = self._setup()
        assert hilbert_transport_derivative_check(curve, field, 0.4, step=1e-4) < 1e-6

    def test_second_order_convergence(self):
        curve, field = self._setup(seed=5)
        coarse = hilbert_transport_derivative_check(curve, field, 0.4, step=2e-2)
        fine = hilbert_transport_derivative_check(curve, field, 0.4, step=1e-2)
        assert coarse / fine == pytest.approx(4.0, rel=0.15)

    def test_rejects_bad_step(self):
        curve, field = self._setup()
        with pytest.raises(ValueError):
            hilbert_transport_derivative_check(curve, field, 0.0, step=-1.0)
