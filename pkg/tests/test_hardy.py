import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperlab.errors import ConditioningError, InputError
from hyperlab.hardy import (CompositionOperator, HardyFunction, compose, constant_cluster_check,
                            eval_at, fixed_point_obstruction, growth_estimate_check, orbit_decay)
from hyperlab.moebius import (MoebiusMap, apply, compose as mcompose, disk_automorphism, identity,
                              parabolic, rotation, sigma)

coef = st.complex_numbers(max_magnitude=3, allow_nan=False)
polys = st.lists(coef, min_size=1, max_size=65).map(HardyFunction)
disk = lambda rmax: st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0, rmax), st.floats(0, 2 * math.pi))


@st.composite
def self_maps(draw):
    """Random self-maps whose pole stays at modulus >= 2."""
    if draw(st.booleans()):
        return parabolic(complex(draw(st.floats(0.05, 5)), draw(st.floats(-5, 5))))
    psi = mcompose(rotation(draw(st.floats(0, 2 * math.pi))), disk_automorphism(draw(disk(0.5))))
    lam = draw(st.floats(0.1, 1.0))
    mu = draw(disk(0.99 * (1 - lam)))
    return mcompose(MoebiusMap(lam, mu, 0, 1), psi)


def closed_form_difference(a, z, n):
    s, s0 = (1 + z) / (1 - z), 1.0
    return 2 * (s - s0) / ((s + n * a + 1) * (s0 + n * a + 1))


class TestEval:
    def test_constant(self):
        assert eval_at(HardyFunction.constant(1), 0.3 + 0.4j) == 1

    def test_identity(self):
        assert eval_at(HardyFunction.identity(), 0.5) == 0.5

    def test_geometric(self):
        assert eval_at(HardyFunction(np.ones(11)), 0.5) == pytest.approx(2 - 2 ** -10, abs=1e-15)

    @pytest.mark.parametrize("z", [1, -1j, 0.6 + 0.8j, 2])
    def test_boundary_rejected(self, z):
        with pytest.raises(InputError):
            eval_at(HardyFunction.identity(), z)

    @given(polys, polys, coef, coef, disk(0.95))
    def test_linearity(self, f, g, alpha, beta, z):
        lhs = eval_at(alpha * f + beta * g, z)
        rhs = alpha * eval_at(f, z) + beta * eval_at(g, z)
        scale = 1 + abs(alpha) * np.sum(np.abs(f.coeffs)) + abs(beta) * np.sum(np.abs(g.coeffs))
        assert abs(lhs - rhs) <= 1e-12 * scale

    def test_norm_includes_constant_term(self):
        assert HardyFunction([3, 4]).norm() == 5

    def test_round_trip(self):
        f = HardyFunction([1, 2j, -0.5])
        assert np.array_equal(HardyFunction.from_dict(f.to_dict()).coeffs, f.coeffs)

    def test_rejects_empty(self):
        with pytest.raises(InputError):
            HardyFunction([])


class TestCompose:
    def test_constant(self):
        g = compose(CompositionOperator(parabolic(1)), HardyFunction.constant(2.5))
        assert g.coeffs[0] == pytest.approx(2.5, abs=1e-14)
        assert np.max(np.abs(g.coeffs[1:])) < 1e-12

    def test_identity_symbol(self):
        f = HardyFunction(np.arange(1, 20) * (0.5 + 1j))
        g = compose(CompositionOperator(identity()), f)
        assert np.max(np.abs(g.coeffs[:19] - f.coeffs)) < 1e-10

    def test_phi1_at_zero(self):
        g = compose(CompositionOperator(parabolic(1)), HardyFunction.identity())
        assert eval_at(g, 0) == pytest.approx(1 / 3, abs=1e-12)

    def test_known_series(self):
        # z/(2 - z) = sum_{k>=1} z^k / 2^k
        g = compose(CompositionOperator(MoebiusMap(1, 0, -1, 2)), HardyFunction.identity())
        k = np.arange(1, 40)
        assert np.max(np.abs(g.coeffs[k] - 0.5 ** k)) < 1e-12

    def test_non_self_map_rejected(self):
        with pytest.raises(InputError):
            CompositionOperator(sigma())

    def test_conditioning_error(self):
        # pole at 1.02: the truncated series cannot follow f o phi near the test circle
        phi = mcompose(MoebiusMap(0.5, 0, 0, 1), disk_automorphism(0.98))
        with pytest.raises(ConditioningError, match="degree_cap"):
            compose(CompositionOperator(phi, degree_cap=8), HardyFunction([0, 0, 0, 1]))

    @given(self_maps(), polys, disk(0.9))
    def test_point_evaluation(self, phi, f, z):
        g = compose(CompositionOperator(phi), f)
        scale = max(1.0, float(np.sum(np.abs(f.coeffs))))
        assert abs(eval_at(g, z) - eval_at(f, apply(phi, z))) <= 1e-8 * scale


class TestGrowthEstimate:
    def test_equal_points(self):
        r = growth_estimate_check(HardyFunction([1, 2, 3]), 0.3j, 0.3j)
        assert r.summary["lhs"] == 0 and r.summary["rhs"] == 0 and r.passed

    def test_identity_example(self):
        r = growth_estimate_check(HardyFunction.identity(), 0.5, 0)
        assert r.summary["lhs"] == 0.5
        assert r.summary["rhs"] == pytest.approx(2 * 0.5 / 0.5 ** 1.5)
        assert r.summary["rhs"] == pytest.approx(2.8284, abs=1e-4)
        assert r.passed and not r.summary["near_tight"]

    def test_domain(self):
        with pytest.raises(InputError):
            growth_estimate_check(HardyFunction.identity(), 1.0, 0)

    @given(polys, disk(0.999), disk(0.999))
    def test_never_violated(self, f, z, w):
        assert growth_estimate_check(f, z, w).summary["holds"]


class TestOrbitDecay:
    def test_constant(self):
        r = orbit_decay(HardyFunction.constant(3), 1, 0.5, 50)
        assert r.summary["fitted_M"] == 0 and r.passed

    def test_z_zero(self):
        r = orbit_decay(HardyFunction([1, 2, 3]), 1 + 1j, 0, 50)
        assert not np.any(r.series["d_n"])

    def test_identity_closed_form(self):
        r = orbit_decay(HardyFunction.identity(), 1, 0.5, 10_000)
        n = np.arange(1, 10_001)
        assert r.witness["d_1"] == pytest.approx(4 / 15, abs=1e-15)
        assert np.max(np.abs(np.asarray(r.series["d_n"]) - np.abs(closed_form_difference(1, 0.5, n)))) < 1e-9
        assert r.passed and r.summary["bounded"]

    @given(st.builds(complex, st.floats(0.05, 5), st.floats(-5, 5)), disk(0.95))
    def test_matches_closed_form(self, a, z):
        r = orbit_decay(HardyFunction.identity(), a, z, 300)
        n = np.arange(1, 301)
        assert np.max(np.abs(np.asarray(r.series["d_n"]) - np.abs(closed_form_difference(a, z, n)))) < 1e-9

    def test_threads_do_not_change_output(self):
        f = HardyFunction([0.2, -1, 0.5j, 0.25])
        one = orbit_decay(f, 0.7 + 0.2j, 0.3 - 0.6j, 20_000, threads=1)
        four = orbit_decay(f, 0.7 + 0.2j, 0.3 - 0.6j, 20_000, threads=4)
        assert one.to_dict() == four.to_dict()

    @pytest.mark.parametrize("kwargs", [dict(a=0), dict(a=-1j), dict(z=1), dict(n_max=0)])
    def test_domain(self, kwargs):
        args = dict(a=1, z=0.5, n_max=10) | kwargs
        with pytest.raises(InputError):
            orbit_decay(HardyFunction.identity(), **args)


class TestObstruction:
    def test_example(self):
        r = fixed_point_obstruction(MoebiusMap(1, 0, -1, 2), HardyFunction([1, 1]), 1000)
        assert complex(*r.witness["p"]) == 0 and complex(*r.witness["f_p"]) == 1
        assert r.summary["max_deviation"] < 1e-9 and r.passed

    def test_constant(self):
        r = fixed_point_obstruction(mcompose(rotation(1.0), disk_automorphism(0.3)), HardyFunction.constant(2j), 50)
        assert r.summary["max_deviation"] == 0

    def test_identity_symbol(self):
        f = HardyFunction([1, -2, 3])
        r = fixed_point_obstruction(identity(), f, 20, p=0.4 - 0.1j)
        assert complex(*r.witness["f_p"]) == pytest.approx(eval_at(f, 0.4 - 0.1j)) and r.summary["max_deviation"] == 0

    def test_no_interior_fixed_point(self):
        with pytest.raises(InputError):
            fixed_point_obstruction(parabolic(1), HardyFunction.identity(), 10)

    def test_wrong_p(self):
        with pytest.raises(InputError):
            fixed_point_obstruction(MoebiusMap(1, 0, -1, 2), HardyFunction.identity(), 10, p=0.5)

    @given(disk(0.9), st.floats(0, 2 * math.pi), st.floats(0.2, 0.95), polys)
    def test_randomized(self, p, theta, lam, f):
        # conjugate z -> lam e^{i theta} z by the automorphism moving p to 0
        psi = disk_automorphism(p)
        phi = mcompose(psi.inverse(), mcompose(MoebiusMap(lam * cmath.exp(1j * theta), 0, 0, 1), psi))
        r = fixed_point_obstruction(phi, f, 200)
        assert abs(complex(*r.witness["p"]) - p) < 1e-9
        assert r.summary["max_deviation"] < 1e-9 * max(1.0, float(np.sum(np.abs(f.coeffs))))


class TestCluster:
    def test_constant(self):
        r = constant_cluster_check(HardyFunction.constant(1), 1, [0, 0.5, -0.5j], 64)
        assert r.summary["spreads"] == [0.0, 0.0, 0.0]

    def test_single_point(self):
        r = constant_cluster_check(HardyFunction([1, 2]), 1, [0.3], 64)
        assert r.summary["spreads"] == [0.0, 0.0, 0.0]

    def test_identity_example(self):
        r = constant_cluster_check(HardyFunction.identity(), 1, [0, 0.5, -0.5j], 4096)
        s = r.summary["spreads"]
        assert s[2] < s[1] < s[0] < 1e-5 and r.passed
        assert r.series["n"] == [1024, 2048, 4096]

    def test_domain(self):
        with pytest.raises(InputError):
            constant_cluster_check(HardyFunction.identity(), 1, [], 8)
        with pytest.raises(InputError):
            constant_cluster_check(HardyFunction.identity(), 1, [1.0], 8)
