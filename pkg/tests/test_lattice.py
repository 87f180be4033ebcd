import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rvlbm.lattice import (
    TWIST,
    Equilibrium,
    RelativeMode,
    SchemeSpec,
    Variant,
    collision_matrices,
    collision_matrix,
    equilibrium_distributions,
    equilibrium_moments,
    henon_to_rate,
    moment_matrix,
    twist_map,
)

speeds = st.floats(-0.95, 0.95)
rates = st.floats(0.0, 2.0)
lams = st.sampled_from([1.0, 2.0, 0.5])
variants = st.sampled_from(list(Variant))
flavours = st.sampled_from(list(Equilibrium))
modes = st.sampled_from(list(RelativeMode))


@st.composite
def specs(draw):
    lam = draw(lams)
    V = (draw(speeds) * lam, draw(speeds) * lam)
    return SchemeSpec.relative(draw(modes), V, variant=draw(variants), lam=lam,
                               s_q=draw(rates), s_xy=draw(rates), equilibrium=draw(flavours))


class TestMomentMatrix:
    def test_twisted_rows(self):
        m = moment_matrix(Variant.TWISTED, 1.0).m
        expected = [[1, 1, 1, 1], [1, -1, -1, 1], [1, 1, -1, -1], [1, -1, 1, -1]]
        np.testing.assert_array_equal(m, expected)

    def test_twisted_inverse_is_scaled_transpose(self):
        mm = moment_matrix(Variant.TWISTED, 1.0)
        np.testing.assert_allclose(mm.m_inv, mm.m.T / 4, atol=1e-15)

    def test_standard_last_row(self):
        m = moment_matrix(Variant.STANDARD, 1.0).m
        np.testing.assert_array_equal(m[3], [1, -1, 1, -1])

    def test_rows_are_shifted_polynomials(self):
        mm = moment_matrix(Variant.TWISTED, 2.0, (0.3, -0.5))
        # velocities (2,2), (-2,2), (-2,-2), (2,-2) seen from u = (0.3, -0.5)
        x = np.array([1.7, -2.3, -2.3, 1.7])
        y = np.array([2.5, 2.5, -1.5, -1.5])
        np.testing.assert_allclose(mm.m, [np.ones(4), x, y, x * y], atol=1e-15)
        np.testing.assert_allclose(mm.m @ mm.m_inv, np.eye(4), atol=1e-12)

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            moment_matrix(Variant.TWISTED, 0.0)


class TestEquilibrium:
    def test_nonintrinsic_relative_v(self):
        s = SchemeSpec.relative("V", (0.3, 0.4))
        np.testing.assert_allclose(equilibrium_moments(s).as_array(), [1, 0, 0, 0], atol=1e-15)

    def test_intrinsic_relative_v(self):
        s = SchemeSpec.relative("V", (0.3, 0.4), equilibrium="intrinsic")
        np.testing.assert_allclose(equilibrium_moments(s).as_array(), [1, 0, 0, -0.12],
                                   atol=1e-15)

    def test_intrinsic_zero(self):
        s = SchemeSpec.relative("zero", (0.3, 0.4), equilibrium="intrinsic")
        np.testing.assert_allclose(equilibrium_moments(s).as_array(), [1, 0.3, 0.4, 0],
                                   atol=1e-15)

    def test_standard_nonintrinsic(self):
        s = SchemeSpec.relative("zero", (0.3, 0.4), variant="standard")
        np.testing.assert_allclose(equilibrium_moments(s).m2, 0.09 - 0.16, atol=1e-15)

    def test_standard_intrinsic_relative_v(self):
        s = SchemeSpec.relative("V", (0.3, 0.4), variant="standard", equilibrium="intrinsic")
        np.testing.assert_allclose(equilibrium_moments(s).m2, 0.16 - 0.09, atol=1e-15)

    @pytest.mark.parametrize("u", [(0, 0), (0.2, 0.1), (0.37, -0.18), (-1.3, 0.9)])
    def test_rest_state(self, u):
        s = SchemeSpec(u_rel=u)
        np.testing.assert_allclose(equilibrium_distributions(s), 0.25, atol=1e-15)

    @pytest.mark.parametrize("flavour", list(Equilibrium))
    def test_same_for_zero_and_v(self, flavour):
        a = SchemeSpec.relative("zero", (0.2, 0.1), equilibrium=flavour)
        b = SchemeSpec.relative("V", (0.2, 0.1), equilibrium=flavour)
        np.testing.assert_allclose(equilibrium_distributions(a), equilibrium_distributions(b),
                                   atol=1e-12)

    def test_scales_with_density(self):
        s = SchemeSpec.relative("V", (0.2, -0.5), equilibrium="intrinsic")
        np.testing.assert_allclose(equilibrium_distributions(s, 3.0),
                                   3.0 * equilibrium_distributions(s), atol=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(specs(), st.floats(-2, 2), st.floats(-2, 2))
    def test_independent_of_relative_velocity(self, spec, ux, uy):
        base = equilibrium_distributions(spec)
        for u in [(0.0, 0.0), spec.V, (0.37 * spec.lam, -0.18 * spec.lam), (ux, uy)]:
            other = SchemeSpec(spec.variant, spec.lam, spec.s_q, spec.s_xy, spec.V, u,
                               spec.equilibrium)
            np.testing.assert_allclose(equilibrium_distributions(other), base, atol=1e-12)


class TestCollision:
    def test_no_relaxation_is_identity(self):
        s = SchemeSpec.relative("V", (0.4, -0.3), s_q=0.0, s_xy=0.0)
        np.testing.assert_allclose(collision_matrix(s), np.eye(4), atol=1e-15)

    def test_full_relaxation_at_rest(self):
        C = collision_matrix(SchemeSpec(s_q=1.0, s_xy=1.0))
        np.testing.assert_allclose(C, 0.25, atol=1e-15)

    @pytest.mark.parametrize("V,nonneg", [((1 / 3, 0.0), True), ((0.3, 0.3), True),
                                          ((0.34, 0.0), False), ((0.0, -0.4), False)])
    def test_nonnegative_entries_inside_reduced_square(self, V, nonneg):
        C = collision_matrix(SchemeSpec.relative("V", V, s_q=1.0, s_xy=0.5))
        assert bool(np.all(C >= -1e-12)) == nonneg

    def test_known_entries(self):
        # hand-computed: BGK s = 1 gives C = f_eq 1ᵀ
        s = SchemeSpec.relative("zero", (0.2, 0.4))
        feq = np.array([1 + 0.2 + 0.4 + 0.08, 1 - 0.2 + 0.4 - 0.08,
                        1 - 0.2 - 0.4 + 0.08, 1 + 0.2 - 0.4 - 0.08]) / 4
        np.testing.assert_allclose(collision_matrix(s), np.outer(feq, np.ones(4)), atol=1e-15)

    @settings(max_examples=300, deadline=None)
    @given(specs())
    def test_mass_row(self, spec):
        np.testing.assert_allclose(collision_matrix(spec).sum(axis=0), 1.0, atol=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(specs())
    def test_spectrum(self, spec):
        ev = np.sort_complex(np.linalg.eigvals(collision_matrix(spec)))
        ref = np.sort_complex(np.array([1, 1 - spec.s_q, 1 - spec.s_q, 1 - spec.s_xy], complex))
        np.testing.assert_allclose(ev, ref, atol=1e-10 * max(1.0, spec.lam ** 2))

    @settings(max_examples=300, deadline=None)
    @given(specs())
    def test_conjugated_generator_is_lower_triangular(self, spec):
        # in the u = 0 basis the generator only couples higher moments to lower ones
        mm = moment_matrix(spec.variant, spec.lam)
        K = mm.m @ (collision_matrix(spec) - np.eye(4)) @ mm.m_inv
        scale = max(1.0, spec.lam ** 2)
        np.testing.assert_allclose(np.triu(K, 1), 0, atol=1e-12 * scale)
        np.testing.assert_allclose(np.diag(K), -spec.relaxation, atol=1e-12 * scale)

    @settings(max_examples=300, deadline=None)
    @given(specs())
    def test_batched_matches_single(self, spec):
        C = collision_matrices(spec.variant, spec.lam, spec.s_q, spec.s_xy, [spec.V],
                               [spec.u_rel], spec.equilibrium)[0]
        np.testing.assert_allclose(C, collision_matrix(spec), atol=1e-12)

    def test_bgk_independent_of_relative_velocity(self):
        a = collision_matrix(SchemeSpec.relative("zero", (0.6, -0.3), s_q=1.3, s_xy=1.3))
        b = collision_matrix(SchemeSpec.relative("V", (0.6, -0.3), s_q=1.3, s_xy=1.3))
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestTwist:
    @pytest.mark.parametrize("v,image", [((1, 0), (1, 1)), ((0, 0), (0, 0)), ((1, 1), (0, 2))])
    def test_examples(self, v, image):
        np.testing.assert_array_equal(twist_map(v), image)

    def test_maps_velocity_sets(self):
        from rvlbm.lattice import velocities

        img = {tuple(TWIST @ v) for v in velocities("standard")}
        assert img == {tuple(v) for v in velocities("twisted")}

    @settings(max_examples=300, deadline=None)
    @given(speeds, speeds, rates, rates, modes, flavours, lams)
    def test_collision_correspondence(self, vx, vy, sq, sxy, mode, flavour, lam):
        V = np.array([vx, vy]) * lam
        std = SchemeSpec.relative(mode, V, variant="standard", lam=lam, s_q=sq, s_xy=sxy,
                                  equilibrium=flavour)
        tw = SchemeSpec.relative(mode, TWIST @ V, variant="twisted", lam=lam, s_q=sq,
                                 s_xy=sxy, equilibrium=flavour)
        np.testing.assert_allclose(collision_matrix(std), collision_matrix(tw), atol=1e-12)


class TestSpec:
    def test_henon(self):
        assert henon_to_rate(0.05) == pytest.approx(20 / 11)
        s = SchemeSpec(s_q=henon_to_rate(0.1))
        assert s.sigma_q == pytest.approx(0.1)

    def test_relative_modes(self):
        assert SchemeSpec.relative("zero", (0.1, 0.2)).u_rel == (0.0, 0.0)
        assert SchemeSpec.relative("V", (0.1, 0.2)).u_rel == (0.1, 0.2)
        s = SchemeSpec().with_velocity((0.5, 0.0), RelativeMode.EQUALS_V)
        assert s.u_rel == (0.5, 0.0)

    def test_time_step(self):
        assert SchemeSpec(lam=2.0).dt == 0.5
