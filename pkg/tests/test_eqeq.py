import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rvlbm.eqeq import (
    cubic_form,
    diffusion_matrix,
    dispersion_matrix,
    equivalent_equation,
    fitted_equation,
    numeric_dispersion_fit,
    quadratic_form,
    wellposed,
)
from rvlbm.lattice import SchemeSpec, henon_to_rate

S_XY = henon_to_rate(1 / math.sqrt(3))
SIGMA_ZERO_DISPERSION = 1 / math.sqrt(12)
DIRECTIONS = [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8), (math.sqrt(0.5), -math.sqrt(0.5))]


def spec(mode, V, sq, sxy=S_XY, **kw):
    return SchemeSpec.relative(mode, V, s_q=henon_to_rate(sq), s_xy=henon_to_rate(sxy), **kw)


class TestDiffusion:
    def test_nonintrinsic(self):
        np.testing.assert_allclose(diffusion_matrix(spec("zero", (0.5, 0.0), 0.1)),
                                   [[0.075, 0], [0, 0.1]], atol=1e-15)

    def test_intrinsic_off_diagonal(self):
        d2 = diffusion_matrix(spec("zero", (0.3, 0.4), 0.1, equilibrium="intrinsic"))
        assert d2[0, 1] == pytest.approx(-0.012) and d2[1, 0] == pytest.approx(-0.012)

    @pytest.mark.parametrize("flavour", ["non-intrinsic", "intrinsic"])
    def test_rest(self, flavour):
        np.testing.assert_allclose(diffusion_matrix(spec("zero", (0, 0), 0.1, equilibrium=flavour,
                                                         lam=2.0)), 0.4 * np.eye(2), atol=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 1), st.floats(0.01, 1),
           st.sampled_from(["non-intrinsic", "intrinsic"]),
           st.sampled_from(["twisted", "standard"]))
    def test_independent_of_relative_velocity(self, vx, vy, sq, sxy, flavour, variant):
        a = diffusion_matrix(spec("zero", (vx, vy), sq, sxy, equilibrium=flavour, variant=variant))
        b = diffusion_matrix(spec("V", (vx, vy), sq, sxy, equilibrium=flavour, variant=variant))
        np.testing.assert_allclose(a, b, atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 2 * math.pi),
           st.floats(0, 2 * math.pi), st.floats(0.01, 1))
    def test_intrinsic_diffusion_is_rotation_invariant(self, vx, vy, angle, phi, sq):
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        n = np.array([math.cos(phi), math.sin(phi)])
        V = np.array([vx, vy])
        a = quadratic_form(diffusion_matrix(spec("zero", V, sq, equilibrium="intrinsic")), n)
        b = quadratic_form(diffusion_matrix(spec("zero", rot @ V, sq, equilibrium="intrinsic")),
                           rot @ n)
        assert a == pytest.approx(b, abs=1e-12)
        # λ² |n|² - (V·n)², up to σ_q
        assert a == pytest.approx(sq * (1 - float(V @ n) ** 2), abs=1e-12)


class TestDispersion:
    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 1), st.floats(0.01, 1))
    def test_relative_velocity_cancels_off_diagonal(self, vx, vy, sq, sxy):
        d3 = dispersion_matrix(spec("V", (vx, vy), sq, sxy))
        assert d3[0, 1] == 0.0 and d3[1, 0] == 0.0

    def test_zero_dispersion_choice(self):
        d3 = dispersion_matrix(spec("V", (0.4, -0.7), SIGMA_ZERO_DISPERSION, 0.3))
        np.testing.assert_allclose(d3, 0.0, atol=1e-15)

    def test_mrt_entries(self):
        d3 = dispersion_matrix(spec("zero", (0.0, 0.5), 0.05, 0.5))
        assert d3[0, 1] == pytest.approx(0.0, abs=1e-15)
        assert d3[1, 0] == pytest.approx(0.0225, abs=1e-15)
        assert d3[1, 1] == pytest.approx(0.5 / 6 * 0.75 * (1 - 12 * 0.05 ** 2), abs=1e-15)

    def test_cubic_form_layout(self):
        d3 = np.array([[1.0, 2.0], [3.0, 4.0]])
        # a nx³ + b nx ny² + c nx² ny + d ny³
        assert cubic_form(d3, (0.6, 0.8)) == pytest.approx(
            0.216 + 2 * 0.6 * 0.64 + 3 * 0.36 * 0.8 + 4 * 0.512)


class TestWellposed:
    def test_examples(self):
        assert wellposed(SchemeSpec(V=(0.9, 0.9)))
        assert not wellposed(SchemeSpec(V=(0.9, 0.9), equilibrium="intrinsic"))
        assert wellposed(SchemeSpec()) and wellposed(SchemeSpec(equilibrium="intrinsic"))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1.3, 1.3), st.floats(-1.3, 1.3),
           st.sampled_from(["non-intrinsic", "intrinsic"]),
           st.sampled_from(["twisted", "standard"]))
    def test_matches_positive_definiteness(self, vx, vy, flavour, variant):
        s = spec("zero", (vx, vy), 0.1, equilibrium=flavour, variant=variant)
        ev = np.linalg.eigvalsh(diffusion_matrix(s) / s.sigma_q)
        if abs(ev.min()) > 1e-9:
            assert wellposed(s) == (ev.min() > 0)


class TestDispersionFit:
    def test_rest_state(self):
        c1, c2, _ = numeric_dispersion_fit(spec("zero", (0, 0), 0.1), (1.0, 0.0))
        assert c1 == pytest.approx(0.0, abs=1e-9)
        assert c2 == pytest.approx(0.1, rel=1e-4)

    @pytest.mark.parametrize("n", DIRECTIONS)
    def test_zero_dispersion_choice(self, n):
        _, _, c3 = numeric_dispersion_fit(spec("V", (0.5, 0.2), SIGMA_ZERO_DISPERSION, 0.3), n)
        assert abs(c3) < 1e-6

    @pytest.mark.parametrize("n", DIRECTIONS)
    def test_contract_mrt_case(self, n):
        s = spec("zero", (0.8, 0.0), 0.05)
        c1, c2, c3 = numeric_dispersion_fit(s, n)
        eq = equivalent_equation(s)
        assert c1 == pytest.approx(0.8 * n[0], abs=1e-9)
        assert c2 == pytest.approx(s.dt * quadratic_form(eq.d2, n), rel=1e-4)
        assert c3 == pytest.approx(-s.dt ** 2 * cubic_form(eq.d3, n), rel=1e-4)

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    @pytest.mark.parametrize("variant", ["twisted", "standard"])
    @pytest.mark.parametrize("flavour", ["non-intrinsic", "intrinsic"])
    @pytest.mark.parametrize("mode", ["zero", "V"])
    def test_closed_forms_match_fit(self, lam, variant, flavour, mode):
        V = (0.3 * lam, -0.2 * lam) if variant == "twisted" else (0.25 * lam, 0.15 * lam)
        s = spec(mode, V, 0.1, 0.4, equilibrium=flavour, variant=variant, lam=lam)
        closed, fit = equivalent_equation(s), fitted_equation(s)
        np.testing.assert_allclose(fit.d2, closed.d2, rtol=0,
                                   atol=1e-4 * np.abs(closed.d2).max())
        np.testing.assert_allclose(fit.d3, closed.d3, rtol=0,
                                   atol=1e-3 * np.abs(closed.d3).max())
