import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rvlbm import _backend, simulator
from rvlbm.lattice import TWIST, SchemeSpec, collision_matrix
from rvlbm.vonneumann import (
    amplification_matrix,
    k_half_grid,
    max_spectral_radii,
    max_spectral_radius,
    stability_region_scan,
    velocity_axis,
)

BACKENDS = ["python"] + (["compiled"] if _backend.name == "compiled" else [])
NONBGK_PAIRS = [(1, 1.5), (1, 1.9), (1, 2), (1.9, 1), (2, 1)]


def transfer_spectral_radius(spec, n):
    """Spectral radius of one simulator step as a dense operator on an n×n grid."""
    size = 4 * n * n
    cols = []
    for i in range(size):
        f = np.zeros(size)
        f[i] = 1.0
        cols.append(simulator.step(simulator.FieldState(f.reshape(4, n, n)), spec).f.ravel())
    return float(np.abs(np.linalg.eigvals(np.array(cols).T)).max())


class TestAmplificationMatrix:
    def test_zero_wave_number_is_collision(self):
        spec = SchemeSpec.relative("V", (0.3, -0.6), s_q=1.4, s_xy=0.3)
        np.testing.assert_allclose(amplification_matrix(spec, (0, 0)).l, collision_matrix(spec),
                                   atol=1e-15)

    @pytest.mark.parametrize("sq,sxy", [(1.0, 1.0), (1.7, 0.2), (0.5, 1.95)])
    def test_zero_wave_number_radius(self, sq, sxy):
        spec = SchemeSpec.relative("zero", (0.2, 0.5), s_q=sq, s_xy=sxy)
        r = amplification_matrix(spec, (0, 0)).spectral_radius()
        assert r == pytest.approx(max(1, abs(1 - sq), abs(1 - sxy)), abs=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(-1.5, 1.5))
    def test_no_relaxation_is_unitary(self, kx, ky, v):
        spec = SchemeSpec.relative("V", (v, -v / 2), s_q=0.0, s_xy=0.0)
        L = amplification_matrix(spec, (kx, ky)).l
        np.testing.assert_allclose(L @ L.conj().T, np.eye(4), atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(-1.5, 1.5),
           st.floats(-1.5, 1.5))
    def test_bgk_spectrum_independent_of_relative_velocity(self, kx, ky, vx, vy):
        a = amplification_matrix(SchemeSpec.relative("zero", (vx, vy)), (kx, ky)).l
        b = amplification_matrix(SchemeSpec.relative("V", (vx, vy)), (kx, ky)).l
        ea = np.sort_complex(np.linalg.eigvals(a))
        eb = np.sort_complex(np.linalg.eigvals(b))
        np.testing.assert_allclose(ea, eb, atol=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0.05, 1.95),
           st.floats(0.05, 1.95))
    def test_opposite_wave_number_conjugate(self, kx, ky, sq, sxy):
        spec = SchemeSpec.relative("zero", (0.4, 0.7), s_q=sq, s_xy=sxy)
        a = np.linalg.eigvals(amplification_matrix(spec, (kx, ky)).l)
        b = np.linalg.eigvals(amplification_matrix(spec, (-kx, -ky)).l)
        np.testing.assert_allclose(np.sort(np.abs(a)), np.sort(np.abs(b)), atol=1e-10)


class TestSpectralRadius:
    @pytest.mark.parametrize("sq,sxy", [(0.1, 0.1), (1.0, 2.0), (2.0, 2.0), (1.3, 0.4)])
    def test_rest_state_neutral(self, sq, sxy):
        spec = SchemeSpec(s_q=sq, s_xy=sxy)
        assert max_spectral_radius(spec) == pytest.approx(1.0, abs=1e-9)

    def test_relative_scheme_stable_in_corner(self):
        spec = SchemeSpec.relative("V", (0.99, 0.99), s_q=2.0, s_xy=1.0)
        assert max_spectral_radius(spec) <= 1 + 1e-9

    def test_mrt_unstable_off_origin(self):
        spec = SchemeSpec.relative("zero", (0.2, 0.0), s_q=2.0, s_xy=1.0)
        assert max_spectral_radius(spec) > 1 + 1e-6

    def test_small_k_grid_rejected(self):
        with pytest.raises(ValueError):
            max_spectral_radius(SchemeSpec(), 8)

    @pytest.mark.parametrize("variant", ["twisted", "standard"])
    @pytest.mark.parametrize("mode,V,s", [("zero", (0.2, 0.0), (2.0, 1.0)),
                                          ("zero", (0.45, 0.3), (1.5, 0.6)),
                                          ("V", (0.7, -0.2), (1.8, 0.3))])
    def test_matches_dense_step_operator(self, variant, mode, V, s):
        # an independent route: eigenvalues of the simulator's one-step map
        spec = SchemeSpec.relative(mode, V, variant=variant, s_q=s[0], s_xy=s[1])
        assert max_spectral_radius(spec, 16) == pytest.approx(
            transfer_spectral_radius(spec, 16), abs=1e-10)

    def test_half_grid_matches_full_grid(self):
        spec = SchemeSpec.relative("zero", (0.35, 0.8), s_q=1.7, s_xy=0.4)
        n = 32
        full = max(amplification_matrix(spec, (2 * np.pi * i / n, 2 * np.pi * j / n))
                   .spectral_radius() for i in range(n) for j in range(n))
        assert max_spectral_radius(spec, n) == pytest.approx(full, abs=1e-12)
        assert len(k_half_grid(n)) == n * (n // 2 + 1)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_backends_agree(self, backend):
        V = np.random.default_rng(5).uniform(-1.2, 1.2, (40, 2))
        template = SchemeSpec(s_q=1.6, s_xy=0.7)
        ref = max_spectral_radii(template, "zero", V, 32, backend=_backend.get("python"))
        got = max_spectral_radii(template, "zero", V, 32, backend=_backend.get(backend))
        np.testing.assert_allclose(got, ref, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1.4, 1.4), st.floats(-1.4, 1.4), st.floats(0.1, 2.0), st.floats(0.1, 2.0),
           st.sampled_from(["zero", "V"]), st.sampled_from(["twisted", "standard"]))
    def test_mirror_symmetry(self, vx, vy, sq, sxy, mode, variant):
        template = SchemeSpec(variant=variant, s_q=sq, s_xy=sxy)
        V = [(vx, vy), (-vx, vy), (vx, -vy), (vy, vx), (-vy, -vx)]
        r = max_spectral_radii(template, mode, V, 32)
        assert np.ptp(r) < 1e-12

    def test_unstable_radius_means_blowup(self):
        rng = np.random.default_rng(11)
        template = SchemeSpec(s_q=2.0, s_xy=1.0)
        checked = 0
        for V in rng.uniform(0.15, 0.9, (12, 2)):
            spec = template.with_velocity(V, "zero")
            if max_spectral_radius(spec) > 1 + 1e-6:
                assert not simulator.run_spot_experiment(spec, 64, 2000).stable
                checked += 1
        assert checked >= 3


class TestRegionScan:
    def test_verdict_tolerance(self):
        g = stability_region_scan(SchemeSpec(s_q=1.0, s_xy=1.5), "zero", velocity_axis(1.2, 0.1),
                                  n_k=32, refine_k=None)
        np.testing.assert_array_equal(g.verdict, g.values <= 1 + 1e-10)

    @pytest.mark.parametrize("mode", ["zero", "V"])
    def test_symmetry_reduction_is_exact(self, mode):
        template = SchemeSpec(s_q=1.9, s_xy=1.0)
        axis = velocity_axis(1.2, 0.1)
        a = stability_region_scan(template, mode, axis, 32, 64, symmetric=True)
        b = stability_region_scan(template, mode, axis, 32, 64, symmetric=False)
        np.testing.assert_array_equal(a.verdict, b.verdict)
        np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-12)

    def test_bgk_regions_identical(self):
        axis = velocity_axis(1.5, 0.05)
        a = stability_region_scan(SchemeSpec(), "zero", axis, 32, 64)
        b = stability_region_scan(SchemeSpec(), "V", axis, 32, 64)
        np.testing.assert_array_equal(a.verdict, b.verdict)
        np.testing.assert_allclose(a.values, b.values, atol=1e-10)

    @pytest.mark.parametrize("s", NONBGK_PAIRS)
    def test_mrt_region_inside_relative_region(self, s):
        axis = velocity_axis(1.5, 0.1)
        template = SchemeSpec(s_q=s[0], s_xy=s[1])
        mrt = stability_region_scan(template, "zero", axis, 32, 64)
        rel = stability_region_scan(template, "V", axis, 32, 64)
        assert not np.any(mrt.verdict & ~rel.verdict)

    def test_points_layout(self):
        axis = np.array([-0.5, 0.0, 0.5])
        g = stability_region_scan(SchemeSpec(s_q=1.2, s_xy=0.8), "V", axis, 16, None)
        vx, vy, r, ok = g.points()
        assert (vx[1], vy[1]) == (0.0, -0.5)
        assert r[1] == g.values[0, 1]

    @pytest.mark.parametrize("flavour", ["non-intrinsic", "intrinsic"])
    def test_twist_correspondence_pointwise(self, flavour):
        rng = np.random.default_rng(2)
        V = rng.uniform(-0.8, 0.8, (30, 2))
        std = SchemeSpec(variant="standard", s_q=1.5, s_xy=0.7, equilibrium=flavour)
        tw = SchemeSpec(variant="twisted", s_q=1.5, s_xy=0.7, equilibrium=flavour)
        rs = max_spectral_radii(std, "zero", V, 64)
        rt = max_spectral_radii(tw, "zero", V @ TWIST.T, 64)
        # same operator family, sampled on different k-grids
        far = np.abs(rs - 1) > 1e-3
        np.testing.assert_array_equal((rs <= 1 + 1e-10)[far], (rt <= 1 + 1e-10)[far])
        np.testing.assert_allclose(rs, rt, atol=5e-3)
