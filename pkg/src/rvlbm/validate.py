"""Randomised cross-module checks behind ``rvlbm validate``.

Each check draws its own parameters from one seeded generator and returns
``(name, passed, detail)``.
"""

from __future__ import annotations

import numpy as np

from . import _backend, eqeq, l2, linf, vonneumann
from .lattice import (
    TWIST,
    Equilibrium,
    RelativeMode,
    SchemeSpec,
    Variant,
    collision_matrix,
    equilibrium_distributions,
    lattice_shifts,
)

VARIANTS = list(Variant)
EQUILIBRIA = list(Equilibrium)
MODES = list(RelativeMode)


def _spec(rng, mode=None, **over):
    kw = dict(
        variant=VARIANTS[rng.integers(2)],
        equilibrium=EQUILIBRIA[rng.integers(2)],
        s_q=float(rng.uniform(0.05, 1.95)),
        s_xy=float(rng.uniform(0.05, 1.95)),
    )
    kw.update(over)
    V = tuple(rng.uniform(-0.9, 0.9, 2))
    mode = MODES[rng.integers(2)] if mode is None else mode
    return SchemeSpec.relative(mode, V, **kw)


def check_spectrum(rng, n):
    worst = 0.0
    for _ in range(n):
        s = _spec(rng)
        ev = np.sort_complex(np.linalg.eigvals(collision_matrix(s)))
        ref = np.sort_complex(np.array([1, 1 - s.s_q, 1 - s.s_q, 1 - s.s_xy], dtype=complex))
        worst = max(worst, float(np.abs(ev - ref).max()))
    return "collision spectrum", worst < 1e-10, f"max deviation {worst:.1e}"


def check_mass(rng, n):
    worst = 0.0
    for _ in range(n):
        C = collision_matrix(_spec(rng))
        worst = max(worst, float(np.abs(C.sum(axis=0) - 1).max()))
    return "density conservation", worst < 1e-12, f"max column-sum error {worst:.1e}"


def check_equilibrium(rng, n):
    worst = 0.0
    for _ in range(n):
        s = _spec(rng)
        a = equilibrium_distributions(s.with_velocity(s.V, RelativeMode.ZERO))
        b = equilibrium_distributions(s.with_velocity(s.V, RelativeMode.EQUALS_V))
        worst = max(worst, float(np.abs(a - b).max()))
    return "equilibrium independent of u", worst < 1e-12, f"max difference {worst:.1e}"


def check_bgk(rng, n):
    worst = 0.0
    for _ in range(n):
        s0 = _spec(rng)
        rate = s0.s_q
        s = SchemeSpec(s0.variant, s0.lam, rate, rate, s0.V, (0.0, 0.0), s0.equilibrium)
        a = collision_matrix(s)
        b = collision_matrix(s.with_velocity(s.V, RelativeMode.EQUALS_V))
        worst = max(worst, float(np.abs(a - b).max()))
    return "single rate independent of u", worst < 1e-12, f"max difference {worst:.1e}"


def check_twist(rng, n):
    worst = 0.0
    for _ in range(n):
        s = _spec(rng, variant=Variant.STANDARD)
        t = SchemeSpec(Variant.TWISTED, s.lam, s.s_q, s.s_xy, tuple(TWIST @ s.V),
                       tuple(TWIST @ s.u_rel), s.equilibrium)
        worst = max(worst, float(np.abs(collision_matrix(s) - collision_matrix(t)).max()))
    return "twist correspondence of collisions", worst < 1e-12, f"max difference {worst:.1e}"


def check_linf(rng, n):
    bad = compared = 0
    for _ in range(n):
        case = linf.LinfCase(VARIANTS[rng.integers(2)], EQUILIBRIA[rng.integers(2)],
                             MODES[rng.integers(2)], float(rng.uniform(-0.25, 2.5)),
                             float(rng.uniform(-0.25, 2.5)))
        V = rng.uniform(-1.6, 1.6, (64, 2))
        res = linf.compare_with_oracle(case, V)
        bad += len(res.disagreements)
        compared += res.compared
    return "L∞ predicate vs oracle", bad == 0, f"{bad} disagreements in {compared} points"


def check_l2(rng, n):
    worst = off = 0.0
    checked = 0
    for _ in range(n):
        V = tuple(rng.uniform(-0.95, 0.95, 2))
        s = SchemeSpec.relative("V", V, s_q=float(rng.uniform(0.05, 1.95)),
                                s_xy=float(rng.uniform(0.05, 1.95)))
        J = collision_matrix(s) - np.eye(4)
        found = l2.find_prestructure(J)
        if found is None:
            return "weighted L² certificates", False, f"no pre-structure at V={V}"
        Lam = np.diag(found.lambda_diag)
        P = found.p
        D = P @ J @ np.linalg.inv(P)
        PtP = P.T @ P
        worst = max(worst, float(np.abs(J @ Lam - Lam @ J.T).max()),
                    float(np.abs(PtP - np.diag(np.diag(PtP))).max()))
        off = max(off, float(np.abs(D - np.diag(np.diag(D))).max()))
        checked += 1
    ok = worst < 1e-10 and off < 1e-8
    return "weighted L² certificates", ok, f"{checked} cases, symmetry {worst:.1e}, diag {off:.1e}"


def check_eqeq(rng, n):
    worst = 0.0
    for _ in range(max(1, n // 20)):
        s = _spec(rng, variant=Variant.TWISTED, s_q=float(rng.uniform(0.4, 1.6)),
                  s_xy=float(rng.uniform(0.4, 1.6)))
        c = eqeq.equivalent_equation(s)
        f = eqeq.fitted_equation(s)
        scale2 = float(np.abs(c.d2).max())
        scale3 = max(float(np.abs(c.d3).max()), 1e-3)
        worst = max(worst, float(np.abs(c.d2 - f.d2).max()) / scale2,
                    float(np.abs(c.d3 - f.d3).max()) / scale3)
    return "equivalent equation vs dispersion fit", worst < 1e-3, f"worst relative {worst:.1e}"


def check_vn_symmetry(rng, n, backend=None):
    worst = 0.0
    for _ in range(max(1, n // 20)):
        s = _spec(rng)
        vx, vy = s.V
        images = [(vx, vy), (-vx, vy), (vx, -vy), (vy, vx)]
        mode = RelativeMode.ZERO if s.u_rel == (0.0, 0.0) else RelativeMode.EQUALS_V
        r = [vonneumann.max_spectral_radius(s.with_velocity(v, mode), 32, backend)
             for v in images]
        worst = max(worst, max(r) - min(r))
    return "von Neumann mirror symmetry", worst < 1e-12, f"max spread {worst:.1e}"


def check_backends(rng, n):
    if _backend.name != "compiled":
        return "backend parity", True, "compiled extension not built, skipped"
    py = _backend.get("python")
    cc = _backend.get("compiled")
    s = _spec(rng)
    C = np.ascontiguousarray(np.stack([collision_matrix(s)] * 4))
    a = vonneumann.phase_factors(s.variant, 16)
    d = float(np.abs(py.max_spectral_radius(C, a)[0] - cc.max_spectral_radius(C, a)[0]).max())
    f0 = rng.standard_normal((4, 16, 16))
    shifts = np.ascontiguousarray(lattice_shifts(s.variant))
    f1, f2 = f0.copy(), f0.copy()
    py.spot_run(f1, np.ascontiguousarray(collision_matrix(s)), shifts, 20, np.inf)
    cc.spot_run(f2, np.ascontiguousarray(collision_matrix(s)), shifts, 20, np.inf)
    d = max(d, float(np.abs(f1 - f2).max()))
    return "backend parity", d < 1e-10, f"max difference {d:.1e}"


def run_all(samples: int = 200, seed: int = 0, backend=None):
    rng = np.random.default_rng(seed)
    return [
        check_spectrum(rng, samples),
        check_mass(rng, samples),
        check_equilibrium(rng, samples),
        check_bgk(rng, samples),
        check_twist(rng, samples),
        check_linf(rng, samples),
        check_l2(rng, samples),
        check_eqeq(rng, samples),
        check_vn_symmetry(rng, samples, backend),
        check_backends(rng, samples),
    ]
