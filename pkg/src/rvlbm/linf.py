"""L∞ (maximum principle) stability regions.

The scheme keeps nonnegative distributions nonnegative exactly when the
collision matrix is entrywise nonnegative (transport only permutes values
and mass is conserved). :func:`linf_oracle` checks that directly;
:func:`linf_region_predicate` evaluates the closed-form regions, which are
piecewise in ``(s_q, s_xy)`` and given by quadratic inequalities in ``V``.

Each region is stored as a list of functions ``g(Vx, Vy) >= 0`` so the same
data gives the verdict and a distance-like margin to the boundary. Twisted
regions are written in the rotated frame ``wx = Vx + Vy``, ``wy = Vx - Vy``
(so that ``Vx Vy = (wx² - wy²)/4``); standard-lattice regions are written
directly in ``(Vx, Vy)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from .lattice import (
    Equilibrium,
    RelativeMode,
    SchemeSpec,
    Variant,
    collision_matrices,
    collision_matrix,
)

ORACLE_TOL = 1e-12
CLASSIFY_TOL = 1e-12
# regions are closed; absorbs rounding of V on a boundary (g is O(λ²))
REGION_TOL = 1e-12
COLLAR = 1e-6

Constraint = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LinfCase:
    """Scheme family plus relaxation rates; ``V`` is supplied separately.

    With ``bgk_shortcut`` (default) equal rates are handled by the dedicated
    single-rate results; without it the two-rate result for the mode is used
    on the diagonal too.
    """

    variant: Variant = Variant.TWISTED
    equilibrium: Equilibrium = Equilibrium.NON_INTRINSIC
    mode: RelativeMode = RelativeMode.ZERO
    s_q: float = 1.0
    s_xy: float = 1.0
    lam: float = 1.0
    bgk_shortcut: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "equilibrium", Equilibrium(self.equilibrium))
        object.__setattr__(self, "mode", RelativeMode(self.mode))

    def spec(self, V) -> SchemeSpec:
        return SchemeSpec.relative(
            self.mode, V, variant=self.variant, lam=self.lam, s_q=self.s_q,
            s_xy=self.s_xy, equilibrium=self.equilibrium,
        )


@dataclass(frozen=True)
class RegionDomain:
    """Which piece of the ``(s_q, s_xy)`` plane a case falls in.

    ``kind`` is ``"inequalities"``, ``"origin"`` (only ``V = 0``), ``"all"``
    or ``"empty"``.
    """

    result: str
    label: str
    kind: str
    constraints: List[Constraint] = field(default_factory=list, repr=False, compare=False)


# -- tolerant comparisons for the s classification --------------------------


def _le(a, b):
    return a <= b + CLASSIFY_TOL


def _eq(a, b):
    return abs(a - b) <= CLASSIFY_TOL


def _lt(a, b):
    return a < b - CLASSIFY_TOL


# -- constraint builders -----------------------------------------------------


def _rot(vx, vy):
    return vx + vy, vx - vy


def _hyperbolas_ge(shift, rhs, lam, frame):
    """``(a ± λ shift)² - b² >= rhs`` and the same with ``a``, ``b`` swapped."""
    out = []
    for swap in (False, True):
        for sign in (1.0, -1.0):
            def g(vx, vy, swap=swap, sign=sign):
                a, b = frame(vx, vy)
                if swap:
                    a, b = b, a
                return (a + sign * lam * shift) ** 2 - b * b - rhs
            out.append(g)
    return out


def _inf_ball(radius):
    return [lambda vx, vy: radius - np.maximum(np.abs(vx), np.abs(vy))]


def _one_ball(radius):
    return [lambda vx, vy: radius - (np.abs(vx) + np.abs(vy))]


def _twisted_frame(vx, vy):
    return _rot(vx, vy)


def _standard_frame(vx, vy):
    return vx, vy


def _intrinsic_relative_family(sq, sxy, lam, frame, scale, sense):
    """The eight-plus-eight hyperbola family of the intrinsic ``u = V`` case.

    ``scale`` is 1 in the rotated twisted frame and 1/2 for the standard
    lattice; ``sense`` is +1 for ``>=`` and -1 for ``<=``.
    """
    g1 = (2 * sq - sxy) / (sq - sxy)
    g2 = sxy / (sq - sxy)
    mid = (g1 + g2) / 2
    c1 = lam**2 * g1 * g2 * scale**2
    c2 = lam**2 * g2**2 * scale**2
    c4 = lam**2 / (sq - sxy) ** 2 * (4 * sq**2 - 2 * sq * sxy - sxy**2 + 8 * (sxy - sq)) * scale**2
    out = []
    for swap in (False, True):
        def ab(vx, vy, swap=swap):
            a, b = frame(vx, vy)
            return (b, a) if swap else (a, b)

        for sign in (1.0, -1.0):
            out.append(lambda vx, vy, ab=ab, s=sign:
                       sense * ((ab(vx, vy)[0] + s * lam * g1 * scale) ** 2 - ab(vx, vy)[1] ** 2 - c1))
            out.append(lambda vx, vy, ab=ab, s=sign:
                       sense * ((ab(vx, vy)[0] + s * lam * g2 * scale) ** 2 - ab(vx, vy)[1] ** 2 - c4))
            for sign_b in (1.0, -1.0):
                out.append(lambda vx, vy, ab=ab, s=sign, t=sign_b:
                           sense * ((ab(vx, vy)[0] + s * lam * mid * scale) ** 2
                                    - (ab(vx, vy)[1] + t * lam * scale) ** 2 - c2))
    return out


# -- per-result classification -----------------------------------------------
#
# Each function returns (label, kind, constraints). The result names match the
# families: non-intrinsic / intrinsic, relative velocity zero / V, two rates or
# a single rate.


def _nonintrinsic_zero(sq, sxy, lam, frame, scale):
    if _eq(sq, 0) and _eq(sxy, 0):
        return "point B", "all", []
    if _eq(sxy, 0) and 0 < sq and _le(sq, 2):
        return "ray BD", "origin", []
    if 0 < sxy and _le(sxy, min(sq, 2 - sq)):
        g = sq / sxy
        return "BCD", "inequalities", _hyperbolas_ge(2 * g * scale, 4 * lam**2 * (g * g - 1) * scale**2, lam, frame)
    if _le(sq, sxy) and _le(sxy, 2 * sq) and _le(sq, 1):
        g = sq / sxy
        return "ABC", "inequalities", _hyperbolas_ge(2 * g * scale, 4 * lam**2 * (g - 1) ** 2 * scale**2, lam, frame)
    if _le(2 - sq, sxy) and _le(sxy, 2 * (2 - sq)) and _le(1, sq):
        g = sq / sxy
        rhs = 4 * lam**2 * ((g + 1) ** 2 - 4 / sxy) * scale**2
        return "ACD", "inequalities", _hyperbolas_ge(2 * g * scale, rhs, lam, frame)
    return "empty", "empty", []


def _nonintrinsic_bgk(s, lam, frame, scale, cfl_ball):
    if _eq(s, 0):
        return "s = 0", "all", []
    if 0 <= s and _le(s, 1):
        return "0 <= s <= 1", "inequalities", cfl_ball(lam)
    if _le(1, s) and _le(s, 4 / 3):
        rhs = 16 * lam**2 * (1 - 1 / s) * scale**2
        return "1 <= s <= 4/3", "inequalities", _hyperbolas_ge(2 * scale, rhs, lam, frame)
    return "empty", "empty", []


def _nonintrinsic_relative(sq, sxy, lam, frame, scale, cfl_ball, ray_ball, ray_scale, ray_min):
    if _eq(sq, 0) and _eq(sxy, 0):
        return "point A", "all", []
    if _eq(sxy, 2 * sq) and _lt(ray_min, sxy) and _le(sxy, 2):
        radius = ray_scale * lam * (2 - sxy) / sxy
        return "ray AD", "inequalities", cfl_ball(lam) + ray_ball(radius)
    if _le(sq, sxy) and _le(sxy, min(1, 2 * sq)):
        return "ABC", "inequalities", cfl_ball(lam)
    if _eq(sxy, 2 * sq):
        # rest of the line s_xy = 2 s_q: gamma is undefined and no bullet applies
        return "empty", "empty", []
    if _lt(sxy, 2 * sq) and _le(max(sq, 1), sxy) and _le(sxy, 2 * (2 - sq)):
        g = sxy / (2 * sq - sxy)
        rhs = 16 * lam**2 / (2 * sq - sxy) ** 2 * (sxy - sq * (2 - sq)) * scale**2
        return "BCED", "inequalities", cfl_ball(lam) + _hyperbolas_ge(2 * g * scale, rhs, lam, frame)
    if _le(0, sxy) and _le(sxy, min(sq, sq * (2 - sq))):
        g = sxy / (2 * sq - sxy)
        return "ACF", "inequalities", cfl_ball(lam * g)
    if _le(sq * (2 - sq), sxy) and _le(sxy, min(sq, 2 * (2 - sq))):
        g = sxy / (2 * sq - sxy)
        rhs = 16 * lam**2 / (2 * sq - sxy) ** 2 * (sxy - sq * (2 - sq)) * scale**2
        return "CEF", "inequalities", _hyperbolas_ge(2 * g * scale, rhs, lam, frame)
    return "empty", "empty", []


def _intrinsic_zero(sq, sxy, lam, ball, scale):
    if _eq(sq, 0) and _eq(sxy, 0):
        return "point B", "all", []
    if _le(0, sxy) and _le(sxy, min(sq, 2 - sq)):
        g = sxy / sq
        return "BCD", "inequalities", ball(lam * g * scale)
    if _le(sq, min(1, sxy)) and _le(sxy, 2 * sq):
        g = sxy / sq
        return "ABC", "inequalities", ball(lam * (2 - g) * scale)
    if _le(max(1, 2 - sxy), sq) and _le(sxy, 2 * (2 - sq)):
        g = sxy / sq
        return "ACD", "inequalities", ball(lam * (4 / sq - 2 - g) * scale)
    return "empty", "empty", []


def _intrinsic_bgk(s, lam, ball, scale):
    if _eq(s, 0):
        return "s = 0", "all", []
    if 0 <= s and _le(s, 1):
        return "0 <= s <= 1", "inequalities", ball(lam * scale)
    if _le(1, s) and _le(s, 4 / 3):
        return "1 <= s <= 4/3", "inequalities", ball(lam * (4 / s - 3) * scale)
    return "empty", "empty", []


def _intrinsic_relative(sq, sxy, lam, frame, scale):
    if _lt(sq, sxy) and _le(sxy, min(2 * sq, 2 * (2 - sq))):
        return "ACD", "inequalities", _intrinsic_relative_family(sq, sxy, lam, frame, scale, -1.0)
    if _lt(sxy, sq) and _le(sxy, 2 * (2 - sq)):
        return "ABD", "inequalities", _intrinsic_relative_family(sq, sxy, lam, frame, scale, 1.0)
    return "empty", "empty", []


def linf_param_domain(case: LinfCase) -> RegionDomain:
    """Classify ``(s_q, s_xy)`` into the labelled region of the matching result."""
    sq, sxy, lam = float(case.s_q), float(case.s_xy), float(case.lam)
    twisted = case.variant is Variant.TWISTED
    frame = _twisted_frame if twisted else _standard_frame
    scale = 1.0 if twisted else 0.5
    # ‖V‖∞ in the twisted frame corresponds to ‖V‖₁ on the standard lattice
    cfl_ball = _inf_ball if twisted else _one_ball
    other_ball = _one_ball if twisted else _inf_ball
    bgk = case.bgk_shortcut and _eq(sq, sxy)

    if case.equilibrium is Equilibrium.NON_INTRINSIC:
        if bgk:
            result = "non-intrinsic single rate"
            label, kind, cons = _nonintrinsic_bgk(sq, lam, frame, scale, cfl_ball)
        elif case.mode is RelativeMode.ZERO:
            result = "non-intrinsic two rates, relative velocity 0"
            label, kind, cons = _nonintrinsic_zero(sq, sxy, lam, frame, scale)
        else:
            result = "non-intrinsic two rates, relative velocity V"
            if twisted:
                label, kind, cons = _nonintrinsic_relative(
                    sq, sxy, lam, frame, scale, cfl_ball, other_ball, 2.0, 0.0)
            else:
                label, kind, cons = _nonintrinsic_relative(
                    sq, sxy, lam, frame, scale, cfl_ball, other_ball, 1.0, 1.0)
    else:
        # intrinsic: ‖V‖₁ in the twisted frame is 2‖V‖∞ on the standard lattice
        ball = _one_ball if twisted else _inf_ball
        if bgk:
            result = "intrinsic single rate"
            label, kind, cons = _intrinsic_bgk(sq, lam, ball, scale)
        elif case.mode is RelativeMode.ZERO:
            result = "intrinsic two rates, relative velocity 0"
            label, kind, cons = _intrinsic_zero(sq, sxy, lam, ball, scale)
        elif _eq(sq, sxy):
            result = "intrinsic single rate"
            label, kind, cons = _intrinsic_bgk(sq, lam, ball, scale)
            label = "segment AD: " + label
        else:
            result = "intrinsic two rates, relative velocity V"
            label, kind, cons = _intrinsic_relative(sq, sxy, lam, frame, scale)
    return RegionDomain(result, label, kind, cons)


def _constraint_values(domain: RegionDomain, vx, vy) -> np.ndarray:
    if domain.kind == "inequalities":
        return np.stack([np.broadcast_to(g(vx, vy), vx.shape) for g in domain.constraints])
    if domain.kind == "origin":
        return -np.maximum(np.abs(vx), np.abs(vy))[None]
    if domain.kind == "all":
        return np.full((1,) + vx.shape, np.inf)
    return np.full((1,) + vx.shape, -np.inf)


def linf_region(case: LinfCase, V):
    """Vectorised predicate and boundary margin for velocities ``V`` (n, 2).

    Returns ``(inside, margin)``; ``margin`` is the smallest ``|g_i|`` over
    the defining inequalities, used to skip points on a region boundary.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    vx, vy = V[:, 0], V[:, 1]
    dom = linf_param_domain(case)
    g = _constraint_values(dom, vx, vy)
    inside = np.all(g >= -REGION_TOL * max(1.0, case.lam) ** 2, axis=0)
    if dom.kind == "origin":
        inside = (vx == 0) & (vy == 0)
    margin = np.min(np.abs(g), axis=0)
    return inside, margin


def linf_region_predicate(case: LinfCase, V) -> bool:
    """True iff ``V`` lies in the closed-form L∞ region of ``case``."""
    inside, _ = linf_region(case, np.asarray(V, dtype=float)[None])
    return bool(inside[0])


def linf_oracle(spec: SchemeSpec, tol: float = ORACLE_TOL) -> bool:
    """True iff every entry of the collision matrix is at least ``-tol``."""
    return bool(np.all(collision_matrix(spec) >= -tol))


def linf_oracle_batch(case: LinfCase, V, tol: float = ORACLE_TOL) -> np.ndarray:
    """Vectorised :func:`linf_oracle` over velocities ``V`` (n, 2)."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    u = np.zeros_like(V) if case.mode is RelativeMode.ZERO else V
    C = collision_matrices(case.variant, case.lam, case.s_q, case.s_xy, V, u, case.equilibrium)
    return np.all(C >= -tol, axis=(1, 2))


def sweep_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Grid ``lo .. hi`` from integer multiples of ``step`` (no drift)."""
    i0 = int(round(lo / step))
    i1 = int(round(hi / step))
    return np.arange(i0, i1 + 1) * step


@dataclass(frozen=True)
class SweepResult:
    case: LinfCase
    points: int
    compared: int
    disagreements: np.ndarray  # (m, 2) velocities where predicate != oracle


def compare_with_oracle(case: LinfCase, V, collar: float = COLLAR) -> SweepResult:
    """Predicate vs oracle at velocities ``V``, skipping the boundary collar."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    inside, margin = linf_region(case, V)
    oracle = linf_oracle_batch(case, V)
    keep = margin > collar
    bad = keep & (inside != oracle)
    return SweepResult(case, len(V), int(keep.sum()), V[bad])
