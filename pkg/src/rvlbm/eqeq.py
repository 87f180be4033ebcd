"""Third-order equivalent equation of the D2Q4 advection scheme.

The scheme is consistent with

    ∂t ρ + V·∇ρ - Δt D2:∇²ρ + Δt² D3:∇³ρ = O(Δt³)

where ``D2`` is symmetric and ``D3 = [[a, b], [c, d]]`` multiplies
``(∂xxx, ∂xyy, ∂xxy, ∂yyy)``. The closed forms below hold for the twisted
lattice; the standard lattice is the twisted one seen through ``R``, so its
coefficients come from the same forms evaluated in the twisted frame.

The numeric check follows the conserved eigenvalue ``μ(k)`` of the
amplification matrix along a direction ``n``. A plane wave ``exp(i k n·x)``
picks up ``L(-k n)`` per step (transport pulls values from ``x - v Δt``), and

    log μ / (-Δt) = i c1 k + c2 k² + i c3 k³ + O(k⁴),

with ``c1 = V·n``, ``c2 = Δt nᵀD2n`` and ``c3 = -Δt² D3:(n⊗n⊗n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import TWIST, Equilibrium, SchemeSpec, Variant, collision_matrix, velocities

FIT_K = 2 * np.pi * np.linspace(0.005, 0.06, 12)
# odd/even powers kept in the least-squares model beyond the three reported
FIT_EXTRA_ORDERS = 8
_DIRECTIONS = np.array([
    [1.0, 0.0], [0.0, 1.0], [np.sqrt(0.5), np.sqrt(0.5)], [np.sqrt(0.5), -np.sqrt(0.5)],
    [0.8, 0.6], [0.6, -0.8],
])


@dataclass(frozen=True)
class EquivalentEquation:
    d2: np.ndarray
    d3: np.ndarray


def _sigmas(spec: SchemeSpec):
    return spec.sigma_q, spec.sigma_xy


def _twisted_d2(lam, V, sq, equilibrium):
    vx, vy = V
    off = -sq * vx * vy if equilibrium is Equilibrium.INTRINSIC else 0.0
    return np.array([[sq * (lam**2 - vx**2), off], [off, sq * (lam**2 - vy**2)]])


def _phi1(lam, v, sq):
    return v / 6.0 * (lam**2 - v**2) * (1.0 - 12.0 * sq**2)


def _phi2(lam, ux, uy, vx, vy, sq, sxy):
    # read with the sigma_q sigma_xy group closing after ux vy², which the
    # numeric fit confirms
    return 0.5 * (
        -vx * vy**2
        + 4 * sq**2 * (lam**2 * (ux - vx) + 3 * vx * vy**2 - uy * vx * vy - ux * vy**2)
        - 4 * sq * sxy * (lam**2 * (ux - vx) - (vx * uy * vy + ux * vy**2))
    )


def _twisted_d3(lam, V, u, sq, sxy, equilibrium):
    vx, vy = V
    ux, uy = u
    if equilibrium is Equilibrium.INTRINSIC:
        b = _phi2(lam, ux, uy, vx, vy, sq, sxy)
        c = _phi2(lam, uy, ux, vy, vx, sq, sxy)
    else:
        b = 2 * sq * (lam**2 - vy**2) * (ux - vx) * (sq - sxy)
        c = 2 * sq * (lam**2 - vx**2) * (uy - vy) * (sq - sxy)
    return np.array([[_phi1(lam, vx, sq), b], [c, _phi1(lam, vy, sq)]])


def quadratic_form(d2: np.ndarray, n) -> float:
    n = np.asarray(n, dtype=float)
    return float(n @ d2 @ n)


def cubic_form(d3: np.ndarray, n) -> float:
    """``D3:(n⊗n⊗n)`` in the ``(∂xxx, ∂xyy, ∂xxy, ∂yyy)`` layout."""
    nx, ny = n
    return float(d3[0, 0] * nx**3 + d3[0, 1] * nx * ny**2
                 + d3[1, 0] * nx**2 * ny + d3[1, 1] * ny**3)


def _quad_rows(dirs):
    nx, ny = dirs[:, 0], dirs[:, 1]
    return np.stack([nx**2, 2 * nx * ny, ny**2], axis=1)


def _cubic_rows(dirs):
    nx, ny = dirs[:, 0], dirs[:, 1]
    return np.stack([nx**3, nx * ny**2, nx**2 * ny, ny**3], axis=1)


def d2_from_forms(dirs, values) -> np.ndarray:
    """Symmetric matrix whose quadratic form takes ``values`` on ``dirs``."""
    a, b, c = np.linalg.lstsq(_quad_rows(np.asarray(dirs)), np.asarray(values), rcond=None)[0]
    return np.array([[a, b], [b, c]])


def d3_from_forms(dirs, values) -> np.ndarray:
    """Layout-ordered ``D3`` whose cubic form takes ``values`` on ``dirs``."""
    a, b, c, d = np.linalg.lstsq(_cubic_rows(np.asarray(dirs)), np.asarray(values), rcond=None)[0]
    return np.array([[a, b], [c, d]])


def diffusion_matrix(spec: SchemeSpec) -> np.ndarray:
    """``D2``; it does not depend on the relative velocity."""
    sq, _ = _sigmas(spec)
    if spec.variant is Variant.TWISTED:
        return _twisted_d2(spec.lam, spec.V, sq, spec.equilibrium)
    tw = _twisted_d2(spec.lam, tuple(TWIST @ np.array(spec.V)), sq, spec.equilibrium)
    pulled = (np.linalg.inv(TWIST).T @ _DIRECTIONS.T).T
    return d2_from_forms(_DIRECTIONS, [quadratic_form(tw, p) for p in pulled])


def dispersion_matrix(spec: SchemeSpec) -> np.ndarray:
    """``D3`` in the ``(∂xxx, ∂xyy, ∂xxy, ∂yyy)`` layout."""
    sq, sxy = _sigmas(spec)
    if spec.variant is Variant.TWISTED:
        return _twisted_d3(spec.lam, spec.V, spec.u_rel, sq, sxy, spec.equilibrium)
    tw = _twisted_d3(spec.lam, tuple(TWIST @ np.array(spec.V)),
                     tuple(TWIST @ np.array(spec.u_rel)), sq, sxy, spec.equilibrium)
    pulled = (np.linalg.inv(TWIST).T @ _DIRECTIONS.T).T
    return d3_from_forms(_DIRECTIONS, [cubic_form(tw, p) for p in pulled])


def equivalent_equation(spec: SchemeSpec) -> EquivalentEquation:
    return EquivalentEquation(diffusion_matrix(spec), dispersion_matrix(spec))


def wellposed(spec: SchemeSpec) -> bool:
    """Whether the second-order truncation is well posed (``D2/σ_q`` positive definite)."""
    vx, vy = spec.V
    if spec.variant is Variant.STANDARD:
        vx, vy = TWIST @ np.array(spec.V)
    if spec.equilibrium is Equilibrium.INTRINSIC:
        return vx * vx + vy * vy < spec.lam**2
    return max(abs(vx), abs(vy)) < spec.lam


class BranchTrackingError(RuntimeError):
    pass


def conserved_branch(spec: SchemeSpec, direction, k_samples=FIT_K) -> np.ndarray:
    """``μ(k n)`` for increasing ``k``, following the eigenvalue with ``μ(0) = 1``."""
    n = np.asarray(direction, dtype=float)
    C = collision_matrix(spec)
    vel = velocities(spec.variant, spec.lam)
    prev = 1.0 + 0j
    out = []
    for k in np.asarray(k_samples, dtype=float):
        a = np.exp(1j * spec.dt * (vel @ (-k * n)))
        ev = np.linalg.eigvals(a[:, None] * C)
        d = np.abs(ev - prev)
        order = np.argsort(d)
        if len(ev) > 1 and d[order[1]] < 2 * d[order[0]] + 1e-12:
            raise BranchTrackingError(f"eigenvalues too close to follow the branch at k={k}")
        prev = ev[order[0]]
        out.append(prev)
    return np.array(out)


def numeric_dispersion_fit(spec: SchemeSpec, direction, k_samples=FIT_K,
                           extra_orders: int = FIT_EXTRA_ORDERS):
    """Least-squares ``(c1, c2, c3)`` of ``log μ(k n)/(-Δt)`` against powers of ``k``.

    Higher powers up to ``3 + extra_orders`` are fitted too and discarded.
    Rows are weighted by ``k^-3`` so the smallest magnitudes dominate.
    """
    k = np.asarray(k_samples, dtype=float)
    mu = conserved_branch(spec, direction, k)
    y = np.log(mu) / (-spec.dt)
    orders = np.arange(1, 4 + extra_orders)
    # real part carries the even powers, imaginary part the odd ones
    cols = [np.where(p % 2 == 0, 1.0, 1j) * k**p for p in orders]
    A = np.stack(cols, axis=1)
    w = k ** -3.0
    A = A * w[:, None]
    y = y * w
    A_real = np.vstack([A.real, A.imag])
    y_real = np.concatenate([y.real, y.imag])
    coef = np.linalg.lstsq(A_real, y_real, rcond=None)[0]
    return float(coef[0]), float(coef[1]), float(coef[2])


def fitted_equation(spec: SchemeSpec, directions=_DIRECTIONS) -> EquivalentEquation:
    """``D2`` and ``D3`` rebuilt from fits along several directions."""
    dirs = np.asarray(directions, dtype=float)
    c2, c3 = [], []
    for n in dirs:
        _, b, c = numeric_dispersion_fit(spec, n)
        c2.append(b / spec.dt)
        c3.append(-c / spec.dt**2)
    return EquivalentEquation(d2_from_forms(dirs, c2), d3_from_forms(dirs, c3))
