"""Velocity sets, moment bases, equilibria and the relative-velocity collision.

Two four-velocity schemes are supported:

* the *twisted* D2Q4, velocities ``(±λ, ±λ)`` and moments ``1, X, Y, XY``;
* the *standard* D2Q4, velocities ``(±λ, 0), (0, ±λ)`` and moments
  ``1, X, Y, X² - Y²``.

Moments are taken relative to a constant velocity ``u_rel``: row ``k`` of the
moment matrix is the polynomial ``P_k`` evaluated at ``v_j - u_rel``.
Everything here works in lattice units with ``Δx = 1`` and ``Δt = 1/λ``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

MOMENT_CHECK_TOL = 1e-12


class Variant(str, enum.Enum):
    TWISTED = "twisted"
    STANDARD = "standard"


class Equilibrium(str, enum.Enum):
    NON_INTRINSIC = "non-intrinsic"
    INTRINSIC = "intrinsic"


class RelativeMode(str, enum.Enum):
    """The two relative velocities the stability theory distinguishes."""

    ZERO = "zero"
    EQUALS_V = "V"


_BASE_VELOCITIES = {
    Variant.TWISTED: np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]),
    Variant.STANDARD: np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]),
}

TWIST = np.array([[1.0, -1.0], [1.0, 1.0]])


def _as_variant(variant) -> Variant:
    return variant if isinstance(variant, Variant) else Variant(variant)


def _as_equilibrium(eq) -> Equilibrium:
    return eq if isinstance(eq, Equilibrium) else Equilibrium(eq)


def velocities(variant, lam: float = 1.0) -> np.ndarray:
    """Return the (4, 2) array of lattice velocities."""
    return lam * _BASE_VELOCITIES[_as_variant(variant)]


def lattice_shifts(variant) -> np.ndarray:
    """Integer cell displacement of each population over one time step."""
    return _BASE_VELOCITIES[_as_variant(variant)].astype(np.int64)


@dataclass(frozen=True)
class SchemeSpec:
    """One fully specified scheme instance.

    ``V`` and ``u_rel`` are absolute velocities (same units as ``lam``).
    The density moment is conserved; the two first-order moments relax with
    ``s_q`` and the second-order moment with ``s_xy``.
    """

    variant: Variant = Variant.TWISTED
    lam: float = 1.0
    s_q: float = 1.0
    s_xy: float = 1.0
    V: tuple[float, float] = (0.0, 0.0)
    u_rel: tuple[float, float] = (0.0, 0.0)
    equilibrium: Equilibrium = Equilibrium.NON_INTRINSIC

    def __post_init__(self):
        object.__setattr__(self, "variant", _as_variant(self.variant))
        object.__setattr__(self, "equilibrium", _as_equilibrium(self.equilibrium))
        object.__setattr__(self, "V", (float(self.V[0]), float(self.V[1])))
        object.__setattr__(self, "u_rel", (float(self.u_rel[0]), float(self.u_rel[1])))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @classmethod
    def relative(cls, mode, V, **kwargs) -> "SchemeSpec":
        """Build a spec whose relative velocity is 0 or V."""
        mode = mode if isinstance(mode, RelativeMode) else RelativeMode(mode)
        u = (0.0, 0.0) if mode is RelativeMode.ZERO else tuple(V)
        return cls(V=tuple(V), u_rel=u, **kwargs)

    def with_velocity(self, V, mode=None) -> "SchemeSpec":
        """Copy with a new advection velocity.

        With ``mode`` given the relative velocity follows it, otherwise
        ``u_rel`` is kept as is.
        """
        V = (float(V[0]), float(V[1]))
        if mode is None:
            return replace(self, V=V)
        mode = mode if isinstance(mode, RelativeMode) else RelativeMode(mode)
        return replace(self, V=V, u_rel=(0.0, 0.0) if mode is RelativeMode.ZERO else V)

    @property
    def dt(self) -> float:
        return 1.0 / self.lam

    @property
    def relaxation(self) -> np.ndarray:
        return np.array([0.0, self.s_q, self.s_q, self.s_xy])

    @property
    def sigma_q(self) -> float:
        return 1.0 / self.s_q - 0.5

    @property
    def sigma_xy(self) -> float:
        return 1.0 / self.s_xy - 0.5


def henon_to_rate(sigma: float) -> float:
    """Relaxation rate ``s`` such that ``1/s - 1/2 = sigma``."""
    return 1.0 / (sigma + 0.5)


class MomentVector(NamedTuple):
    rho: float
    m1x: float
    m1y: float
    m2: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


@dataclass(frozen=True)
class MomentMatrix:
    m: np.ndarray
    m_inv: np.ndarray = field(repr=False)


def _polynomials(variant: Variant, x, y):
    one = np.ones_like(x)
    if variant is Variant.TWISTED:
        return np.stack([one, x, y, x * y])
    return np.stack([one, x, y, x * x - y * y])


def moment_matrix(variant, lam: float = 1.0, u_rel=(0.0, 0.0)) -> MomentMatrix:
    """Moment matrix ``M_kj = P_k(v_j - u_rel)`` and its inverse.

    At ``u_rel = 0`` the rows are orthogonal so the inverse is
    ``M^T (M M^T)^-1``; otherwise LU with partial pivoting is used.
    """
    variant = _as_variant(variant)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    rel = velocities(variant, lam) - np.asarray(u_rel, dtype=float)
    m = _polynomials(variant, rel[:, 0], rel[:, 1])
    if u_rel[0] == 0.0 and u_rel[1] == 0.0:
        m_inv = m.T / np.einsum("kj,kj->k", m, m)
    else:
        m_inv = np.linalg.inv(m)
    err = np.abs(m @ m_inv - np.eye(4)).max()
    if not err < MOMENT_CHECK_TOL * max(1.0, lam**2):
        raise RuntimeError(f"moment matrix inverse check failed (residual {err:.3e})")
    return MomentMatrix(m, m_inv)


def equilibrium_moments(spec: SchemeSpec, rho: float = 1.0) -> MomentVector:
    """Equilibrium moments in the basis relative to ``spec.u_rel``."""
    vx, vy = spec.V
    ux, uy = spec.u_rel
    dx, dy = vx - ux, vy - uy
    if spec.variant is Variant.TWISTED:
        if spec.equilibrium is Equilibrium.NON_INTRINSIC:
            m2 = dx * dy
        else:
            m2 = ux * uy - ux * vy - uy * vx
    else:
        if spec.equilibrium is Equilibrium.NON_INTRINSIC:
            m2 = dx * dx - dy * dy
        else:
            # completion of rho(1, Vx, Vy, 0) at u_rel = 0 keeping f_eq fixed
            m2 = ux * ux - uy * uy - 2.0 * ux * vx + 2.0 * uy * vy
    return MomentVector(rho, dx * rho, dy * rho, m2 * rho)


def equilibrium_distributions(spec: SchemeSpec, rho: float = 1.0) -> np.ndarray:
    mm = moment_matrix(spec.variant, spec.lam, spec.u_rel)
    return mm.m_inv @ equilibrium_moments(spec, rho).as_array()


def collision_matrix(spec: SchemeSpec) -> np.ndarray:
    """Linear post-collision map ``f* = C f``.

    ``C = I + M^-1 D M (E - I)`` with ``E = f_eq(rho=1) 1^T``.
    """
    mm = moment_matrix(spec.variant, spec.lam, spec.u_rel)
    feq = mm.m_inv @ equilibrium_moments(spec, 1.0).as_array()
    e = np.outer(feq, np.ones(4))
    d = np.diag(spec.relaxation)
    return np.eye(4) + mm.m_inv @ d @ mm.m @ (e - np.eye(4))


def collision_generator(spec: SchemeSpec) -> np.ndarray:
    """``J = M^-1 D M (B - I)``, so that the collision matrix is ``I + J``."""
    return collision_matrix(spec) - np.eye(4)


def twist_map(v) -> np.ndarray:
    """Map a standard D2Q4 vector onto the twisted frame (rotation by π/4, scale √2)."""
    return TWIST @ np.asarray(v, dtype=float)


# -- batched construction --------------------------------------------------
#
# M(u) = T(u) M(0) where T(u) is the polynomial shift P(.) -> P(. - u) written
# in the moment basis; T(u)^-1 = T(-u).


def _shift_matrices(variant: Variant, ux, uy) -> np.ndarray:
    n = ux.shape[0]
    t = np.zeros((n, 4, 4))
    t[:, 0, 0] = t[:, 1, 1] = t[:, 2, 2] = t[:, 3, 3] = 1.0
    t[:, 1, 0] = -ux
    t[:, 2, 0] = -uy
    if variant is Variant.TWISTED:
        t[:, 3, 0] = ux * uy
        t[:, 3, 1] = -uy
        t[:, 3, 2] = -ux
    else:
        t[:, 3, 0] = ux * ux - uy * uy
        t[:, 3, 1] = -2.0 * ux
        t[:, 3, 2] = 2.0 * uy
    return t


def collision_matrices(
    variant,
    lam: float,
    s_q,
    s_xy,
    V,
    u_rel,
    equilibrium,
) -> np.ndarray:
    """Collision matrices for a batch of velocities, shape ``(n, 4, 4)``.

    ``V`` and ``u_rel`` are ``(n, 2)`` arrays; ``s_q`` and ``s_xy`` are
    scalars or length-``n`` arrays. Uses the shift factorisation of the moment
    matrix, independently of :func:`collision_matrix`.
    """
    variant = _as_variant(variant)
    equilibrium = _as_equilibrium(equilibrium)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    u = np.atleast_2d(np.asarray(u_rel, dtype=float))
    n = V.shape[0]
    if u.shape[0] == 1 and n > 1:
        u = np.broadcast_to(u, V.shape)
    s_q = np.broadcast_to(np.asarray(s_q, dtype=float), (n,))
    s_xy = np.broadcast_to(np.asarray(s_xy, dtype=float), (n,))

    m0 = moment_matrix(variant, lam).m
    m0_inv = m0.T / np.einsum("kj,kj->k", m0, m0)

    # f_eq does not depend on u_rel, so build it from the u_rel = 0 moments
    meq = np.empty((n, 4))
    meq[:, 0] = 1.0
    meq[:, 1] = V[:, 0]
    meq[:, 2] = V[:, 1]
    if equilibrium is Equilibrium.INTRINSIC:
        meq[:, 3] = 0.0
    elif variant is Variant.TWISTED:
        meq[:, 3] = V[:, 0] * V[:, 1]
    else:
        meq[:, 3] = V[:, 0] ** 2 - V[:, 1] ** 2
    feq = meq @ m0_inv.T

    t = _shift_matrices(variant, u[:, 0], u[:, 1])
    t_inv = _shift_matrices(variant, -u[:, 0], -u[:, 1])
    d = np.zeros((n, 4, 4))
    d[:, 1, 1] = s_q
    d[:, 2, 2] = s_q
    d[:, 3, 3] = s_xy
    relax = m0_inv @ (t_inv @ d @ t) @ m0  # M^-1 D M, batched
    e_minus_i = feq[:, :, None] - np.eye(4)[None]
    return np.eye(4)[None] + relax @ e_minus_i
