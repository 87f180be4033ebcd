"""Weighted L² stability through a diagonal symmetriser of the collision.

``J = C - I`` admits a pre-structure of stability when some invertible ``P``
with ``PᵀP`` diagonal makes ``P J P⁻¹`` diagonal. That happens exactly when
``J Λ = Λ Jᵀ`` has a solution ``Λ`` that is diagonal and positive definite;
then ``S = Λ^{-1/2} J Λ^{1/2}`` is symmetric and ``P = Qᵀ Λ^{-1/2}`` for the
eigenvectors ``Q`` of ``S``. Transport is an isometry for any norm
``Σ_x |P f(x)|²`` with ``PᵀP`` diagonal, so the collision decides the rest:
the scheme is contractive when every relaxation rate lies in ``[0, 2]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .lattice import SchemeSpec, collision_generator, collision_matrix

POSITIVITY_TOL = 1e-9
RANK_TOL = 1e-10
RATE_TOL = 1e-10


class Verdict(str, enum.Enum):
    NONE = "none"
    PRESTRUCTURE = "prestructure"
    STRUCTURE = "structure"


@dataclass(frozen=True)
class StabilityStructure:
    lambda_diag: np.ndarray
    p: np.ndarray
    eigs: np.ndarray
    is_structure: bool


def symmetry_system(J: np.ndarray) -> np.ndarray:
    """Matrix ``A`` with ``A @ diag(Λ)`` listing ``(JΛ - ΛJᵀ)_ij`` for ``i < j``."""
    n = J.shape[0]
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            r = np.zeros(n)
            r[j] += J[i, j]
            r[i] -= J[j, i]
            rows.append(r)
    return np.array(rows)


def _nullspace(A: np.ndarray) -> np.ndarray:
    _, sv, vt = np.linalg.svd(A)
    top = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > RANK_TOL * top)) if top > 0 else 0
    return vt[rank:].T


def _positive_member(N: np.ndarray) -> Optional[np.ndarray]:
    """A vector of ``span(N)`` with max entry 1 and all entries > tol, if any."""
    n, d = N.shape
    if d == 0:
        return None
    if d == 1:
        v = N[:, 0]
        v = v / v[np.argmax(np.abs(v))]
        return v if np.all(v > POSITIVITY_TOL) else None
    # maximise t subject to N c >= t and N c <= 1
    cost = np.zeros(d + 1)
    cost[-1] = -1.0
    a_ub = np.vstack([np.hstack([-N, np.ones((n, 1))]), np.hstack([N, np.zeros((n, 1))])])
    b_ub = np.concatenate([np.zeros(n), np.ones(n)])
    bounds = [(None, None)] * d + [(None, 1.0)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success or -res.fun <= POSITIVITY_TOL:
        return None
    v = N @ res.x[:d]
    v = v / v.max()
    return v if np.all(v > POSITIVITY_TOL) else None


def find_prestructure(J: np.ndarray) -> Optional[StabilityStructure]:
    """Diagonal ``Λ > 0`` with ``J Λ = Λ Jᵀ`` and the weight ``P``, or None."""
    J = np.asarray(J, dtype=float)
    lam = _positive_member(_nullspace(symmetry_system(J)))
    if lam is None:
        return None
    root = np.sqrt(lam)
    S = (J * root[None, :]) / root[:, None]
    S = 0.5 * (S + S.T)
    eigs, Q = np.linalg.eigh(S)
    P = Q.T / root[None, :]
    rates = -eigs
    ok = bool(np.all((rates >= -RATE_TOL) & (rates <= 2.0 + RATE_TOL)))
    return StabilityStructure(lam, P, eigs, ok)


def check_structure(spec: SchemeSpec) -> Verdict:
    """Classify the scheme's collision as none / pre-structure / structure."""
    found = find_prestructure(collision_generator(spec))
    if found is None:
        return Verdict.NONE
    rates_ok = all(-RATE_TOL <= s <= 2.0 + RATE_TOL for s in (spec.s_q, spec.s_xy))
    return Verdict.STRUCTURE if rates_ok else Verdict.PRESTRUCTURE


def weighted_norm_of_collision(R: np.ndarray, P: np.ndarray) -> float:
    """Spectral norm of ``P R P⁻¹``."""
    return float(np.linalg.norm(P @ R @ np.linalg.inv(P), 2))


def lattice_norm(f: np.ndarray, P: np.ndarray) -> float:
    """``sqrt(Σ_x |P f(x)|²)`` for a field of shape ``(4, ny, nx)``."""
    g = np.tensordot(P, f, axes=(1, 0))
    return float(np.sqrt(np.sum(g * g)))


def collision_norm(spec: SchemeSpec) -> Optional[float]:
    """``‖C‖_P`` for the constructed weight, or None without a pre-structure."""
    found = find_prestructure(collision_generator(spec))
    if found is None:
        return None
    return weighted_norm_of_collision(collision_matrix(spec), found.p)
