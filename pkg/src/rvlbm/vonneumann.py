"""Fourier (von Neumann) analysis: amplification matrices and stability scans.

For a wave number ``k`` the one-step operator is ``L(k) = A(k) C`` with
``A_jj = exp(i Δt k·v_j)``. With ``Δx = 1`` the phase is ``k·e_j`` for the
integer cell shift ``e_j``, so one period ``[0, 2π)²`` covers every ``k``.
Because ``C`` is real, ``L(-k)`` is the complex conjugate of ``L(k)`` and the
scan only needs ``ky ∈ [0, π]``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .lattice import (
    RelativeMode,
    SchemeSpec,
    collision_matrices,
    collision_matrix,
    lattice_shifts,
    velocities,
)

VERDICT_TOL = 1e-10
DEFAULT_K = 64
REFINED_K = 128
_CHUNK = 256


@dataclass(frozen=True)
class AmplificationMatrix:
    l: np.ndarray

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.l)).max())


@dataclass(frozen=True)
class RegionGrid:
    """Max-over-k spectral radius sampled on ``v_axis_y × v_axis_x`` (rows are Vy)."""

    v_axis_x: np.ndarray
    v_axis_y: np.ndarray
    values: np.ndarray
    verdict: np.ndarray

    def points(self):
        """Flattened ``(Vx, Vy, max_r, verdict)`` rows in row-major order."""
        VX, VY = np.meshgrid(self.v_axis_x, self.v_axis_y)
        return VX.ravel(), VY.ravel(), self.values.ravel(), self.verdict.ravel()


def amplification_matrix(spec: SchemeSpec, k) -> AmplificationMatrix:
    """``L = A(k) C`` with ``A_jj = exp(i Δt k·v_j)``."""
    k = np.asarray(k, dtype=float)
    phase = velocities(spec.variant, spec.lam) @ k * spec.dt
    return AmplificationMatrix(np.exp(1j * phase)[:, None] * collision_matrix(spec))


def k_half_grid(n: int) -> np.ndarray:
    """Wave numbers ``2π (i, j)/n`` with ``0 ≤ i < n`` and ``0 ≤ j ≤ n/2``."""
    if n < 2:
        raise ValueError("k-grid needs at least 2 points per axis")
    kx = 2 * np.pi * np.arange(n) / n
    ky = 2 * np.pi * np.arange(n // 2 + 1) / n
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    return np.stack([KX.ravel(), KY.ravel()], axis=1)


def phase_factors(variant, n: int) -> np.ndarray:
    """``(nk, 4)`` array of ``exp(i k·e_j)`` over the half grid."""
    k = k_half_grid(n)
    return np.ascontiguousarray(np.exp(1j * (k @ lattice_shifts(variant).T.astype(float))))


def _batched_radius(C, a, threads, backend):
    kern = backend or _backend.kernels
    chunks = [np.ascontiguousarray(C[lo:lo + _CHUNK]) for lo in range(0, len(C), _CHUNK)]

    def work(block):
        r, fails = kern.max_spectral_radius(block, a)
        if fails:
            raise RuntimeError(f"eigenvalue iteration failed on {fails} matrices")
        return r

    if threads <= 1 or len(chunks) == 1:
        parts = [work(b) for b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    return np.concatenate(parts) if parts else np.empty(0)


def max_spectral_radius(spec: SchemeSpec, n_k: int = DEFAULT_K, backend=None) -> float:
    """``max_k r(L(k))`` over an ``n_k × n_k`` grid of one period."""
    if n_k < 16:
        raise ValueError("k-grid must be at least 16x16")
    C = collision_matrix(spec)[None]
    return float(_batched_radius(C, phase_factors(spec.variant, n_k), 1, backend)[0])


def max_spectral_radii(template: SchemeSpec, mode, V, n_k: int = DEFAULT_K,
                       threads: int = 1, backend=None) -> np.ndarray:
    """Vectorised :func:`max_spectral_radius` for a batch of velocities ``V`` (n, 2)."""
    mode = mode if isinstance(mode, RelativeMode) else RelativeMode(mode)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    u = np.zeros_like(V) if mode is RelativeMode.ZERO else V
    C = collision_matrices(template.variant, template.lam, template.s_q, template.s_xy,
                           V, u, template.equilibrium)
    return _batched_radius(C, phase_factors(template.variant, n_k), threads, backend)


def velocity_axis(v_max: float = 1.5, step: float = 0.02) -> np.ndarray:
    """Symmetric axis ``-v_max .. v_max`` built from integer multiples of ``step``."""
    n = int(round(v_max / step))
    return np.arange(-n, n + 1) * step


def _boundary_cells(verdict: np.ndarray) -> np.ndarray:
    edge = np.zeros_like(verdict)
    dy = verdict[1:, :] != verdict[:-1, :]
    dx = verdict[:, 1:] != verdict[:, :-1]
    edge[1:, :] |= dy
    edge[:-1, :] |= dy
    edge[:, 1:] |= dx
    edge[:, :-1] |= dx
    return edge


def _is_symmetric_axis(axis: np.ndarray) -> bool:
    return bool(np.array_equal(axis, -axis[::-1]))


def _evaluate(template, mode, axis, cells, n_k, threads, backend, symmetric):
    """Radii at grid cells ``cells`` (``(m, 2)`` of (iy, ix) indices)."""
    lam = template.lam
    if not symmetric:
        V = np.stack([axis[cells[:, 1]], axis[cells[:, 0]]], axis=1) * lam
        return max_spectral_radii(template, mode, V, n_k, threads, backend)
    # Both lattices are invariant under Vx -> -Vx, Vy -> -Vy and x <-> y (a
    # relabelling of the velocities that maps the k-grid onto itself), so
    # every cell is evaluated at its representative with 0 <= Vy <= Vx.
    c = (len(axis) - 1) // 2
    a = np.abs(cells[:, 1] - c)
    b = np.abs(cells[:, 0] - c)
    canon = np.stack([np.maximum(a, b), np.minimum(a, b)], axis=1)
    reps, inverse = np.unique(canon, axis=0, return_inverse=True)
    V = np.stack([axis[c + reps[:, 0]], axis[c + reps[:, 1]]], axis=1) * lam
    return max_spectral_radii(template, mode, V, n_k, threads, backend)[inverse.ravel()]


def stability_region_scan(template: SchemeSpec, mode, v_axis=None, n_k: int = DEFAULT_K,
                          refine_k: int | None = REFINED_K, threads: int = 1,
                          tol: float = VERDICT_TOL, symmetric: bool = True,
                          backend=None) -> RegionGrid:
    """Verdict ``max_k r(L) ≤ 1 + tol`` on the square grid ``v_axis × v_axis``.

    ``v_axis`` is in units of λ. Cells whose verdict differs from a neighbour
    are recomputed on the finer ``refine_k`` grid (skip with ``None``). With
    ``symmetric`` and an axis symmetric about 0, only one eighth of the grid
    is computed and the rest is mirrored.
    """
    axis = velocity_axis() if v_axis is None else np.asarray(v_axis, dtype=float)
    symmetric = symmetric and _is_symmetric_axis(axis)
    n = len(axis)
    IY, IX = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    cells = np.stack([IY.ravel(), IX.ravel()], axis=1)
    values = _evaluate(template, mode, axis, cells, n_k, threads, backend, symmetric)
    values = values.reshape(n, n)
    verdict = values <= 1.0 + tol
    if refine_k and refine_k > n_k:
        edge = _boundary_cells(verdict)
        if edge.any():
            values[edge] = _evaluate(template, mode, axis, np.argwhere(edge), refine_k,
                                     threads, backend, symmetric)
            verdict = values <= 1.0 + tol
    return RegionGrid(axis.copy(), axis.copy(), values, verdict)
