"""Pure-numpy versions of the compiled kernels (same signatures and results)."""

from __future__ import annotations

import numpy as np

_EIG_CHUNK = 4096


def _state_check(f, limit):
    rho = f.sum(axis=0)
    bad = not bool(np.all(np.abs(rho) <= limit))
    return bad, float(rho.min()), float(rho.max())


def spot_run(f, C, shifts, n_steps, limit):
    """Advance ``f`` (shape (4, ny, nx)) by up to ``n_steps`` steps in place.

    Returns ``(steps_done, blowup_step, rho_min, rho_max)``; ``blowup_step``
    is -1 when every visited state satisfied ``|rho| <= limit``.
    """
    if f.shape[0] != 4:
        raise ValueError("f must have shape (4, ny, nx)")
    cur = f.copy()
    C = np.asarray(C, dtype=float)
    for t in range(n_steps + 1):
        bad, rmin, rmax = _state_check(cur, limit)
        if bad and t > 0:
            f[...] = cur
            return t, t, rmin, rmax
        if t == n_steps:
            break
        post = np.einsum("ij,jyx->iyx", C, cur)
        for j in range(4):
            # shifts are (dx, dy); axis 0 is y
            cur[j] = np.roll(post[j], (int(shifts[j, 1]), int(shifts[j, 0])), axis=(0, 1))
    f[...] = cur
    return n_steps, -1, rmin, rmax


def spectral_radii(mats):
    """Spectral radius of each matrix in an ``(n, 4, 4)`` stack."""
    mats = np.asarray(mats)
    out = np.empty(mats.shape[0])
    for lo in range(0, mats.shape[0], _EIG_CHUNK):
        out[lo:lo + _EIG_CHUNK] = np.abs(np.linalg.eigvals(mats[lo:lo + _EIG_CHUNK])).max(axis=-1)
    return out


def max_spectral_radius(C, a):
    """``max_k r(diag(a[k]) C[v])`` for each ``v``; returns ``(radii, 0)``."""
    C = np.asarray(C)
    a = np.asarray(a)
    out = np.empty(C.shape[0])
    per = max(1, _EIG_CHUNK // max(1, a.shape[0]))
    for lo in range(0, C.shape[0], per):
        block = a[None, :, :, None] * C[lo:lo + per, None, :, :]
        r = np.abs(np.linalg.eigvals(block)).max(axis=-1)
        out[lo:lo + per] = r.max(axis=1)
    return out, 0
