"""Level-set transport and reinitialization on the Cartesian grid.

Level sets are ``(Ny+1, Nx+1)`` arrays; row ``j`` is ``y = j*ly/Ny`` and
column ``i`` is ``x = i*lx/Nx``. The design is ``{phi < 0}``.
"""

from __future__ import annotations

import logging

import numpy as np

from .elasticity import FIXED, STRONG, WEAK
from .grid import CrossedMesh, GridMap

logger = logging.getLogger(__name__)

HJ_SUBSTEPS = 10
REINIT_SWEEPS = 2


def _pad_back(d: np.ndarray, axis: int) -> np.ndarray:
    # backward difference: first entry repeats the first interior difference
    first = np.take(d, [0], axis=axis)
    return np.concatenate([first, d], axis=axis)


def _pad_forward(d: np.ndarray, axis: int) -> np.ndarray:
    last = np.take(d, [-1], axis=axis)
    return np.concatenate([d, last], axis=axis)


def one_sided_diffs(phi: np.ndarray, lx: float, ly: float):
    """Backward/forward differences ``(Dxm, Dxp, Dym, Dyp)``.

    Rows and columns on the grid boundary reuse the nearest interior
    difference, so e.g. ``Dxm[:, 0] == Dxm[:, 1]``.
    """
    Ny, Nx = phi.shape[0] - 1, phi.shape[1] - 1
    dx = Nx * np.diff(phi, axis=1) / lx
    dy = Ny * np.diff(phi, axis=0) / ly
    return _pad_back(dx, 1), _pad_forward(dx, 1), _pad_back(dy, 0), _pad_forward(dy, 0)


def max_speed(vx: np.ndarray, vy: np.ndarray) -> float:
    return float(np.max(np.abs(vx) + np.abs(vy)))


def advect(phi: np.ndarray, vx: np.ndarray, vy: np.ndarray, beta: float, lx: float, ly: float, substeps: int = HJ_SUBSTEPS) -> np.ndarray:
    """Transport ``phi`` by the velocity ``(vx, vy)`` with a Lax-Friedrichs scheme.

    Takes ``substeps`` forward Euler steps of size ``beta*h/max|v|``, where
    ``max|v|`` is the grid maximum of ``|vx| + |vy|``. A zero velocity leaves
    ``phi`` unchanged.
    """
    Nx = phi.shape[1] - 1
    maxv = max_speed(vx, vy)
    if maxv == 0.0:
        logger.warning("zero velocity field, level set not moved")
        return phi.copy()
    dt = beta * lx / (Nx * maxv)
    avx, avy = np.abs(vx), np.abs(vy)
    for _ in range(substeps):
        Dxm, Dxp, Dym, Dyp = one_sided_diffs(phi, lx, ly)
        g = 0.5 * (vx * (Dxp + Dxm) + vy * (Dyp + Dym)) - 0.5 * (
            avx * (Dxp - Dxm) + avy * (Dyp - Dym)
        )
        phi = phi - dt * g
    return phi


def reinitialize(phi: np.ndarray, lx: float, ly: float, sweeps: int = REINIT_SWEEPS) -> np.ndarray:
    """Relax ``phi`` towards a signed distance function.

    The smoothed sign uses centred differences and ``eps = lx/Nx`` and stays
    frozen during the upwind sweeps.
    """
    Nx = phi.shape[1] - 1
    h = lx / Nx
    Dxm, Dxp, Dym, Dyp = one_sided_diffs(phi, lx, ly)
    Dxs = 0.5 * (Dxm + Dxp)
    Dys = 0.5 * (Dym + Dyp)
    S = phi / np.sqrt(phi**2 + h**2 * (Dxs**2 + Dys**2))
    for _ in range(sweeps):
        Dxm, Dxp, Dym, Dyp = one_sided_diffs(phi, lx, ly)
        Kp = np.sqrt(
            np.maximum(Dxm, 0) ** 2 + np.minimum(Dxp, 0) ** 2
            + np.maximum(Dym, 0) ** 2 + np.minimum(Dyp, 0) ** 2
        )
        Km = np.sqrt(
            np.minimum(Dxm, 0) ** 2 + np.maximum(Dxp, 0) ** 2
            + np.minimum(Dym, 0) ** 2 + np.maximum(Dyp, 0) ** 2
        )
        g = np.maximum(S, 0) * Kp + np.minimum(S, 0) * Km
        phi = phi - 0.5 * h * (g - S)
    return phi


def interpolate_to_mesh(phi: np.ndarray, gmap: GridMap) -> np.ndarray:
    """Nodal values on the crossed mesh; centres get the mean of their 4 corners."""
    out = np.empty(gmap.grid_of_vertex.shape[0])
    out[gmap.node_vertex.ravel()] = phi.ravel()
    c = gmap.corners_of_center
    i0, j0 = c[:, 0, 0], c[:, 0, 1]
    out[gmap.center_vertices] = 0.25 * (
        phi[j0, i0] + phi[j0 + 1, i0] + phi[j0, i0 + 1] + phi[j0 + 1, i0 + 1]
    )
    return out


def classify_cells(phi_mesh: np.ndarray, mesh: CrossedMesh, fixed: np.ndarray | None = None) -> np.ndarray:
    """Tag triangles: 1 if ``phi < 0`` at all three vertices, else 0.

    Triangles flagged in the boolean mask ``fixed`` get tag 2 unconditionally.
    """
    inside = np.all(phi_mesh[mesh.triangles] < 0.0, axis=1)
    tags = np.where(inside, STRONG, WEAK).astype(np.int64)
    if fixed is not None:
        tags[np.asarray(fixed, dtype=bool)] = FIXED
    return tags

