"""Distributed shape derivatives and the H1 descent direction.

A right-hand side vector ``r`` holds ``r[dof] = -dJ(Omega; xi_dof)`` for the
P1 basis fields ``xi_dof``. The descent direction solves ``B theta = r`` so
that ``dJ(Omega; theta) = -theta' B theta``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .elasticity import (
    STRONG,
    MaterialParams,
    SparseOperator,
    _scatter,
    cell_coefficients,
    displacement_gradients,
    facet_mass,
    solve,
)
from .exceptions import ConfigurationError
from .grid import BoundaryFacets, CrossedMesh, GridMap

ALPHA1 = 1.0
ALPHA2 = 0.1
PENALTY = 1.0e4
FIXED_PENALTY = 1.0e5


def assemble_descent_operator(
    mesh: CrossedMesh,
    boundary: BoundaryFacets,
    alpha1: float = ALPHA1,
    alpha2: float = ALPHA2,
    penalty: float = PENALTY,
    fixed: np.ndarray | None = None,
    fixed_penalty: float = FIXED_PENALTY,
) -> SparseOperator:
    """Matrix of ``alpha1 (Dtheta, Dxi) + alpha2 (theta, xi) + penalty <theta.n, xi.n>``.

    The boundary term runs over every facet in ``boundary``. When the boolean
    triangle mask ``fixed`` is given, the H1 part is assembled only off the
    fixed triangles and ``fixed_penalty * (theta, xi)`` is added on them.
    """
    if min(alpha1, alpha2, penalty) <= 0:
        raise ConfigurationError("alpha1, alpha2 and penalty must be positive")
    n = 2 * mesh.n_vertices
    T = mesh.n_triangles
    free = np.ones(T, dtype=bool) if fixed is None else ~np.asarray(fixed, dtype=bool)

    stiff = np.einsum("tai,tbi->tab", mesh.grads, mesh.grads) * mesh.areas[:, None, None]
    mass = (np.ones((3, 3)) + np.eye(3)) / 12.0 * mesh.areas[:, None, None]
    w = np.where(free, 1.0, 0.0)[:, None, None]
    local = w * (alpha1 * stiff + alpha2 * mass)
    if fixed is not None:
        local = local + (1.0 - w) * fixed_penalty * mass

    rows, cols, vals = [], [], []
    t = mesh.triangles
    for c in range(2):
        d = 2 * t + c
        rows.append(np.repeat(d[:, :, None], 3, axis=2))
        cols.append(np.repeat(d[:, None, :], 3, axis=1))
        vals.append(local)
    B = _scatter(np.stack(rows), np.stack(cols), np.stack(vals), n)

    if len(boundary):
        Mf = penalty * facet_mass(boundary.lengths)  # (F, 2, 2) over endpoints
        nn = np.einsum("fi,fj->fij", boundary.normals, boundary.normals)
        # (F, a, i, b, j): endpoint a component i against endpoint b component j
        blk = np.einsum("fab,fij->faibj", Mf, nn)
        d = 2 * boundary.facets[:, :, None] + np.arange(2)[None, None, :]  # (F, 2, 2)
        d = d.reshape(-1, 4)
        rows_f = np.repeat(d[:, :, None], 4, axis=2)
        cols_f = np.repeat(d[:, None, :], 4, axis=1)
        B = B + _scatter(rows_f, cols_f, blk.reshape(-1, 4, 4), n)
    return SparseOperator(B.tocsr())


def _assemble_tensor(mesh: CrossedMesh, tensor: np.ndarray) -> np.ndarray:
    """Vector ``-int T : D xi`` for a piecewise-constant ``(T, 2, 2)`` tensor."""
    # contribution to (vertex a, component k) is area * T[k, :] . grad N_a
    loc = -np.einsum("tkj,taj->tak", tensor, mesh.grads) * mesh.areas[:, None, None]
    dofs = 2 * mesh.triangles[:, :, None] + np.arange(2)
    return np.bincount(dofs.ravel(), weights=loc.ravel(), minlength=2 * mesh.n_vertices)


def _volume_tensor(mesh: CrossedMesh, tags: np.ndarray, Lambda: float) -> np.ndarray:
    on = (np.asarray(tags) == STRONG).astype(float)
    return Lambda * on[:, None, None] * np.eye(2)


def compliance_rhs(mesh: CrossedMesh, tags, mat: MaterialParams, states, Lambda: float) -> np.ndarray:
    """``-dJ(xi)`` for the (multi-load) compliance plus ``Lambda * volume``."""
    tags = np.asarray(tags)
    coef = cell_coefficients(tags, mat)
    mu, lmbda = mat.mu, mat.lmbda
    I = np.eye(2)
    S = np.zeros((mesh.n_triangles, 2, 2))
    for u in states:
        if np.shape(u) != (2 * mesh.n_vertices,):
            raise ConfigurationError("state does not match the mesh")
        Du = displacement_gradients(mesh, u)
        eu = 0.5 * (Du + Du.transpose(0, 2, 1))
        divu = np.trace(Du, axis1=1, axis2=2)
        DuT_eu = np.einsum("tji,tjk->tik", Du, eu)
        ee = np.einsum("tij,tij->t", eu, eu)
        S1 = 2 * mu * (2 * DuT_eu - ee[:, None, None] * I) + lmbda * (
            2 * divu[:, None, None] * Du.transpose(0, 2, 1) - (divu**2)[:, None, None] * I
        )
        S += coef[:, None, None] * S1
    return _assemble_tensor(mesh, S + _volume_tensor(mesh, tags, Lambda))


def _stress(eps: np.ndarray, mat: MaterialParams) -> np.ndarray:
    tr = np.trace(eps, axis1=1, axis2=2)
    return 2 * mat.mu * eps + mat.lmbda * tr[:, None, None] * np.eye(2)


def general_tensor(mesh: CrossedMesh, tags, mat: MaterialParams, u, p, c1: float) -> np.ndarray:
    """Per-triangle ``S1`` of ``c1 * compliance + boundary term`` with adjoint ``p``."""
    coef = cell_coefficients(tags, mat)
    Du = displacement_gradients(mesh, u)
    Dp = displacement_gradients(mesh, p)
    eu = 0.5 * (Du + Du.transpose(0, 2, 1))
    ep = 0.5 * (Dp + Dp.transpose(0, 2, 1))
    su = coef[:, None, None] * _stress(eu, mat)
    sp_ = coef[:, None, None] * _stress(ep, mat)
    DuT = Du.transpose(0, 2, 1)
    DpT = Dp.transpose(0, 2, 1)
    S1 = -DuT @ sp_ - DpT @ su - 2 * c1 * DuT @ su
    scalar = np.einsum("tij,tij->t", su, ep) + c1 * np.einsum("tij,tij->t", su, eu)
    return S1 + scalar[:, None, None] * np.eye(2)


def general_rhs(mesh: CrossedMesh, tags, mat: MaterialParams, u, p, Lambda: float, c1: float = 1.0) -> np.ndarray:
    tensor = general_tensor(mesh, tags, mat, u, p, c1)
    return _assemble_tensor(mesh, tensor + _volume_tensor(mesh, tags, Lambda))


def inverter_rhs(mesh: CrossedMesh, tags, mat: MaterialParams, u, p, Lambda: float) -> np.ndarray:
    """``-dJ(xi)`` for the mechanism objective plus ``Lambda * volume``."""
    return general_rhs(mesh, tags, mat, u, p, Lambda, c1=0.0)


def solve_descent(op: SparseOperator, rhs: np.ndarray) -> np.ndarray:
    """Descent direction; the operator keeps its factorization for later calls."""
    return solve(op, rhs)


def restrict_to_grid(theta: np.ndarray, gmap: GridMap):
    """Grid-node values ``(theta_x, theta_y)`` of a nodal vector field."""
    th = np.asarray(theta).reshape(-1, 2)
    idx = gmap.node_vertex
    return th[idx, 0].copy(), th[idx, 1].copy()


def quadratic_form(op: SparseOperator, theta: np.ndarray) -> float:
    return float(theta @ (op.matrix @ theta))


def is_symmetric(A: sp.spmatrix, rtol: float = 1e-12) -> bool:
    diff = abs(A - A.T).max()
    return diff <= rtol * abs(A).max()
