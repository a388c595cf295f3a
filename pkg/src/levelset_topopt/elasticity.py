"""Linearized elasticity with ersatz material on the crossed mesh.

Displacements are P1 vector fields stored interleaved: dof ``2*v`` is the x
component at vertex ``v`` and dof ``2*v+1`` the y component.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import AssemblyError, ConfigurationError, SolverError
from .grid import TOL, BoundaryFacets, CrossedMesh, Edge, facets_in, exterior_facets

logger = logging.getLogger(__name__)

WEAK, STRONG, FIXED = 0, 1, 2

RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class MaterialParams:
    E: float = 1.0
    nu: float = 0.3
    eps_er: float = 0.001

    def __post_init__(self):
        if not 0.0 < self.eps_er < 1.0:
            raise ConfigurationError(f"eps_er must lie in (0, 1), got {self.eps_er}")
        if not -1.0 < self.nu < 0.5:
            raise ConfigurationError(f"Poisson ratio out of range: {self.nu}")

    @property
    def mu(self) -> float:
        return self.E / (2 * (1 + self.nu))

    @property
    def lmbda(self) -> float:
        return self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))


@dataclass(frozen=True)
class LoadSpec:
    """Point force of ``magnitude`` along ``component`` (0 = x, 1 = y)."""

    point: tuple
    component: int
    magnitude: float


def cell_coefficients(tags: np.ndarray, mat: MaterialParams) -> np.ndarray:
    """Stiffness scaling per triangle: ``eps_er`` in the weak phase, 1 elsewhere."""
    return np.where(np.asarray(tags) >= STRONG, 1.0, mat.eps_er)


# ----------------------------------------------------------------------------
# operators


@dataclass(eq=False)
class SparseOperator:
    """Sparse matrix with a lazily computed, reusable LU factorization."""

    matrix: sp.csr_matrix
    _lu: object = field(default=None, repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    def factorization(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.matrix.tocsc())
            except RuntimeError as exc:
                raise SolverError(f"factorization failed: {exc}") from exc
        return self._lu

    @property
    def is_factorized(self) -> bool:
        return self._lu is not None


def _scatter(rows, cols, vals, n) -> sp.csr_matrix:
    A = sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n))
    return A.tocsr()


def element_dofs(mesh: CrossedMesh) -> np.ndarray:
    """``(T, 6)`` dof indices ordered ``(x0, y0, x1, y1, x2, y2)``."""
    t = mesh.triangles
    return np.stack([2 * t, 2 * t + 1], axis=2).reshape(-1, 6)


def strain_matrices(mesh: CrossedMesh) -> np.ndarray:
    """``(T, 3, 6)`` maps from element dofs to ``(e_xx, e_yy, 2 e_xy)``."""
    g = mesh.grads
    B = np.zeros((mesh.n_triangles, 3, 6))
    B[:, 0, 0::2] = g[:, :, 0]
    B[:, 1, 1::2] = g[:, :, 1]
    B[:, 2, 0::2] = g[:, :, 1]
    B[:, 2, 1::2] = g[:, :, 0]
    return B


def facet_mass(lengths: np.ndarray) -> np.ndarray:
    """``(F, 2, 2)`` exact P1 mass matrices of boundary segments."""
    base = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    return lengths[:, None, None] * base


def _robin_matrix(mesh: CrossedMesh, facets: BoundaryFacets, k_s: float) -> sp.csr_matrix:
    n = 2 * mesh.n_vertices
    if len(facets) == 0:
        return sp.csr_matrix((n, n))
    M = k_s * facet_mass(facets.lengths)
    rows, cols, vals = [], [], []
    for c in range(2):
        d = 2 * facets.facets + c
        rows.append(np.repeat(d[:, :, None], 2, axis=2))
        cols.append(np.repeat(d[:, None, :], 2, axis=1))
        vals.append(M)
    return _scatter(np.stack(rows), np.stack(cols), np.stack(vals), n)


def assemble_stiffness(
    mesh: CrossedMesh,
    tags: np.ndarray,
    mat: MaterialParams,
    robin: tuple[BoundaryFacets, float] | None = None,
) -> SparseOperator:
    """Assemble the ersatz-material stiffness matrix, plus the spring term.

    ``robin`` is ``(facets, k_s)``; the facets carry a ``k_s``-scaled boundary
    mass matrix on both displacement components.
    """
    tags = np.asarray(tags)
    if tags.shape != (mesh.n_triangles,):
        raise ConfigurationError("one tag per triangle required")
    if np.any(mesh.areas <= 0.0):
        raise AssemblyError("degenerate triangle in mesh")
    lam, mu = mat.lmbda, mat.mu
    D = np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])
    B = strain_matrices(mesh)
    scale = cell_coefficients(tags, mat) * mesh.areas
    Ke = scale[:, None, None] * np.einsum("tki,kl,tlj->tij", B, D, B)
    dofs = element_dofs(mesh)
    rows = np.repeat(dofs[:, :, None], 6, axis=2)
    cols = np.repeat(dofs[:, None, :], 6, axis=1)
    K = _scatter(rows, cols, Ke, 2 * mesh.n_vertices)
    if robin is not None:
        facets, k_s = robin
        K = K + _robin_matrix(mesh, facets, k_s)
    return SparseOperator(K.tocsr())


def assemble_point_load(mesh: CrossedMesh, load: LoadSpec) -> np.ndarray:
    """Load vector of a point force.

    A force at a vertex lands on that vertex's dof; elsewhere it is spread with
    the P1 barycentric weights of the containing triangle.
    """
    b = np.zeros(2 * mesh.n_vertices)
    x, y = map(float, load.point)
    if not (-TOL <= x <= mesh.lx + TOL and -TOL <= y <= mesh.ly + TOL):
        raise ConfigurationError(f"load point {load.point} outside the domain")
    if load.component not in (0, 1):
        raise ConfigurationError(f"load component must be 0 or 1, got {load.component}")
    if load.magnitude == 0:
        return b
    d = np.hypot(mesh.vertices[:, 0] - x, mesh.vertices[:, 1] - y)
    v = int(np.argmin(d))
    if d[v] <= 1e-12:
        b[2 * v + load.component] += load.magnitude
        return b
    weights, tri = _locate(mesh, x, y)
    b[2 * mesh.triangles[tri] + load.component] += load.magnitude * weights
    return b


def _locate(mesh: CrossedMesh, x: float, y: float):
    i = min(int(x / mesh.h), mesh.Nx - 1)
    j = min(int(y / mesh.h), mesh.Ny - 1)
    best = None
    for k in range(4):
        t = 4 * (j * mesh.Nx + i) + k
        p0 = mesh.vertices[mesh.triangles[t, 0]]
        lam = mesh.grads[t] @ (np.array([x, y]) - p0)
        lam[0] += 1.0
        if best is None or lam.min() > best[0].min():
            best = (lam, t)
    lam, t = best
    lam = np.clip(lam, 0.0, None)
    return lam / lam.sum(), t


def facet_load(mesh: CrossedMesh, facets: BoundaryFacets, component: int, density: float) -> np.ndarray:
    """``density * int_facets xi_component`` for every test dof (trapezoid exact)."""
    b = np.zeros(2 * mesh.n_vertices)
    if len(facets):
        half = 0.5 * density * facets.lengths
        np.add.at(b, 2 * facets.facets[:, 0] + component, half)
        np.add.at(b, 2 * facets.facets[:, 1] + component, half)
    return b


# ----------------------------------------------------------------------------
# Dirichlet conditions and solving


def dirichlet_constraints(mesh: CrossedMesh, case) -> list[tuple[int, float]]:
    """Homogeneous ``(dof, 0.0)`` pairs for every support of ``case``."""
    out = []
    for support in case.supports:
        if isinstance(support.where, Edge):
            verts = np.flatnonzero(support.where.contains(mesh.vertices, mesh.lx, mesh.ly))
        else:
            verts = np.array([mesh.nearest_vertex(support.where)])
        for c in support.components:
            out.extend((int(2 * v + c), 0.0) for v in verts)
    return out


def apply_dirichlet(op: SparseOperator, rhs: np.ndarray, constraints) -> tuple[SparseOperator, np.ndarray]:
    """Replace constrained rows by identity rows; columns are left untouched.

    Returns a fresh operator (no cached factorization) and a modified copy of
    ``rhs``.
    """
    n = op.shape[0]
    values = {}
    for dof, val in constraints:
        dof = int(dof)
        if not 0 <= dof < n:
            raise ConfigurationError(f"constrained dof {dof} out of range")
        if dof in values and values[dof] != val:
            raise ConfigurationError(f"conflicting Dirichlet values on dof {dof}")
        values[dof] = float(val)
    rhs = np.array(rhs, dtype=float, copy=True)
    if not values:
        return SparseOperator(op.matrix.copy()), rhs
    dofs = np.fromiter(values.keys(), dtype=np.int64)
    keep = np.ones(n)
    keep[dofs] = 0.0
    pinned = np.zeros(n)
    pinned[dofs] = 1.0
    A = sp.diags(keep) @ op.matrix + sp.diags(pinned)
    A.eliminate_zeros()
    rhs[dofs] = np.fromiter(values.values(), dtype=float)
    return SparseOperator(A.tocsr()), rhs


def constrain_rhs(rhs: np.ndarray, constraints) -> np.ndarray:
    """Apply the rhs half of :func:`apply_dirichlet` only."""
    rhs = np.array(rhs, dtype=float, copy=True)
    for dof, val in constraints:
        rhs[int(dof)] = val
    return rhs


def solve(op: SparseOperator, rhs: np.ndarray) -> np.ndarray:
    """Direct sparse solve, reusing ``op``'s factorization when present."""
    rhs = np.asarray(rhs, dtype=float)
    lu = op.factorization()
    u = lu.solve(rhs)
    A = op.matrix
    bound = RESIDUAL_RTOL * (1.0 + np.abs(rhs).max(initial=0.0))
    r = rhs - A @ u
    if np.all(np.isfinite(u)) and np.abs(r).max(initial=0.0) > bound:
        # one step of iterative refinement before giving up
        u = u + lu.solve(r)
        r = rhs - A @ u
    if not np.all(np.isfinite(u)) or np.abs(r).max(initial=0.0) > bound:
        raise SolverError(
            "linear solve did not converge (singular or ill-posed system): "
            f"residual {np.abs(r).max() if np.all(np.isfinite(r)) else np.inf:.3e}"
        )
    return u


# ----------------------------------------------------------------------------
# state and adjoint problems


def spring_facets(mesh: CrossedMesh, case) -> BoundaryFacets | None:
    if case.robin is None:
        return None
    facets = exterior_facets(mesh)
    return facets.subset(facets_in(mesh, case.robin.region, facets))


def state_operator(mesh: CrossedMesh, tags, mat: MaterialParams, case) -> SparseOperator:
    """Stiffness with spring term and Dirichlet rows applied, ready to factor."""
    robin = None
    if case.robin is not None:
        robin = (spring_facets(mesh, case), case.robin.k_s)
    K = assemble_stiffness(mesh, tags, mat, robin)
    op, _ = apply_dirichlet(K, np.zeros(K.shape[0]), dirichlet_constraints(mesh, case))
    return op


def solve_states(mesh: CrossedMesh, tags, mat: MaterialParams, case, op: SparseOperator | None = None) -> list[np.ndarray]:
    """One displacement field per load of ``case``; all share one factorization."""
    op = state_operator(mesh, tags, mat, case) if op is None else op
    constraints = dirichlet_constraints(mesh, case)
    states = []
    for load in case.loads:
        b = constrain_rhs(assemble_point_load(mesh, load), constraints)
        states.append(solve(op, b))
    return states


def monitor_load(mesh: CrossedMesh, case) -> np.ndarray:
    """``eta_in int_{Gamma_in} xi_1 + eta_out int_{Gamma_out} xi_1`` as a vector."""
    mon = case.monitor
    facets = exterior_facets(mesh)
    f_in = facets.subset(facets_in(mesh, mon.gamma_in, facets))
    f_out = facets.subset(facets_in(mesh, mon.gamma_out, facets))
    return facet_load(mesh, f_in, 0, mon.eta_in) + facet_load(mesh, f_out, 0, mon.eta_out)


def solve_adjoint_general(
    mesh: CrossedMesh,
    tags,
    mat: MaterialParams,
    case,
    u: np.ndarray,
    c1: float = 1.0,
    c3: float = 0.0,
    op: SparseOperator | None = None,
) -> np.ndarray:
    """Adjoint of ``c1 * compliance + c3 * boundary monitor``.

    Solves ``a(p, v) + k_s(p, v) = -2 c1 a(u, v) - c3 * monitor(v)``. For
    ``(c1, c3) = (1, 0)`` the solution is ``-2u``.
    """
    op = state_operator(mesh, tags, mat, case) if op is None else op
    rhs = np.zeros(2 * mesh.n_vertices)
    if c1:
        K = assemble_stiffness(mesh, tags, mat).matrix
        rhs -= 2.0 * c1 * (K @ u)
    if c3:
        rhs -= c3 * monitor_load(mesh, case)
    rhs = constrain_rhs(rhs, dirichlet_constraints(mesh, case))
    return solve(op, rhs)


def solve_adjoint_inverter(mesh: CrossedMesh, tags, mat: MaterialParams, case, op: SparseOperator | None = None) -> np.ndarray:
    """Adjoint of the inverter objective (no dependence on the state)."""
    if case.monitor is None:
        raise ConfigurationError(f"case {case.name!r} has no monitored boundaries")
    return solve_adjoint_general(mesh, tags, mat, case, np.zeros(2 * mesh.n_vertices), c1=0.0, c3=1.0, op=op)


def displacement_gradients(mesh: CrossedMesh, u: np.ndarray) -> np.ndarray:
    """``(T, 2, 2)`` constant gradients ``Du[i, j] = d u_i / d x_j``."""
    U = u.reshape(-1, 2)[mesh.triangles]  # (T, 3, 2)
    return np.einsum("tki,tkj->tij", U, mesh.grads)
