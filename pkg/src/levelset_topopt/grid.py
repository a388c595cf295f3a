"""Crossed-triangle mesh of a rectangle and its companion Cartesian grid.

Vertex ordering is fixed: the ``(Nx+1)*(Ny+1)`` grid nodes first, row-major
(``v = j*(Nx+1) + i``), then the ``Nx*Ny`` cell centres, row-major
(``v = G + j*Nx + i`` with ``G`` the number of grid nodes). Each cell ``(i, j)``
owns four counter-clockwise triangles ``4*(j*Nx+i) + k``: bottom, right, top,
left, all sharing the centre vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError

TOL = 1e-14

GRID_NODE = 0
CELL_CENTER = 1

# boundary facet tags
TAG_FREE = 0
TAG_DIRICHLET = 1
TAG_OUTPUT = 2
TAG_INPUT = 3

SIDES = ("bottom", "right", "top", "left")
_OUTWARD = {
    "bottom": (0.0, -1.0),
    "right": (1.0, 0.0),
    "top": (0.0, 1.0),
    "left": (-1.0, 0.0),
}


@dataclass(frozen=True, eq=False)
class CrossedMesh:
    lx: float
    ly: float
    Nx: int
    Ny: int
    vertices: np.ndarray  # (V, 2)
    triangles: np.ndarray  # (T, 3)
    vertex_kind: np.ndarray  # (V,), GRID_NODE or CELL_CENTER
    areas: np.ndarray = field(repr=False)  # (T,)
    grads: np.ndarray = field(repr=False)  # (T, 3, 2) P1 basis gradients

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_grid_nodes(self) -> int:
        return (self.Nx + 1) * (self.Ny + 1)

    @property
    def h(self) -> float:
        """Cell size ``lx/Nx`` (equal to ``ly/Ny``)."""
        return self.lx / self.Nx

    def node_index(self, i, j):
        return np.asarray(j) * (self.Nx + 1) + np.asarray(i)

    def center_index(self, i, j):
        return self.n_grid_nodes + np.asarray(j) * self.Nx + np.asarray(i)

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def nearest_vertex(self, point) -> int:
        """Index of the vertex closest to ``point`` (within one cell diagonal)."""
        p = np.asarray(point, dtype=float)
        d = np.hypot(*(self.vertices - p).T)
        v = int(np.argmin(d))
        if d[v] > math.sqrt(2.0) * self.h:
            raise ConfigurationError(f"no mesh vertex near {tuple(p)}")
        return v


@dataclass(frozen=True, eq=False)
class GridMap:
    """Correspondence between mesh vertices and Cartesian grid indices.

    ``grid_of_vertex[v] = (i, j)`` for grid nodes and ``(-1, -1)`` for centres.
    ``node_vertex[j, i]`` is the inverse map. ``center_vertices`` lists the
    centre vertices and ``corners_of_center[k]`` the four ``(i, j)`` corners of
    ``center_vertices[k]``, ordered ``(i,j), (i,j+1), (i+1,j), (i+1,j+1)``.
    """

    grid_of_vertex: np.ndarray
    node_vertex: np.ndarray
    center_vertices: np.ndarray
    corners_of_center: np.ndarray


@dataclass(frozen=True, eq=False)
class BoundaryFacets:
    """Exterior edges of the mesh with region tags and outward normals."""

    facets: np.ndarray  # (F, 2) vertex indices
    tags: np.ndarray  # (F,)
    normals: np.ndarray  # (F, 2)
    lengths: np.ndarray  # (F,)
    sides: tuple  # side name per facet

    def __len__(self) -> int:
        return self.facets.shape[0]

    def with_tag(self, tag: int) -> "BoundaryFacets":
        return self.subset(self.tags == tag)

    def subset(self, mask) -> "BoundaryFacets":
        mask = np.asarray(mask, dtype=bool)
        return BoundaryFacets(
            self.facets[mask],
            self.tags[mask],
            self.normals[mask],
            self.lengths[mask],
            tuple(s for s, m in zip(self.sides, mask) if m),
        )


def build_mesh(lx: float, ly: float, Nx: int, Ny: int) -> CrossedMesh:
    """Crossed triangulation of ``[0, lx] x [0, ly]`` with ``Nx x Ny`` squares."""
    if int(Nx) != Nx or int(Ny) != Ny or Nx < 1 or Ny < 1:
        raise ConfigurationError(f"Nx, Ny must be positive integers, got {Nx}, {Ny}")
    Nx, Ny = int(Nx), int(Ny)
    if lx <= 0 or ly <= 0:
        raise ConfigurationError("domain extents must be positive")
    hx, hy = lx / Nx, ly / Ny
    if abs(hx - hy) > 1e-12 * max(hx, hy):
        raise ConfigurationError(
            f"cells are not square: lx/Nx = {hx!r}, ly/Ny = {hy!r}"
        )

    i = np.arange(Nx + 1)
    j = np.arange(Ny + 1)
    X, Y = np.meshgrid(i * lx / Nx, j * ly / Ny)
    ic = np.arange(Nx)
    jc = np.arange(Ny)
    XC, YC = np.meshgrid((2 * ic + 1) * lx / (2 * Nx), (2 * jc + 1) * ly / (2 * Ny))
    vertices = np.vstack(
        [
            np.column_stack([X.ravel(), Y.ravel()]),
            np.column_stack([XC.ravel(), YC.ravel()]),
        ]
    )
    G = (Nx + 1) * (Ny + 1)
    kind = np.concatenate(
        [np.full(G, GRID_NODE, dtype=np.int8), np.full(Nx * Ny, CELL_CENTER, dtype=np.int8)]
    )

    I, J = np.meshgrid(ic, jc)
    I, J = I.ravel(), J.ravel()
    a = J * (Nx + 1) + I
    b = a + 1
    c = b + Nx + 1
    d = a + Nx + 1
    m = G + J * Nx + I
    tri = np.stack(
        [
            np.column_stack([a, b, m]),
            np.column_stack([b, c, m]),
            np.column_stack([c, d, m]),
            np.column_stack([d, a, m]),
        ],
        axis=1,
    ).reshape(-1, 3)

    areas, grads = _p1_geometry(vertices, tri)
    return CrossedMesh(float(lx), float(ly), Nx, Ny, vertices, tri, kind, areas, grads)


def _p1_geometry(vertices: np.ndarray, triangles: np.ndarray):
    p = vertices[triangles]  # (T, 3, 2)
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    areas = 0.5 * np.abs(det)
    # gradient of barycentric coordinate k is rot(opposite edge) / (2*area)
    grads = np.empty_like(p)
    for k in range(3):
        q1 = p[:, (k + 1) % 3]
        q2 = p[:, (k + 2) % 3]
        grads[:, k, 0] = (q1[:, 1] - q2[:, 1]) / det
        grads[:, k, 1] = (q2[:, 0] - q1[:, 0]) / det
    return areas, grads


def build_grid_map(mesh: CrossedMesh) -> GridMap:
    """Classify vertices by the parity of ``2*Nx*x/lx`` and ``2*Ny*y/ly``."""
    px = np.rint(2 * mesh.Nx * mesh.vertices[:, 0] / mesh.lx).astype(np.int64)
    py = np.rint(2 * mesh.Ny * mesh.vertices[:, 1] / mesh.ly).astype(np.int64)
    is_node = (px % 2 == 0) & (py % 2 == 0)

    grid_of_vertex = np.full((mesh.n_vertices, 2), -1, dtype=np.int64)
    grid_of_vertex[is_node, 0] = px[is_node] // 2
    grid_of_vertex[is_node, 1] = py[is_node] // 2
    node_vertex = np.full((mesh.Ny + 1, mesh.Nx + 1), -1, dtype=np.int64)
    nodes = np.flatnonzero(is_node)
    node_vertex[grid_of_vertex[nodes, 1], grid_of_vertex[nodes, 0]] = nodes

    centers = np.flatnonzero(~is_node)
    ci = px[centers] // 2
    cj = py[centers] // 2
    corners = np.stack(
        [
            np.column_stack([ci, cj]),
            np.column_stack([ci, cj + 1]),
            np.column_stack([ci + 1, cj]),
            np.column_stack([ci + 1, cj + 1]),
        ],
        axis=1,
    )
    return GridMap(grid_of_vertex, node_vertex, centers, corners)


# ----------------------------------------------------------------------------
# boundary regions


@dataclass(frozen=True)
class Edge:
    """Part of one side of the rectangle, ``lo <= s <= hi`` along that side.

    ``s`` is ``x`` on the bottom/top sides and ``y`` on the left/right sides.
    """

    side: str
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if self.side not in SIDES:
            raise ConfigurationError(f"unknown side {self.side!r}")

    def span(self, lx: float, ly: float) -> tuple[float, float]:
        top = lx if self.side in ("bottom", "top") else ly
        return max(self.lo, 0.0), min(self.hi, top)

    def check(self, lx: float, ly: float) -> None:
        top = lx if self.side in ("bottom", "top") else ly
        if self.lo > top + TOL or self.hi < -TOL:
            raise ConfigurationError(f"{self} lies outside the domain boundary")

    def contains(self, points: np.ndarray, lx: float, ly: float) -> np.ndarray:
        x, y = points[..., 0], points[..., 1]
        if self.side == "bottom":
            on, s = np.abs(y) < TOL, x
        elif self.side == "top":
            on, s = np.abs(y - ly) < TOL, x
        elif self.side == "left":
            on, s = np.abs(x) < TOL, y
        else:
            on, s = np.abs(x - lx) < TOL, y
        return on & (s >= self.lo - TOL) & (s <= self.hi + TOL)

    def length(self, lx: float, ly: float) -> float:
        lo, hi = self.span(lx, ly)
        return max(hi - lo, 0.0)


def on_boundary(point, lx: float, ly: float) -> bool:
    x, y = point
    inside = -TOL <= x <= lx + TOL and -TOL <= y <= ly + TOL
    edge = min(abs(x), abs(y), abs(x - lx), abs(y - ly)) < TOL
    return inside and edge


def exterior_facets(mesh: CrossedMesh) -> BoundaryFacets:
    """All exterior edges, counter-clockwise by side, tagged ``TAG_FREE``."""
    Nx, Ny = mesh.Nx, mesh.Ny
    i = np.arange(Nx)
    j = np.arange(Ny)
    parts = {
        "bottom": np.column_stack([mesh.node_index(i, 0), mesh.node_index(i + 1, 0)]),
        "right": np.column_stack([mesh.node_index(Nx, j), mesh.node_index(Nx, j + 1)]),
        "top": np.column_stack([mesh.node_index(i + 1, Ny), mesh.node_index(i, Ny)])[::-1],
        "left": np.column_stack([mesh.node_index(0, j + 1), mesh.node_index(0, j)])[::-1],
    }
    facets = np.vstack([parts[s] for s in SIDES])
    sides = tuple(s for s in SIDES for _ in range(len(parts[s])))
    normals = np.array([_OUTWARD[s] for s in sides])
    d = mesh.vertices[facets[:, 1]] - mesh.vertices[facets[:, 0]]
    lengths = np.hypot(d[:, 0], d[:, 1])
    tags = np.full(len(facets), TAG_FREE, dtype=np.int64)
    return BoundaryFacets(facets, tags, normals, lengths, sides)


def facets_in(mesh: CrossedMesh, edge: Edge, facets: BoundaryFacets | None = None) -> np.ndarray:
    """Boolean mask of the facets whose both endpoints lie on ``edge``."""
    facets = exterior_facets(mesh) if facets is None else facets
    edge.check(mesh.lx, mesh.ly)
    ends = mesh.vertices[facets.facets]  # (F, 2, 2)
    inside = edge.contains(ends, mesh.lx, mesh.ly)
    return inside.all(axis=1)


def tag_boundary(mesh: CrossedMesh, case) -> BoundaryFacets:
    """Tag the exterior facets according to the regions of ``case``.

    Each facet takes the tag of the first region that contains it: Dirichlet
    edges (1), then the output edge (2), then the input edge (3); all other
    facets keep tag 0. Pointwise supports never produce facets; they are
    resolved to vertices by :func:`levelset_topopt.elasticity.dirichlet_constraints`.
    """
    facets = exterior_facets(mesh)
    regions = []
    for support in case.supports:
        if isinstance(support.where, Edge):
            regions.append((support.where, TAG_DIRICHLET))
        elif not on_boundary(support.where, mesh.lx, mesh.ly):
            raise ConfigurationError(f"support point {support.where} not on the boundary")
    if case.monitor is not None:
        regions.append((case.monitor.gamma_out, TAG_OUTPUT))
        regions.append((case.monitor.gamma_in, TAG_INPUT))
    tags = facets.tags.copy()
    assigned = np.zeros(len(facets), dtype=bool)
    for edge, tag in regions:
        mask = facets_in(mesh, edge, facets) & ~assigned
        tags[mask] = tag
        assigned |= mask
    return BoundaryFacets(facets.facets, tags, facets.normals, facets.lengths, facets.sides)
