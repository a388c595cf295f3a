"""Benchmark problems: geometry, supports, loads and initial level sets."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy import pi

from .elasticity import LoadSpec, MaterialParams
from .exceptions import ConfigurationError
from .grid import TOL, CrossedMesh, Edge


@dataclass(frozen=True)
class Support:
    """Zero displacement on ``components`` of an edge or a single point."""

    where: Edge | tuple
    components: tuple = (0, 1)

    @property
    def pointwise(self) -> bool:
        return not isinstance(self.where, Edge)


@dataclass(frozen=True)
class Robin:
    region: Edge
    k_s: float


@dataclass(frozen=True)
class Monitor:
    gamma_in: Edge
    gamma_out: Edge
    eta_in: float
    eta_out: float


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[..., 0], pts[..., 1]
        return (
            (x >= self.x0 - TOL) & (x <= self.x1 + TOL)
            & (y >= self.y0 - TOL) & (y <= self.y1 + TOL)
        )


@dataclass(frozen=True)
class CaseSpec:
    name: str
    lx: float
    ly: float
    nx: int
    ny: int
    Lambda: float
    loads: tuple
    supports: tuple
    init_phi: Callable = field(repr=False, compare=False)
    robin: Robin | None = None
    monitor: Monitor | None = None
    fixed_regions: tuple = ()
    material: MaterialParams = MaterialParams()
    Lambda_alternatives: tuple = ()
    objective: str = "compliance"
    beta0_init: float = 0.5
    itmax_factor: float = 1.5
    penalty: float = 1.0e4
    fixed_penalty: float = 1.0e5
    mirror: str | None = None  # 'x' (about x = lx/2) or 'y' (about y = ly/2)

    @property
    def is_inverter(self) -> bool:
        return self.objective == "inverter"

    def with_grid(self, nx: int, ny: int) -> "CaseSpec":
        return replace(self, nx=int(nx), ny=int(ny))

    def with_lambda(self, Lambda: float) -> "CaseSpec":
        return replace(self, Lambda=float(Lambda))

    def fixed_mask(self, mesh: CrossedMesh) -> np.ndarray | None:
        """Triangles lying entirely in one of the fixed rectangles."""
        if not self.fixed_regions:
            return None
        pts = mesh.vertices[mesh.triangles]
        mask = np.zeros(mesh.n_triangles, dtype=bool)
        for rect in self.fixed_regions:
            mask |= rect.contains(pts).all(axis=1)
        return mask


def grid_coordinates(lx: float, ly: float, Nx: int, Ny: int):
    x = np.arange(Nx + 1) * lx / Nx
    y = np.arange(Ny + 1) * ly / Ny
    return np.meshgrid(x, y)


def init_level_set(case: CaseSpec, Nx: int | None = None, Ny: int | None = None) -> np.ndarray:
    """Sample the case's initial level set on the ``(Ny+1, Nx+1)`` grid."""
    Nx = case.nx if Nx is None else Nx
    Ny = case.ny if Ny is None else Ny
    if abs(case.lx / Nx - case.ly / Ny) > 1e-12 * case.lx / Nx:
        raise ConfigurationError(f"grid {Nx}x{Ny} does not give square cells on {case.name}")
    XX, YY = grid_coordinates(case.lx, case.ly, Nx, Ny)
    return case.init_phi(XX, YY, case.lx, case.ly)


# ----------------------------------------------------------------------------
# initial level sets


def _phi_cantilever(XX, YY, lx, ly):
    return (
        -np.cos(8.0 * pi * XX / lx) * np.cos(4.0 * pi * YY) - 0.4
        + np.maximum(200.0 * (0.01 - XX**2 - (YY - ly / 2) ** 2), 0.0)
        + np.maximum(100.0 * (XX + YY - lx - ly + 0.1), 0.0)
        + np.maximum(100.0 * (XX - YY - lx + 0.1), 0.0)
    )


def _phi_cantilever_seven_holes(XX, YY, lx, ly):
    return (
        -np.cos(6.0 * pi * XX / lx) * np.cos(4.0 * pi * YY) - 0.6
        + np.maximum(200.0 * (0.01 - XX**2 - (YY - ly / 2) ** 2), 0.0)
        + np.maximum(100.0 * (XX + YY - lx - ly + 0.1), 0.0)
        + np.maximum(100.0 * (XX - YY - lx + 0.1), 0.0)
    )


def _phi_cantilever_asymmetric(XX, YY, lx, ly):
    return (
        -np.cos(6.0 * pi * XX / lx) * np.cos(4.0 * pi * YY) - 0.4
        + np.maximum(100.0 * (XX + YY - lx - ly + 0.1), 0.0)
    )


def _phi_half_wheel(XX, YY, lx, ly):
    return (
        -np.cos(3.0 * pi * (XX - 1.0)) * np.cos(7 * pi * YY) - 0.3
        + np.minimum(5.0 / ly * (YY - 1.0) + 4.0, 0)
        + np.maximum(100.0 * (XX + YY - lx - ly + 0.1), 0.0)
        + np.maximum(100.0 * (-XX + YY - ly + 0.1), 0.0)
    )


def _phi_bridge(XX, YY, lx, ly):
    return (
        -np.cos(4.0 * pi * (XX - 1.0)) * np.cos(4 * pi * YY) - 0.2
        + np.maximum(100.0 * (YY - ly + 0.05), 0.0)
    )


def _phi_mbb(XX, YY, lx, ly):
    return (
        -np.cos(4.0 / lx * pi * XX) * np.cos(4.0 * pi * YY) - 0.4
        + np.maximum(100.0 * (XX + YY - lx - ly + 0.1), 0.0)
        + np.minimum(5.0 / ly * (YY - 1.0) + 4.0, 0)
    )


def _phi_twoforces(XX, YY, lx, ly):
    return (
        -np.cos(4.0 * pi * (XX - 0.5)) * np.cos(4.0 * pi * (YY - 0.5)) - 0.6
        - np.maximum(50.0 * (YY - ly + 0.1), 0.0)
        - np.maximum(50.0 * (-YY + 0.1), 0.0)
    )


def _phi_inverter(XX, YY, lx, ly):
    holes = -np.cos(8.0 * pi * XX / lx) * np.cos(8.0 * pi * YY / ly) - 0.2
    # solid strips along the input and output edges
    inlet = 40.0 * (XX - 0.1) + 40.0 * np.maximum(np.abs(YY - 0.5) - 0.1, 0.0)
    outlet = 40.0 * (0.85 - XX) + 40.0 * np.maximum(np.abs(YY - 0.5) - 0.12, 0.0)
    return np.minimum(holes, np.minimum(inlet, outlet))


# ----------------------------------------------------------------------------
# registry


def _cases() -> dict:
    cantilever = CaseSpec(
        name="cantilever",
        lx=2.0, ly=1.0, nx=150, ny=75,
        Lambda=40.0,
        loads=(LoadSpec((2.0, 0.5), 1, -1.0),),
        supports=(Support(Edge("left")),),
        init_phi=_phi_cantilever,
        mirror="y",
    )
    out = {
        "cantilever": cantilever,
        "cantilever_asymmetric": CaseSpec(
            name="cantilever_asymmetric",
            lx=2.0, ly=1.0, nx=150, ny=75,
            Lambda=60.0, Lambda_alternatives=(70.0,),
            loads=(LoadSpec((2.0, 0.0), 1, -1.0),),
            supports=(Support(Edge("left")),),
            init_phi=_phi_cantilever_asymmetric,
        ),
        "half_wheel": CaseSpec(
            name="half_wheel",
            lx=2.0, ly=1.0, nx=150, ny=75,
            Lambda=30.0, Lambda_alternatives=(50.0,),
            loads=(LoadSpec((1.0, 0.0), 1, -1.0),),
            supports=(Support((0.0, 0.0)), Support((2.0, 0.0), (1,))),
            init_phi=_phi_half_wheel,
            mirror="x",
        ),
        "bridge": CaseSpec(
            name="bridge",
            lx=2.0, ly=1.0, nx=150, ny=75,
            Lambda=20.0, Lambda_alternatives=(30.0,),
            loads=(LoadSpec((1.0, 0.0), 1, -1.0),),
            supports=(Support((0.0, 0.0)), Support((2.0, 0.0))),
            init_phi=_phi_bridge,
            mirror="x",
        ),
        "MBB_beam": CaseSpec(
            name="MBB_beam",
            lx=3.0, ly=1.0, nx=150, ny=50,
            Lambda=130.0,
            loads=(LoadSpec((0.0, 1.0), 1, -1.0),),
            supports=(Support(Edge("left"), (0,)), Support((3.0, 0.0), (1,))),
            init_phi=_phi_mbb,
        ),
        "cantilever_twoforces": CaseSpec(
            name="cantilever_twoforces",
            lx=1.0, ly=1.0, nx=121, ny=121,
            Lambda=60.0,
            loads=(LoadSpec((1.0, 0.0), 1, -1.0), LoadSpec((1.0, 1.0), 1, -1.0)),
            supports=(Support(Edge("left")),),
            init_phi=_phi_twoforces,
            mirror="y",
        ),
        "inverter": CaseSpec(
            name="inverter",
            lx=1.0, ly=1.0, nx=121, ny=121,
            Lambda=0.01,
            loads=(LoadSpec((0.0, 0.5), 0, 0.05),),
            supports=(Support(Edge("left", 0.0, 0.1)), Support(Edge("left", 0.9, 1.0))),
            init_phi=_phi_inverter,
            robin=Robin(Edge("right", 0.43, 0.57), 0.01),
            monitor=Monitor(Edge("left", 0.47, 0.53), Edge("right", 0.43, 0.57), 2.0, 1.0),
            fixed_regions=(Rect(0.0, 0.05, 0.48, 0.52), Rect(0.9, 1.0, 0.43, 0.57)),
            material=MaterialParams(E=20.0, nu=0.3, eps_er=0.01),
            objective="inverter",
            beta0_init=1.0,
            itmax_factor=2.0,
            penalty=1.0e5,
            mirror="y",
        ),
    }
    return out


CASES = _cases()
CASE_NAMES = tuple(CASES)

# the seven-hole initialization compared against the default cantilever start
cantilever_seven_holes = replace(CASES["cantilever"], init_phi=_phi_cantilever_seven_holes)


def get_case(name: str) -> CaseSpec:
    try:
        return CASES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown case {name!r}; valid names: {', '.join(CASE_NAMES)}"
        ) from None
