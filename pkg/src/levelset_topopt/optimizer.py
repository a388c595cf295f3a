"""Main optimization loop: state solve, line search, descent, level-set update."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import elasticity as el
from . import levelset as ls_
from . import shape_gradient as sg
from .cases import CaseSpec, init_level_set
from .exceptions import ConfigurationError
from .grid import CrossedMesh, build_grid_map, build_mesh, exterior_facets

logger = logging.getLogger(__name__)


@dataclass
class OptimizerConfig:
    beta0_init: float = 0.5
    ls_max: int = 3
    gamma: float = 0.8
    gamma2: float = 0.8
    max_iters: int | None = None  # default: int(itmax_factor * Nx)
    itmax_factor: float = 1.5
    reinit_every: int = 5
    hj_substeps: int = 10
    reinit_sweeps: int = 2
    beta_floor_factor: float = 0.1
    beta_cap: float = 1.0
    min_stop_iters: int = 20

    def __post_init__(self):
        if not (0 < self.gamma < 1 and 0 < self.gamma2 < 1):
            raise ConfigurationError("gamma and gamma2 must lie in (0, 1)")
        if self.ls_max < 1:
            raise ConfigurationError("ls_max must be at least 1")

    @classmethod
    def for_case(cls, case: CaseSpec, **overrides) -> "OptimizerConfig":
        kw = dict(beta0_init=case.beta0_init, itmax_factor=case.itmax_factor)
        kw.update(overrides)
        return cls(**kw)

    def it_max(self, Nx: int) -> int:
        if self.max_iters is not None:
            return int(self.max_iters)
        return int(self.itmax_factor * Nx)


@dataclass
class IterationRecord:
    iteration: int
    J: float
    objective: float
    volume: float
    volume_fraction: float
    beta: float
    ls: int
    stop: bool = False


@dataclass
class RunHistory:
    records: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, k) -> IterationRecord:
        return self.records[k]

    def append(self, rec: IterationRecord) -> None:
        if rec.iteration != len(self.records):
            raise ValueError("history indices must be contiguous")
        self.records.append(rec)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def J(self) -> np.ndarray:
        return self.column("J")


@dataclass
class IterationState:
    """Snapshot handed to the ``callback`` of :func:`run` after each accepted step.

    ``phi`` is the level set that produced ``record``, ``phi_next`` the one after
    the update, and ``descent_rate`` is ``rhs . theta``, i.e. ``-dJ(Omega; theta)``.
    """

    record: IterationRecord
    phi: np.ndarray
    tags: np.ndarray
    theta: np.ndarray
    rhs: np.ndarray
    descent_rate: float
    phi_next: np.ndarray


@dataclass
class RunResult:
    history: RunHistory
    phi: np.ndarray
    tags: np.ndarray
    status: str  # 'converged', 'max_iters' or 'stationary'


# ----------------------------------------------------------------------------
# cost evaluation


def eval_compliance(mesh: CrossedMesh, tags, mat: el.MaterialParams, states) -> float:
    coef = el.cell_coefficients(tags, mat) * mesh.areas
    total = 0.0
    for u in states:
        Du = el.displacement_gradients(mesh, u)
        e = 0.5 * (Du + Du.transpose(0, 2, 1))
        tr = e[:, 0, 0] + e[:, 1, 1]
        dens = 2.0 * mat.mu * np.einsum("tij,tij->t", e, e) + mat.lmbda * tr**2
        total += float(coef @ dens)
    return total


def eval_volume(mesh: CrossedMesh, tags) -> float:
    return float(mesh.areas[np.asarray(tags) == el.STRONG].sum())


def eval_inverter_objective(mesh: CrossedMesh, u: np.ndarray, case: CaseSpec) -> float:
    return float(el.monitor_load(mesh, case) @ u)


# ----------------------------------------------------------------------------
# line search bookkeeping


@dataclass
class StepState:
    """Step-size state of the line search."""

    beta0: float
    beta: float
    ls: int = 0
    It: int = 0


def line_search_update(state: StepState, J_new: float, J_prev: float | None, cfg: OptimizerConfig) -> bool:
    """Advance ``state`` for a trial value ``J_new``; return True if accepted.

    A rejection shrinks ``beta`` by ``gamma``. On acceptance ``beta0`` grows by
    ``1/gamma2`` (capped) if no backtracking was needed, shrinks by ``gamma2``
    (floored) if the backtracking budget ran out, and ``beta`` resets to it.
    """
    if state.It > 0 and J_new > J_prev and state.ls < cfg.ls_max:
        state.ls += 1
        state.beta *= cfg.gamma
        return False
    if state.ls == cfg.ls_max:
        state.beta0 = max(state.beta0 * cfg.gamma2, cfg.beta_floor_factor * cfg.beta0_init)
    if state.ls == 0:
        state.beta0 = min(state.beta0 / cfg.gamma2, cfg.beta_cap)
    state.ls, state.beta, state.It = 0, state.beta0, state.It + 1
    return True


def stopping_criterion(J, It: int, Nx: int, min_iters: int = 20) -> bool:
    """True once the last five values of ``J`` agree to within ``2 J/Nx^2``."""
    if It <= min_iters:
        return False
    J = np.asarray(J, dtype=float)
    window = J[It - 5:It]
    return bool(np.max(np.abs(window - J[It - 1])) < 2.0 * J[It - 1] / Nx**2)


# ----------------------------------------------------------------------------


class Problem:
    """Discretized case: mesh, grid map, descent operator and physics hooks."""

    def __init__(self, case: CaseSpec, Nx: int | None = None, Ny: int | None = None):
        self.case = case
        self.Nx = case.nx if Nx is None else int(Nx)
        self.Ny = case.ny if Ny is None else int(Ny)
        self.mesh = build_mesh(case.lx, case.ly, self.Nx, self.Ny)
        self.gmap = build_grid_map(self.mesh)
        self.mat = case.material
        self.fixed = case.fixed_mask(self.mesh)
        self.boundary = exterior_facets(self.mesh)
        self.descent_op = sg.assemble_descent_operator(
            self.mesh,
            self.boundary,
            penalty=case.penalty,
            fixed=self.fixed,
            fixed_penalty=case.fixed_penalty,
        )

    def tags(self, phi_mesh: np.ndarray) -> np.ndarray:
        return ls_.classify_cells(phi_mesh, self.mesh, self.fixed)

    def evaluate(self, tags):
        """Solve the state (and adjoint) problems; return ``(objective, volume, states, adjoint)``."""
        op = el.state_operator(self.mesh, tags, self.mat, self.case)
        states = el.solve_states(self.mesh, tags, self.mat, self.case, op=op)
        vol = eval_volume(self.mesh, tags)
        if self.case.is_inverter:
            p = el.solve_adjoint_inverter(self.mesh, tags, self.mat, self.case, op=op)
            return eval_inverter_objective(self.mesh, states[0], self.case), vol, states, p
        return eval_compliance(self.mesh, tags, self.mat, states), vol, states, None

    def shape_rhs(self, tags, states, adjoint) -> np.ndarray:
        if self.case.is_inverter:
            return sg.inverter_rhs(self.mesh, tags, self.mat, states[0], adjoint, self.case.Lambda)
        return sg.compliance_rhs(self.mesh, tags, self.mat, states, self.case.Lambda)


def run(
    case: CaseSpec,
    config: OptimizerConfig | None = None,
    Nx: int | None = None,
    Ny: int | None = None,
    callback: Callable[[IterationState], None] | None = None,
    phi0: np.ndarray | None = None,
) -> RunResult:
    """Minimize ``objective + Lambda * volume`` for ``case``."""
    config = OptimizerConfig.for_case(case) if config is None else config
    prob = Problem(case, Nx, Ny)
    mesh, gmap = prob.mesh, prob.gmap
    lx, ly, Nx = case.lx, case.ly, prob.Nx
    it_max = config.it_max(Nx)
    area = lx * ly

    phi_mat = init_level_set(case, prob.Nx, prob.Ny) if phi0 is None else np.array(phi0, dtype=float)
    phi = ls_.interpolate_to_mesh(phi_mat, gmap)
    phi_mat_old = phi_mat
    th_mat = None

    step = StepState(beta0=config.beta0_init, beta=config.beta0_init)
    history = RunHistory()
    J = []
    stop = False
    status = "max_iters"
    trial_beta = 0.0
    tags = prob.tags(phi)

    while step.It < it_max and not stop:
        tags = prob.tags(phi)
        objective, vol, states, adjoint = prob.evaluate(tags)
        J_new = objective + case.Lambda * vol
        J_prev = J[-1] if J else None
        ls_before = step.ls
        if not line_search_update(step, J_new, J_prev, config):
            logger.info("line search %d: J=%.6g > %.6g, beta=%.4g", step.ls, J_new, J_prev, step.beta)
            trial_beta = step.beta
            phi_mat = ls_.advect(phi_mat_old, *th_mat, step.beta, lx, ly, config.hj_substeps)
            phi = ls_.interpolate_to_mesh(phi_mat, gmap)
            continue

        It = step.It
        J.append(J_new)
        rec = IterationRecord(It - 1, J_new, objective, vol, vol / area, trial_beta, ls_before)
        logger.info("it %d: J=%.8g obj=%.8g vol=%.4f", It - 1, J_new, objective, vol / area)

        rhs = prob.shape_rhs(tags, states, adjoint)
        theta = sg.solve_descent(prob.descent_op, rhs)
        rate = float(rhs @ theta)
        th_mat = sg.restrict_to_grid(theta, gmap)

        phi_before = phi_mat
        if ls_.max_speed(*th_mat) == 0.0:
            status = "stationary"
            stop = True
        else:
            phi_mat_old = phi_mat
            phi_mat = ls_.advect(phi_mat, *th_mat, step.beta, lx, ly, config.hj_substeps)
            trial_beta = step.beta
            if It % config.reinit_every == 0:
                phi_mat = ls_.reinitialize(phi_mat, lx, ly, config.reinit_sweeps)
            phi = ls_.interpolate_to_mesh(phi_mat, gmap)
            if stopping_criterion(J, It, Nx, config.min_stop_iters):
                stop = True
                status = "converged"
        rec.stop = stop
        history.append(rec)
        if callback is not None:
            callback(IterationState(rec, phi_before, tags, theta, rhs, rate, phi_mat))

    if status == "stationary":
        phi_mat = phi_before
    final_tags = prob.tags(ls_.interpolate_to_mesh(phi_mat, gmap))
    return RunResult(history, phi_mat, final_tags, status)
