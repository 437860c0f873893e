"""Method-of-lines time integration producing space-time rasters.

Explicit schemes only (Euler and classical RK4).  When the diffusion
number ``D*dt/dx**2`` of the most diffusive species exceeds the stable
range, :func:`run` silently splits every output step into
``ceil(ratio/0.4)`` Euler substeps so the recording cadence of a preset is
preserved while the stepping stays stable.  The substep count is reported
back for the run manifest.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError, StabilityWarning
from .grid import BoundaryMode, Grid1D
from .models import Model

__all__ = [
    "SimConfig",
    "SpaceTimeRaster",
    "GuardReport",
    "stability_guard",
    "step",
    "run",
    "DIVERGENCE_LIMIT",
]

# all model fields live in O(1)-O(1e3) ranges; anything past this is runaway
DIVERGENCE_LIMIT = 1e6

_SCHEMES = ("euler", "rk4")


@dataclass(frozen=True, kw_only=True)
class SimConfig:
    """Time-stepping and recording configuration for one run."""

    dt: float
    t_end: float
    record_stride: int = 1
    boundary: BoundaryMode = BoundaryMode.ZERO_FLUX
    scheme: str = "euler"
    seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"sim.dt must be > 0, got {self.dt}", key="sim.dt")
        if self.t_end < 0:
            raise ConfigError(f"sim.t_end must be >= 0, got {self.t_end}", key="sim.t_end")
        if self.record_stride < 1:
            raise ConfigError(
                f"sim.record_stride must be >= 1, got {self.record_stride}", key="sim.record_stride"
            )
        if self.scheme not in _SCHEMES:
            raise ConfigError(
                f"sim.scheme must be one of {_SCHEMES}, got {self.scheme!r}", key="sim.scheme"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class SpaceTimeRaster:
    """Recorded (time x space) matrices, one per species."""

    t: np.ndarray
    x: np.ndarray
    data: dict[str, np.ndarray]

    @property
    def species(self) -> tuple[str, ...]:
        return tuple(self.data)

    @property
    def n_rows(self) -> int:
        return len(self.t)

    def row(self, species: str, j: int) -> np.ndarray:
        return self.data[species][j]

    def final_row(self, species: str) -> np.ndarray:
        return self.data[species][-1]


@dataclass(frozen=True)
class GuardReport:
    """Outcome of the explicit-diffusion stability check."""

    ok: bool
    ratios: dict[str, float]
    worst: float
    substeps: int


def _diffusion_ratios(model: Model, grid: Grid1D, dt: float) -> dict[str, float]:
    dx2 = grid.dx * grid.dx
    return {name: d * dt / dx2 for name, d in model.diffusivities.items() if d != 0.0}


def _substep_count(worst: float) -> int:
    if worst <= 0.5:
        return 1
    return int(math.ceil(worst / 0.4))


def stability_guard(model: Model, grid: Grid1D, config: SimConfig) -> GuardReport:
    """Check ``D*dt/dx**2 <= 0.5`` per diffusive species.

    A violation is a warning, not an error: the runner substeps through it,
    and the discrete-lattice regime intentionally uses tiny coupling.
    """
    ratios = _diffusion_ratios(model, grid, config.dt)
    worst = max(ratios.values(), default=0.0)
    ok = worst <= 0.5
    if not ok:
        worst_name = max(ratios, key=ratios.get)
        warnings.warn(
            f"diffusion number {worst:.3g} for species {worst_name!r} exceeds 0.5; "
            f"runs will take {_substep_count(worst)} Euler substeps per output step",
            StabilityWarning,
            stacklevel=2,
        )
    return GuardReport(ok=ok, ratios=ratios, worst=worst, substeps=_substep_count(worst))


def _euler(state, t, dt, model, grid, mode):
    d = model.rhs(state, t, grid, mode)
    return {name: state[name] + dt * d[name] for name in model.species}


def _rk4(state, t, dt, model, grid, mode):
    half = 0.5 * dt
    k1 = model.rhs(state, t, grid, mode)
    s2 = {n: state[n] + half * k1[n] for n in model.species}
    k2 = model.rhs(s2, t + half, grid, mode)
    s3 = {n: state[n] + half * k2[n] for n in model.species}
    k3 = model.rhs(s3, t + half, grid, mode)
    s4 = {n: state[n] + dt * k3[n] for n in model.species}
    k4 = model.rhs(s4, t + dt, grid, mode)
    sixth = dt / 6.0
    return {
        n: state[n] + sixth * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n])
        for n in model.species
    }


def step(state, t, model: Model, grid: Grid1D, config: SimConfig):
    """One explicit step of ``config.dt``; the input state is untouched."""
    advance = _euler if config.scheme == "euler" else _rk4
    new_state = advance(state, t, config.dt, model, grid, config.boundary)
    for name in model.species:
        vals = new_state[name]
        bad = ~np.isfinite(vals)
        if bad.any():
            cell = int(np.argmax(bad))
            raise DivergenceError(
                f"non-finite value in species {name!r} at cell {cell} after step from t = {t:g}",
                t=t + config.dt, species=name, cell=cell,
            )
    return new_state


def _check_recorded(state, t, species, partial):
    for name in species:
        vals = state[name]
        finite = np.isfinite(vals)
        if not finite.all():
            cell = int(np.argmin(finite))
        else:
            cell = int(np.argmax(np.abs(vals)))
            if abs(vals[cell]) <= DIVERGENCE_LIMIT:
                continue
        raise DivergenceError(
            f"species {name!r} diverged at cell {cell}, t = {t:g} "
            f"(value {vals[cell]:g})",
            t=t, species=name, cell=cell, partial=partial,
        )


def run(model: Model, grid: Grid1D, init, config: SimConfig) -> SpaceTimeRaster:
    """Integrate to ``t_end`` recording every ``record_stride`` steps.

    Deterministic for fixed inputs.  On divergence the partially recorded
    raster rides along on the raised error.
    """
    state = {name: grid.check_field(init[name], name).copy() for name in model.species}

    n_steps = config.n_steps
    stride = config.record_stride
    n_rows = n_steps // stride + 1
    t_axis = np.arange(n_rows) * stride * config.dt
    data = {name: np.empty((n_rows, grid.n_cells)) for name in model.species}
    raster = SpaceTimeRaster(t=t_axis, x=grid.x, data=data)

    worst = max(_diffusion_ratios(model, grid, config.dt).values(), default=0.0)
    n_sub = _substep_count(worst)
    sub_dt = config.dt / n_sub
    advance = _euler if (config.scheme == "euler" or n_sub > 1) else _rk4

    def record(row, state):
        for name in model.species:
            data[name][row] = state[name]

    record(0, state)
    row = 1
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for i in range(n_steps):
                t_i = i * config.dt
                if n_sub == 1:
                    state = advance(state, t_i, config.dt, model, grid, config.boundary)
                else:
                    for j in range(n_sub):
                        state = advance(state, t_i + j * sub_dt, sub_dt, model, grid, config.boundary)
                if (i + 1) % stride == 0:
                    partial = SpaceTimeRaster(
                        t=t_axis[:row], x=grid.x,
                        data={n: data[n][:row] for n in model.species},
                    )
                    _check_recorded(state, (i + 1) * config.dt, model.species, partial)
                    record(row, state)
                    row += 1
    except DivergenceError as err:
        if err.partial is None:
            err.partial = SpaceTimeRaster(
                t=t_axis[:row], x=grid.x,
                data={n: data[n][:row] for n in model.species},
            )
        raise
    return raster


def run_substeps(model: Model, grid: Grid1D, config: SimConfig) -> int:
    """Substep count :func:`run` will use for this setup (for manifests)."""
    worst = max(_diffusion_ratios(model, grid, config.dt).values(), default=0.0)
    return _substep_count(worst)
