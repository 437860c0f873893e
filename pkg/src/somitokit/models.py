"""Right-hand sides for the five model variants.

Each model is a pure derivative evaluator over named concentration fields:

* ``cw2``  -- two-species clock-and-wavefront (somitic factor u, signal v)
  with prescribed Heaviside switches sweeping at speed ``c``.
* ``cw3``  -- three-species clock-and-wavefront (u, v, FGF8 field w) with a
  regressing production front for w and an optional localized FGF8 pulse.
* ``pord`` -- progressive oscillatory reaction-diffusion pair (activator A,
  diffusible repressor R) driven by a regulatory input F(x, t).
* ``fhn``  -- FitzHugh-Nagumo-type lattice with activator coupling only and
  a spatially graded cubic amplitude gamma(x).
* ``fhn_proto`` -- the classic planar FitzHugh-Nagumo oscillator.

PDE-style evaluators take ``(state, t, grid, mode)`` and return the time
derivative of every species; ``*_kinetics`` builders freeze switches and
gradients to constants and return plain scalar functions for phase-plane
work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigError, DivergenceError, DomainError
from .grid import BoundaryMode, Grid1D, heaviside, laplacian, positive_part

__all__ = [
    "CW2Params",
    "CW3Params",
    "PulseParams",
    "PORDParams",
    "FHNParams",
    "FHNProtoParams",
    "Model",
    "cw2_rhs",
    "cw3_rhs",
    "pord_rhs",
    "fhn_rhs",
    "fhn_proto_rhs",
    "gamma_profile",
    "cw2_model",
    "cw3_model",
    "pord_model",
    "fhn_model",
    "cw2_kinetics",
    "pord_kinetics",
    "fhn_kinetics",
    "fhn_proto_kinetics",
    "cw2_initial_state",
    "cw3_initial_state",
    "cw3_front_profile",
    "fhn_random_state",
    "fhn_pulse_state",
    "pord_zero_state",
]


# --------------------------------------------------------------------------
# parameter records
# --------------------------------------------------------------------------

@dataclass(frozen=True, kw_only=True)
class CW2Params:
    """Two-species clock-and-wavefront parameters.

    ``k`` divides the u decay term (``-u/k``); the appendix-style runs use
    k = 10, plain unit decay is k = 1.
    """

    mu: float = 1e-1
    gamma: float = 0.2
    kappa: float = 10.0
    k: float = 1.0
    c: float = 5e-3
    epsilon: float = 1e-3
    D: float = 100.0
    x1: float = 1.0
    x2: float = 0.0

    def __post_init__(self):
        _require(self.gamma > 0, "cw2.gamma", "must be > 0")
        _require(self.kappa >= 0, "cw2.kappa", "must be >= 0")
        _require(self.epsilon > 0, "cw2.epsilon", "must be > 0")
        _require(self.D >= 0, "cw2.D", "must be >= 0")
        _require(self.k > 0, "cw2.k", "must be > 0")


@dataclass(frozen=True, kw_only=True)
class PulseParams:
    """Localized FGF8 pulse: adds ``o`` to the w source on a fixed window.

    The gate is H(eps1 - xb + x) * H(eps1 + xb - x), i.e. the window spans
    [xb - eps1, xb + eps1] (centre xb, half-width eps1).
    """

    o: float = 0.0
    xb: float = 7.5
    eps1: float = 0.0

    def __post_init__(self):
        _require(self.o >= 0, "pulse.o", "must be >= 0")


@dataclass(frozen=True, kw_only=True)
class CW3Params:
    """Three-species clock-and-wavefront parameters (appendix defaults).

    ``switch_mode`` selects how the u/v switches are evaluated:

    * ``"prescribed"``: chi_u = H(cn*t - x + x1), chi_v = H(cn*t - x + x2).
    * ``"fgf"``: switches fire where the w field has dropped below fixed
      thresholds.  The thresholds are calibrated on the unperturbed
      travelling w profile so that with no pulse both modes agree; a pulse
      then feeds back into segmentation through w itself.
    """

    mu: float = 1e-4
    gamma: float = 1e-3
    kappa: float = 1.0
    k: float = 10.0
    epsilon: float = 1e-3
    eta: float = 1.0
    Dv: float = 50.0
    Dw: float = 20.0
    xn: float = 0.0
    cn: float = 0.5
    x1: float = 1.0
    x2: float = 0.0
    pulse: PulseParams | None = None
    switch_mode: str = "prescribed"

    def __post_init__(self):
        _require(self.eta > 0, "cw3.eta", "must be > 0")
        _require(self.Dv >= 0, "cw3.Dv", "must be >= 0")
        _require(self.Dw >= 0, "cw3.Dw", "must be >= 0")
        _require(self.epsilon > 0, "cw3.epsilon", "must be > 0")
        _require(self.gamma > 0, "cw3.gamma", "must be > 0")
        _require(self.kappa >= 0, "cw3.kappa", "must be >= 0")
        _require(self.k > 0, "cw3.k", "must be > 0")
        if self.switch_mode not in ("prescribed", "fgf"):
            raise ConfigError(
                f"cw3.switch_mode must be 'prescribed' or 'fgf', got {self.switch_mode!r}",
                key="cw3.switch_mode",
            )


@dataclass(frozen=True, kw_only=True)
class PORDParams:
    """Oscillatory activator/repressor parameters.

    No literature defaults exist for the interaction strengths; all of them
    are mandatory.  The regulatory input is the clipped linear family
    F(x, t) = max(F_a + F_b * (x - F_v * t), 0).
    """

    k1: float
    k2: float
    k3: float
    D: float
    mu: float
    beta: float
    F_a: float = 0.0
    F_b: float = 0.0
    F_v: float = 0.0

    def __post_init__(self):
        _require(self.k1 >= 0, "pord.k1", "must be >= 0")
        _require(self.k2 >= 0, "pord.k2", "must be >= 0")
        _require(self.k3 >= 0, "pord.k3", "must be >= 0")
        _require(self.D >= 0, "pord.D", "must be >= 0")
        _require(self.mu > 0, "pord.mu", "must be > 0")
        _require(self.beta >= 0, "pord.beta", "must be >= 0")

    def F(self, x, t: float = 0.0):
        """Regulatory FGF input at position(s) x and time t, clipped at 0."""
        return positive_part(self.F_a + self.F_b * (np.asarray(x, dtype=float) - self.F_v * t))


@dataclass(frozen=True, kw_only=True)
class FHNParams:
    """Discrete FitzHugh-Nagumo lattice parameters (appendix defaults).

    gamma(x, t) = gamma_a + gamma_b * (x - gamma_speed * t) - gamma_decay * t,
    clipped below at ``gamma_floor``.  The static profile (speed = decay = 0)
    is the printed linear gradient.
    """

    tau1: float = 0.588
    tau2: float = 32.1
    alpha: float = 0.4
    beta: float = 0.33
    gamma_a: float = 0.21
    gamma_b: float = -0.2
    gamma_speed: float = 0.0
    gamma_decay: float = 0.0
    gamma_floor: float = 1e-3
    D: float = 1e-5

    def __post_init__(self):
        _require(self.tau1 > 0, "fhn.tau1", "must be > 0")
        _require(self.tau2 > 0, "fhn.tau2", "must be > 0")
        _require(self.D >= 0, "fhn.D", "must be >= 0")
        _require(self.gamma_floor > 0, "fhn.gamma_floor", "must be > 0")

    def gamma(self, x, t: float = 0.0):
        """Cubic-amplitude gradient at position(s) x and time t."""
        g = gamma_profile(np.asarray(x, dtype=float) - self.gamma_speed * t, self.gamma_a, self.gamma_b)
        g = g - self.gamma_decay * t
        return np.maximum(g, self.gamma_floor)

    def validate_on(self, grid: Grid1D):
        g = gamma_profile(grid.x, self.gamma_a, self.gamma_b)
        if np.any(g <= 0):
            i = int(np.argmax(g <= 0))
            raise ConfigError(
                f"gamma(x) = {g[i]:g} <= 0 at cell {i} (x = {grid.x[i]:g}); "
                "the cubic amplitude must stay positive over the grid",
                key="fhn.gamma_b",
            )


@dataclass(frozen=True, kw_only=True)
class FHNProtoParams:
    """Classic planar FitzHugh-Nagumo oscillator.

    ``tau`` has no canonical value and must be supplied explicitly.
    """

    tau: float
    I_ext: float = 0.5
    a: float = 0.8
    b: float = 0.7

    def __post_init__(self):
        _require(self.tau > 0, "fhn_proto.tau", "must be > 0")


def _require(cond: bool, key: str, what: str):
    if not cond:
        raise ConfigError(f"parameter {key} {what}", key=key)


# --------------------------------------------------------------------------
# switches and profiles
# --------------------------------------------------------------------------

def gamma_profile(x, a: float, b: float):
    """Affine gradient ``a + b*x``."""
    return a + b * x


def cw3_front_profile(xi, params: CW3Params):
    """Travelling w profile in front coordinates xi = x - xn - cn*t.

    Exact steady shape of the w equation in the co-moving frame: decays to 0
    far anterior (xi << 0) and saturates at 1/eta far posterior (xi >> 0).
    """
    eta, cn, Dw = params.eta, params.cn, params.Dw
    if Dw <= 0:
        raise ConfigError("cw3.Dw must be positive to build the front profile", key="cw3.Dw")
    s = math.sqrt(cn * cn + 4.0 * eta * Dw)
    n1 = (-cn - s) / (2.0 * Dw)
    n2 = (-cn + s) / (2.0 * Dw)
    xi = np.asarray(xi, dtype=float)
    left = n1 / (eta * (n1 - n2)) * np.exp(np.minimum(n2 * xi, 500.0))
    right = n2 / (eta * (n1 - n2)) * np.exp(np.minimum(n1 * xi, 500.0)) + 1.0 / eta
    return np.where(xi < 0, left, right)


def _cw3_switch_thresholds(params: CW3Params) -> tuple[float, float]:
    """w levels at which the u and v switches fire in 'fgf' mode."""
    wu = float(cw3_front_profile(params.x1 - params.xn, params))
    wv = float(cw3_front_profile(params.x2 - params.xn, params))
    return wu, wv


def _check_finite(state, t, species):
    for name in species:
        vals = state[name]
        if not np.all(np.isfinite(vals)):
            cell = int(np.argmin(np.isfinite(vals)))
            raise DivergenceError(
                f"non-finite value in species {name!r} at cell {cell}, t = {t:g}",
                t=t, species=name, cell=cell,
            )


# --------------------------------------------------------------------------
# derivative evaluators
# --------------------------------------------------------------------------

def cw2_rhs(state, t, grid: Grid1D, params: CW2Params, mode: BoundaryMode):
    """du = (u + mu v)^2/(gamma + kappa u^2) chi_u - u/k;
    dv = chi_v/(eps + u) - v + D lap(v)."""
    _check_finite(state, t, ("u", "v"))
    u, v = state["u"], state["v"]
    x = grid.x
    chi_u = heaviside(params.c * t - x + params.x1)
    chi_v = heaviside(params.c * t - x + params.x2)
    du = (u + params.mu * v) ** 2 / (params.gamma + params.kappa * u * u) * chi_u - u / params.k
    dv = chi_v / (params.epsilon + u) - v
    if params.D != 0.0:
        dv += params.D * laplacian(v, grid, mode)
    return {"u": du, "v": dv}


def cw3_rhs(state, t, grid: Grid1D, params: CW3Params, mode: BoundaryMode):
    """Three-species front model; see CW3Params for the switch modes."""
    _check_finite(state, t, ("u", "v", "w"))
    u, v, w = state["u"], state["v"], state["w"]
    x = grid.x
    if params.switch_mode == "fgf":
        wu_star, wv_star = _cw3_switch_thresholds(params)
        chi_u = heaviside(wu_star - w)
        chi_v = heaviside(wv_star - w)
    else:
        chi_u = heaviside(params.cn * t - x + params.x1)
        chi_v = heaviside(params.cn * t - x + params.x2)
    chi_w = heaviside(x - params.xn - params.cn * t)

    du = (u + params.mu * v) ** 2 / (params.gamma + params.kappa * u * u) * chi_u - u
    dv = params.k * (chi_v / (params.epsilon + u) - v)
    if params.Dv != 0.0:
        dv += params.Dv * laplacian(v, grid, mode)
    dw = chi_w - params.eta * w
    if params.pulse is not None and params.pulse.o != 0.0:
        p = params.pulse
        chi_b = heaviside(p.eps1 - p.xb + x) * heaviside(p.eps1 + p.xb - x)
        dw = dw + p.o * chi_b
    if params.Dw != 0.0:
        dw += params.Dw * laplacian(w, grid, mode)
    return {"u": du, "v": dv, "w": dw}


def pord_rhs(state, t, grid: Grid1D, params: PORDParams, mode: BoundaryMode):
    """Activator/repressor pair with clipped saturating activation."""
    A, R = state["A"], state["R"]
    F = params.F(grid.x, t)
    num = params.k1 * A - params.k2 * R + F + params.beta
    den = 1.0 + params.k1 * A + params.k2 * R + F + params.beta
    if np.any(den <= 0):
        cell = int(np.argmax(den <= 0))
        raise DomainError(
            f"activation denominator {den[cell]:g} <= 0 at cell {cell} "
            "(invalid parameter/state combination)"
        )
    dA = positive_part(num / den) - params.mu * A
    dR = params.k3 * A / (1.0 + params.k3 * A) - params.mu * R
    if params.D != 0.0:
        dR += params.D * laplacian(R, grid, mode)
    return {"A": dA, "R": dR}


def fhn_rhs(state, t, grid: Grid1D, params: FHNParams, mode: BoundaryMode):
    """Lattice FitzHugh-Nagumo: activator diffuses, inhibitor is local."""
    u, v = state["u"], state["v"]
    g = params.gamma(grid.x, t)
    du = (u * (u - params.alpha) * (1.0 - u) / g - v + params.beta) / params.tau1
    dv = (u - v) / params.tau2
    if params.D != 0.0:
        du = du + params.D * laplacian(u, grid, mode)
    return {"u": du, "v": dv}


def fhn_proto_rhs(state, params: FHNProtoParams):
    """Planar prototype: dv = v - v^3/3 - w + I_ext; dw = (v + a - b w)/tau."""
    v, w = state["v"], state["w"]
    dv = v - v ** 3 / 3.0 - w + params.I_ext
    dw = (v + params.a - params.b * w) / params.tau
    return {"v": dv, "w": dw}


# --------------------------------------------------------------------------
# model wrapper used by the integrator
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Model:
    """A named derivative evaluator plus the metadata the integrator needs."""

    name: str
    species: tuple[str, ...]
    params: object
    rhs: Callable
    diffusivities: dict[str, float] = field(default_factory=dict)

    def __call__(self, state, t, grid, mode):
        return self.rhs(state, t, grid, mode)


def cw2_model(params: CW2Params | None = None) -> Model:
    p = params or CW2Params()
    return Model(
        name="cw2", species=("u", "v"), params=p,
        rhs=lambda state, t, grid, mode: cw2_rhs(state, t, grid, p, mode),
        diffusivities={"v": p.D},
    )


def cw3_model(params: CW3Params | None = None) -> Model:
    p = params or CW3Params()
    return Model(
        name="cw3", species=("u", "v", "w"), params=p,
        rhs=lambda state, t, grid, mode: cw3_rhs(state, t, grid, p, mode),
        diffusivities={"v": p.Dv, "w": p.Dw},
    )


def pord_model(params: PORDParams) -> Model:
    return Model(
        name="pord", species=("A", "R"), params=params,
        rhs=lambda state, t, grid, mode: pord_rhs(state, t, grid, params, mode),
        diffusivities={"R": params.D},
    )


def fhn_model(params: FHNParams | None = None, grid: Grid1D | None = None) -> Model:
    p = params or FHNParams()
    if grid is not None:
        p.validate_on(grid)
    return Model(
        name="fhn", species=("u", "v"), params=p,
        rhs=lambda state, t, grid, mode: fhn_rhs(state, t, grid, p, mode),
        diffusivities={"u": p.D},
    )


# --------------------------------------------------------------------------
# frozen planar kinetics for phase-plane analysis
# --------------------------------------------------------------------------

def cw2_kinetics(params: CW2Params, chi_u: float, chi_v: float):
    """Pointwise (u, v) kinetics with the switches frozen to constants."""
    mu, gamma, kappa, k, eps = params.mu, params.gamma, params.kappa, params.k, params.epsilon

    def rhs(u: float, v: float):
        du = (u + mu * v) ** 2 / (gamma + kappa * u * u) * chi_u - u / k
        dv = chi_v / (eps + u) - v
        return du, dv

    return rhs


def pord_kinetics(params: PORDParams, F: float):
    """Pointwise (A, R) kinetics with the regulatory input frozen at F."""
    k1, k2, k3, mu, beta = params.k1, params.k2, params.k3, params.mu, params.beta

    def rhs(A: float, R: float):
        num = k1 * A - k2 * R + F + beta
        den = 1.0 + k1 * A + k2 * R + F + beta
        if den <= 0:
            raise DomainError(f"activation denominator {den:g} <= 0 at (A, R) = ({A:g}, {R:g})")
        act = num / den
        dA = (act if act > 0 else 0.0) - mu * A
        dR = k3 * A / (1.0 + k3 * A) - mu * R
        return dA, dR

    return rhs


def fhn_kinetics(params: FHNParams, gamma: float):
    """Pointwise lattice kinetics with the gradient frozen at ``gamma``."""
    if gamma <= 0:
        raise ConfigError(f"frozen gamma must be > 0, got {gamma}", key="fhn.gamma")
    tau1, tau2, alpha, beta = params.tau1, params.tau2, params.alpha, params.beta

    def rhs(u: float, v: float):
        du = (u * (u - alpha) * (1.0 - u) / gamma - v + beta) / tau1
        dv = (u - v) / tau2
        return du, dv

    return rhs


def fhn_proto_kinetics(params: FHNProtoParams):
    """Pointwise prototype oscillator kinetics."""
    I_ext, a, b, tau = params.I_ext, params.a, params.b, params.tau

    def rhs(v: float, w: float):
        dv = v - v ** 3 / 3.0 - w + I_ext
        dw = (v + a - b * w) / tau
        return dv, dw

    return rhs


# --------------------------------------------------------------------------
# initial conditions
# --------------------------------------------------------------------------

def cw2_initial_state(grid: Grid1D, params: CW2Params):
    """Step-function somitic block plus the matched standing signal profile."""
    x = grid.x
    lam = math.sqrt(params.k / params.D) if params.D > 0 else 0.0
    amp = 1.0 / (1.0 + params.epsilon)
    b = amp * np.sign(x) / (2.0 * math.cosh(lam * 10.0))
    u0 = heaviside(-x)
    v0 = amp * heaviside(-x) + b * np.cosh(lam * (10.0 - np.abs(x)))
    return {"u": u0, "v": v0}


def cw3_initial_state(grid: Grid1D, params: CW3Params):
    """Somitic block, matched signal profile and the travelling FGF8 front.

    Deliberately independent of any pulse block so that a zero-amplitude
    pulse run is bit-identical to the unperturbed one.
    """
    x = grid.x
    lam = math.sqrt(params.k / params.Dv) if params.Dv > 0 else 0.0
    amp = 1.0 / (1.0 + params.epsilon)
    b = amp * np.sign(x) / (2.0 * math.cosh(lam * 10.0))
    u0 = heaviside(-x)
    v0 = amp * heaviside(-x) + b * np.cosh(lam * (10.0 - np.abs(x)))
    w0 = cw3_front_profile(x - params.xn, params)
    return {"u": u0, "v": v0, "w": np.asarray(w0, dtype=float)}


def fhn_random_state(grid: Grid1D, rng: np.random.Generator, amplitude: float = 0.2):
    """Uniform random fields on [0, amplitude], one draw per cell."""
    return {
        "u": amplitude * rng.random(grid.n_cells),
        "v": amplitude * rng.random(grid.n_cells),
    }


def fhn_pulse_state(grid: Grid1D, n_on: int = 3, level: float = 1.0):
    """Rest state with the first ``n_on`` cells raised to ``level``."""
    u0 = np.zeros(grid.n_cells)
    u0[: max(1, int(n_on))] = level
    return {"u": u0, "v": np.zeros(grid.n_cells)}


def pord_zero_state(grid: Grid1D):
    """Both species at zero; the regulatory input bootstraps the dynamics."""
    return {"A": np.zeros(grid.n_cells), "R": np.zeros(grid.n_cells)}


def with_pulse(params: CW3Params, o: float, xb: float, eps1: float) -> CW3Params:
    """Copy of ``params`` carrying the given pulse block."""
    return replace(params, pulse=PulseParams(o=o, xb=xb, eps1=eps1))
