"""Planar-ODE analysis: nullclines, fixed points, bifurcation scans.

Operates on two-dimensional kinetics with diffusion off and any switches or
gradients frozen to constants (see the ``*_kinetics`` builders in
:mod:`somitokit.models`).  Everything here is plain double-precision
numerics: finite-difference Jacobians, damped-free Newton iteration,
marching squares for zero contours, and fixed-step RK4 for trajectory
probes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateContourError

__all__ = [
    "Window",
    "PlanarSystem",
    "ParamFamily",
    "ParamFamily2",
    "FixedPointClass",
    "FixedPoint",
    "BifurcationPoint",
    "ProbeResult",
    "CuspTrace",
    "nullclines",
    "find_fixed_points",
    "scan_one_param",
    "cusp_trace",
    "limit_cycle_probe",
    "stability_probe",
]

# Newton / classification tolerances (artifact choices)
_FD_STEP = 1e-7
_NEWTON_MAX_ITER = 50
_NEWTON_TOL = 1e-12
_RESIDUAL_ACCEPT = 1e-10
_DEDUP_RADIUS = 1e-6
_EIG_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class Window:
    """Rectangular analysis window in the (p, q) plane."""

    p_min: float
    p_max: float
    q_min: float
    q_max: float

    def __post_init__(self):
        if not (self.p_min < self.p_max and self.q_min < self.q_max):
            raise ValueError(f"degenerate window {self}")

    @property
    def diag(self) -> float:
        return math.hypot(self.p_max - self.p_min, self.q_max - self.q_min)

    def contains(self, p: float, q: float, margin: float = 0.0) -> bool:
        return (
            self.p_min - margin <= p <= self.p_max + margin
            and self.q_min - margin <= q <= self.q_max + margin
        )


@dataclass(frozen=True)
class PlanarSystem:
    """A planar vector field plus the window it should be analysed on."""

    rhs: Callable[[float, float], tuple[float, float]]
    window: Window
    name: str = ""
    seed_grid_n: int = 12


@dataclass(frozen=True)
class ParamFamily:
    """One-parameter family of planar systems, for bifurcation scans."""

    param: str
    build: Callable[[float], Callable[[float, float], tuple[float, float]]]
    window: Window
    name: str = ""
    seed_grid_n: int = 12

    def system(self, value: float) -> PlanarSystem:
        return PlanarSystem(
            rhs=self.build(value), window=self.window,
            name=f"{self.name}[{self.param}={value:g}]",
            seed_grid_n=self.seed_grid_n,
        )


class FixedPointClass(enum.Enum):
    STABLE_NODE = "stable-node"
    STABLE_FOCUS = "stable-focus"
    UNSTABLE_NODE = "unstable-node"
    UNSTABLE_FOCUS = "unstable-focus"
    SADDLE = "saddle"
    CENTER = "center"

    @property
    def is_stable(self) -> bool:
        return self in (FixedPointClass.STABLE_NODE, FixedPointClass.STABLE_FOCUS)


@dataclass(frozen=True)
class FixedPoint:
    p: float
    q: float
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    eigenvalues: tuple[complex, complex]
    kind: FixedPointClass
    residual: float

    @property
    def location(self) -> tuple[float, float]:
        return (self.p, self.q)

    def distance(self, p: float, q: float) -> float:
        return math.hypot(self.p - p, self.q - q)


@dataclass(frozen=True)
class BifurcationPoint:
    param: str
    value: float
    kind: str  # "hopf" | "saddle-node"
    residual: float
    location: tuple[float, float]
    eigenvalues: tuple[complex, complex]


@dataclass
class ProbeResult:
    """Outcome of a trajectory probe: settled, cycling, or undecided."""

    kind: str  # "fixed-point" | "cycle" | "none"
    fixed_point: FixedPoint | None = None
    period: float | None = None
    amplitude: float | None = None
    t: np.ndarray | None = None
    p: np.ndarray | None = None
    q: np.ndarray | None = None


@dataclass
class CuspTrace:
    """Two saddle-node fold branches in a two-parameter plane."""

    branch_low: np.ndarray   # (n, 2) rows of (param_a, param_b)
    branch_high: np.ndarray
    cusp: tuple[float, float] | None
    min_separation: float
    partial: bool


# --------------------------------------------------------------------------
# derivatives, Newton, classification
# --------------------------------------------------------------------------

def _jacobian_fd(rhs, p: float, q: float):
    hp = _FD_STEP * (1.0 + abs(p))
    hq = _FD_STEP * (1.0 + abs(q))
    f0 = rhs(p, q)
    fp = rhs(p + hp, q)
    fq = rhs(p, q + hq)
    return (
        ((fp[0] - f0[0]) / hp, (fq[0] - f0[0]) / hq),
        ((fp[1] - f0[1]) / hp, (fq[1] - f0[1]) / hq),
    ), f0


def _eig2(J) -> tuple[complex, complex]:
    tr = J[0][0] + J[1][1]
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    disc = tr * tr / 4.0 - det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return (complex(tr / 2.0 - s), complex(tr / 2.0 + s))
    s = math.sqrt(-disc)
    return (complex(tr / 2.0, -s), complex(tr / 2.0, s))


def _classify(eigs: tuple[complex, complex]) -> FixedPointClass:
    l1, l2 = eigs
    if l1.imag == 0.0 and l2.imag == 0.0:
        if l1.real * l2.real < 0.0:
            return FixedPointClass.SADDLE
        if l1.real + l2.real < 0.0:
            return FixedPointClass.STABLE_NODE
        return FixedPointClass.UNSTABLE_NODE
    re = l1.real
    if re < -_EIG_ZERO_TOL:
        return FixedPointClass.STABLE_FOCUS
    if re > _EIG_ZERO_TOL:
        return FixedPointClass.UNSTABLE_FOCUS
    return FixedPointClass.CENTER


def _newton(rhs, p: float, q: float, max_iter: int = _NEWTON_MAX_ITER):
    """Newton iteration with FD Jacobian; returns (p, q, residual) or None."""
    for _ in range(max_iter):
        try:
            J, f0 = _jacobian_fd(rhs, p, q)
        except (ArithmeticError, ValueError):
            return None
        res = max(abs(f0[0]), abs(f0[1]))
        if not math.isfinite(res):
            return None
        if res < _NEWTON_TOL:
            return p, q, res
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        if det == 0.0 or not math.isfinite(det):
            return None
        dp = (f0[0] * J[1][1] - f0[1] * J[0][1]) / det
        dq = (f0[1] * J[0][0] - f0[0] * J[1][0]) / det
        p, q = p - dp, q - dq
        if abs(p) > 1e12 or abs(q) > 1e12:
            return None
    try:
        f0 = rhs(p, q)
    except (ArithmeticError, ValueError):
        return None
    res = max(abs(f0[0]), abs(f0[1]))
    if math.isfinite(res) and res < _RESIDUAL_ACCEPT:
        return p, q, res
    return None


def _make_fixed_point(rhs, p: float, q: float, residual: float) -> FixedPoint:
    J, _ = _jacobian_fd(rhs, p, q)
    eigs = _eig2(J)
    return FixedPoint(p=p, q=q, jacobian=J, eigenvalues=eigs,
                      kind=_classify(eigs), residual=residual)


def find_fixed_points(sys: PlanarSystem, window: Window | None = None,
                      seed_grid_n: int | None = None) -> list[FixedPoint]:
    """Newton roots from a seed grid, deduplicated and classified.

    Seeds that fail to converge are dropped silently; an empty list is a
    valid result.
    """
    window = window or sys.window
    n = seed_grid_n if seed_grid_n is not None else sys.seed_grid_n
    if n < 8:
        raise ValueError(f"seed_grid_n must be >= 8, got {n}")
    ps = np.linspace(window.p_min, window.p_max, n)
    qs = np.linspace(window.q_min, window.q_max, n)
    margin = 1e-9 * (1.0 + window.diag)

    found: list[FixedPoint] = []

    def try_seed(p0, q0):
        sol = _newton(sys.rhs, float(p0), float(q0))
        if sol is None:
            return
        p, q, res = sol
        if not window.contains(p, q, margin=margin):
            return
        if any(fp.distance(p, q) < _DEDUP_RADIUS for fp in found):
            return
        found.append(_make_fixed_point(sys.rhs, p, q, res))

    for p0 in ps:
        for q0 in qs:
            try_seed(p0, q0)

    # refinement: roots with tiny Newton basins hide between the ones the
    # grid finds; reseed from sign changes of each component sampled along
    # the segments connecting already-found roots.
    for _ in range(3):
        before = len(found)
        snapshot = list(found)
        for i in range(len(snapshot)):
            for j in range(i + 1, len(snapshot)):
                a, b = snapshot[i], snapshot[j]
                lam = np.linspace(0.0, 1.0, 65)[1:-1]
                pts = [(a.p + t * (b.p - a.p), a.q + t * (b.q - a.q)) for t in lam]
                vals = [sys.rhs(p, q) for p, q in pts]
                for comp in (0, 1):
                    series = [v[comp] for v in vals]
                    for k in range(len(series) - 1):
                        if series[k] == 0.0 or (series[k] < 0) != (series[k + 1] < 0):
                            mid = (0.5 * (pts[k][0] + pts[k + 1][0]),
                                   0.5 * (pts[k][1] + pts[k + 1][1]))
                            try_seed(*mid)
        if len(found) == before:
            break

    found.sort(key=lambda fp: (fp.p, fp.q))
    return found


# --------------------------------------------------------------------------
# nullclines (marching squares)
# --------------------------------------------------------------------------

def _marching_segments(P, Q, F):
    """Zero-level segments of samples F on the meshgrid (P, Q)."""
    segs = []
    n_q, n_p = F.shape
    pos = F >= 0.0
    for j in range(n_q - 1):
        for i in range(n_p - 1):
            c00, c10 = pos[j, i], pos[j, i + 1]
            c01, c11 = pos[j + 1, i], pos[j + 1, i + 1]
            idx = (c00, c10, c11, c01)
            if all(idx) or not any(idx):
                continue
            f00, f10 = F[j, i], F[j, i + 1]
            f01, f11 = F[j + 1, i], F[j + 1, i + 1]
            x0, x1 = P[j, i], P[j, i + 1]
            y0, y1 = Q[j, i], Q[j + 1, i]

            def cross(fa, fb, a, b):
                d = fb - fa
                t = 0.5 if d == 0.0 else fa / (fa - fb)
                return a + min(max(t, 0.0), 1.0) * (b - a)

            pts = {}
            if c00 != c10:
                pts["bottom"] = (cross(f00, f10, x0, x1), y0)
            if c01 != c11:
                pts["top"] = (cross(f01, f11, x0, x1), y1)
            if c00 != c01:
                pts["left"] = (x0, cross(f00, f01, y0, y1))
            if c10 != c11:
                pts["right"] = (x1, cross(f10, f11, y0, y1))

            edges = list(pts)
            if len(edges) == 2:
                segs.append((pts[edges[0]], pts[edges[1]]))
            elif len(edges) == 4:
                # saddle cell: disambiguate with the centre sample sign
                centre = 0.25 * (f00 + f10 + f01 + f11)
                if (centre >= 0.0) == c00:
                    segs.append((pts["bottom"], pts["right"]))
                    segs.append((pts["left"], pts["top"]))
                else:
                    segs.append((pts["bottom"], pts["left"]))
                    segs.append((pts["right"], pts["top"]))
    return segs


def _chain_segments(segs):
    """Join shared endpoints into ordered polylines."""
    if not segs:
        return []

    def key(pt):
        return (round(pt[0], 12), round(pt[1], 12))

    adjacency: dict[tuple, list[int]] = {}
    for si, (a, b) in enumerate(segs):
        adjacency.setdefault(key(a), []).append(si)
        adjacency.setdefault(key(b), []).append(si)

    used = [False] * len(segs)
    polylines = []
    for start in range(len(segs)):
        if used[start]:
            continue
        used[start] = True
        a, b = segs[start]
        line = [a, b]
        for head, append in ((key(b), True), (key(a), False)):
            node = head
            while True:
                nxt = next((s for s in adjacency.get(node, []) if not used[s]), None)
                if nxt is None:
                    break
                used[nxt] = True
                pa, pb = segs[nxt]
                point = pb if key(pa) == node else pa
                if append:
                    line.append(point)
                else:
                    line.insert(0, point)
                node = key(point)
        polylines.append(np.array(line))
    return polylines


def nullclines(sys: PlanarSystem, window: Window | None = None,
               resolution: int = 128):
    """Zero contours of both components, as two lists of (n, 2) polylines."""
    window = window or sys.window
    if resolution < 32:
        raise ValueError(f"resolution must be >= 32, got {resolution}")
    ps = np.linspace(window.p_min, window.p_max, resolution)
    qs = np.linspace(window.q_min, window.q_max, resolution)
    P, Q = np.meshgrid(ps, qs)
    F1 = np.empty_like(P)
    F2 = np.empty_like(P)
    for j in range(resolution):
        for i in range(resolution):
            d1, d2 = sys.rhs(float(P[j, i]), float(Q[j, i]))
            F1[j, i] = d1
            F2[j, i] = d2
    out = []
    for comp, F in (("first", F1), ("second", F2)):
        if np.all(F == 0.0):
            raise DegenerateContourError(
                f"{comp} component is identically zero on the window"
            )
        out.append(_chain_segments(_marching_segments(P, Q, F)))
    return out[0], out[1]


# --------------------------------------------------------------------------
# trajectory probes
# --------------------------------------------------------------------------

def _rk4_path(rhs, p: float, q: float, dt: float, n_steps: int,
              record_every: int = 1, stop_velocity: float | None = None,
              bound: float = 1e9):
    """Fixed-step RK4 in plain floats; optionally stops when |rhs| is tiny."""
    ts, ps, qs = [0.0], [p], [q]
    t = 0.0
    for i in range(n_steps):
        k1p, k1q = rhs(p, q)
        if stop_velocity is not None and abs(k1p) < stop_velocity and abs(k1q) < stop_velocity:
            return np.array(ts), np.array(ps), np.array(qs), True
        h2 = dt / 2.0
        k2p, k2q = rhs(p + h2 * k1p, q + h2 * k1q)
        k3p, k3q = rhs(p + h2 * k2p, q + h2 * k2q)
        k4p, k4q = rhs(p + dt * k3p, q + dt * k3q)
        p = p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        q = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        t += dt
        if not (math.isfinite(p) and math.isfinite(q)) or abs(p) > bound or abs(q) > bound:
            break
        if (i + 1) % record_every == 0:
            ts.append(t)
            ps.append(p)
            qs.append(q)
    return np.array(ts), np.array(ps), np.array(qs), False


def limit_cycle_probe(sys: PlanarSystem, start: tuple[float, float],
                      t_probe: float, dt: float = 0.01) -> ProbeResult:
    """Integrate from ``start`` and report a fixed point, a cycle, or neither.

    Convergence means the state velocity drops below 1e-8.  A cycle is
    detected from repeated same-direction crossings of the vertical
    Poincare line through the mean of the post-transient trajectory; the
    period is the mean interval of the last five returns.
    """
    if not t_probe > 0:
        raise ValueError("t_probe must be positive")
    n_steps = max(1, int(round(t_probe / dt)))
    ts, ps, qs, settled = _rk4_path(sys.rhs, float(start[0]), float(start[1]),
                                    dt, n_steps, stop_velocity=1e-8)
    result = ProbeResult(kind="none", t=ts, p=ps, q=qs)
    if settled:
        sol = _newton(sys.rhs, float(ps[-1]), float(qs[-1]))
        if sol is not None:
            result.fixed_point = _make_fixed_point(sys.rhs, sol[0], sol[1], sol[2])
        result.kind = "fixed-point"
        return result

    # look for a cycle in the second half of the trajectory
    half = len(ts) // 2
    p_tail, q_tail, t_tail = ps[half:], qs[half:], ts[half:]
    if len(p_tail) < 8:
        return result
    m_p = float(np.mean(p_tail))
    rel = p_tail - m_p
    crossing_times = []
    for i in range(len(rel) - 1):
        if rel[i] < 0.0 <= rel[i + 1]:
            f = rel[i] / (rel[i] - rel[i + 1])
            crossing_times.append(t_tail[i] + f * (t_tail[i + 1] - t_tail[i]))
    if len(crossing_times) >= 6:
        intervals = np.diff(crossing_times[-6:])
        period = float(np.mean(intervals))
        spread = float(np.max(np.abs(intervals - period)))
        if period > 0 and spread < 0.2 * period:
            result.kind = "cycle"
            result.period = period
            result.amplitude = float(0.5 * (np.max(p_tail) - np.min(p_tail)))
    return result


def stability_probe(sys: PlanarSystem, fp: FixedPoint, offset: float = 1e-3,
                    dt: float = 0.01, t_max: float = 2000.0) -> str:
    """Start ``offset`` away from ``fp`` and report 'converged' or 'escaped'.

    Converged means the trajectory comes back within 1e-4 of the fixed
    point; escaped means it leaves the 1e-2 ball around it.  The kick
    direction is the eigenvector of the largest-real-part eigenvalue (a
    generic direction for nodes/foci, the unstable direction for saddles).
    """
    J = fp.jacobian
    lam = max(fp.eigenvalues, key=lambda z: z.real)
    # eigenvector of the 2x2 for eigenvalue lam (real part direction)
    a, b = J[0][0] - lam.real, J[0][1]
    if abs(b) > 1e-14 or abs(a) > 1e-14:
        vec = (-b, a) if (abs(b) > abs(a)) else (J[1][1] - lam.real, -J[1][0])
    else:
        vec = (1.0, 1.0)
    norm = math.hypot(*vec) or 1.0
    direction = (vec[0] / norm, vec[1] / norm)
    if direction == (0.0, 0.0):
        direction = (math.sqrt(0.5), math.sqrt(0.5))
    p = fp.p + offset * direction[0]
    q = fp.q + offset * direction[1]
    n_steps = int(t_max / dt)
    for _ in range(n_steps):
        k1p, k1q = sys.rhs(p, q)
        h2 = dt / 2.0
        k2p, k2q = sys.rhs(p + h2 * k1p, q + h2 * k1q)
        k3p, k3q = sys.rhs(p + h2 * k2p, q + h2 * k2q)
        k4p, k4q = sys.rhs(p + dt * k3p, q + dt * k3q)
        p = p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        q = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        d = fp.distance(p, q)
        if d < 1e-4:
            return "converged"
        if d > 1e-2:
            return "escaped"
    return "undecided"


# --------------------------------------------------------------------------
# one-parameter scans
# --------------------------------------------------------------------------

@dataclass
class _Branch:
    param_idx: list[int] = field(default_factory=list)
    points: list[FixedPoint] = field(default_factory=list)
    alive: bool = True

    @property
    def tip(self) -> FixedPoint:
        return self.points[-1]

    def motion(self) -> float:
        if len(self.points) < 2:
            return 0.0
        a, b = self.points[-2], self.points[-1]
        return a.distance(b.p, b.q)


def _track_branches(family: ParamFamily, values: np.ndarray):
    """Follow fixed-point branches across the sweep by nearest matching."""
    branches: list[_Branch] = []
    floor = 0.02 * family.window.diag
    first_cap = 0.1 * family.window.diag
    for k, val in enumerate(values):
        snapshot = find_fixed_points(family.system(float(val)))
        alive = [b for b in branches if b.alive]
        taken = [False] * len(snapshot)
        pairs = []
        for bi, branch in enumerate(alive):
            cap = first_cap if len(branch.points) < 2 else max(10.0 * branch.motion(), floor)
            for ci, fp in enumerate(snapshot):
                d = branch.tip.distance(fp.p, fp.q)
                if d <= cap:
                    pairs.append((d, bi, ci))
        pairs.sort(key=lambda t: (t[0], t[1], t[2]))
        matched_branch = set()
        for d, bi, ci in pairs:
            if bi in matched_branch or taken[ci]:
                continue
            matched_branch.add(bi)
            taken[ci] = True
            alive[bi].param_idx.append(k)
            alive[bi].points.append(snapshot[ci])
        for bi, branch in enumerate(alive):
            if bi not in matched_branch:
                branch.alive = False
        for ci, fp in enumerate(snapshot):
            if not taken[ci]:
                branches.append(_Branch(param_idx=[k], points=[fp]))
    return branches


def _fp_near(rhs, seed: tuple[float, float], radius: float, window: Window):
    """Converged fixed point within ``radius`` of seed, else None."""
    jitter = [(0.0, 0.0), (radius / 3, 0.0), (-radius / 3, 0.0),
              (0.0, radius / 3), (0.0, -radius / 3)]
    for dp, dq in jitter:
        sol = _newton(rhs, seed[0] + dp, seed[1] + dq)
        if sol is None:
            continue
        p, q, res = sol
        if math.hypot(p - seed[0], q - seed[1]) <= radius and window.contains(p, q, margin=radius):
            return p, q, res
    return None


def _solve3(rhs3, z, max_iter: int = 40, tol: float = 1e-11):
    """Newton on a 3-equation system with FD Jacobian; z = (p, q, param)."""
    z = np.array(z, dtype=float)
    for _ in range(max_iter):
        f0 = np.array(rhs3(z), dtype=float)
        if not np.all(np.isfinite(f0)):
            return None
        if np.max(np.abs(f0)) < tol:
            return z
        J = np.empty((3, 3))
        for j in range(3):
            h = _FD_STEP * (1.0 + abs(z[j]))
            zh = z.copy()
            zh[j] += h
            fh = np.array(rhs3(zh), dtype=float)
            J[:, j] = (fh - f0) / h
        try:
            step = np.linalg.solve(J, f0)
        except np.linalg.LinAlgError:
            return None
        z = z - step
        if not np.all(np.isfinite(z)):
            return None
    f0 = np.array(rhs3(z), dtype=float)
    return z if np.max(np.abs(f0)) < 1e-8 else None


def _polish_hopf(family: ParamFamily, value: float, seed: tuple[float, float]):
    """Solve rhs = 0 together with trace(J) = 0 near (seed, value)."""

    def eqs(z):
        rhs = family.build(float(z[2]))
        J, f0 = _jacobian_fd(rhs, float(z[0]), float(z[1]))
        return (f0[0], f0[1], J[0][0] + J[1][1])

    z = _solve3(eqs, (seed[0], seed[1], value))
    if z is None:
        return None
    rhs = family.build(float(z[2]))
    sol = _newton(rhs, float(z[0]), float(z[1]))
    if sol is None:
        return None
    fp = _make_fixed_point(rhs, sol[0], sol[1], sol[2])
    l1 = fp.eigenvalues[0]
    if l1.imag == 0.0 or abs(l1.real) >= 1e-6:
        return None
    return BifurcationPoint(
        param=family.param, value=float(z[2]), kind="hopf",
        residual=abs(l1.real), location=(fp.p, fp.q), eigenvalues=fp.eigenvalues,
    )


def _polish_fold(family: ParamFamily, value: float, seed: tuple[float, float]):
    """Solve rhs = 0 together with det(J) = 0 near (seed, value)."""

    def eqs(z):
        rhs = family.build(float(z[2]))
        J, f0 = _jacobian_fd(rhs, float(z[0]), float(z[1]))
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        return (f0[0], f0[1], det)

    z = _solve3(eqs, (seed[0], seed[1], value))
    if z is None:
        return None
    rhs = family.build(float(z[2]))
    J, f0 = _jacobian_fd(rhs, float(z[0]), float(z[1]))
    if max(abs(f0[0]), abs(f0[1])) > 1e-8:
        return None
    eigs = _eig2(J)
    lam_min = min(abs(eigs[0]), abs(eigs[1]))
    if lam_min >= 1e-6:
        return None
    if not family.window.contains(float(z[0]), float(z[1]), margin=0.05 * family.window.diag):
        return None
    return BifurcationPoint(
        param=family.param, value=float(z[2]), kind="saddle-node",
        residual=lam_min, location=(float(z[0]), float(z[1])), eigenvalues=eigs,
    )


def _bisect_hopf(family: ParamFamily, lo_val, hi_val, lo_fp: FixedPoint,
                 tol: float = 1e-9):
    """Shrink a Hopf bracket by following the tracked fixed point."""
    seed = (lo_fp.p, lo_fp.q)
    lo_sign = math.copysign(1.0, lo_fp.eigenvalues[0].real)
    radius = 0.5 * family.window.diag
    while abs(hi_val - lo_val) > tol:
        mid = 0.5 * (lo_val + hi_val)
        sol = _fp_near(family.build(mid), seed, radius, family.window)
        if sol is None:
            return None, seed
        fp = _make_fixed_point(family.build(mid), sol[0], sol[1], sol[2])
        if fp.eigenvalues[0].imag == 0.0:
            # pair went real mid-bracket; shrink toward the complex side
            hi_val = mid
            continue
        seed = (fp.p, fp.q)
        if math.copysign(1.0, fp.eigenvalues[0].real) == lo_sign:
            lo_val = mid
        else:
            hi_val = mid
    return 0.5 * (lo_val + hi_val), seed


def scan_one_param(family: ParamFamily, lo: float, hi: float,
                   n_steps: int) -> list[BifurcationPoint]:
    """Sweep a parameter, tracking branches and refining critical values.

    Hopf points come from sign changes of the real part of a complex
    eigenpair along a branch; saddle-nodes from branch pair
    creation/annihilation.  Candidates that cannot be confirmed to the
    eigenvalue tolerances are dropped.
    """
    if n_steps < 16:
        raise ValueError(f"n_steps must be >= 16, got {n_steps}")
    values = np.linspace(lo, hi, n_steps)
    v_lo, v_hi = min(lo, hi), max(lo, hi)
    branches = _track_branches(family, values)
    points: list[BifurcationPoint] = []

    # Hopf: complex-pair real-part sign change along a branch
    for branch in branches:
        for i in range(len(branch.points) - 1):
            a, b = branch.points[i], branch.points[i + 1]
            la, lb = a.eigenvalues[0], b.eigenvalues[0]
            if la.imag == 0.0 or lb.imag == 0.0:
                continue
            if la.real == 0.0 or lb.real == 0.0 or (la.real < 0) == (lb.real < 0):
                continue
            va, vb = values[branch.param_idx[i]], values[branch.param_idx[i + 1]]
            mid, seed = _bisect_hopf(family, va, vb, a)
            candidate = None
            if mid is not None:
                candidate = _polish_hopf(family, mid, seed)
            if candidate is None:
                candidate = _polish_hopf(family, 0.5 * (va + vb), (a.p, a.q))
            if candidate is not None and v_lo - 1e-9 <= candidate.value <= v_hi + 1e-9:
                points.append(candidate)

    # Saddle-node: branches appearing/disappearing mid-sweep
    events = []  # (interval_index, fixed point at the surviving edge)
    edge_margin = 0.02 * family.window.diag
    for branch in branches:
        first, last = branch.param_idx[0], branch.param_idx[-1]
        if first > 0:
            fp = branch.points[0]
            if _interior_point(fp, family.window, edge_margin):
                events.append((first - 1, fp))
        if last < n_steps - 1 and not branch.alive:
            fp = branch.points[-1]
            if _interior_point(fp, family.window, edge_margin):
                events.append((last, fp))

    # pair events in the same interval (fold = two branches meeting)
    by_interval: dict[int, list[FixedPoint]] = {}
    for idx, fp in events:
        by_interval.setdefault(idx, []).append(fp)
    seen: list[BifurcationPoint] = []
    for idx, fps in sorted(by_interval.items()):
        groups = _pair_by_proximity(fps, 0.5 * family.window.diag)
        for group in groups:
            seed_p = float(np.mean([fp.p for fp in group]))
            seed_q = float(np.mean([fp.q for fp in group]))
            guess = 0.5 * (values[idx] + values[idx + 1])
            candidate = _polish_fold(family, guess, (seed_p, seed_q))
            if candidate is None:
                candidate = _polish_fold(family, values[idx], (seed_p, seed_q))
            if candidate is not None and v_lo - 1e-9 <= candidate.value <= v_hi + 1e-9:
                seen.append(candidate)
    points.extend(seen)

    # deduplicate (same kind, same critical value)
    scale = max(abs(hi - lo), 1e-30)
    unique: list[BifurcationPoint] = []
    for pt in sorted(points, key=lambda p: p.value):
        if any(
            u.kind == pt.kind
            and abs(u.value - pt.value) < 1e-6 * scale
            and math.hypot(u.location[0] - pt.location[0], u.location[1] - pt.location[1])
            < 1e-3 * family.window.diag
            for u in unique
        ):
            continue
        unique.append(pt)
    return unique


def _interior_point(fp: FixedPoint, window: Window, margin: float) -> bool:
    return (
        window.p_min + margin <= fp.p <= window.p_max - margin
        and window.q_min + margin <= fp.q <= window.q_max - margin
    )


def _pair_by_proximity(fps: list[FixedPoint], radius: float):
    """Group event points into colliding pairs (closest first)."""
    remaining = list(fps)
    groups = []
    while remaining:
        fp = remaining.pop(0)
        if not remaining:
            groups.append([fp])
            break
        dists = [fp.distance(other.p, other.q) for other in remaining]
        j = int(np.argmin(dists))
        if dists[j] <= radius:
            groups.append([fp, remaining.pop(j)])
        else:
            groups.append([fp])
    return groups


# --------------------------------------------------------------------------
# two-parameter cusp trace
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamFamily2:
    """Two-parameter family for fold-curve tracing."""

    param_a: str
    param_b: str
    build: Callable[[float, float], Callable[[float, float], tuple[float, float]]]
    window: Window
    name: str = ""
    seed_grid_n: int = 12

    def sub_family(self, a: float) -> ParamFamily:
        return ParamFamily(
            param=self.param_b,
            build=lambda b: self.build(a, b),
            window=self.window,
            name=f"{self.name}[{self.param_a}={a:g}]",
            seed_grid_n=self.seed_grid_n,
        )


def cusp_trace(family: ParamFamily2, a_range: tuple[float, float],
               b_range: tuple[float, float], n_a: int = 17,
               n_b: int = 33) -> CuspTrace:
    """Collect saddle-node points over a (param_a, param_b) grid.

    For each param_a value the param_b axis is swept with
    :func:`scan_one_param`; the smallest and largest fold values form the
    low/high branches.  Where both exist, the meeting (cusp) point is
    estimated at the separation minimum and then refined by walking
    param_a toward the branch collision.
    """
    a_values = np.linspace(a_range[0], a_range[1], n_a)
    low, high = [], []
    partial = False
    for a in a_values:
        folds = [
            pt.value
            for pt in scan_one_param(family.sub_family(float(a)), b_range[0], b_range[1],
                                     n_steps=n_b)
            if pt.kind == "saddle-node"
        ]
        if len(folds) >= 2:
            low.append((float(a), min(folds)))
            high.append((float(a), max(folds)))
        elif len(folds) == 1:
            partial = True
            low.append((float(a), folds[0]))
            high.append((float(a), folds[0]))
        else:
            partial = True

    low_arr = np.array(low) if low else np.empty((0, 2))
    high_arr = np.array(high) if high else np.empty((0, 2))
    if len(low_arr) == 0:
        return CuspTrace(low_arr, high_arr, None, math.inf, True)

    seps = high_arr[:, 1] - low_arr[:, 1]
    k = int(np.argmin(seps))
    cusp_a = low_arr[k, 0]
    cusp_b = 0.5 * (low_arr[k, 1] + high_arr[k, 1])
    min_sep = float(seps[k])

    # walk param_a toward the collision, re-scanning a shrinking b-window
    step = (a_range[1] - a_range[0]) / max(n_a - 1, 1)
    direction = _cusp_direction(seps, k)
    a_cur, b_centre, sep = cusp_a, cusp_b, min_sep
    for _ in range(24):
        step *= 0.5
        if abs(step) < 1e-7 or sep < 1e-7:
            break
        a_try = a_cur + direction * step
        half_width = max(4.0 * sep, 1e-6)
        folds = [
            pt.value
            for pt in scan_one_param(
                family.sub_family(float(a_try)),
                b_centre - half_width, b_centre + half_width, n_steps=33,
            )
            if pt.kind == "saddle-node"
        ]
        if len(folds) >= 2:
            new_sep = max(folds) - min(folds)
            if new_sep < sep:
                a_cur = a_try
                b_centre = 0.5 * (max(folds) + min(folds))
                sep = new_sep
    return CuspTrace(low_arr, high_arr, (float(a_cur), float(b_centre)),
                     float(sep), partial)


def _cusp_direction(seps: np.ndarray, k: int) -> float:
    """Direction along param_a in which the branch separation shrinks."""
    if k == 0:
        return -1.0
    if k == len(seps) - 1:
        return 1.0
    return -1.0 if seps[k - 1] < seps[k + 1] else 1.0
