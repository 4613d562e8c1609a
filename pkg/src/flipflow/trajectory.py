"""Graphon trajectories: integration of the velocity flow.

A trajectory solves the autonomous equation dW/dt = velocity(W) on the
free entries of a step graphon.  Forward in time the flow preserves the
graphon space, so the integrator asserts a tight numeric band around
[0, 1] and treats any violation as its own failure; values are never
clamped, which would only mask bugs.  Backward in time the flow may
leave the space; the age routine detects the first boundary crossing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import IntegrationFaultError
from .integrators import IntegratorOptions, StepStats, integrate_span
from .rules import Rule
from .stepfun import StepGraphon, StepKernel, cut_norm_exact, kernel_sub, linf_dist
from .velocity import velocity, velocity_poly, eval_poly

DEFAULT_OPTS = IntegratorOptions()


def _pack(w: StepKernel) -> np.ndarray:
    iu = np.triu_indices(w.m)
    return w.values[iu]


def _unpack(masses: np.ndarray, y: np.ndarray) -> np.ndarray:
    m = len(masses)
    out = np.zeros((m, m))
    iu = np.triu_indices(m)
    out[iu] = y
    out.T[iu] = y
    return out


def _field(rule: Rule, masses: np.ndarray):
    def f(y: np.ndarray) -> np.ndarray:
        w = StepGraphon(masses, _unpack(masses, y), band=0.5)
        return _pack(velocity(rule, w))

    return f


def _band_observer(band: float, stats: StepStats):
    def observe(_t0, _y0, t1, y1):
        excursion = max(float(-(y1.min())), float(y1.max() - 1.0), 0.0)
        stats.max_excursion = max(stats.max_excursion, excursion)
        if excursion > band:
            raise IntegrationFaultError(
                f"trajectory left the [0,1] band by {excursion:.3e} at t={t1:.6g}"
            )
        return None

    return observe


@dataclass
class Trajectory:
    """Time-stamped step graphons along one flow, with integrator stats."""

    masses: np.ndarray
    checkpoints: list  # [(t, StepGraphon)]
    stats: StepStats = field(default_factory=StepStats)

    def times(self) -> list[float]:
        return [t for t, _ in self.checkpoints]

    def at(self, t: float) -> StepGraphon:
        for tc, w in self.checkpoints:
            if abs(tc - t) <= 1e-12:
                return w
        raise KeyError(f"no checkpoint at t={t}")


def flow_at(
    rule: Rule, w0: StepGraphon, t: float, opts: IntegratorOptions = DEFAULT_OPTS
) -> StepGraphon:
    """The trajectory of `w0` evaluated at time t (t may be negative).

    Forward time enforces the value band; backward time does not, since
    the caller accepts a possible exit from the graphon space (the
    returned object then fails construction and the caller should use
    `backward_age` instead).
    """
    if opts.max_time is not None and abs(t) > opts.max_time:
        raise ValueError(f"|t|={abs(t)} exceeds max_time={opts.max_time}")
    if t == 0.0:
        return w0
    stats = StepStats()
    observer = _band_observer(opts.band_tol, stats) if t > 0 else None
    leg = integrate_span(_field(rule, w0.masses), _pack(w0), 0.0, t, opts, observer)
    band = opts.band_tol if t > 0 else 0.5
    return StepGraphon(w0.masses, _unpack(w0.masses, leg.y), band=band)


def integrate(
    rule: Rule,
    w0: StepGraphon,
    t_end: float,
    checkpoint_times=None,
    opts: IntegratorOptions = DEFAULT_OPTS,
) -> Trajectory:
    """Integrate forward to t_end, recording the flow at checkpoint times."""
    if t_end < 0:
        raise ValueError("integrate records forward trajectories; use flow_at for t < 0")
    if checkpoint_times is None:
        checkpoint_times = np.linspace(0.0, t_end, 11)
    times = sorted({float(t) for t in checkpoint_times})
    if times and (times[0] < 0 or times[-1] > t_end + 1e-12):
        raise ValueError("checkpoint times must lie in [0, t_end]")
    stats = StepStats()
    observer = _band_observer(opts.band_tol, stats)
    f = _field(rule, w0.masses)
    checkpoints = []
    y = _pack(w0)
    t = 0.0
    for tc in times:
        if tc > t:
            leg = integrate_span(f, y, t, tc, opts, observer)
            stats.merge(leg.stats)
            y, t = leg.y, tc
        checkpoints.append(
            (tc, StepGraphon(w0.masses, _unpack(w0.masses, y), band=opts.band_tol))
        )
    if t_end > t:
        leg = integrate_span(f, y, t, t_end, opts, observer)
        stats.merge(leg.stats)
    return Trajectory(w0.masses, checkpoints, stats)


def semigroup_check(
    rule: Rule,
    w0: StepGraphon,
    t: float,
    u: float,
    opts: IntegratorOptions = DEFAULT_OPTS,
) -> float:
    """Deviation between flowing t+u at once and u then t."""
    if t < 0 or u < 0:
        raise ValueError("semigroup check uses non-negative times")
    via = flow_at(rule, flow_at(rule, w0, u, opts), t, opts)
    direct = flow_at(rule, w0, t + u, opts)
    return linf_dist(via, direct)


# ---------------------------------------------------------------------------
# Backward time


@dataclass
class AgeResult:
    exceeded: bool
    age: float | None = None
    origin: StepGraphon | None = None
    max_age: float | None = None


def backward_age(
    rule: Rule,
    w0: StepGraphon,
    max_age: float = 50.0,
    opts: IntegratorOptions = DEFAULT_OPTS,
) -> AgeResult:
    """Largest backward time for which the flow stays a graphon.

    Integrates in negative time and bisects the first entry crossing of
    0 or 1 from inside.  If `w0` already touches the boundary and the
    backward motion at a touching entry points outside [0, 1], the age
    is 0 with origin `w0` itself.  Fixed points and other flows that
    survive past `max_age` report "exceeded".
    """
    y0 = _pack(w0)
    vel0 = _pack(velocity(rule, w0))
    touching_low = y0 <= opts.band_tol
    touching_high = y0 >= 1.0 - opts.band_tol
    # backward motion is -velocity: a 0-entry with positive velocity (or a
    # 1-entry with negative velocity) leaves the space immediately
    if np.any(touching_low & (vel0 > 0)) or np.any(touching_high & (vel0 < 0)):
        return AgeResult(False, 0.0, w0, max_age)

    f = _field(rule, w0.masses)
    crossing: dict = {}

    def inside(y: np.ndarray) -> bool:
        return float(y.min()) >= 0.0 and float(y.max()) <= 1.0

    def observe(t0, yprev, t1, ynew):
        if not inside(ynew):
            crossing["bracket"] = (t0, yprev, t1, ynew)
            return True
        return None

    leg = integrate_span(f, y0, 0.0, -max_age, opts, observe)
    if "bracket" not in crossing:
        return AgeResult(True, max_age=max_age)
    t_in, y_in, t_out, _ = crossing["bracket"]
    resolution = max(opts.atol, 1e-13)
    # bisect on time within the bracketing step; reintegrate short spans
    while abs(t_out - t_in) > resolution:
        t_mid = 0.5 * (t_in + t_out)
        leg = integrate_span(f, y_in, t_in, t_mid, opts)
        if inside(leg.y):
            t_in, y_in = t_mid, leg.y
        else:
            t_out = t_mid
    origin = StepGraphon(w0.masses, _unpack(w0.masses, y_in), band=opts.band_tol)
    return AgeResult(False, abs(t_in), origin, max_age)


# ---------------------------------------------------------------------------
# Long-time behaviour


@dataclass
class DestinationResult:
    converged: bool
    graphon: StepGraphon | None
    velocity_residual: float
    movement: float
    t_reached: float


def find_destination(
    rule: Rule,
    w0: StepGraphon,
    eps_vel: float = 1e-8,
    eps_move: float = 1e-9,
    t_max: float = 60.0,
    opts: IntegratorOptions = DEFAULT_OPTS,
) -> DestinationResult:
    """Integrate until the flow settles, or report non-convergence.

    Settling means the velocity's uniform norm drops below `eps_vel` and
    the movement over the last unit of time below `eps_move`.  A run that
    reaches `t_max` without settling is reported, never guessed: there
    are rules with periodic trajectories, so non-convergence is a value.
    """
    if eps_vel <= 0 or eps_move <= 0 or t_max <= 0:
        raise ValueError("tolerances and t_max must be positive")
    f = _field(rule, w0.masses)
    stats = StepStats()
    observer = _band_observer(opts.band_tol, stats)
    y = _pack(w0)
    t = 0.0
    while t < t_max:
        t_next = min(t + 1.0, t_max)
        leg = integrate_span(f, y, t, t_next, opts, observer)
        movement = float(np.max(np.abs(leg.y - y)))
        y, t = leg.y, t_next
        residual = float(np.max(np.abs(f(y))))
        if residual < eps_vel and movement < eps_move:
            w = StepGraphon(w0.masses, _unpack(w0.masses, y), band=opts.band_tol)
            return DestinationResult(True, w, residual, movement, t)
    w = StepGraphon(w0.masses, _unpack(w0.masses, y), band=opts.band_tol)
    return DestinationResult(False, w, float(np.max(np.abs(f(y)))), movement, t)


def constant_fixed_points(rule: Rule, grid_n: int = 1001, tol: float = 1e-10) -> list[float]:
    """Roots of the constant-graphon velocity polynomial in [0, 1].

    Scans a grid for sign changes, bisects each to `tol`, keeps endpoints
    and grid points where the velocity already vanishes, and merges roots
    closer than 10 * tol (Bernstein double roots).
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    poly = velocity_poly(rule)
    grid = np.linspace(0.0, 1.0, grid_n)
    vals = np.array([eval_poly(poly, d) for d in grid])
    roots = [float(d) for d, v in zip(grid, vals) if abs(v) < tol]
    for i in range(grid_n - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if abs(fa) < tol or abs(fb) < tol or fa * fb > 0:
            continue
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = eval_poly(poly, mid)
            if fm == 0.0:
                a = b = mid
            elif fa * fm < 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 10 * tol:
            merged.append(r)
    return merged


def genome_check(
    rule: Rule,
    u0: StepGraphon,
    w0: StepGraphon,
    t: float,
    opts: IntegratorOptions = DEFAULT_OPTS,
) -> float:
    """Growth ratio of the cut-norm distance between two flows over [0, t].

    Returns cut(flow(u0, t) - flow(w0, t)) / cut(u0 - w0); the distance
    can grow at most like exp(C t) with C = (k)_2^2 2^C(k,2).  A zero
    initial distance makes the ratio undefined (NaN).
    """
    d0 = cut_norm_exact(kernel_sub(u0, w0))
    if d0 == 0.0:
        return float("nan")
    ut = flow_at(rule, u0, t, opts)
    wt = flow_at(rule, w0, t, opts)
    return cut_norm_exact(kernel_sub(ut, wt)) / d0


def cut_lipschitz_constant(k: int) -> float:
    """Cut-norm Lipschitz constant of the velocity operator on graphons."""
    return float(k * (k - 1)) ** 2 * 2 ** comb(k, 2)


def linf_lipschitz_constant(k: int) -> float:
    """Uniform-norm Lipschitz constant of the velocity on graphons."""
    return float(k * (k - 1)) ** 2 * 2 ** (comb(k, 2) - 1)


# ---------------------------------------------------------------------------
# Planar field of the two-part periodic construction
#
# The two free diagonal blocks of a zero-off-diagonal two-part step
# function form a plane; the field below combines a unit tangent
# rotation about the center with a radial pull toward the circle of
# radius CIRCLE_RADIUS, scaled by a small gain.  Every trajectory
# started near the circle spirals onto it, giving a periodic orbit.

CIRCLE_CENTER = (0.2, 0.8)
CIRCLE_RADIUS = 0.1
ANNULUS_INNER = 0.09
ANNULUS_OUTER = 0.11
FIELD_GAIN = 5e-5  # strictly below 1e-4 so block densities stay in [0, 1]


def planar_field(p) -> np.ndarray:
    """Velocity of the planar construction at point p = (x, y)."""
    x, y = float(p[0]), float(p[1])
    a, b = CIRCLE_CENTER
    dx, dy = x - a, y - b
    rho = np.hypot(dx, dy)
    if rho == 0.0:
        raise ValueError("planar field is singular at the circle center")
    tangent = np.array([-dy, dx]) / rho
    radial = (CIRCLE_RADIUS / rho - 1.0) * np.array([dx, dy])
    return FIELD_GAIN * (tangent + radial)


@dataclass
class PlanarTrace:
    times: np.ndarray
    points: np.ndarray  # (len(times), 2)

    def final_radius(self) -> float:
        a, b = CIRCLE_CENTER
        return float(np.hypot(self.points[-1, 0] - a, self.points[-1, 1] - b))


def planar_demo(
    p0, t_end: float, opts: IntegratorOptions = DEFAULT_OPTS, num_points: int = 400
) -> PlanarTrace:
    """Integrate the planar field from p0, recording a trace of the orbit."""
    times = np.linspace(0.0, t_end, num_points)
    y = np.array([float(p0[0]), float(p0[1])])
    points = [y.copy()]
    t = 0.0
    for tc in times[1:]:
        leg = integrate_span(lambda q: planar_field(q), y, t, float(tc), opts)
        y, t = leg.y, float(tc)
        points.append(y.copy())
    return PlanarTrace(times, np.array(points))
