"""
Fixed-step simulation of the integrator chain under a safety filter.

Samples live on ``t_k = t0 + k dt``. The filter branch (pre- or post-terminal)
is fixed at the start of each step and all four Runge-Kutta stages use it.
The recorded decision at ``t_k`` is also the first stage's input.
"""
import math
from logging import getLogger

import numpy as np

from typing import (
    Callable,
    List,
    Optional,
    Sequence,
    Tuple,
)

from .barrier import alpha_n, barrier_values, select_gains
from .config import DEFAULTS
from .core.errors import NumericError, PreconditionError
from .core.trajectory import Trajectory, TrajectoryRecorder
from .core.types import (
    AutoGains,
    EsfFilter,
    GainVector,
    Interval,
    PtsfFilter,
    Scenario,
)
from .filters import esf_barriers, esf_control, esf_min_rho, ptsf_post_terminal, ptsf_pre_terminal
from .nominal import build_nominal

log = getLogger(__name__)

_NAN = float('nan')

Law = Callable[[np.ndarray, float], float]


def chain_rhs(x: Sequence[float], u: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[:-1] = x[1:]
    out[-1] = u
    return out


def _checked(u: float, t: float, x) -> float:
    if not math.isfinite(u):
        raise NumericError(f'control evaluated to {u!r}', t=t, x=x)
    return u


def step_rk4(x: Sequence[float], t: float, dt: float, control_law: Law, u_start: float = None) -> np.ndarray:
    """One classical Runge-Kutta step. ``u_start`` replaces the first stage's
    control evaluation when the caller already has it."""
    if not dt > 0:
        raise PreconditionError(f'step size must be positive, got {dt!r}')
    x = np.asarray(x, dtype=float)
    half = 0.5 * dt
    u1 = control_law(x, t) if u_start is None else u_start
    k1 = chain_rhs(x, _checked(u1, t, x))
    x2 = x + half * k1
    k2 = chain_rhs(x2, _checked(control_law(x2, t + half), t + half, x2))
    x3 = x + half * k2
    k3 = chain_rhs(x3, _checked(control_law(x3, t + half), t + half, x3))
    x4 = x + dt * k3
    k4 = chain_rhs(x4, _checked(control_law(x4, t + dt), t + dt, x4))
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def grid_size(t0: float, t_end: float, dt: float) -> int:
    """Number of steps on the grid; the last sample is at or just before ``t_end``."""
    return int(math.floor((t_end - t0) / dt + 1e-9))


def terminal_index(T: float, dt: float) -> int:
    """Index of the first sample at or after the terminal time."""
    return int(math.ceil(T / dt - 1e-9))


def resolve_gains(scenario: Scenario) -> GainVector:
    policy = scenario.gains
    if isinstance(policy, AutoGains):
        return select_gains(scenario.x0, scenario.clock, policy.margin, policy.last_gain)
    return policy.gains


def resolve_rho(scenario: Scenario) -> float:
    choice = scenario.filter
    if choice.rho is not None:
        return choice.rho
    return esf_min_rho(scenario.x0) + choice.margin


class _Run:
    """Filter laws of one scenario: a full decision for recording plus the bare
    input law used by the Runge-Kutta stages."""

    __slots__ = ('scenario', 'clock', 'nominal', 'gains', 'rho', 'x1_at_T', 'n')

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.clock = scenario.clock
        self.n = scenario.n
        self.nominal = build_nominal(scenario.nominal, scenario.n, self.clock)
        self.gains: Optional[GainVector] = None
        self.rho: Optional[float] = None
        self.x1_at_T: Optional[float] = None
        if isinstance(scenario.filter, PtsfFilter):
            self.gains = resolve_gains(scenario)
        elif isinstance(scenario.filter, EsfFilter):
            self.rho = resolve_rho(scenario)

    def _post_time(self, t: float) -> float:
        # t0 + k_T dt can land an ulp short of the terminal time
        return max(t, self.clock.terminal_time)

    def decide(self, x: np.ndarray, t: float, pre: bool) -> Tuple[float, float, float, tuple, bool, bool]:
        """``(u, u_nom, safe_bound, h, override, mu_clipped)`` at ``(x, t)``."""
        u_nom = self.nominal(x, t)
        xs = x.tolist()
        choice = self.scenario.filter
        if isinstance(choice, PtsfFilter):
            h, _, _ = barrier_values(xs, t, self.clock, self.gains)
            if pre:
                d = ptsf_pre_terminal(u_nom, xs, t, self.clock, self.gains)
            else:
                d = ptsf_post_terminal(u_nom, self._post_time(t), self.clock, choice.config, self.x1_at_T)
            return d.u, u_nom, d.alpha_n, h, d.override_active, d.mu_clipped
        if isinstance(choice, EsfFilter):
            d = esf_control(u_nom, x, self.rho)
            return d.u, u_nom, d.alpha_n, esf_barriers(x, self.rho), d.override_active, False
        return u_nom, u_nom, _NAN, (-xs[0],) + (_NAN,) * (self.n - 1), False, False

    def law(self, pre: bool) -> Law:
        nominal = self.nominal
        choice = self.scenario.filter
        if isinstance(choice, PtsfFilter):
            clock, gains = self.clock, self.gains
            if pre:
                def ptsf_pre(x, t):
                    return min(nominal(x, t), alpha_n(x.tolist(), t, clock, gains)[0])
                return ptsf_pre
            config = choice.config

            def ptsf_post(x, t):
                return ptsf_post_terminal(nominal(x, t), self._post_time(t), clock, config, self.x1_at_T).u
            return ptsf_post
        if isinstance(choice, EsfFilter):
            rho = self.rho
            return lambda x, t: esf_control(nominal(x, t), x, rho).u
        return nominal


def _warn_stiffness(run: _Run, dt: float) -> None:
    if run.gains is None:
        return
    z = run.gains.max * run.clock.mu_max * dt
    if z > DEFAULTS.rk4_stability_limit:
        log.warning('%s: max(c) * mu_max * dt = %.3g exceeds the RK4 stability limit %.3g; '
                    'the run will diverge once mu reaches the ceiling',
                    run.scenario.name, z, DEFAULTS.rk4_stability_limit)


def simulate(scenario: Scenario) -> Trajectory:
    run = _Run(scenario)
    t0, dt = scenario.t0, scenario.dt
    steps = grid_size(t0, scenario.t_end, dt)
    k_T = terminal_index(scenario.T, dt)
    _warn_stiffness(run, dt)
    log.info('simulating %s: n=%d, %d steps of %g', scenario.name, scenario.n, steps, dt)

    recorder = TrajectoryRecorder(steps + 1, scenario.n)
    pre_law, post_law = run.law(True), run.law(False)
    x = np.array(scenario.x0, dtype=float)
    overriding = False
    switches = 0
    for k in range(steps + 1):
        t = t0 + k * dt
        if k == k_T:
            run.x1_at_T = float(x[0])
            log.debug('%s: x_1 at the terminal time is %r', scenario.name, run.x1_at_T)
        pre = k < k_T
        u, u_nom, bound, h, override, clipped = run.decide(x, t, pre)
        _checked(u, t, x)
        recorder.append(t, x, u, u_nom, bound, h, override, clipped)
        if override != overriding:
            switches += 1
            log.debug('%s: override %s at t=%r', scenario.name, 'on' if override else 'off', t)
            overriding = override
        if k == steps:
            break
        x = step_rk4(x, t, dt, pre_law if pre else post_law, u_start=u)
        if not np.all(np.isfinite(x)):
            raise NumericError('state became non-finite', t=t + dt, x=x)

    traj = recorder.finish(
        dt=dt,
        clock=run.clock,
        gains=run.gains,
        x1_at_T=_NAN if run.x1_at_T is None else run.x1_at_T,
        terminal_index=k_T,
        label=scenario.name,
    )
    log.info('finished %s: %d samples, %d override switches', scenario.name, len(traj), switches)
    return traj


def detect_overrides(traj: Trajectory) -> List[Interval]:
    """Maximal runs of the override flag as closed-open ``(t_start, t_end)``.
    A run reaching the last sample ends one step after it."""
    traj.require_samples()
    flags = np.concatenate(([0], traj.override.astype(np.int8), [0]))
    edges = np.diff(flags)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    last = len(traj) - 1
    intervals = []
    for s, e in zip(starts, ends):
        t_end = float(traj.t[e]) if e <= last else float(traj.t[last]) + traj.dt
        intervals.append((float(traj.t[s]), t_end))
    return intervals
