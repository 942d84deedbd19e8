import math
from logging import getLogger

import numpy as np
from scipy.optimize import brentq

from typing import (
    Iterator,
    List,
    Sequence,
    Tuple,
    Union,
)

from .chain import detect_overrides, simulate, terminal_index
from .core.errors import InvalidArgument, PreconditionError, UnsupportedOrder
from .core.trajectory import Trajectory
from .core.types import (
    EsfFilter,
    FilterChoice,
    HorizonClock,
    Metrics,
    Scenario,
)
from .core.utils import SequenceProxy
from .runner import simulate_many

log = getLogger(__name__)


def _override_jerk(traj: Trajectory) -> float:
    """Largest |du/dt| inside override runs; one-sided differences at run ends."""
    flags = np.concatenate(([0], traj.override.astype(np.int8), [0]))
    edges = np.diff(flags)
    peak = 0.0
    for s, e in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)):
        if e - s < 2:
            continue
        jerk = np.gradient(traj.u[s:e], traj.dt)
        peak = max(peak, float(np.max(np.abs(jerk))))
    return peak


def compute_metrics(traj: Trajectory, clock: HorizonClock = None, *, jerk: bool = None) -> Metrics:
    """Summarize a trajectory.

    The jerk of the output is ``du/dt`` only for the double integrator, so it is
    computed by default when ``n == 2``; asking for it explicitly on another
    order raises :exc:`UnsupportedOrder`.
    """
    traj.require_samples()
    clock = clock or traj.clock
    if jerk and traj.n != 2:
        raise UnsupportedOrder(f'jerk is du/dt for the double integrator only, got n={traj.n}')
    if jerk is None:
        jerk = traj.n == 2

    pre = np.arange(len(traj)) < terminal_index(clock.T, traj.dt)
    h = traj.h[pre]
    intervals = tuple(detect_overrides(traj))
    return Metrics(
        min_h1=float(np.min(h[:, 0])),
        min_y_margin=float(np.max(traj.x[pre, 0])),
        max_abs_u=float(np.max(np.abs(traj.u[pre]))),
        max_abs_jerk_on_override=_override_jerk(traj) if jerk else None,
        x1_at_T=float(traj.x1_at_T),
        override_intervals=intervals,
        first_override_time=intervals[0][0] if intervals else None,
        peak_abs_state=float(np.max(np.abs(traj.x))),
        min_h=tuple(float(v) for v in np.min(h, axis=0)),
        label=traj.label,
    )


class ComparisonEntry:

    __slots__ = ('label', 'scenario', 'trajectory', 'metrics')

    def __init__(self, label: str, scenario: Scenario, trajectory: Trajectory, metrics: Metrics):
        self.label = label
        self.scenario = scenario
        self.trajectory = trajectory
        self.metrics = metrics

    def __repr__(self):
        return f'<ComparisonEntry {self.label!r}>'


class ComparisonReport:
    """Runs of one base scenario under several filters, in the order given."""

    __slots__ = ('base', '_entries')

    def __init__(self, base: Scenario, entries: List[ComparisonEntry]):
        self.base = base
        self._entries = entries

    @property
    def variants(self) -> Sequence[ComparisonEntry]:
        return SequenceProxy(self._entries)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self._entries)

    def __getitem__(self, label: str) -> ComparisonEntry:
        for entry in self._entries:
            if entry.label == label:
                return entry
        raise KeyError(label)

    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[ComparisonEntry]:
        return iter(self._entries)

    def require_variants(self) -> None:
        if not self._entries:
            raise PreconditionError('comparison report is empty')

    def __repr__(self):
        return f'<ComparisonReport base={self.base.name!r} variants={self.labels}>'


def _variant_scenario(base: Scenario, variant: Union[FilterChoice, Scenario]) -> Scenario:
    if not isinstance(variant, Scenario):
        return base.with_filter(variant)
    for field in ('n', 'x0', 'nominal', 'dt'):
        if getattr(variant, field) != getattr(base, field):
            raise PreconditionError(f'variant {variant.name!r} differs from {base.name!r} in {field}')
    return variant


def _unique_labels(scenarios: List[Scenario]) -> List[str]:
    seen = {}
    labels = []
    for s in scenarios:
        count = seen.get(s.name, 0)
        seen[s.name] = count + 1
        labels.append(s.name if not count else f'{s.name}_{count + 1}')
    return labels


def compare_filters(base: Scenario, variants: Sequence[Union[FilterChoice, Scenario]],
                    workers: int = 1) -> ComparisonReport:
    if not variants:
        raise PreconditionError('no variants to compare')
    scenarios = [_variant_scenario(base, v) for v in variants]
    trajectories = simulate_many(scenarios, workers=workers)
    entries = []
    for label, scenario, traj in zip(_unique_labels(scenarios), scenarios, trajectories):
        traj.label = label
        entries.append(ComparisonEntry(label, scenario, traj, compute_metrics(traj, scenario.clock)))
    return ComparisonReport(base, entries)


def match_reaction_rho(base: Scenario, target_time: float, lo: float, hi: float, xtol: float = 1e-6) -> float:
    """Exponential-filter rate whose first override happens at ``target_time``.

    Solved with Brent's method on ``first_override_time(rho) - target_time``;
    a run that never overrides counts as reacting at ``t_end``.
    """
    if base.n != 2:
        raise UnsupportedOrder(f'the exponential filter is defined for n=2 only, got n={base.n}')
    if not 0 < lo < hi:
        raise InvalidArgument(f'need 0 < lo < hi, got lo={lo!r}, hi={hi!r}')

    def reaction_gap(rho: float) -> float:
        traj = simulate(base.with_filter(EsfFilter(rho=rho)))
        intervals = detect_overrides(traj)
        first = intervals[0][0] if intervals else base.t_end
        log.debug('rho=%r reacts at %r', rho, first)
        return first - target_time

    f_lo, f_hi = reaction_gap(lo), reaction_gap(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise PreconditionError(f'[{lo!r}, {hi!r}] does not bracket a first override at t={target_time!r}')
    rho = brentq(reaction_gap, lo, hi, xtol=xtol)
    log.info('rho=%r reacts at t=%r', rho, target_time)
    return float(rho)
