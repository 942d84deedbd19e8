"""
Verification suites.

Each check is a function ``check(rng) -> (passed, detail)`` registered under a
suite. The runner seeds every check with the same generator seed, times it and
collects the results; a failing or crashing check never stops the others.
"""
import math
from logging import getLogger
from dataclassy import dataclass

import numpy as np

from typing import (
    Callable,
    Dict,
    List,
    Optional,
    Tuple,
    Union,
)

from .barrier import barrier_stack, minimal_gains, select_gains, validate_gains
from .chain import simulate, step_rk4
from .config import DEFAULTS
from .core.errors import BarrierError, InvalidArgument, PTSafeException
from .core.types import (
    ConstantNominal,
    EsfFilter,
    FilterConfig,
    GainVector,
    HorizonClock,
    ManualGains,
    PtsfFilter,
    Scenario,
    TrackingSine,
)
from .core.utils import timefunc
from .enums import Suite
from .filters import esf_bound, esf_closed_form
from .kernel import check_mu_commutativity, mu, mu_derivative, xi
from .metrics import compare_filters

log = getLogger(__name__)

Check = Callable[[np.random.Generator], Tuple[bool, str]]

_REGISTRY: Dict[Suite, List[Tuple[str, Check]]] = {s: [] for s in Suite if s is not Suite.ALL}


def check(suite: Suite):
    def decorator(func: Check) -> Check:
        _REGISTRY[suite].append((func.__name__, func))
        return func
    return decorator


@dataclass(slots=True, frozen=True)
class CheckResult:
    name: str
    suite: Suite
    passed: bool
    detail: str = ''
    elapsed_ns: int = 0

    def __repr__(self):
        return f'<CheckResult {self.suite.value}.{self.name} {"ok" if self.passed else "FAILED"}>'


class VerificationReport:

    __slots__ = ('results',)

    def __init__(self, results: List[CheckResult]):
        self.results = tuple(results)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> Tuple[CheckResult, ...]:
        return tuple(r for r in self.results if not r.passed)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(r.name for r in self.results)

    def table(self) -> str:
        width = max((len(r.suite.value) + len(r.name) + 1 for r in self.results), default=10)
        lines = []
        for r in self.results:
            status = 'PASS' if r.passed else 'FAIL'
            lines.append(f'{status}  {(r.suite.value + "." + r.name).ljust(width)}  '
                         f'{r.elapsed_ns / 1e6:9.1f} ms  {r.detail}')
        lines.append(f'{len(self.results) - len(self.failures)}/{len(self.results)} checks passed')
        return '\n'.join(lines)

    def __repr__(self):
        return f'<VerificationReport checks={len(self.results)} failures={len(self.failures)}>'


# shared scenarios

def double_integrator_scenario(**overrides) -> Scenario:
    """The double-integrator experiment: x0 = (-4, 2), T = 4, gains (0.6, 0.6),
    tracking-sine nominal, ramp (2, 0.5), mu ceiling 1000, dt = 1e-3, t_end = 6."""
    fields = dict(
        name='double_integrator',
        dt=1e-3,
        t_end=6.0,
        gains=ManualGains(gains=GainVector.create_gains((0.6, 0.6))),
        filter=PtsfFilter(config=FilterConfig(ramp_m=2, ramp_T=0.5, mu_max=1000.0)),
        nominal=TrackingSine(),
    )
    fields.update(overrides)
    return Scenario.create_scenario((-4.0, 2.0), 4.0, **fields)


def forced_override_scenario(x0=(-4.0, 2.0), T: float = 4.0, *, gains=(0.6, 0.6), u_nom: float = 10.0,
                             dt: float = 1e-3, t_end: float = None, mu_max: float = 1000.0,
                             name: str = 'forced') -> Scenario:
    """Constant large nominal so the filter bound is applied from the start."""
    policy = ManualGains(gains=GainVector.create_gains(gains)) if gains is not None else None
    return Scenario.create_scenario(
        x0, T, name=name, dt=dt, t_end=T if t_end is None else t_end, gains=policy,
        filter=PtsfFilter(config=FilterConfig(mu_max=mu_max)),
        nominal=ConstantNominal(value=u_nom),
    )


def _rel(a: float, b: float, floor: float = 0.0) -> float:
    return abs(a - b) / max(abs(b), floor)


# kernel

@check(Suite.KERNEL)
def mu_monotone(rng: np.random.Generator) -> Tuple[bool, str]:
    for m in range(1, 7):
        for T in (0.5, 1.0, 4.0):
            values = np.array([mu(m, t, T) for t in np.linspace(0.0, 0.999 * T, 400)])
            if np.any(values < 1) or np.any(np.diff(values) < 0):
                return False, f'mu_{m} not >= 1 and nondecreasing for T={T}'
    return True, 'm=1..6 on three horizons'


@check(Suite.KERNEL)
def mu_commutativity(rng: np.random.Generator) -> Tuple[bool, str]:
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        T = float(rng.uniform(0.1, 10.0))
        t = float(rng.uniform(0.0, T)) * 0.999
        t_mid = float(rng.uniform(0.0, t))
        if not check_mu_commutativity(m, t_mid, t, T, 1e-10):
            return False, f'fails for m={m}, t_mid={t_mid!r}, t={t!r}, T={T!r}'
    return True, '1000 random instances'


@check(Suite.KERNEL)
def mu_derivative_identity(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 6))
        T = float(rng.uniform(0.5, 5.0))
        t = float(rng.uniform(0.01 * T, 0.9 * T))
        step = 1e-4 * (T - t)
        for i in (1, 2, 3):
            fd = (mu_derivative(m, i - 1, t + step, T) - mu_derivative(m, i - 1, t - step, T)) / (2 * step)
            worst = max(worst, _rel(fd, mu_derivative(m, i, t, T)))
    return worst <= 1e-6, f'max relative error {worst:.2e}'


@check(Suite.KERNEL)
def soft_landing_products(rng: np.random.Generator) -> Tuple[bool, str]:
    T = 1.0
    times = [T * (1 - 10.0 ** -j) for j in range(1, 7)]
    for c in (0.5, 1.0, 3.0):
        for k in range(7):
            values = [mu(1, t, T) ** k * xi(c, t, T) for t in times]
            if any(b > a for a, b in zip(values, values[1:])) or values[-1] > 1e-12:
                return False, f'mu_1^{k} xi does not decay for c={c}: {values}'
    return True, 'c in (0.5, 1, 3), k <= 6'


# backstepping

@check(Suite.BACKSTEPPING)
def double_integrator_gains(rng: np.random.Generator) -> Tuple[bool, str]:
    clock = HorizonClock(T=4.0)
    bounds = minimal_gains((-4.0, 2.0), clock)
    gains = select_gains((-4.0, 2.0), clock, 0.1, 0.6)
    ok = bounds == (0.5,) and all(abs(a - b) <= 1e-12 for a, b in zip(gains, (0.6, 0.6)))
    return ok, f'bounds {bounds}, gains {gains.c}'


def _random_initial_state(rng: np.random.Generator, n: int) -> Tuple[float, ...]:
    return (float(rng.uniform(-10.0, -0.1)),) + tuple(float(v) for v in rng.uniform(-5.0, 5.0, n - 1))


@check(Suite.BACKSTEPPING)
def gain_condition_equivalence(rng: np.random.Generator) -> Tuple[bool, str]:
    agree = 0
    for _ in range(500):
        n = int(rng.integers(2, 6))
        x0 = _random_initial_state(rng, n)
        clock = HorizonClock(T=float(rng.uniform(0.5, 10.0)))
        gains = GainVector.create_gains(rng.uniform(0.01, 5.0, n))
        by_bounds = validate_gains(gains, x0, clock)
        by_barriers = all(h > 0 for h in barrier_stack(x0, 0.0, clock, gains).h)
        if by_bounds != by_barriers:
            return False, f'disagree for x0={x0}, c={gains.c}'
        agree += by_bounds
    return True, f'500 draws, {agree} admissible'


def _free_flow(x: Tuple[float, ...], delta: float) -> Tuple[float, ...]:
    """Exact flow of the chain with u = 0."""
    n = len(x)
    return tuple(sum(x[j + k] * delta ** k / math.factorial(k) for k in range(n - j)) for j in range(n))


@check(Suite.BACKSTEPPING)
def jet_consistency(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    delta = 1e-5
    for _ in range(200):
        n = int(rng.integers(2, 6))
        x = tuple(float(v) for v in rng.uniform(-2.0, 2.0, n))
        clock = HorizonClock(T=float(rng.uniform(1.0, 10.0)))
        t = float(rng.uniform(delta, 0.5 * clock.T))
        gains = GainVector.create_gains(rng.uniform(0.1, 2.0, n))
        stack = barrier_stack(x, t, clock, gains)
        ahead = barrier_stack(_free_flow(x, delta), t + delta, clock, gains)
        behind = barrier_stack(_free_flow(x, -delta), t - delta, clock, gains)
        for i in range(n - 1):
            rate = stack.alpha_jets[i].derivative().value
            fd = (ahead.alpha[i] - behind.alpha[i]) / (2 * delta)
            worst = max(worst, abs(fd - rate) / max(1.0, abs(rate), abs(stack.alpha[i])))
    return worst <= 1e-5, f'max scaled error {worst:.2e}'


@check(Suite.BACKSTEPPING)
def barrier_linearity(rng: np.random.Generator) -> Tuple[bool, str]:
    for _ in range(100):
        n = int(rng.integers(1, 6))
        x = rng.uniform(-3.0, 3.0, n)
        a = float(rng.uniform(-4.0, 4.0))
        clock = HorizonClock(T=2.0)
        t = float(rng.uniform(0.0, 1.5))
        gains = GainVector.create_gains(rng.uniform(0.1, 3.0, n))
        base = barrier_stack(x, t, clock, gains)
        scaled = barrier_stack(a * x, t, clock, gains)
        for u, v in zip(scaled.h + scaled.alpha, base.h + base.alpha):
            if abs(u - a * v) > 1e-9 * max(1.0, abs(a * v)):
                return False, f'not linear at x={x}, a={a}'
    return True, '100 random states'


# oracles

@check(Suite.ORACLES)
def esf_closed_form_matches_rk4(rng: np.random.Generator) -> Tuple[bool, str]:
    x0 = np.array([-4.0, 2.0])
    dt = 1e-3
    worst = 0.0
    for rho in (0.6, 3.2):
        law = lambda x, t, rho=rho: esf_bound(x, rho)
        x = x0
        for k in range(1, 5001):
            x = step_rk4(x, (k - 1) * dt, dt, law)
            worst = max(worst, float(np.max(np.abs(x - esf_closed_form(x0, rho, k * dt)))))
    return worst <= 1e-6, f'max state error {worst:.2e}'


def hn_explicit_error(traj, clock: HorizonClock, c_n: float, t_stop: float) -> float:
    """Worst relative gap between the recorded ``h_n`` and its closed form
    ``h_n(t_ov) exp(-c_n (T - t_ov)(mu_1(t - t_ov, T - t_ov) - 1))``."""
    first = int(np.flatnonzero(traj.override)[0])
    t_ov, h_ov = float(traj.t[first]), float(traj.h[first, -1])
    remaining = clock.terminal_time - t_ov
    worst = 0.0
    for k in range(first, len(traj)):
        t = float(traj.t[k])
        if t > t_stop:
            break
        exact = h_ov * math.exp(-c_n * remaining * (mu(1, t - t_ov, remaining) - 1.0))
        worst = max(worst, _rel(float(traj.h[k, -1]), exact))
    return worst


@check(Suite.ORACLES)
def hn_explicit_solution(rng: np.random.Generator) -> Tuple[bool, str]:
    scenario = forced_override_scenario()
    traj = simulate(scenario)
    worst = hn_explicit_error(traj, scenario.clock, 0.6, 3.0)
    return worst <= 1e-4, f'max relative error {worst:.2e} on [0, 3]'


def closed_loop_residual(traj, gains: GainVector, clock: HorizonClock, t_stop: float) -> float:
    """Largest ``|h_i' + c_i mu_2 h_i - h_{i+1}|`` (``h_{n+1} = 0``) along an
    overridden run, with central differences of the recorded barriers."""
    n, dt = traj.n, traj.dt
    worst = 0.0
    for k in range(1, len(traj) - 1):
        t = float(traj.t[k])
        if t > t_stop:
            break
        if not (traj.override[k - 1] and traj.override[k] and traj.override[k + 1]):
            continue
        mu2 = clock.mu_clipped(2, t)
        for i in range(n):
            rate = (traj.h[k + 1, i] - traj.h[k - 1, i]) / (2 * dt)
            nxt = traj.h[k, i + 1] if i + 1 < n else 0.0
            residual = rate + gains[i] * mu2 * traj.h[k, i] - nxt
            worst = max(worst, abs(residual) / max(1.0, abs(rate)))
    return worst


@check(Suite.ORACLES)
def closed_loop_identity(rng: np.random.Generator) -> Tuple[bool, str]:
    scenario = forced_override_scenario((-4.0, 2.0, -1.0), 4.0, gains=None, u_nom=100.0, t_end=4.0)
    traj = simulate(scenario)
    worst = closed_loop_residual(traj, traj.gains, scenario.clock, 2.0)
    return worst <= 1e-4, f'max residual {worst:.2e} on [0, 2]'


def soft_landing_scenario() -> Scenario:
    return forced_override_scenario(T=1.0, dt=1e-5, mu_max=1e6, name='soft_landing')


@check(Suite.ORACLES)
def soft_landing(rng: np.random.Generator) -> Tuple[bool, str]:
    scenario = soft_landing_scenario()
    traj = simulate(scenario)
    dt = traj.dt
    k = int(round((scenario.T - 0.01) / dt))
    h = traj.h[k - 2:k + 3, -1]
    derivatives = [
        abs(h[2]),
        abs(h[3] - h[1]) / (2 * dt),
        abs(h[3] - 2 * h[2] + h[1]) / dt ** 2,
        abs(h[4] - 2 * h[3] + 2 * h[1] - h[0]) / (2 * dt ** 3),
    ]
    k_late = int(round((scenario.T - 1e-3) / dt))
    late_u = abs(float(traj.u[k_late]))
    ok = max(derivatives) <= 1e-3 and late_u <= 1e-2
    return ok, f'|d^r h_n| at T-0.01: {max(derivatives):.1e}; |u(T-1e-3)| = {late_u:.1e}'


@check(Suite.ORACLES)
def handoff_continuity(rng: np.random.Generator) -> Tuple[bool, str]:
    scenario = forced_override_scenario(t_end=5.0)
    traj = simulate(scenario)
    k_T = traj.terminal_index
    jump = abs(float(traj.u[k_T - 1]) - float(traj.u[k_T]))
    ok = jump <= 5e-2 and float(traj.u[k_T]) == 0.0
    return ok, f'|u(T-dt) - u(T)| = {jump:.1e}, u(T) = {float(traj.u[k_T])!r}, x1(T) = {traj.x1_at_T:.1e}'


def peak_velocity(traj) -> float:
    return float(np.max(np.abs(traj.x[:, 1])))


@check(Suite.ORACLES)
def double_integrator_comparison(rng: np.random.Generator) -> Tuple[bool, str]:
    base = double_integrator_scenario()
    report = compare_filters(base, [base.filter, EsfFilter(rho=0.6), EsfFilter(rho=3.2)])
    ptsf, slow, fast = (v.metrics for v in report.variants)
    traj = report.variants[0].trajectory
    safe = bool(np.all(traj.x[traj.pre_terminal, 0] < 0))
    overrides = bool(ptsf.override_intervals)
    closer = ptsf.min_y_margin > slow.min_y_margin
    ratio = fast.max_abs_jerk_on_override / max(ptsf.max_abs_jerk_on_override, 1e-300)
    slow_peak, fast_peak = (peak_velocity(v.trajectory) for v in report.variants[1:])
    ok = safe and overrides and closer and ratio >= 2 and fast_peak > slow_peak
    return ok, (f'y<0 before T: {safe}, overrides: {len(ptsf.override_intervals)}, '
                f'max y ptsf {ptsf.min_y_margin:.3f} vs esf(0.6) {slow.min_y_margin:.3f}, jerk ratio {ratio:.2f}, '
                f'max |x2| esf(0.6) {slow_peak:.4f} vs esf(3.2) {fast_peak:.4f}')


@check(Suite.ORACLES)
def esf_peaking(rng: np.random.Generator) -> Tuple[bool, str]:
    base = forced_override_scenario(u_nom=100.0, t_end=6.0)
    peaks = {}
    for rho in (0.6, 3.2):
        traj = simulate(base.with_filter(EsfFilter(rho=rho)))
        peaks[rho] = peak_velocity(traj)
    # x_2 = s (23.6 - 21.6 s) with s = exp(-3.2 t) peaks at 23.6^2 / (4 * 21.6)
    expected = 23.6 ** 2 / (4 * 21.6)
    ok = peaks[3.2] > peaks[0.6] and abs(peaks[3.2] - expected) <= 1e-2
    return ok, f'max |x2|: {peaks[0.6]:.3f} (rho 0.6) vs {peaks[3.2]:.3f} (rho 3.2)'


# safety

SWEEP_MARGIN = 1.0
SWEEP_MAX_STEPS = 5000
SWEEP_TOLERANCE = 1e-9


def sweep_scenario(x0: Tuple[float, ...], T: float, *, margin: float = SWEEP_MARGIN,
                   name: str = 'sweep') -> Optional[Scenario]:
    """Forced-override run at the default mu ceiling with ``c_max mu_max dt <= 1``.
    ``None`` when that step needs more than ``SWEEP_MAX_STEPS`` per horizon."""
    mu_max = DEFAULTS.mu_max
    gains = select_gains(x0, HorizonClock(T=T), margin)
    dt = min(T / 1000, 1.0 / (gains.max * mu_max))
    if T / dt > SWEEP_MAX_STEPS:
        return None
    return forced_override_scenario(x0, T, gains=gains.c, dt=dt, mu_max=mu_max, name=name)


def sweep_scenarios(rng: np.random.Generator, count: int, margin: float = SWEEP_MARGIN) -> List[Scenario]:
    scenarios = []
    attempts = 0
    while len(scenarios) < count:
        attempts += 1
        if attempts > 50 * count:
            raise InvalidArgument(f'could not draw {count} sweep scenarios')
        n = int(rng.integers(2, 5))
        x0 = _random_initial_state(rng, n)
        T = float(rng.uniform(0.5, 2.0))
        try:
            scenario = sweep_scenario(x0, T, margin=margin, name=f'sweep_{len(scenarios)}')
        except BarrierError:
            continue
        if scenario is not None:
            scenarios.append(scenario)
    return scenarios


def barrier_violations(traj, tol: float = SWEEP_TOLERANCE) -> int:
    """Pre-terminal samples with a barrier below ``-tol * max |x|``.

    ``h_1 = -y`` is checked on every sample. For chains of order three or more
    the other barriers are checked only while mu is below its ceiling: clipped
    jets drop the mu-derivative terms, so h_3..h_n jump at the clip instant and
    pull h_2 after them.
    """
    floor = -tol * max(float(np.max(np.abs(traj.x))), 1e-300)
    ok = traj.h > floor
    if traj.n > 2:
        ok[traj.mu_clipped, 1:] = True
    return int(np.count_nonzero(~np.all(ok[traj.pre_terminal], axis=1)))


def sweep_violations(scenario: Scenario) -> int:
    return barrier_violations(simulate(scenario))


def safety_sweep(rng: np.random.Generator, count: int = 200) -> Tuple[bool, str]:
    failed = [s.name for s in sweep_scenarios(rng, count) if sweep_violations(s)]
    return not failed, f'{count - len(failed)}/{count} scenarios safe' + (f'; failed: {failed[:5]}' if failed else '')


@check(Suite.SAFETY)
def randomized_safety(rng: np.random.Generator) -> Tuple[bool, str]:
    return safety_sweep(rng)


def _run(suite: Suite, name: str, func: Check, seed: int) -> CheckResult:
    timed = timefunc(func)
    try:
        (passed, detail), elapsed = timed(np.random.default_rng(seed))
    except PTSafeException as exc:
        log.exception('check %s.%s raised', suite.value, name)
        return CheckResult(name=name, suite=suite, passed=False, detail=f'{type(exc).__name__}: {exc}')
    log.info('%s.%s: %s', suite.value, name, 'pass' if passed else 'FAIL')
    return CheckResult(name=name, suite=suite, passed=bool(passed), detail=detail, elapsed_ns=elapsed)


def run_verification_suite(selector: Union[Suite, str] = Suite.ALL, seed: int = DEFAULTS.seed) -> VerificationReport:
    try:
        selector = Suite(selector)
    except ValueError:
        raise InvalidArgument(f'unknown suite {selector!r}; choose from {", ".join(s.value for s in Suite)}')
    suites = [s for s in _REGISTRY] if selector is Suite.ALL else [selector]
    results = [_run(s, name, func, seed) for s in suites for name, func in _REGISTRY[s]]
    return VerificationReport(results)
