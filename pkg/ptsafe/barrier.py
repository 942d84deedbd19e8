"""
Time-varying backstepping barriers for the chain ``x_i' = x_{i+1}``, ``x_n' = u``.

    h_1 = -x_1
    h_i = -x_i + alpha_{i-1}
    alpha_i = c_i mu_2 h_i + d/dt alpha_{i-1},      alpha_0 = 0

``alpha_i`` is carried as a jet of order ``n - i``, so ``alpha_n`` only needs
the state and the time. Gains are chosen at the initialization instant, stage
by stage: the bound for stage ``i + 1`` depends on the gains already fixed.
"""
import math
from logging import getLogger
from dataclassy import dataclass

from typing import (
    Callable,
    List,
    Optional,
    Sequence,
    Tuple,
)

from .config import DEFAULTS
from .core.errors import DegenerateBarrier, InitiallyUnsafe, InvalidArgument
from .core.types import GainVector, HorizonClock
from .jet import Coeffs, DerivativeJet, leibniz, mu_jet_coeffs

log = getLogger(__name__)

StagePolicy = Callable[[int, float], float]


@dataclass(slots=True, frozen=True)
class BarrierStack:
    """Barriers ``h_1..h_n`` and virtual laws ``alpha_1..alpha_n`` at one instant.
    ``alpha_jets[i-1]`` has order ``n - i``."""
    h: Tuple[float, ...]
    alpha: Tuple[float, ...]
    alpha_jets: Tuple[DerivativeJet, ...]
    mu_clipped: bool = False

    @property
    def n(self) -> int:
        return len(self.h)

    @property
    def safe_bound(self) -> float:
        return self.alpha[-1]

    def __repr__(self):
        return f'<BarrierStack n={self.n} h={self.h} alpha={self.alpha}>'


def _recurse(x: Sequence[float], mu2: Coeffs, c: Sequence[float]) -> Tuple[List[Coeffs], List[Coeffs]]:
    n = len(x)
    alpha_prev: Coeffs = (0.0,) * (n + 1)
    h_jets, alpha_jets = [], []
    for k in range(n):
        order = n - 1 - k
        h_jet = tuple(alpha_prev[j] - x[k + j] for j in range(order + 1))
        scaled = leibniz(mu2[:order + 1], h_jet)
        alpha_jet = tuple(c[k] * scaled[j] + alpha_prev[j + 1] for j in range(order + 1))
        h_jets.append(h_jet)
        alpha_jets.append(alpha_jet)
        alpha_prev = alpha_jet
    return h_jets, alpha_jets


def _prepare(x: Sequence[float], t: float, clock: HorizonClock, gains: GainVector) -> Tuple[Coeffs, bool]:
    if len(gains) != len(x):
        raise InvalidArgument(f'{len(gains)} gains for a state of length {len(x)}')
    return mu_jet_coeffs(2, clock.elapsed(t), clock.T, len(x) - 1, clock.mu_max)


def barrier_stack(x: Sequence[float], t: float, clock: HorizonClock, gains: GainVector) -> BarrierStack:
    x = tuple(float(v) for v in x)
    mu2, clipped = _prepare(x, t, clock, gains)
    h_jets, alpha_jets = _recurse(x, mu2, gains.c)
    return BarrierStack(
        h=tuple(j[0] for j in h_jets),
        alpha=tuple(j[0] for j in alpha_jets),
        alpha_jets=tuple(DerivativeJet(coeffs=j) for j in alpha_jets),
        mu_clipped=clipped,
    )


def barrier_values(x: Sequence[float], t: float, clock: HorizonClock,
                   gains: GainVector) -> Tuple[Tuple[float, ...], float, bool]:
    """``(h, alpha_n, clipped)`` without building jet objects."""
    mu2, clipped = _prepare(x, t, clock, gains)
    h_jets, alpha_jets = _recurse(x, mu2, gains.c)
    return tuple(j[0] for j in h_jets), alpha_jets[-1][0], clipped


def alpha_n(x: Sequence[float], t: float, clock: HorizonClock, gains: GainVector) -> Tuple[float, bool]:
    """Safe upper bound on the input at ``(x, t)`` and whether mu was clipped."""
    mu2, clipped = _prepare(x, t, clock, gains)
    return _recurse(x, mu2, gains.c)[1][-1][0], clipped


def _check_initial(x0: Sequence[float]) -> Tuple[float, ...]:
    x0 = tuple(float(v) for v in x0)
    if not x0:
        raise InvalidArgument('empty initial state')
    if x0[0] >= 0:
        raise InitiallyUnsafe(f'initial output x_1(t0)={x0[0]!r} is not strictly negative', stage=1)
    return x0


def _walk_stages(x0: Tuple[float, ...], clock: HorizonClock, pick: Callable[[int, Coeffs], Optional[float]]) -> None:
    """Run the recursion at t0, asking ``pick(stage, h_jet)`` for each gain.
    A ``None`` gain stops the walk."""
    n = len(x0)
    mu2, _ = mu_jet_coeffs(2, 0.0, clock.T, n - 1)
    alpha_prev: Coeffs = (0.0,) * (n + 1)
    for k in range(n):
        order = n - 1 - k
        h_jet = tuple(alpha_prev[j] - x0[k + j] for j in range(order + 1))
        c = pick(k + 1, h_jet)
        if c is None:
            return
        scaled = leibniz(mu2[:order + 1], h_jet)
        alpha_prev = tuple(c * scaled[j] + alpha_prev[j + 1] for j in range(order + 1))


def _stage_bound(stage: int, h_jet: Coeffs) -> float:
    h = h_jet[0]
    if h <= DEFAULTS.degenerate_threshold:
        raise DegenerateBarrier(f'h_{stage}(t0)={h!r} is not positive; the initial state sits on barrier {stage}',
                                stage=stage)
    return -h_jet[1] / h


def _default_policy(margin: float) -> StagePolicy:
    return lambda stage, bound: max(0.0, bound) + margin


def minimal_gains(x0: Sequence[float], clock: HorizonClock, choose: StagePolicy = None) -> Tuple[float, ...]:
    """Lower bounds ``c_1..c_{n-1}`` must exceed at the initialization instant.

    Bound ``i`` is ``(x_{i+1} - d/dt alpha_{i-1}) / (alpha_{i-1} - x_i)``, which
    depends on the gains chosen at earlier stages. ``choose(i, bound)`` fixes
    ``c_i`` once its bound is known (default ``max(0, bound) + margin``).
    """
    x0 = _check_initial(x0)
    n = len(x0)
    choose = choose or _default_policy(DEFAULTS.margin)
    bounds: List[float] = []

    def pick(stage, h_jet):
        if stage == n:
            return None
        bound = _stage_bound(stage, h_jet)
        bounds.append(bound)
        c = choose(stage, bound)
        log.debug('stage %d: bound %r, gain %r', stage, bound, c)
        return c

    _walk_stages(x0, clock, pick)
    return tuple(bounds)


def gain_bounds(x0: Sequence[float], clock: HorizonClock, gains: GainVector) -> Tuple[float, ...]:
    """Stage bounds evaluated with the given gains. Raises :exc:`DegenerateBarrier`
    naming the first stage whose barrier is not positive at t0."""
    x0 = _check_initial(x0)
    n = len(x0)
    if len(gains) != n:
        raise InvalidArgument(f'{len(gains)} gains for a state of length {n}')
    bounds: List[float] = []

    def pick(stage, h_jet):
        if stage == n:
            return None
        bounds.append(_stage_bound(stage, h_jet))
        return gains[stage - 1]

    _walk_stages(x0, clock, pick)
    return tuple(bounds)


def select_gains(x0: Sequence[float], clock: HorizonClock, margin: float = DEFAULTS.margin,
                 c_n: float = None) -> GainVector:
    if not margin > 0:
        raise InvalidArgument(f'margin must be positive, got {margin!r}')
    c_n = margin if c_n is None else c_n
    if not c_n >= 0:
        raise InvalidArgument(f'c_n must be non-negative, got {c_n!r}')
    policy = _default_policy(margin)
    head = [policy(i, b) for i, b in enumerate(minimal_gains(x0, clock, policy), 1)]
    return GainVector.create_gains(head + [c_n])


def validate_gains(gains: GainVector, x0: Sequence[float], clock: HorizonClock) -> bool:
    """``c_i > max(0, bound_i)`` for ``i < n`` and ``c_n >= 0``."""
    x0 = _check_initial(x0)
    n = len(x0)
    if len(gains) != n:
        raise InvalidArgument(f'{len(gains)} gains for a state of length {n}')
    if x0[0] > -DEFAULTS.degenerate_threshold:
        raise DegenerateBarrier(f'h_1(t0)={-x0[0]!r} is numerically zero', stage=1)
    if gains[-1] < 0:
        return False
    verdict = [True]

    def pick(stage, h_jet):
        if h_jet[0] <= 0:
            verdict[0] = False
            return None
        if stage == n:
            return None
        bound = -h_jet[1] / h_jet[0]
        if not gains[stage - 1] > max(0.0, bound):
            log.debug('stage %d: gain %r does not exceed bound %r', stage, gains[stage - 1], bound)
            verdict[0] = False
            return None
        return gains[stage - 1]

    _walk_stages(x0, clock, pick)
    return verdict[0]
