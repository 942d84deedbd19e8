"""
Pointwise safety filters.

The prescribed-time filter applies ``min(u_nom, alpha_n)`` before the
terminal time and hands the nominal command back through a ramp afterwards.
The exponential filter is the constant-gain baseline for the double
integrator.
"""
import math
from logging import getLogger

import numpy as np

from typing import (
    Optional,
    Sequence,
    Tuple,
)

from .barrier import alpha_n as _alpha_n
from .core.errors import (
    DomainError,
    FilterStateError,
    InitiallyUnsafe,
    InvalidArgument,
    UnsupportedOrder,
)
from .core.types import FilterConfig, FilterDecision, GainVector, HorizonClock
from .kernel import nu

log = getLogger(__name__)

_NAN = float('nan')


def ptsf_pre_terminal(u_nom: float, x: Sequence[float], t: float, clock: HorizonClock,
                      gains: GainVector) -> FilterDecision:
    bound, clipped = _alpha_n(x, t, clock, gains)
    override = u_nom > bound
    return FilterDecision(
        u=bound if override else u_nom,
        override_active=override,
        alpha_n=bound,
        u_nom=u_nom,
        mu_clipped=clipped,
    )


def ptsf_post_terminal(u_nom: float, t: float, clock: HorizonClock, config: FilterConfig,
                       x1_at_T: Optional[float]) -> FilterDecision:
    if x1_at_T is None:
        raise FilterStateError(f'post-terminal filter called at t={t!r} before x_1 was recorded at the terminal time')
    return FilterDecision(
        u=u_nom * ramp_g(t, x1_at_T, clock, config),
        override_active=False,
        alpha_n=_NAN,
        u_nom=u_nom,
    )


def ptsf_control(u_nom: float, x: Sequence[float], t: float, clock: HorizonClock, gains: GainVector,
                 config: FilterConfig, x1_at_T: Optional[float] = None) -> FilterDecision:
    """Prescribed-time safety filter. ``config.mu_max`` is the ceiling used for
    the barrier evaluation."""
    clock = clock.with_mu_max(config.mu_max)
    if clock.is_pre_terminal(t):
        return ptsf_pre_terminal(u_nom, x, t, clock, gains)
    return ptsf_post_terminal(u_nom, t, clock, config, x1_at_T)


def ramp_g(t: float, x1_at_T: float, clock: HorizonClock, config: FilterConfig) -> float:
    """Hand-off gain after the terminal time. Ramps from 0 to 1 over ``ramp_T``
    when the output landed on the barrier, 1 otherwise."""
    since = t - clock.terminal_time
    if since < 0:
        raise DomainError(f'ramp is defined from the terminal time {clock.terminal_time!r}; got t={t!r}')
    if abs(x1_at_T) <= config.terminal_eps and since <= config.ramp_T:
        return 1.0 - nu(since, config.ramp_T) ** config.ramp_m
    return 1.0


def _check_double_integrator(x: Sequence[float]) -> None:
    if len(x) != 2:
        raise UnsupportedOrder(f'the exponential filter is defined for n=2 only, got n={len(x)}')


def _check_rho(rho: float) -> None:
    if not (rho > 0 and math.isfinite(rho)):
        raise InvalidArgument(f'rho must be positive, got {rho!r}')


def esf_bound(x: Sequence[float], rho: float) -> float:
    return -(2 * rho * rho * x[0] + 3 * rho * x[1])


def esf_control(u_nom: float, x: Sequence[float], rho: float) -> FilterDecision:
    _check_double_integrator(x)
    _check_rho(rho)
    bound = esf_bound(x, rho)
    override = u_nom > bound
    return FilterDecision(u=bound if override else u_nom, override_active=override, alpha_n=bound, u_nom=u_nom)


def esf_min_rho(x0: Sequence[float]) -> float:
    """Smallest rate keeping the exponential barrier pair positive at the start."""
    _check_double_integrator(x0)
    if x0[0] >= 0:
        raise InitiallyUnsafe(f'initial output x_1(t0)={x0[0]!r} is not strictly negative', stage=1)
    return max(0.0, -x0[1] / x0[0])


def esf_barriers(x: Sequence[float], rho: float) -> Tuple[float, float]:
    _check_double_integrator(x)
    h1 = -x[0]
    return h1, -x[1] + rho * h1


def esf_closed_form(x_at_override: Sequence[float], rho: float, dt_since_override: float) -> np.ndarray:
    """State of the overridden loop ``x_2' = -(2 rho^2 x_1 + 3 rho x_2)`` after
    ``dt_since_override``; poles at ``-rho`` and ``-2 rho``."""
    _check_double_integrator(x_at_override)
    _check_rho(rho)
    if dt_since_override < 0:
        raise InvalidArgument(f'elapsed time must be non-negative, got {dt_since_override!r}')
    s = math.exp(-rho * dt_since_override)
    transition = s * np.array([
        [2.0 - s, (1.0 - s) / rho],
        [2.0 * rho * (s - 1.0), 2.0 * s - 1.0],
    ])
    return transition @ np.asarray(x_at_override, dtype=float)
