import importlib
import math
from logging import getLogger

from typing import Sequence

from .config import DEFAULTS
from .core.errors import InvalidArgument, UnsupportedOrder
from .core.types import (
    ConstantNominal,
    ControlLaw,
    ExternalNominal,
    HorizonClock,
    NominalSpec,
    PdSetpoint,
    TrackingSine,
)

log = getLogger(__name__)


def resolve_target(target: str) -> ControlLaw:
    """Import ``"package.module:function"``."""
    module_name, sep, attr = target.partition(':')
    if not sep or not module_name or not attr:
        raise InvalidArgument(f'expected "module:function", got {target!r}')
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise InvalidArgument(f'cannot import {module_name!r}: {exc}') from exc
    func = getattr(module, attr, None)
    if not callable(func):
        raise InvalidArgument(f'{target!r} is not a callable')
    return func


def _tracking_sine(spec: TrackingSine, clock: HorizonClock) -> ControlLaw:
    k1, k2, A, b = spec.k1, spec.k2, spec.A, spec.b
    w = DEFAULTS.tracking_omega(clock.T) if spec.omega is None else spec.omega

    def law(x: Sequence[float], t: float) -> float:
        return -k1 * (x[0] + A * math.sin(w * t) + b) - k2 * (x[1] + A * w * math.cos(w * t))

    return law


def _pd_setpoint(spec: PdSetpoint, n: int) -> ControlLaw:
    k = spec.k
    s = spec.setpoint or (0.0,) * n
    if len(k) != n or len(s) != n:
        raise InvalidArgument(f'pd_setpoint needs {n} gains and setpoints, got {len(k)} and {len(s)}')

    def law(x: Sequence[float], t: float) -> float:
        return -sum(ki * (xi - si) for ki, xi, si in zip(k, x, s))

    return law


def build_nominal(spec: NominalSpec, n: int, clock: HorizonClock) -> ControlLaw:
    """Turn a nominal controller spec into ``f(x, t) -> u``; ``t`` is absolute time."""
    if isinstance(spec, TrackingSine):
        if n != 2:
            raise UnsupportedOrder(f'tracking_sine drives the double integrator only, got n={n}')
        return _tracking_sine(spec, clock)
    if isinstance(spec, ConstantNominal):
        value = float(spec.value)
        return lambda x, t: value
    if isinstance(spec, PdSetpoint):
        return _pd_setpoint(spec, n)
    if isinstance(spec, ExternalNominal):
        return spec.func if spec.func is not None else resolve_target(spec.target)
    raise InvalidArgument(f'unknown nominal controller {spec!r}')
