import math
from dataclassy import dataclass

from typing import (
    Callable,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
    Any,
)

from .errors import DomainError, InvalidArgument
from ..config import DEFAULTS
from ..enums import FilterKind, GainPolicyKind, NominalKind
from ..kernel import mu_clipped as _mu_clipped


State = Tuple[float, ...]
ControlLaw = Callable[[Sequence[float], float], float]
Interval = Tuple[float, float]


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidArgument(f'{name} must be finite, got {value!r}')


@dataclass(slots=True, frozen=True)
class HorizonClock:
    """Time base of every gain: initialization instant, horizon length and the
    ceiling applied to the blow-up function."""
    t0: float = 0.0
    T: float = 1.0
    mu_max: float = DEFAULTS.mu_max

    def __post_init__(self):
        _finite('t0', self.t0)
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidArgument(f'T must be positive and finite, got {self.T!r}')
        if not self.mu_max >= 1:
            raise InvalidArgument(f'mu_max must be >= 1, got {self.mu_max!r}')

    @property
    def terminal_time(self) -> float:
        return self.t0 + self.T

    def elapsed(self, t: float) -> float:
        if t < self.t0:
            raise DomainError(f'time {t!r} precedes the initialization instant {self.t0!r}')
        return t - self.t0

    def is_pre_terminal(self, t: float) -> bool:
        return t < self.terminal_time

    def mu_clipped(self, m: int, t: float) -> float:
        return _mu_clipped(m, self.elapsed(t), self.T, self.mu_max)

    def with_mu_max(self, mu_max: float) -> 'HorizonClock':
        if mu_max == self.mu_max:
            return self
        return HorizonClock(t0=self.t0, T=self.T, mu_max=mu_max)

    def __repr__(self):
        return f'<HorizonClock t0={self.t0} T={self.T} mu_max={self.mu_max}>'


@dataclass(slots=True, frozen=True)
class GainVector:
    """Initial backstepping gains ``c_1..c_n``."""
    c: Tuple[float, ...]

    def __post_init__(self):
        if not isinstance(self.c, tuple) or not self.c:
            raise InvalidArgument('a gain vector needs at least one entry (use GainVector.create_gains)')
        for i, v in enumerate(self.c, 1):
            _finite(f'c_{i}', v)

    @classmethod
    def create_gains(cls, values: Sequence[float]) -> 'GainVector':
        return cls(c=tuple(float(v) for v in values))

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def max(self) -> float:
        return max(self.c)

    def __len__(self):
        return len(self.c)

    def __getitem__(self, idx):
        return self.c[idx]

    def __iter__(self):
        return iter(self.c)

    def __repr__(self):
        return f'<GainVector c={self.c}>'


@dataclass(slots=True, frozen=True)
class FilterConfig:
    """Post-terminal ramp exponent and length, terminal tolerance and mu ceiling."""
    ramp_m: int = DEFAULTS.ramp_m
    ramp_T: float = DEFAULTS.ramp_T
    terminal_eps: float = DEFAULTS.terminal_eps
    mu_max: float = DEFAULTS.mu_max

    def __post_init__(self):
        if isinstance(self.ramp_m, bool) or not isinstance(self.ramp_m, int) or self.ramp_m < 1:
            raise InvalidArgument(f'ramp_m must be an integer >= 1, got {self.ramp_m!r}')
        if not (self.ramp_T > 0 and math.isfinite(self.ramp_T)):
            raise InvalidArgument(f'ramp_T must be positive, got {self.ramp_T!r}')
        if not self.terminal_eps > 0:
            raise InvalidArgument(f'terminal_eps must be positive, got {self.terminal_eps!r}')
        if not self.mu_max >= 1:
            raise InvalidArgument(f'mu_max must be >= 1, got {self.mu_max!r}')


@dataclass(slots=True, frozen=True)
class FilterDecision:
    """One evaluation of a safety filter. ``alpha_n`` is the safe upper bound on
    the input (NaN where no bound applies)."""
    u: float
    override_active: bool
    alpha_n: float
    u_nom: float
    mu_clipped: bool = False

    def __repr__(self):
        flag = ' override' if self.override_active else ''
        return f'<FilterDecision u={self.u!r} u_nom={self.u_nom!r} bound={self.alpha_n!r}{flag}>'


# gain policies

@dataclass(slots=True, frozen=True)
class AutoGains:
    """``c_i = max(0, bound_i) + margin`` stage by stage, last gain ``c_n``
    (``None`` means ``c_n = margin``)."""
    margin: float = DEFAULTS.margin
    c_n: Optional[float] = None
    kind: GainPolicyKind = GainPolicyKind.AUTO

    def __post_init__(self):
        if not self.margin > 0:
            raise InvalidArgument(f'margin must be positive, got {self.margin!r}')
        if self.c_n is not None and not self.c_n >= 0:
            raise InvalidArgument(f'c_n must be non-negative, got {self.c_n!r}')

    @property
    def last_gain(self) -> float:
        return self.margin if self.c_n is None else self.c_n


@dataclass(slots=True, frozen=True)
class ManualGains:
    gains: GainVector
    kind: GainPolicyKind = GainPolicyKind.MANUAL


GainPolicy = Union[AutoGains, ManualGains]


# filter choices

@dataclass(slots=True, frozen=True)
class PtsfFilter:
    config: FilterConfig = FilterConfig()
    kind: FilterKind = FilterKind.PTSF

    @property
    def label(self) -> str:
        return 'ptsf'


@dataclass(slots=True, frozen=True)
class EsfFilter:
    """Time-invariant baseline. ``rho=None`` picks ``esf_min_rho(x0) + margin`` at run time."""
    rho: Optional[float] = None
    margin: float = DEFAULTS.margin
    kind: FilterKind = FilterKind.ESF

    def __post_init__(self):
        if self.rho is not None and not (self.rho > 0 and math.isfinite(self.rho)):
            raise InvalidArgument(f'rho must be positive, got {self.rho!r}')

    @property
    def label(self) -> str:
        return 'esf' if self.rho is None else f'esf_{self.rho!r}'


@dataclass(slots=True, frozen=True)
class NoFilter:
    kind: FilterKind = FilterKind.NONE

    @property
    def label(self) -> str:
        return 'none'


FilterChoice = Union[PtsfFilter, EsfFilter, NoFilter]


# nominal controllers

@dataclass(slots=True, frozen=True)
class TrackingSine:
    """``u = -k1 (x1 + A sin(wt) + b) - k2 (x2 + A w cos(wt))`` for the double
    integrator; ``omega=None`` means ``2 pi / T``."""
    k1: float = DEFAULTS.tracking_k1
    k2: float = DEFAULTS.tracking_k2
    A: float = DEFAULTS.tracking_A
    b: float = DEFAULTS.tracking_b
    omega: Optional[float] = None
    kind: NominalKind = NominalKind.TRACKING_SINE


@dataclass(slots=True, frozen=True)
class ConstantNominal:
    value: float = 0.0
    kind: NominalKind = NominalKind.CONSTANT


@dataclass(slots=True, frozen=True)
class PdSetpoint:
    """``u = -sum k_i (x_i - s_i)``; an empty setpoint means the origin."""
    k: Tuple[float, ...] = ()
    setpoint: Tuple[float, ...] = ()
    kind: NominalKind = NominalKind.PD_SETPOINT


@dataclass(slots=True, frozen=True)
class ExternalNominal:
    """A caller-supplied law ``f(x, t) -> u``, either given directly or by a
    ``"module:function"`` import target."""
    target: Optional[str] = None
    func: Optional[ControlLaw] = None
    kind: NominalKind = NominalKind.EXTERNAL

    def __post_init__(self):
        if self.target is None and self.func is None:
            raise InvalidArgument('an external nominal needs a target or a callable')


NominalSpec = Union[TrackingSine, ConstantNominal, PdSetpoint, ExternalNominal]


@dataclass(slots=True, frozen=True)
class Scenario:
    """One simulation experiment. Use :meth:`create_scenario` to get the
    defaults for ``dt`` and ``t_end``."""
    name: str
    n: int
    x0: State
    t0: float
    T: float
    dt: float
    t_end: float
    gains: GainPolicy
    filter: FilterChoice
    nominal: NominalSpec
    description: str = ''

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise InvalidArgument(f'n must be a positive integer, got {self.n!r}')
        if len(self.x0) != self.n:
            raise InvalidArgument(f'x0 has {len(self.x0)} entries, expected n={self.n}')
        for i, v in enumerate(self.x0):
            _finite(f'x0[{i}]', v)
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgument(f'dt must be positive, got {self.dt!r}')
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidArgument(f'T must be positive, got {self.T!r}')
        if not self.t_end >= self.t0 + self.T:
            raise InvalidArgument(f't_end={self.t_end!r} precedes the terminal time {self.t0 + self.T!r}')

    @classmethod
    def create_scenario(cls, x0: Sequence[float], T: float, *, name: str = 'scenario', t0: float = 0.0,
                        dt: float = None, t_end: float = None, gains: GainPolicy = None,
                        filter: FilterChoice = None, nominal: NominalSpec = None,
                        description: str = '') -> 'Scenario':
        filter = PtsfFilter() if filter is None else filter
        ramp_T = filter.config.ramp_T if isinstance(filter, PtsfFilter) else None
        x0 = tuple(float(v) for v in x0)
        return cls(
            name=name,
            n=len(x0),
            x0=x0,
            t0=float(t0),
            T=float(T),
            dt=DEFAULTS.default_dt(T) if dt is None else float(dt),
            t_end=DEFAULTS.default_t_end(t0, T, ramp_T) if t_end is None else float(t_end),
            gains=AutoGains() if gains is None else gains,
            filter=filter,
            nominal=ConstantNominal() if nominal is None else nominal,
            description=description,
        )

    @property
    def clock(self) -> HorizonClock:
        mu_max = self.filter.config.mu_max if isinstance(self.filter, PtsfFilter) else DEFAULTS.mu_max
        return HorizonClock(t0=self.t0, T=self.T, mu_max=mu_max)

    def replace(self, **changes) -> 'Scenario':
        fields = {
            'name': self.name, 'n': self.n, 'x0': self.x0, 't0': self.t0, 'T': self.T, 'dt': self.dt,
            't_end': self.t_end, 'gains': self.gains, 'filter': self.filter, 'nominal': self.nominal,
            'description': self.description,
        }
        fields.update(changes)
        return Scenario(**fields)

    def with_filter(self, choice: FilterChoice, name: str = None) -> 'Scenario':
        return self.replace(filter=choice, name=choice.label if name is None else name)

    def __repr__(self):
        return f'<Scenario {self.name!r} n={self.n} x0={self.x0} T={self.T} filter={self.filter.kind.value}>'


@dataclass(slots=True, frozen=True)
class Metrics:
    """Summary of one trajectory. All fields except ``override_intervals``,
    ``first_override_time`` and ``peak_abs_state`` are taken over the
    pre-terminal horizon."""
    min_h1: float
    min_y_margin: float
    max_abs_u: float
    max_abs_jerk_on_override: Optional[float]
    x1_at_T: float
    override_intervals: Tuple[Interval, ...]
    first_override_time: Optional[float] = None
    peak_abs_state: float = 0.0
    min_h: Tuple[float, ...] = ()
    label: str = ''

    def to_dict(self) -> Dict[str, Any]:
        return {
            'label': self.label,
            'min_h1': self.min_h1,
            'min_y_margin': self.min_y_margin,
            'max_abs_u': self.max_abs_u,
            'max_abs_jerk_on_override': self.max_abs_jerk_on_override,
            'x1_at_T': self.x1_at_T,
            'override_intervals': [list(iv) for iv in self.override_intervals],
            'first_override_time': self.first_override_time,
            'peak_abs_state': self.peak_abs_state,
            'min_h': list(self.min_h),
        }
