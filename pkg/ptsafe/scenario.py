"""
Scenario documents.

A document is either one scenario object or ``{"scenarios": [...]}``. Syntax
is checked by orjson, shape by pydantic models that reject unknown keys, and
cross-field rules by :func:`_to_scenario`. Every error names the key path it
refers to, e.g. ``scenarios[1].x0[0]``.
"""
from logging import getLogger
from pathlib import Path

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from typing_extensions import Annotated, Literal

from typing import (
    Any,
    Dict,
    List,
    Optional,
    Tuple,
    Union,
)

from .barrier import select_gains, validate_gains
from .config import DEFAULTS
from .core.errors import (
    BarrierError,
    InvalidArgument,
    InvariantViolation,
    SchemaError,
    ScenarioSyntaxError,
    UnsafeInitialState,
)
from .core.types import (
    AutoGains,
    ConstantNominal,
    EsfFilter,
    FilterChoice,
    ExternalNominal,
    FilterConfig,
    GainVector,
    HorizonClock,
    ManualGains,
    NoFilter,
    PdSetpoint,
    PtsfFilter,
    Scenario,
    TrackingSine,
)
from .core.utils import to_json
from .nominal import resolve_target

log = getLogger(__name__)

PositiveFloat = Annotated[float, Field(gt=0)]


class _Model(BaseModel):
    model_config = ConfigDict(extra='forbid', allow_inf_nan=False)


class AutoGainsModel(_Model):
    policy: Literal['auto']
    margin: PositiveFloat = DEFAULTS.margin
    c_n: Optional[Annotated[float, Field(ge=0)]] = None


class ManualGainsModel(_Model):
    policy: Literal['manual']
    c: List[float] = Field(min_length=1)


class PtsfModel(_Model):
    kind: Literal['ptsf']
    ramp_m: Annotated[int, Field(ge=1)] = DEFAULTS.ramp_m
    ramp_T: PositiveFloat = DEFAULTS.ramp_T
    terminal_eps: PositiveFloat = DEFAULTS.terminal_eps
    mu_max: Annotated[float, Field(ge=1)] = DEFAULTS.mu_max


class EsfModel(_Model):
    kind: Literal['esf']
    rho: Optional[PositiveFloat] = None
    margin: PositiveFloat = DEFAULTS.margin


class NoFilterModel(_Model):
    kind: Literal['none']


class TrackingSineModel(_Model):
    kind: Literal['tracking_sine']
    k1: float = DEFAULTS.tracking_k1
    k2: float = DEFAULTS.tracking_k2
    A: float = DEFAULTS.tracking_A
    b: float = DEFAULTS.tracking_b
    omega: Optional[PositiveFloat] = None


class ConstantModel(_Model):
    kind: Literal['constant']
    value: float = 0.0


class PdSetpointModel(_Model):
    kind: Literal['pd_setpoint']
    k: List[float] = Field(min_length=1)
    setpoint: Optional[List[float]] = None


class ExternalModel(_Model):
    kind: Literal['external']
    target: str = Field(pattern=r'^[A-Za-z_][\w.]*:[A-Za-z_]\w*$')


GainsModel = Annotated[Union[AutoGainsModel, ManualGainsModel], Field(discriminator='policy')]
FilterModel = Annotated[Union[PtsfModel, EsfModel, NoFilterModel], Field(discriminator='kind')]
NominalModel = Annotated[
    Union[TrackingSineModel, ConstantModel, PdSetpointModel, ExternalModel],
    Field(discriminator='kind'),
]

_TAGS = {
    'gains': ('auto', 'manual'),
    'filter': ('ptsf', 'esf', 'none'),
    'nominal': ('tracking_sine', 'constant', 'pd_setpoint', 'external'),
}


class ScenarioModel(_Model):
    name: str = 'scenario'
    description: str = ''
    n: Annotated[int, Field(ge=1)]
    x0: List[float] = Field(min_length=1)
    t0: float = 0.0
    T: PositiveFloat
    dt: Optional[PositiveFloat] = None
    t_end: Optional[float] = None
    gains: GainsModel = Field(default_factory=lambda: AutoGainsModel(policy='auto'))
    filter: FilterModel = Field(default_factory=lambda: PtsfModel(kind='ptsf'))
    nominal: NominalModel

    @field_validator('filter', 'nominal', mode='before')
    @classmethod
    def expand_shorthand(cls, value: Any) -> Any:
        if isinstance(value, str):
            return {'kind': value}
        return value

    @field_validator('gains', mode='before')
    @classmethod
    def expand_policy_shorthand(cls, value: Any) -> Any:
        if isinstance(value, str):
            return {'policy': value}
        return value


class ScenarioListModel(_Model):
    scenarios: List[ScenarioModel] = Field(min_length=1)


def _render_loc(loc: Tuple[Union[str, int], ...]) -> str:
    path = ''
    prev = None
    for part in loc:
        if isinstance(part, int):
            path += f'[{part}]'
        elif prev in _TAGS and part in _TAGS[prev]:
            # discriminated unions add the tag value to the location
            continue
        else:
            path = part if not path else f'{path}.{part}'
        prev = part
    return path


def _schema_errors(exc: ValidationError) -> Dict[str, str]:
    errors: Dict[str, str] = {}
    for err in exc.errors():
        key = _render_loc(tuple(err['loc']))
        errors[key] = f"{errors[key]}; {err['msg']}" if key in errors else err['msg']
    return errors


def _build_nominal(m) -> Any:
    if isinstance(m, TrackingSineModel):
        return TrackingSine(k1=m.k1, k2=m.k2, A=m.A, b=m.b, omega=m.omega)
    if isinstance(m, ConstantModel):
        return ConstantNominal(value=m.value)
    if isinstance(m, PdSetpointModel):
        return PdSetpoint(k=tuple(m.k), setpoint=tuple(m.setpoint or ()))
    return ExternalNominal(target=m.target)


def _build_filter(m) -> Any:
    if isinstance(m, PtsfModel):
        return PtsfFilter(config=FilterConfig(ramp_m=m.ramp_m, ramp_T=m.ramp_T,
                                              terminal_eps=m.terminal_eps, mu_max=m.mu_max))
    if isinstance(m, EsfModel):
        return EsfFilter(rho=m.rho, margin=m.margin)
    return NoFilter()


def _build_gains(m) -> Any:
    if isinstance(m, AutoGainsModel):
        return AutoGains(margin=m.margin, c_n=m.c_n)
    return ManualGains(gains=GainVector.create_gains(m.c))


def _check_invariants(m: ScenarioModel, t_end: float) -> Tuple[Dict[str, str], bool]:
    errors: Dict[str, str] = {}
    unsafe = False
    n, x0 = m.n, m.x0
    filtered = m.filter.kind != 'none'

    if len(x0) != n:
        errors['x0'] = f'expected n={n} entries, got {len(x0)}'
    if filtered and x0[0] >= 0:
        errors['x0[0]'] = f'x_1(t0)={x0[0]!r} must be strictly negative when a filter is enabled'
        unsafe = True
    if t_end < m.t0 + m.T:
        errors['t_end'] = f't_end={t_end!r} precedes the terminal time {m.t0 + m.T!r}'

    nominal = m.nominal
    if isinstance(nominal, TrackingSineModel) and n != 2:
        errors['nominal.kind'] = f'tracking_sine drives the double integrator only, got n={n}'
    elif isinstance(nominal, PdSetpointModel):
        if len(nominal.k) != n:
            errors['nominal.k'] = f'expected {n} gains, got {len(nominal.k)}'
        if nominal.setpoint is not None and len(nominal.setpoint) != n:
            errors['nominal.setpoint'] = f'expected {n} entries, got {len(nominal.setpoint)}'
    elif isinstance(nominal, ExternalModel):
        try:
            resolve_target(nominal.target)
        except InvalidArgument as exc:
            errors['nominal.target'] = str(exc)

    if m.filter.kind == 'esf' and n != 2:
        errors['filter.kind'] = f'the exponential filter is defined for n=2 only, got n={n}'

    if isinstance(m.gains, ManualGainsModel) and len(m.gains.c) != n:
        errors['gains.c'] = f'expected {n} gains, got {len(m.gains.c)}'

    if m.filter.kind == 'ptsf' and not errors:
        clock = HorizonClock(t0=m.t0, T=m.T, mu_max=m.filter.mu_max)
        try:
            if isinstance(m.gains, ManualGainsModel):
                if not validate_gains(GainVector.create_gains(m.gains.c), x0, clock):
                    errors['gains.c'] = 'gains do not exceed the initial stage bounds'
            else:
                select_gains(x0, clock, m.gains.margin, m.gains.c_n)
        except BarrierError as exc:
            errors['x0'] = str(exc)
    return errors, unsafe


def _to_scenario(m: ScenarioModel) -> Tuple[Optional[Scenario], Dict[str, str], bool]:
    ramp_T = m.filter.ramp_T if isinstance(m.filter, PtsfModel) else None
    dt = DEFAULTS.default_dt(m.T) if m.dt is None else m.dt
    t_end = DEFAULTS.default_t_end(m.t0, m.T, ramp_T) if m.t_end is None else m.t_end
    errors, unsafe = _check_invariants(m, t_end)
    if errors:
        return None, errors, unsafe
    scenario = Scenario(
        name=m.name,
        n=m.n,
        x0=tuple(m.x0),
        t0=m.t0,
        T=m.T,
        dt=dt,
        t_end=t_end,
        gains=_build_gains(m.gains),
        filter=_build_filter(m.filter),
        nominal=_build_nominal(m.nominal),
        description=m.description,
    )
    return scenario, {}, False


def _decode(text: Union[str, bytes]) -> Any:
    try:
        document = orjson.loads(text)
    except orjson.JSONDecodeError as exc:
        raise ScenarioSyntaxError(str(exc)) from exc
    if not isinstance(document, dict):
        raise SchemaError('a scenario document must be a JSON object')
    return document


def parse_scenarios(text: Union[str, bytes]) -> Tuple[Scenario, ...]:
    """All scenarios of a document, with defaults applied."""
    document = _decode(text)
    try:
        if 'scenarios' in document:
            models = ScenarioListModel.model_validate(document).scenarios
            prefixes = [f'[{i}]' for i in range(len(models))]
        else:
            models = [ScenarioModel.model_validate(document)]
            prefixes = [None]
    except ValidationError as exc:
        raise SchemaError(_schema_errors(exc)) from exc

    nested: Dict[str, Any] = {}
    unsafe = False
    scenarios = []
    names = set()
    for prefix, model in zip(prefixes, models):
        scenario, errors, is_unsafe = _to_scenario(model)
        if prefix is not None and model.name in names:
            errors['name'] = f'duplicate scenario name {model.name!r}'
        names.add(model.name)
        unsafe = unsafe or is_unsafe
        if errors:
            if prefix is None:
                nested.update(errors)
            else:
                nested.setdefault('scenarios', {})[prefix] = errors
        else:
            scenarios.append(scenario)

    if nested:
        raise (UnsafeInitialState if unsafe else InvariantViolation)(nested)
    log.debug('parsed %d scenario(s)', len(scenarios))
    return tuple(scenarios)


def parse_scenario(text: Union[str, bytes]) -> Scenario:
    scenarios = parse_scenarios(text)
    if len(scenarios) != 1:
        raise SchemaError({'scenarios': f'expected a single scenario, got {len(scenarios)}'})
    return scenarios[0]


def load_scenarios(path: Union[str, Path]) -> Tuple[Scenario, ...]:
    return parse_scenarios(Path(path).read_bytes())


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    gains = scenario.gains
    if isinstance(gains, AutoGains):
        gains_doc = {'policy': 'auto', 'margin': gains.margin, 'c_n': gains.c_n}
    else:
        gains_doc = {'policy': 'manual', 'c': list(gains.gains.c)}

    choice = scenario.filter
    if isinstance(choice, PtsfFilter):
        cfg = choice.config
        filter_doc = {'kind': 'ptsf', 'ramp_m': cfg.ramp_m, 'ramp_T': cfg.ramp_T,
                      'terminal_eps': cfg.terminal_eps, 'mu_max': cfg.mu_max}
    elif isinstance(choice, EsfFilter):
        filter_doc = {'kind': 'esf', 'rho': choice.rho, 'margin': choice.margin}
    else:
        filter_doc = {'kind': 'none'}

    nominal = scenario.nominal
    if isinstance(nominal, TrackingSine):
        nominal_doc = {'kind': 'tracking_sine', 'k1': nominal.k1, 'k2': nominal.k2,
                       'A': nominal.A, 'b': nominal.b, 'omega': nominal.omega}
    elif isinstance(nominal, ConstantNominal):
        nominal_doc = {'kind': 'constant', 'value': nominal.value}
    elif isinstance(nominal, PdSetpoint):
        nominal_doc = {'kind': 'pd_setpoint', 'k': list(nominal.k), 'setpoint': list(nominal.setpoint) or None}
    else:
        if nominal.target is None:
            raise InvalidArgument('an external nominal given as a callable cannot be serialized')
        nominal_doc = {'kind': 'external', 'target': nominal.target}

    return {
        'name': scenario.name,
        'description': scenario.description,
        'n': scenario.n,
        'x0': list(scenario.x0),
        't0': scenario.t0,
        'T': scenario.T,
        'dt': scenario.dt,
        't_end': scenario.t_end,
        'gains': gains_doc,
        'filter': filter_doc,
        'nominal': nominal_doc,
    }


def dump_scenario(scenario: Union[Scenario, List[Scenario]]) -> bytes:
    if isinstance(scenario, Scenario):
        return to_json(scenario_to_dict(scenario))
    return to_json({'scenarios': [scenario_to_dict(s) for s in scenario]})


def parse_filter_list(text: str, ptsf: PtsfFilter = None) -> List[FilterChoice]:
    """Filters from a comma list such as ``"ptsf,esf:0.6,esf:3.2"``.

    ``ptsf`` reuses the given prescribed-time configuration, bare ``esf`` picks
    its rate from the initial state, and ``none`` passes the nominal through.
    """
    choices: List[FilterChoice] = []
    errors: Dict[str, str] = {}
    for i, item in enumerate(part.strip() for part in text.split(',')):
        kind, sep, arg = item.partition(':')
        if kind == 'ptsf' and not sep:
            choices.append(ptsf or PtsfFilter())
        elif kind == 'none' and not sep:
            choices.append(NoFilter())
        elif kind == 'esf':
            if not sep:
                choices.append(EsfFilter())
                continue
            try:
                choices.append(EsfFilter(rho=float(arg)))
            except (ValueError, InvalidArgument):
                errors[f'[{i}]'] = f'esf rate must be a positive number, got {arg!r}'
        else:
            errors[f'[{i}]'] = f'unknown filter {item!r}; expected ptsf, esf, esf:<rho> or none'
    if errors:
        raise SchemaError({'filters': errors})
    return choices
