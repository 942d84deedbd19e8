import orjson
import pytest

from ptsafe import (
    AutoGains,
    EsfFilter,
    InitiallyUnsafe,
    InvariantViolation,
    ManualGains,
    NoFilter,
    PtsfFilter,
    ScenarioSyntaxError,
    SchemaError,
    TrackingSine,
    UnsafeInitialState,
)
from ptsafe.core.errors import exit_code_for
from ptsafe.scenario import (
    dump_scenario,
    load_scenarios,
    parse_filter_list,
    parse_scenario,
    parse_scenarios,
    scenario_to_dict,
)

MINIMAL = {'n': 2, 'x0': [-4, 2], 'T': 4, 'filter': 'ptsf', 'nominal': 'tracking_sine'}


def _doc(**changes):
    doc = dict(MINIMAL)
    doc.update(changes)
    return orjson.dumps(doc)


def test_minimal_document_gets_defaults():
    s = parse_scenario(_doc())
    assert s.name == 'scenario'
    assert s.x0 == (-4.0, 2.0)
    assert s.dt == pytest.approx(1e-3)
    assert s.t_end == pytest.approx(5.5)
    assert s.gains == AutoGains(margin=0.1)
    assert isinstance(s.filter, PtsfFilter)
    assert s.filter.config.mu_max == 1000.0
    assert (s.filter.config.ramp_m, s.filter.config.ramp_T) == (2, 0.5)
    assert s.nominal == TrackingSine()


def test_full_document():
    s = parse_scenario(_doc(
        name='tracking', dt=0.002, t_end=6,
        gains={'policy': 'manual', 'c': [0.6, 0.6]},
        filter={'kind': 'ptsf', 'mu_max': 500, 'ramp_T': 0.25},
        nominal={'kind': 'tracking_sine', 'omega': 1.5},
    ))
    assert s.name == 'tracking'
    assert s.t_end == 6.0
    assert isinstance(s.gains, ManualGains) and s.gains.gains.c == (0.6, 0.6)
    assert s.filter.config.mu_max == 500.0
    assert s.nominal.omega == 1.5


def test_default_t_end_follows_ramp_length():
    s = parse_scenario(_doc(filter={'kind': 'ptsf', 'ramp_T': 2.0}))
    assert s.t_end == pytest.approx(4 + 2 + 1)


def test_initially_unsafe_names_key():
    with pytest.raises(UnsafeInitialState) as info:
        parse_scenario(_doc(x0=[1, 0]))
    assert 'x0[0]' in info.value.errors
    assert isinstance(info.value, InitiallyUnsafe)
    assert info.value.stage == 1
    assert exit_code_for(info.value) == 1


def test_unfiltered_start_may_be_anywhere():
    s = parse_scenario(_doc(x0=[1, 0], filter='none'))
    assert isinstance(s.filter, NoFilter)


def test_unknown_key():
    with pytest.raises(SchemaError) as info:
        parse_scenario(_doc(gamma=1))
    assert 'gamma' in info.value.errors


def test_nested_unknown_key_path():
    with pytest.raises(SchemaError) as info:
        parse_scenario(_doc(filter={'kind': 'ptsf', 'bogus': 1}))
    assert 'filter.bogus' in info.value.errors


def test_missing_required_key():
    doc = dict(MINIMAL)
    del doc['T']
    with pytest.raises(SchemaError) as info:
        parse_scenario(orjson.dumps(doc))
    assert 'T' in info.value.errors


def test_syntax_error():
    with pytest.raises(ScenarioSyntaxError):
        parse_scenario(b'{"n": 2,')


def test_document_must_be_object():
    with pytest.raises(SchemaError):
        parse_scenario(b'[1, 2]')


def test_cross_field_rules():
    with pytest.raises(InvariantViolation) as info:
        parse_scenario(_doc(n=3, x0=[-1, 0, 0]))
    assert 'nominal.kind' in info.value.errors

    with pytest.raises(InvariantViolation) as info:
        parse_scenario(_doc(x0=[-1, 0, 0]))
    assert 'x0' in info.value.errors

    with pytest.raises(InvariantViolation) as info:
        parse_scenario(_doc(t_end=3))
    assert 't_end' in info.value.errors


def test_manual_gains_checked_against_bounds():
    with pytest.raises(InvariantViolation) as info:
        parse_scenario(_doc(gains={'policy': 'manual', 'c': [0.5, 0.6]}))
    assert 'gains.c' in info.value.errors


def test_esf_needs_double_integrator():
    with pytest.raises(InvariantViolation) as info:
        parse_scenario(_doc(n=3, x0=[-1, 0, 0], filter='esf', nominal={'kind': 'constant', 'value': 1}))
    assert 'filter.kind' in info.value.errors


def test_external_target_must_import():
    with pytest.raises(InvariantViolation) as info:
        parse_scenario(_doc(nominal={'kind': 'external', 'target': 'no_such_module_here:law'}))
    assert 'nominal.target' in info.value.errors


def test_scenario_list_error_paths():
    text = orjson.dumps({'scenarios': [dict(MINIMAL, name='a'), dict(MINIMAL, name='b', x0=[2, 0])]})
    with pytest.raises(UnsafeInitialState) as info:
        parse_scenarios(text)
    assert 'scenarios[1].x0[0]' in info.value.errors


def test_scenario_list_names_unique():
    text = orjson.dumps({'scenarios': [MINIMAL, MINIMAL]})
    with pytest.raises(InvariantViolation) as info:
        parse_scenarios(text)
    assert 'scenarios[1].name' in info.value.errors


def test_single_scenario_expected():
    text = orjson.dumps({'scenarios': [dict(MINIMAL, name='a'), dict(MINIMAL, name='b')]})
    assert len(parse_scenarios(text)) == 2
    with pytest.raises(SchemaError):
        parse_scenario(text)


def test_round_trip():
    original = parse_scenario(_doc(
        name='pd', n=3, x0=[-1.5, 0.25, 3],
        gains={'policy': 'auto', 'margin': 0.2, 'c_n': 1.5},
        nominal={'kind': 'pd_setpoint', 'k': [1, 3, 3], 'setpoint': [0.5, 0, 0]},
    ))
    assert parse_scenario(dump_scenario(original)) == original
    esf = parse_scenario(_doc(filter={'kind': 'esf', 'rho': 3.2}, nominal={'kind': 'constant', 'value': 2}))
    assert parse_scenario(dump_scenario(esf)) == esf
    both = parse_scenarios(dump_scenario([original, esf.replace(name='esf')]))
    assert [s.name for s in both] == ['pd', 'esf']


def test_scenario_dict_shape():
    doc = scenario_to_dict(parse_scenario(_doc()))
    assert doc['filter']['kind'] == 'ptsf'
    assert doc['gains'] == {'policy': 'auto', 'margin': 0.1, 'c_n': None}


def test_load_from_file(tmp_path):
    path = tmp_path / 'scenario.json'
    path.write_bytes(_doc())
    assert len(load_scenarios(path)) == 1


def test_filter_list():
    choices = parse_filter_list('ptsf, esf:0.6,esf,none')
    assert [c.label for c in choices] == ['ptsf', 'esf_0.6', 'esf', 'none']
    assert choices[1] == EsfFilter(rho=0.6)


def test_filter_list_keeps_ptsf_config():
    custom = PtsfFilter()
    assert parse_filter_list('ptsf', custom)[0] is custom


def test_filter_list_errors():
    with pytest.raises(SchemaError) as info:
        parse_filter_list('esf:-1,qp')
    assert set(info.value.errors) == {'filters[0]', 'filters[1]'}
