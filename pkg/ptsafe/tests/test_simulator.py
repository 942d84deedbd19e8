import logging
import math

import numpy as np
import pytest

from ptsafe import (
    EsfFilter,
    ExternalNominal,
    GainVector,
    ManualGains,
    NoFilter,
    NumericError,
    PreconditionError,
    InvalidArgument,
    Scenario,
    ConstantNominal,
)
from ptsafe.chain import chain_rhs, detect_overrides, grid_size, simulate, step_rk4, terminal_index
from ptsafe.core.trajectory import Sample, Trajectory, columns_of
from ptsafe.filters import esf_barriers
from ptsafe.runner import simulate_many
from ptsafe.verify import closed_loop_residual, forced_override_scenario, hn_explicit_error


def test_chain_rhs():
    assert chain_rhs([1.0, 2.0, 3.0], 5.0).tolist() == [2.0, 3.0, 5.0]
    assert chain_rhs([1.0], -1.0).tolist() == [-1.0]


def test_rk4_is_exact_for_constant_input():
    dt = 0.1
    x = step_rk4([1.0, 2.0], 0.0, dt, lambda x, t: 1.0)
    assert x == pytest.approx(np.array([1.0 + 2.0 * dt + 0.5 * dt ** 2, 2.0 + dt]), rel=1e-14)


def test_rk4_uses_given_first_stage():
    calls = []

    def law(x, t):
        calls.append(t)
        return 0.0

    step_rk4([0.0, 0.0], 1.0, 0.5, law, u_start=0.0)
    assert calls == [1.25, 1.25, 1.5]


def test_rk4_rejects_bad_step():
    with pytest.raises(PreconditionError):
        step_rk4([0.0], 0.0, 0.0, lambda x, t: 0.0)


def test_grid_arithmetic():
    assert grid_size(0.0, 6.0, 1e-3) == 6000
    assert terminal_index(4.0, 1e-3) == 4000
    assert terminal_index(1.0, 1e-5) == 100000
    assert grid_size(0.0, 1.0, 0.3) == 3


@pytest.mark.parametrize('t0', [0.0, 0.3])
def test_terminal_sample_short_of_terminal_time(t0):
    # T / (T / 4000) rounds so that t0 + k_T dt falls just below t0 + T
    T = 1.975399255975651
    scenario = Scenario.create_scenario((-4.0, 2.0), T, t0=t0, nominal=ConstantNominal(0.0))
    traj = simulate(scenario)
    k_T = traj.terminal_index
    assert k_T == 4000
    assert traj.t[k_T] == pytest.approx(t0 + T)
    assert np.isnan(traj.safe_bound[k_T])
    assert np.all(np.isfinite(traj.u))
    assert len(traj) == grid_size(t0, scenario.t_end, scenario.dt) + 1


def test_tracking_run_layout(tracking_report):
    traj = tracking_report['ptsf'].trajectory
    assert len(traj) == 6001
    assert traj.n == 2
    assert traj.terminal_index == 4000
    assert traj.t[0] == 0.0 and traj.t[-1] == pytest.approx(6.0)
    assert traj.x[0].tolist() == [-4.0, 2.0]
    assert traj.x1_at_T == traj.x[4000, 0]
    assert traj.gains.c == (0.6, 0.6)


def test_tracking_run_is_safe(tracking_report):
    traj = tracking_report['ptsf'].trajectory
    pre = traj.pre_terminal
    assert np.all(traj.x[pre, 0] < 0)
    assert np.all(traj.h[pre, 0] > 0)
    assert np.all(traj.h[pre, 1] > -1e-9)
    assert traj.override.any()


def test_applied_input_respects_bound(tracking_report):
    traj = tracking_report['ptsf'].trajectory
    pre = traj.pre_terminal
    assert np.all(traj.u[pre] <= traj.safe_bound[pre])
    on = pre & traj.override
    assert np.array_equal(traj.u[on], traj.safe_bound[on])
    off = pre & ~traj.override
    assert np.array_equal(traj.u[off], traj.u_nom[off])


def test_post_terminal_rows(tracking_report):
    traj = tracking_report['ptsf'].trajectory
    post = ~traj.pre_terminal
    assert np.all(np.isnan(traj.safe_bound[post]))
    assert not traj.override[post].any()


def test_trajectory_rows_and_read_only(tracking_report):
    traj = tracking_report['ptsf'].trajectory
    row = traj[0]
    assert isinstance(row, Sample)
    assert row.x == (-4.0, 2.0)
    assert len(traj[10:13]) == 3
    with pytest.raises(ValueError):
        traj.u[0] = 1.0


def test_forced_override_hands_off_continuously(forced_traj):
    k_T = forced_traj.terminal_index
    assert forced_traj.u[k_T] == 0.0
    assert abs(forced_traj.u[k_T - 1] - forced_traj.u[k_T]) <= 5e-2
    assert abs(forced_traj.x1_at_T) <= 1e-3
    assert forced_traj.override[:k_T].all()


def test_forced_override_ramps_back(forced_traj):
    k = forced_traj.terminal_index + 250
    # g = 1 - (1 - 0.25 / 0.5)^2 with u_nom = 10
    assert forced_traj.u[k] == pytest.approx(7.5, rel=1e-6)
    assert forced_traj.u[-1] == 10.0


def test_last_barrier_follows_explicit_solution(forced_traj):
    assert hn_explicit_error(forced_traj, forced_traj.clock, 0.6, 3.0) <= 1e-4


def test_closed_loop_identity_triple_integrator():
    scenario = forced_override_scenario((-4.0, 2.0, -1.0), 4.0, gains=None, u_nom=100.0)
    traj = simulate(scenario)
    assert traj.gains.c == pytest.approx((0.6, 0.1, 0.1))
    assert traj.override[:2001].all()
    assert closed_loop_residual(traj, traj.gains, scenario.clock, 2.0) <= 1e-4


def test_esf_records_its_barrier_pair():
    scenario = forced_override_scenario(t_end=6.0).with_filter(EsfFilter(rho=0.6))
    traj = simulate(scenario)
    assert traj.gains is None
    k = 1234
    assert tuple(traj.h[k]) == pytest.approx(esf_barriers(traj.x[k], 0.6))


def test_esf_peaking():
    base = forced_override_scenario(u_nom=100.0, t_end=6.0)
    slow = simulate(base.with_filter(EsfFilter(rho=0.6)))
    fast = simulate(base.with_filter(EsfFilter(rho=3.2)))
    assert np.max(np.abs(slow.x[:, 1])) == pytest.approx(2.0)
    assert np.max(np.abs(fast.x[:, 1])) == pytest.approx(23.6 ** 2 / 86.4, abs=1e-2)


def test_esf_default_rate_from_initial_state():
    scenario = forced_override_scenario(t_end=4.0).with_filter(EsfFilter())
    traj = simulate(scenario)
    # rho = 2 / 4 + 0.1 gives h_2(0) = -2 + 0.6 * 4
    assert traj.h[0, 1] == pytest.approx(0.4)


def test_unfiltered_run():
    scenario = forced_override_scenario(u_nom=1.0, t_end=4.0).with_filter(NoFilter())
    traj = simulate(scenario)
    assert np.array_equal(traj.u, np.ones(len(traj)))
    assert np.array_equal(traj.h[:, 0], -traj.x[:, 0])
    assert np.isnan(traj.h[:, 1]).all()
    assert not traj.override.any()


def test_non_finite_nominal():
    scenario = Scenario.create_scenario(
        (-1.0, 0.0), 1.0, dt=0.01, filter=NoFilter(),
        nominal=ExternalNominal(func=lambda x, t: math.nan),
    )
    with pytest.raises(NumericError) as info:
        simulate(scenario)
    assert info.value.t == 0.0


def test_stiffness_warning(caplog):
    scenario = forced_override_scenario(T=0.01, dt=1e-3, mu_max=1e4, name='stiff')
    with caplog.at_level(logging.WARNING, logger='ptsafe.chain'):
        simulate(scenario)
    assert any('stability limit' in r.getMessage() for r in caplog.records)


def test_start_time_offset():
    scenario = Scenario.create_scenario(
        (-4.0, 2.0), 4.0, t0=10.0, dt=1e-3, t_end=14.0,
        gains=ManualGains(gains=GainVector.create_gains((0.6, 0.6))),
        nominal=ConstantNominal(value=10.0),
    )
    traj = simulate(scenario)
    assert traj.t[0] == 10.0
    assert traj.terminal_index == 4000
    assert traj.safe_bound[0] == pytest.approx(0.24)


def test_detect_overrides_closed_open():
    flags = [False, True, True, False, True]
    samples = [Sample(t=0.1 * k, x=(0.0,), u=0.0, u_nom=0.0, safe_bound=0.0, h=(0.0,), override=f,
                      mu_clipped=False) for k, f in enumerate(flags)]
    traj = Trajectory(**columns_of(samples), dt=0.1, terminal_index=5)
    intervals = detect_overrides(traj)
    assert intervals[0] == pytest.approx((0.1, 0.3))
    assert intervals[1] == pytest.approx((0.4, 0.5))


def test_detect_overrides_needs_samples():
    with pytest.raises(PreconditionError):
        detect_overrides(Trajectory(dt=0.1))


def test_batch_matches_serial():
    scenarios = [forced_override_scenario(u_nom=u, T=1.0, name=f'u{u}') for u in (1.0, 5.0, 10.0)]
    serial = simulate_many(scenarios, workers=1)
    parallel = simulate_many(scenarios, workers=3)
    assert len(parallel) == 3
    for a, b in zip(serial, parallel):
        assert a.label == b.label
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.u, b.u)


def test_batch_rejects_bad_worker_count():
    with pytest.raises(InvalidArgument):
        simulate_many([], workers=0)
