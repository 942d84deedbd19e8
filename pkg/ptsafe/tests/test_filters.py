import math

import numpy as np
import pytest

from ptsafe import (
    DomainError,
    FilterConfig,
    FilterStateError,
    HorizonClock,
    InitiallyUnsafe,
    InvalidArgument,
    UnsupportedOrder,
)
from ptsafe.filters import (
    esf_barriers,
    esf_bound,
    esf_closed_form,
    esf_control,
    esf_min_rho,
    ptsf_control,
    ptsf_post_terminal,
    ptsf_pre_terminal,
    ramp_g,
)


def test_pre_terminal_override(clock, base_gains):
    d = ptsf_pre_terminal(10.0, (-4.0, 2.0), 0.0, clock, base_gains)
    assert d.override_active
    assert d.u == d.alpha_n == pytest.approx(0.24)
    assert d.u_nom == 10.0


def test_pre_terminal_pass_through(clock, base_gains):
    d = ptsf_pre_terminal(-1.0, (-4.0, 2.0), 0.0, clock, base_gains)
    assert not d.override_active
    assert d.u == -1.0


def test_pre_terminal_tie_is_not_an_override(clock, base_gains):
    bound = ptsf_pre_terminal(0.0, (-4.0, 2.0), 0.0, clock, base_gains).alpha_n
    d = ptsf_pre_terminal(bound, (-4.0, 2.0), 0.0, clock, base_gains)
    assert not d.override_active and d.u == bound


def test_post_terminal_needs_terminal_output(clock):
    with pytest.raises(FilterStateError):
        ptsf_post_terminal(1.0, 4.0, clock, FilterConfig(), None)


def test_post_terminal_has_no_bound(clock):
    d = ptsf_post_terminal(2.0, 5.0, clock, FilterConfig(), -1.0)
    assert d.u == 2.0
    assert not d.override_active
    assert math.isnan(d.alpha_n)


@pytest.mark.parametrize('since, x1, expected', [
    (0.0, 0.0, 0.0),
    (0.25, 0.0, 0.75),
    (0.5, 1e-4, 1.0),
    (0.8, 0.0, 1.0),
    (0.1, -0.5, 1.0),
])
def test_ramp(clock, since, x1, expected):
    assert ramp_g(clock.terminal_time + since, x1, clock, FilterConfig()) == pytest.approx(expected)


def test_ramp_before_terminal_time(clock):
    with pytest.raises(DomainError):
        ramp_g(3.0, 0.0, clock, FilterConfig())


def test_control_dispatches_on_time(clock, base_gains):
    config = FilterConfig()
    before = ptsf_control(10.0, (-4.0, 2.0), 0.0, clock, base_gains, config)
    assert before.override_active
    after = ptsf_control(10.0, (0.0, 0.0), 4.0, clock, base_gains, config, x1_at_T=0.0)
    assert after.u == 0.0
    with pytest.raises(FilterStateError):
        ptsf_control(10.0, (0.0, 0.0), 4.0, clock, base_gains, config)


def test_control_uses_config_ceiling(base_gains):
    clock = HorizonClock(T=4.0, mu_max=1e6)
    d = ptsf_control(10.0, (-1e-3, 0.0), 3.99, clock, base_gains, FilterConfig(mu_max=100.0))
    assert d.mu_clipped


def test_esf_bound_example():
    assert esf_bound((-4.0, 2.0), 0.6) == pytest.approx(-0.72)


def test_esf_control():
    d = esf_control(1.0, (-4.0, 2.0), 0.6)
    assert d.override_active and d.u == pytest.approx(-0.72)
    assert not esf_control(-5.0, (-4.0, 2.0), 0.6).override_active


def test_esf_guards():
    with pytest.raises(UnsupportedOrder):
        esf_control(0.0, (-1.0, 0.0, 0.0), 1.0)
    with pytest.raises(InvalidArgument):
        esf_control(0.0, (-1.0, 0.0), 0.0)
    with pytest.raises(InitiallyUnsafe):
        esf_min_rho((1.0, 0.0))


def test_esf_min_rho():
    assert esf_min_rho((-4.0, 2.0)) == 0.5
    assert esf_min_rho((-4.0, -2.0)) == 0.0


def test_esf_barriers():
    assert esf_barriers((-4.0, 2.0), 0.6) == pytest.approx((4.0, 0.4))


def test_esf_closed_form_start_and_rate():
    x0 = np.array([-4.0, 2.0])
    assert esf_closed_form(x0, 3.2, 0.0) == pytest.approx(x0)
    step = 1e-6
    rate = (esf_closed_form(x0, 3.2, step) - esf_closed_form(x0, 3.2, 0.0)) / step
    assert rate == pytest.approx(np.array([2.0, esf_bound(x0, 3.2)]), rel=1e-4)


def test_esf_closed_form_settles():
    assert esf_closed_form((-4.0, 2.0), 0.6, 60.0) == pytest.approx(np.zeros(2), abs=1e-12)


def test_esf_closed_form_rejects_negative_time():
    with pytest.raises(InvalidArgument):
        esf_closed_form((-4.0, 2.0), 0.6, -1.0)
