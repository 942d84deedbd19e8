import pytest

from ptsafe import (
    DegenerateBarrier,
    GainVector,
    HorizonClock,
    InitiallyUnsafe,
    InvalidArgument,
)
from ptsafe.barrier import (
    alpha_n,
    barrier_stack,
    barrier_values,
    gain_bounds,
    minimal_gains,
    select_gains,
    validate_gains,
)


def test_double_integrator_stack(clock, base_gains):
    stack = barrier_stack((-4.0, 2.0), 0.0, clock, base_gains)
    assert stack.n == 2
    assert stack.h == pytest.approx((4.0, 0.4))
    assert stack.alpha == pytest.approx((2.4, 0.24))
    assert stack.safe_bound == pytest.approx(0.24)
    assert not stack.mu_clipped


def test_alpha_jets_have_decreasing_order(clock, base_gains):
    stack = barrier_stack((-4.0, 2.0), 0.0, clock, base_gains)
    assert [j.order for j in stack.alpha_jets] == [1, 0]
    # d/dt alpha_1 = c_1 (mu_2' h_1 + mu_2 h_1') = 0.6 (0.5 * 4 - 2)
    assert stack.alpha_jets[0].coeffs[1] == pytest.approx(0.0)


def test_triple_integrator_by_hand(clock):
    gains = select_gains((-4.0, 2.0, -1.0), clock, 0.1)
    assert gains.c == pytest.approx((0.6, 0.1, 0.1))
    stack = barrier_stack((-4.0, 2.0, -1.0), 0.0, clock, gains)
    assert stack.h == pytest.approx((4.0, 0.4, 1.04))
    assert stack.safe_bound == pytest.approx(0.524)


def test_fast_paths_agree(clock):
    gains = GainVector.create_gains((0.7, 1.2, 0.3))
    x, t = (-1.0, 0.5, 2.0), 1.7
    stack = barrier_stack(x, t, clock, gains)
    h, bound, clipped = barrier_values(x, t, clock, gains)
    assert h == stack.h
    assert bound == stack.safe_bound
    assert alpha_n(x, t, clock, gains) == (bound, clipped)


def test_clip_flag_near_terminal_time(base_gains):
    clock = HorizonClock(T=4.0, mu_max=1000.0)
    assert barrier_stack((-1.0, 0.0), 3.99, clock, base_gains).mu_clipped
    assert not barrier_stack((-1.0, 0.0), 3.0, clock, base_gains).mu_clipped


def test_barriers_are_linear_in_the_state(clock):
    gains = GainVector.create_gains((0.5, 0.9, 0.2))
    x = (-1.5, 0.3, 0.7)
    base = barrier_stack(x, 1.0, clock, gains)
    scaled = barrier_stack(tuple(-2.5 * v for v in x), 1.0, clock, gains)
    assert scaled.h == pytest.approx(tuple(-2.5 * v for v in base.h))
    assert scaled.alpha == pytest.approx(tuple(-2.5 * v for v in base.alpha))


def test_gain_length_mismatch(clock):
    with pytest.raises(InvalidArgument):
        barrier_stack((-1.0, 0.0), 0.0, clock, GainVector.create_gains((1.0,)))


def test_minimal_gains_double_integrator(clock):
    assert minimal_gains((-4.0, 2.0), clock) == (0.5,)


def test_minimal_gains_negative_bound(clock):
    # moving away from the barrier: any positive gain works
    assert minimal_gains((-4.0, -2.0), clock) == (-0.5,)
    assert select_gains((-4.0, -2.0), clock, 0.1).c == pytest.approx((0.1, 0.1))


def test_select_gains_matches_double_integrator_gains(clock):
    gains = select_gains((-4.0, 2.0), clock, 0.1, 0.6)
    assert gains.c == pytest.approx((0.6, 0.6), abs=1e-12)


def test_select_gains_default_last_gain(clock):
    assert select_gains((-4.0, 2.0), clock, 0.25).c[-1] == 0.25


def test_single_integrator_has_no_bounds(clock):
    assert minimal_gains((-1.0,), clock) == ()
    assert select_gains((-1.0,), clock, 0.1, 2.0).c == (2.0,)


def test_initially_unsafe(clock):
    with pytest.raises(InitiallyUnsafe) as info:
        minimal_gains((1.0, 0.0), clock)
    assert info.value.stage == 1
    with pytest.raises(InitiallyUnsafe):
        select_gains((0.0, 0.0), clock)


def test_degenerate_intermediate_barrier(clock):
    # c_1 exactly at its bound puts h_2 on zero
    with pytest.raises(DegenerateBarrier) as info:
        minimal_gains((-4.0, 2.0, 0.0), clock, lambda i, bound: bound)
    assert info.value.stage == 2
    with pytest.raises(DegenerateBarrier):
        gain_bounds((-4.0, 2.0, 0.0), clock, GainVector.create_gains((0.5, 0.1, 0.1)))


def test_select_gains_rejects_bad_margin(clock):
    with pytest.raises(InvalidArgument):
        select_gains((-4.0, 2.0), clock, 0.0)
    with pytest.raises(InvalidArgument):
        select_gains((-4.0, 2.0), clock, 0.1, -1.0)


def test_gain_bounds_with_given_gains(clock):
    bounds = gain_bounds((-4.0, 2.0, -1.0), clock, GainVector.create_gains((0.6, 0.1, 0.1)))
    assert bounds == pytest.approx((0.5, -2.5))


@pytest.mark.parametrize('gains, expected', [
    ((0.6, 0.6), True),
    ((0.6, 0.0), True),
    ((0.5, 0.6), False),
    ((0.4, 0.6), False),
    ((0.6, -0.1), False),
])
def test_validate_gains(clock, gains, expected):
    assert validate_gains(GainVector.create_gains(gains), (-4.0, 2.0), clock) is expected


def test_validate_gains_requires_positive_gain_on_receding_start(clock):
    # bound is negative, gains must still be positive
    assert not validate_gains(GainVector.create_gains((0.0, 0.1)), (-4.0, -2.0), clock)
    assert validate_gains(GainVector.create_gains((0.01, 0.1)), (-4.0, -2.0), clock)


def test_validate_gains_numerically_zero_output(clock):
    with pytest.raises(DegenerateBarrier):
        validate_gains(GainVector.create_gains((1.0, 1.0)), (-1e-14, 0.0), clock)


def test_validation_agrees_with_initial_barriers(clock):
    x0 = (-2.0, 3.0, -4.0, 1.0)
    for gains in [(2.0, 1.0, 1.0, 0.5), (1.6, 5.0, 0.3, 0.1), (1.4, 1.0, 1.0, 1.0), (3.0, 0.2, 0.2, 0.2)]:
        g = GainVector.create_gains(gains)
        positive = all(h > 0 for h in barrier_stack(x0, 0.0, clock, g).h)
        assert validate_gains(g, x0, clock) is positive
