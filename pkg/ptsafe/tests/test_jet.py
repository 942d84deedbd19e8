import math

import pytest

from ptsafe import InvalidArgument, JetDepthError, DomainError
from ptsafe.jet import DerivativeJet, jet_lift_state, jet_of_mu, leibniz, mu_jet_coeffs
from ptsafe.kernel import mu_derivative


def test_leibniz_product():
    # f = t, g = t at t = 2: (2, 1, 0) * (2, 1, 0) -> t^2 = (4, 4, 2)
    assert leibniz((2.0, 1.0, 0.0), (2.0, 1.0, 0.0)) == (4.0, 4.0, 2.0)


def test_leibniz_truncates_to_shorter():
    assert len(leibniz((1.0, 2.0, 3.0), (1.0, 0.0))) == 2


def test_mu_jet_matches_kernel():
    coeffs, clipped = mu_jet_coeffs(2, 1.5, 4.0, 3)
    assert not clipped
    for k, c in enumerate(coeffs):
        assert c == pytest.approx(mu_derivative(2, k, 1.5, 4.0))


def test_mu_jet_clipped_is_constant():
    coeffs, clipped = mu_jet_coeffs(2, 3.99, 4.0, 2, 1000.0)
    assert clipped
    assert coeffs == (1000.0, 0.0, 0.0)


def test_mu_jet_past_terminal_time_is_clipped():
    coeffs, clipped = mu_jet_coeffs(2, 5.0, 4.0, 1, 100.0)
    assert clipped and coeffs == (100.0, 0.0)


def test_mu_jet_unbounded_past_terminal():
    coeffs, clipped = mu_jet_coeffs(2, 4.0, 4.0, 1)
    assert clipped and math.isinf(coeffs[0])


def test_mu_jet_domain():
    with pytest.raises(DomainError):
        mu_jet_coeffs(2, -1.0, 4.0, 1)
    with pytest.raises(InvalidArgument):
        mu_jet_coeffs(2, 0.0, 4.0, -1)


def test_jet_arithmetic():
    a = DerivativeJet.create_jet([1, 2, 3])
    b = DerivativeJet.constant(2.0, 2)
    assert (a + b).coeffs == (3.0, 2.0, 3.0)
    assert (a - 1).coeffs == (0.0, 2.0, 3.0)
    assert (1 - a).coeffs == (0.0, -2.0, -3.0)
    assert (a * b).coeffs == (2.0, 4.0, 6.0)
    assert (3 * a).coeffs == (3.0, 6.0, 9.0)
    assert (-a).value == -1.0


def test_jet_derivative_and_truncate():
    a = DerivativeJet.create_jet([1, 2, 3])
    assert a.order == 2
    assert a.derivative().coeffs == (2.0, 3.0)
    assert a.truncate(1).coeffs == (1.0, 2.0)
    with pytest.raises(JetDepthError):
        DerivativeJet.constant(1.0).derivative()
    with pytest.raises(JetDepthError):
        a.truncate(3)


def test_jet_requires_value():
    with pytest.raises(InvalidArgument):
        DerivativeJet(coeffs=())


def test_lift_state():
    x = (1.0, 2.0, 3.0)
    assert jet_lift_state(x, 1, 2).coeffs == (1.0, 2.0, 3.0)
    assert jet_lift_state(x, 2, 1).coeffs == (2.0, 3.0)
    assert jet_lift_state(x, 3, 0).coeffs == (3.0,)


def test_lift_state_cannot_reach_input():
    with pytest.raises(JetDepthError):
        jet_lift_state((1.0, 2.0), 2, 1)
    with pytest.raises(InvalidArgument):
        jet_lift_state((1.0, 2.0), 0, 0)


def test_jet_of_mu():
    jet = jet_of_mu(2, 0.0, 4.0, 1)
    assert jet.value == 1.0
    assert jet.coeffs[1] == pytest.approx(0.5)
