import pytest

from ptsafe import HorizonClock, GainVector, compare_filters, EsfFilter
from ptsafe.verify import double_integrator_scenario, forced_override_scenario
from ptsafe.chain import simulate


@pytest.fixture
def clock():
    return HorizonClock(T=4.0)


@pytest.fixture
def base_gains():
    return GainVector.create_gains((0.6, 0.6))


@pytest.fixture(scope='session')
def tracking_scenario():
    return double_integrator_scenario()


@pytest.fixture(scope='session')
def tracking_report(tracking_scenario):
    return compare_filters(tracking_scenario, [tracking_scenario.filter, EsfFilter(rho=0.6), EsfFilter(rho=3.2)])


@pytest.fixture(scope='session')
def forced_traj():
    return simulate(forced_override_scenario(t_end=5.0))
