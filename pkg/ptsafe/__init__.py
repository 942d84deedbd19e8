# -*- coding: utf-8 -*-

__title__ = 'ptsafe'
__author__ = 'ptsafe developers'
__license__ = 'MIT'
__copyright__ = 'Copyright 2024-present ptsafe developers'
__version__ = '0.2.0'

from collections import namedtuple
import logging

from .core.errors import *
from .core.types import (
    HorizonClock,
    GainVector,
    FilterConfig,
    FilterDecision,
    AutoGains,
    ManualGains,
    PtsfFilter,
    EsfFilter,
    NoFilter,
    TrackingSine,
    ConstantNominal,
    PdSetpoint,
    ExternalNominal,
    Scenario,
    Metrics,
)
from .core.trajectory import Sample, Trajectory
from .kernel import (
    nu,
    mu,
    mu_clipped,
    rising_factorial,
    mu_derivative,
    check_mu_commutativity,
    xi,
)
from .jet import DerivativeJet, jet_lift_state, jet_of_mu
from .barrier import (
    BarrierStack,
    barrier_stack,
    alpha_n,
    minimal_gains,
    gain_bounds,
    select_gains,
    validate_gains,
)
from .filters import (
    ptsf_control,
    ptsf_pre_terminal,
    ptsf_post_terminal,
    ramp_g,
    esf_control,
    esf_min_rho,
    esf_closed_form,
    esf_barriers,
)
from .chain import chain_rhs, step_rk4, simulate, detect_overrides
from .metrics import compute_metrics, compare_filters, match_reaction_rho, ComparisonReport
from .runner import simulate_many
from .scenario import parse_scenario, parse_scenarios, load_scenarios, dump_scenario, parse_filter_list
from .export import write_trajectory_csv, emit_plot_data, emit_trajectories
from .verify import run_verification_suite, VerificationReport, CheckResult

VersionInfo = namedtuple('VersionInfo', 'major minor micro releaselevel serial')

version_info = VersionInfo(major=0, minor=2, micro=0, releaselevel='final', serial=0)

logging.getLogger(__name__).addHandler(logging.NullHandler())
