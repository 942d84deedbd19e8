"""
Command-line front end.

    ptsafe simulate --scenario FILE --out DIR
    ptsafe compare  --scenario FILE --filters ptsf,esf:0.6,esf:3.2 --out DIR
    ptsafe gains    --scenario FILE
    ptsafe tune     --scenario FILE [--target T] [--lo RHO] [--hi RHO]
    ptsafe verify   --suite {kernel,backstepping,oracles,safety,all}

Exit status: 0 success, 1 usage or validation error, 2 runtime or numeric error,
3 verification failure.
"""
import argparse
import logging
import sys
from logging import getLogger

from typing import (
    List,
    Optional,
    Sequence,
)

from . import __version__
from .barrier import gain_bounds, minimal_gains
from .chain import detect_overrides, resolve_gains, simulate
from .config import DEFAULTS
from .core.errors import PTSafeException, PreconditionError, VerificationFailure, exit_code_for
from .core.types import AutoGains, PtsfFilter, Scenario
from .enums import Suite
from .export import emit_plot_data, emit_trajectories
from .metrics import compare_filters, match_reaction_rho
from .runner import simulate_many
from .scenario import load_scenarios, parse_filter_list
from .verify import run_verification_suite

log = getLogger('ptsafe.cli')


def _pick(scenarios: Sequence[Scenario], name: Optional[str]) -> Scenario:
    if name is None:
        return scenarios[0]
    for s in scenarios:
        if s.name == name:
            return s
    raise PreconditionError(f'no scenario named {name!r}; file has {", ".join(s.name for s in scenarios)}')


def cmd_simulate(args: argparse.Namespace) -> int:
    scenarios = load_scenarios(args.scenario)
    trajectories = simulate_many(scenarios, workers=args.workers)
    manifest = emit_trajectories(scenarios, trajectories, args.out)
    print(f'wrote {len(trajectories)} trajectory file(s) and {manifest}')
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    base = _pick(load_scenarios(args.scenario), args.name)
    ptsf = base.filter if isinstance(base.filter, PtsfFilter) else None
    report = compare_filters(base, parse_filter_list(args.filters, ptsf), workers=args.workers)
    manifest = emit_plot_data(report, args.out)
    for entry in report:
        m = entry.metrics
        jerk = '-' if m.max_abs_jerk_on_override is None else f'{m.max_abs_jerk_on_override:.4g}'
        print(f'{entry.label:>12}  max y {m.min_y_margin:.4g}  min h1 {m.min_h1:.4g}  '
              f'max |u| {m.max_abs_u:.4g}  max |jerk| {jerk}  overrides {len(m.override_intervals)}')
    print(f'manifest: {manifest}')
    return 0


def cmd_gains(args: argparse.Namespace) -> int:
    for scenario in load_scenarios(args.scenario):
        clock = scenario.clock
        policy = scenario.gains
        if isinstance(policy, AutoGains):
            bounds = minimal_gains(scenario.x0, clock, lambda i, b: max(0.0, b) + policy.margin)
        else:
            bounds = gain_bounds(scenario.x0, clock, policy.gains)
        gains = resolve_gains(scenario)
        print(f'{scenario.name} ({policy.kind.value} gains)')
        for i, c in enumerate(gains, 1):
            bound = f'{bounds[i - 1]!r}' if i <= len(bounds) else '-'
            print(f'  c_{i} = {c!r}  (lower bound {bound})')
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    base = _pick(load_scenarios(args.scenario), args.name)
    target = args.target
    if target is None:
        reference = base if isinstance(base.filter, PtsfFilter) else base.with_filter(PtsfFilter())
        intervals = detect_overrides(simulate(reference))
        if not intervals:
            raise PreconditionError(f'{reference.name!r} never overrides; pass --target')
        target = intervals[0][0]
    rho = match_reaction_rho(base, target, args.lo, args.hi, xtol=args.xtol)
    print(f'rho = {rho!r} reacts at t = {target!r}')
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    report = run_verification_suite(args.suite, seed=args.seed)
    print(report.table())
    if not report.passed:
        raise VerificationFailure(f'{len(report.failures)} check(s) failed: '
                                  + ', '.join(r.name for r in report.failures))
    return 0


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors and exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f'{self.prog}: error: {message}\n')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='ptsafe', description='Prescribed-time safety filters for integrator chains.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='log debug messages')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', help='simulate every scenario in a file')
    p.add_argument('--scenario', required=True, help='scenario JSON file')
    p.add_argument('--out', required=True, help='output directory')
    p.add_argument('--workers', type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('compare', help='run one scenario under several filters')
    p.add_argument('--scenario', required=True)
    p.add_argument('--name', help='scenario to use when the file has several')
    p.add_argument('--filters', default='ptsf,esf:0.6,esf:3.2', help='comma list of ptsf, esf, esf:<rho>, none')
    p.add_argument('--out', required=True)
    p.add_argument('--workers', type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('gains', help='print stage lower bounds and selected gains')
    p.add_argument('--scenario', required=True)
    p.set_defaults(func=cmd_gains)

    p = sub.add_parser('tune', help='find the exponential rate reacting at a given time')
    p.add_argument('--scenario', required=True)
    p.add_argument('--name')
    p.add_argument('--target', type=float, help='reaction time; defaults to the first PTSf override')
    p.add_argument('--lo', type=float, default=0.1)
    p.add_argument('--hi', type=float, default=10.0)
    p.add_argument('--xtol', type=float, default=1e-6)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser('verify', help='run the verification suites')
    p.add_argument('--suite', default=Suite.ALL.value, choices=[s.value for s in Suite])
    p.add_argument('--seed', type=int, default=DEFAULTS.seed)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: List[str] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return args.func(args)
    except PTSafeException as exc:
        log.debug('command failed', exc_info=True)
        print(f'error: {exc}', file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 2
