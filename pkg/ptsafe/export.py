"""
Trajectory and plot-data output.

Numbers are written in their shortest round-trip decimal form, so identical
runs give byte-identical files.
"""
import csv
from logging import getLogger
from pathlib import Path

from typing import (
    IO,
    Dict,
    List,
    Union,
)

from .core.errors import PreconditionError
from .core.trajectory import Trajectory
from .core.types import Metrics, Scenario
from .core.utils import format_float, to_json
from .metrics import ComparisonReport, compute_metrics

log = getLogger(__name__)

MANIFEST = 'manifest.json'


def csv_header(n: int) -> List[str]:
    return (['t'] + [f'x{i}' for i in range(1, n + 1)] + ['u', 'u_nom', 'safe_bound']
            + [f'h{i}' for i in range(1, n + 1)] + ['override', 'mu_clipped'])


def _rows(traj: Trajectory):
    t, x, u, u_nom, bound, h = (col.tolist() for col in (traj.t, traj.x, traj.u, traj.u_nom, traj.safe_bound, traj.h))
    override, clipped = traj.override.tolist(), traj.mu_clipped.tolist()
    for k in range(len(t)):
        yield ([format_float(t[k])] + [format_float(v) for v in x[k]]
               + [format_float(u[k]), format_float(u_nom[k]), format_float(bound[k])]
               + [format_float(v) for v in h[k]]
               + ['1' if override[k] else '0', '1' if clipped[k] else '0'])


def write_trajectory_csv(traj: Trajectory, destination: Union[str, Path, IO[str]]) -> None:
    traj.require_samples()
    if hasattr(destination, 'write'):
        _write(traj, destination)
        return
    with open(destination, 'w', newline='', encoding='utf-8') as fp:
        _write(traj, fp)
    log.debug('wrote %d rows to %s', len(traj), destination)


def _write(traj: Trajectory, fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator='\n')
    writer.writerow(csv_header(traj.n))
    writer.writerows(_rows(traj))


def _filter_summary(scenario: Scenario) -> Dict:
    choice = scenario.filter
    summary = {'kind': choice.kind.value}
    if hasattr(choice, 'rho'):
        summary['rho'] = choice.rho
    return summary


def _manifest_entry(name: str, file: str, metrics: Metrics, traj: Trajectory, scenario: Scenario = None) -> Dict:
    entry = {'name': name, 'file': file, 'samples': len(traj)}
    if scenario is not None:
        entry['filter'] = _filter_summary(scenario)
    if traj.gains is not None:
        entry['gains'] = list(traj.gains.c)
    entry['metrics'] = metrics.to_dict()
    return entry


def write_manifest(entries: List[Dict], destination: Path) -> Path:
    path = Path(destination) / MANIFEST
    path.write_bytes(to_json({'variants': entries}))
    return path


def emit_plot_data(report: ComparisonReport, destination: Union[str, Path]) -> Path:
    """One CSV per variant plus ``manifest.json`` with names and metric summaries."""
    report.require_variants()
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for variant in report.variants:
        file = f'{variant.label}.csv'
        write_trajectory_csv(variant.trajectory, out / file)
        entries.append(_manifest_entry(variant.label, file, variant.metrics, variant.trajectory, variant.scenario))
    path = write_manifest(entries, out)
    log.info('wrote %d variant(s) and %s to %s', len(entries), MANIFEST, out)
    return path


def emit_trajectories(scenarios: List[Scenario], trajectories: List[Trajectory],
                      destination: Union[str, Path]) -> Path:
    """CSV per scenario plus a manifest; used by ``ptsafe simulate``."""
    if not trajectories:
        raise PreconditionError('nothing to write')
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for scenario, traj in zip(scenarios, trajectories):
        file = f'{scenario.name}.csv'
        write_trajectory_csv(traj, out / file)
        entries.append(_manifest_entry(scenario.name, file, compute_metrics(traj, scenario.clock), traj, scenario))
    return write_manifest(entries, out)
