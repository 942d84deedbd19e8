"""
Batch execution of independent scenarios.

Each scenario is simulated in an executor thread driven by a uvloop event
loop; results come back in input order and do not depend on the worker count.
"""
import asyncio
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger

from uvloop import EventLoopPolicy

from typing import (
    List,
    Sequence,
)

from .chain import simulate
from .core.errors import InvalidArgument
from .core.trajectory import Trajectory
from .core.types import Scenario

log = getLogger(__name__)


async def _gather(scenarios: Sequence[Scenario], workers: int) -> List[Trajectory]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix='ptsafe') as pool:
        futures = [loop.run_in_executor(pool, simulate, s) for s in scenarios]
        return list(await asyncio.gather(*futures))


def simulate_many(scenarios: Sequence[Scenario], workers: int = 1) -> List[Trajectory]:
    if workers is None or workers < 1:
        raise InvalidArgument(f'workers must be >= 1, got {workers!r}')
    scenarios = list(scenarios)
    if workers == 1 or len(scenarios) <= 1:
        return [simulate(s) for s in scenarios]
    log.info('running %d scenarios on %d workers', len(scenarios), workers)
    loop = EventLoopPolicy().new_event_loop()
    try:
        return loop.run_until_complete(_gather(scenarios, workers))
    finally:
        loop.close()
