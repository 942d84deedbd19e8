import collections.abc
from dataclassy import dataclass

import numpy as np
from numpy import ndarray

from typing import (
    List,
    Optional,
    Tuple,
)

from .errors import PreconditionError
from .types import GainVector, HorizonClock


@dataclass(slots=True, frozen=True, repr=True, eq=True)
class Sample:
    t: float
    x: Tuple[float, ...]
    u: float
    u_nom: float
    safe_bound: float
    h: Tuple[float, ...]
    override: bool
    mu_clipped: bool


class Trajectory(collections.abc.Sequence):
    """Columnar record of a run on the grid ``t_k = t0 + k dt``.

    Columns are read-only numpy arrays; ``x`` and ``h`` are ``(len, n)``.
    Indexing yields :class:`Sample` rows.
    """

    __slots__ = ('t', 'x', 'u', 'u_nom', 'safe_bound', 'h', 'override', 'mu_clipped',
                 'dt', 'clock', 'gains', 'x1_at_T', 'terminal_index', 'label')

    def __init__(self, **kwargs):
        self.t: ndarray = kwargs.get('t')
        self.x: ndarray = kwargs.get('x')
        self.u: ndarray = kwargs.get('u')
        self.u_nom: ndarray = kwargs.get('u_nom')
        self.safe_bound: ndarray = kwargs.get('safe_bound')
        self.h: ndarray = kwargs.get('h')
        self.override: ndarray = kwargs.get('override')
        self.mu_clipped: ndarray = kwargs.get('mu_clipped')
        self.dt: float = kwargs.get('dt')
        self.clock: HorizonClock = kwargs.get('clock')
        self.gains: Optional[GainVector] = kwargs.get('gains')
        self.x1_at_T: float = kwargs.get('x1_at_T', float('nan'))
        self.terminal_index: int = kwargs.get('terminal_index')
        self.label: str = kwargs.get('label', '')

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def pre_terminal(self) -> ndarray:
        """Boolean mask of samples strictly before the terminal time."""
        return np.arange(len(self)) < self.terminal_index

    def __len__(self):
        return 0 if self.t is None else len(self.t)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        return Sample(
            t=float(self.t[idx]),
            x=tuple(float(v) for v in self.x[idx]),
            u=float(self.u[idx]),
            u_nom=float(self.u_nom[idx]),
            safe_bound=float(self.safe_bound[idx]),
            h=tuple(float(v) for v in self.h[idx]),
            override=bool(self.override[idx]),
            mu_clipped=bool(self.mu_clipped[idx]),
        )

    def require_samples(self) -> None:
        if not len(self):
            raise PreconditionError('trajectory has no samples')

    def __repr__(self):
        return f'<Trajectory {self.label!r} samples={len(self)} dt={self.dt}>'


class TrajectoryRecorder:
    """Preallocated column buffers filled one sample at a time."""

    __slots__ = ('_size', '_k', '_cols', 'n')

    def __init__(self, size: int, n: int):
        self._size = size
        self._k = 0
        self.n = n
        self._cols = {
            't': np.empty(size),
            'x': np.empty((size, n)),
            'u': np.empty(size),
            'u_nom': np.empty(size),
            'safe_bound': np.empty(size),
            'h': np.empty((size, n)),
            'override': np.zeros(size, dtype=bool),
            'mu_clipped': np.zeros(size, dtype=bool),
        }

    def append(self, t: float, x, u: float, u_nom: float, safe_bound: float, h, override: bool,
               mu_clipped: bool) -> None:
        k, c = self._k, self._cols
        c['t'][k] = t
        c['x'][k] = x
        c['u'][k] = u
        c['u_nom'][k] = u_nom
        c['safe_bound'][k] = safe_bound
        c['h'][k] = h
        c['override'][k] = override
        c['mu_clipped'][k] = mu_clipped
        self._k = k + 1

    def finish(self, **meta) -> Trajectory:
        cols = {name: arr[:self._k] for name, arr in self._cols.items()}
        for arr in cols.values():
            arr.setflags(write=False)
        return Trajectory(**cols, **meta)


def columns_of(samples: List[Sample]) -> dict:
    """Stack rows back into columns (used when building trajectories by hand)."""
    return {
        't': np.array([s.t for s in samples]),
        'x': np.array([s.x for s in samples], dtype=float),
        'u': np.array([s.u for s in samples]),
        'u_nom': np.array([s.u_nom for s in samples]),
        'safe_bound': np.array([s.safe_bound for s in samples]),
        'h': np.array([s.h for s in samples], dtype=float),
        'override': np.array([s.override for s in samples], dtype=bool),
        'mu_clipped': np.array([s.mu_clipped for s in samples], dtype=bool),
    }
