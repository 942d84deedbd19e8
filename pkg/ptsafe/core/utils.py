import functools
import collections.abc
from logging import getLogger
from time import time_ns

import orjson

from typing import (
    Any,
    Callable,
    Dict,
    Tuple,
)

log = getLogger(__name__)


class SequenceProxy(collections.abc.Sequence):
    """Read-only proxy of a Sequence."""
    def __init__(self, proxied):
        self.__proxied = proxied

    def __getitem__(self, idx):
        return self.__proxied[idx]

    def __len__(self):
        return len(self.__proxied)

    def __contains__(self, item):
        return item in self.__proxied

    def __iter__(self):
        return iter(self.__proxied)

    def __reversed__(self):
        return reversed(self.__proxied)

    def index(self, value, *args, **kwargs):
        return self.__proxied.index(value, *args, **kwargs)

    def count(self, value):
        return self.__proxied.count(value)


def flatten_error_dict(d: Dict[str, Any], key: str = '') -> Dict[str, str]:
    """Flatten a nested error mapping into ``{key path: message}``.

    Sub-keys of the form ``[i]`` are appended without a dot, so
    ``{'x0': {'[0]': 'bad'}}`` becomes ``{'x0[0]': 'bad'}``.
    """
    items = []
    for k, v in d.items():
        k = str(k)
        if not key:
            new_key = k
        elif k.startswith('['):
            new_key = key + k
        else:
            new_key = key + '.' + k
        if isinstance(v, dict):
            items.extend(flatten_error_dict(v, new_key).items())
        elif isinstance(v, (list, tuple)):
            items.append((new_key, '; '.join(str(m) for m in v)))
        else:
            items.append((new_key, str(v)))
    return dict(items)


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(value))


def to_json(obj: Any) -> bytes:
    return orjson.dumps(obj, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY)


def timefunc(f: Callable) -> Callable[..., Tuple[Any, int]]:
    """Wrap ``f`` so that it returns ``(result, elapsed_ns)`` and logs the duration."""
    @functools.wraps(f)
    def f_timer(*args, **kwargs):
        start = time_ns()
        result = f(*args, **kwargs)
        elapsed = time_ns() - start
        log.debug('%s took %d ns', f.__name__, elapsed)
        return result, elapsed
    return f_timer
