"""
Blow-up calculus on a finite horizon.

``nu`` decays linearly from one to zero over the horizon and ``mu_m = nu^-m``
diverges at its end. Every function here is pure and takes times relative to
the initialization instant (``t_rel = t - t0``).
"""
import math
from logging import getLogger

from .core.errors import DomainError, InvalidArgument

log = getLogger(__name__)


def _check_horizon(T: float) -> None:
    if not (T > 0 and math.isfinite(T)):
        raise InvalidArgument(f'horizon length must be positive and finite, got T={T!r}')


def _check_order(m: int) -> None:
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise InvalidArgument(f'exponent must be an integer >= 1, got m={m!r}')


def nu(t_rel: float, T: float) -> float:
    _check_horizon(T)
    if not 0 <= t_rel <= T:
        raise DomainError(f'nu is defined on [0, T]; got t_rel={t_rel!r}, T={T!r}')
    return (T - t_rel) / T


def mu(m: int, t_rel: float, T: float) -> float:
    """``1 / nu(t_rel, T)**m``. Raises :exc:`DomainError` at or past the terminal time."""
    _check_order(m)
    _check_horizon(T)
    if not 0 <= t_rel < T:
        raise DomainError(f'mu is defined on [0, T); got t_rel={t_rel!r}, T={T!r}. Use mu_clipped near T')
    return 1.0 / ((T - t_rel) / T) ** m


def mu_clipped(m: int, t_rel: float, T: float, mu_max: float) -> float:
    """``min(mu(m, t_rel, T), mu_max)``, extended by ``mu_max`` for ``t_rel >= T``."""
    _check_order(m)
    _check_horizon(T)
    if mu_max < 1:
        raise InvalidArgument(f'mu_max must be >= 1, got {mu_max!r}')
    if t_rel < 0:
        raise DomainError(f'mu_clipped needs t_rel >= 0, got {t_rel!r}')
    if t_rel >= T:
        return float(mu_max)
    return min(1.0 / ((T - t_rel) / T) ** m, float(mu_max))


def rising_factorial(m: int, k: int) -> int:
    """``m (m+1) ... (m+k-1)``; the empty product for ``k = 0``."""
    _check_order(m)
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise InvalidArgument(f'k must be a non-negative integer, got {k!r}')
    return math.prod(range(m, m + k))


def mu_derivative(m: int, i: int, t_rel: float, T: float) -> float:
    """i-th time derivative of ``mu_m``: ``rising_factorial(m, i) / T**i * mu_{m+i}``."""
    return rising_factorial(m, i) / T ** i * mu(m + i, t_rel, T)


def check_mu_commutativity(m: int, t_mid: float, t: float, T: float, tol: float) -> bool:
    """Check ``mu_m(t, T) == mu_m(t_mid, T) * mu_m(t - t_mid, T - t_mid)`` to relative ``tol``.

    Restarting the horizon at ``t_mid`` with the remaining length composes
    multiplicatively with the original gain.
    """
    if not 0 <= t_mid <= t < T:
        raise DomainError(f'need 0 <= t_mid <= t < T; got t_mid={t_mid!r}, t={t!r}, T={T!r}')
    whole = mu(m, t, T)
    split = mu(m, t_mid, T) * mu(m, t - t_mid, T - t_mid)
    return abs(whole - split) <= tol * whole


def xi(c: float, t_rel: float, T: float) -> float:
    """Soft-landing envelope ``exp(-c T (mu_1 - 1))``."""
    if not c > 0:
        raise InvalidArgument(f'c must be positive, got {c!r}')
    return math.exp(-c * T * (mu(1, t_rel, T) - 1.0))
