"""
Truncated derivative jets.

A jet carries a quantity together with its total time derivatives,
``coeffs[k] = d^k/dt^k q``. Products follow the Leibniz rule and
differentiation drops the leading coefficient, so the backstepping recursion
never needs symbolic differentiation.
"""
import math
from dataclassy import dataclass

from typing import (
    Sequence,
    Tuple,
    Union,
)

from .core.errors import DomainError, InvalidArgument, JetDepthError
from .kernel import rising_factorial

Coeffs = Tuple[float, ...]


def leibniz(f: Coeffs, g: Coeffs) -> Coeffs:
    """Derivatives of ``f * g`` up to the shorter of the two orders."""
    order = min(len(f), len(g))
    return tuple(
        sum(math.comb(j, i) * f[i] * g[j - i] for i in range(j + 1))
        for j in range(order)
    )


def mu_jet_coeffs(m: int, t_rel: float, T: float, order: int, mu_max: float = math.inf) -> Tuple[Coeffs, bool]:
    """``(coeffs, clipped)`` of ``mu_m`` to ``order``.

    A clipped gain is treated as locally constant: value ``mu_max``, all
    derivatives zero.
    """
    if not T > 0:
        raise InvalidArgument(f'horizon length must be positive, got T={T!r}')
    if t_rel < 0:
        raise DomainError(f'jet of mu needs t_rel >= 0, got {t_rel!r}')
    if order < 0:
        raise InvalidArgument(f'order must be >= 0, got {order!r}')
    if t_rel < T:
        inv = T / (T - t_rel)
        base = inv ** m
        if base <= mu_max:
            return tuple(
                rising_factorial(m, k) / T ** k * inv ** (m + k) for k in range(order + 1)
            ), False
    return (float(mu_max),) + (0.0,) * order, True


@dataclass(slots=True, frozen=True)
class DerivativeJet:
    coeffs: Coeffs

    def __post_init__(self):
        if not isinstance(self.coeffs, tuple) or not self.coeffs:
            raise InvalidArgument('a jet needs at least its value (use DerivativeJet.create_jet)')

    @classmethod
    def create_jet(cls, coeffs: Sequence[float]) -> 'DerivativeJet':
        return cls(coeffs=tuple(float(v) for v in coeffs))

    @classmethod
    def constant(cls, value: float, order: int = 0) -> 'DerivativeJet':
        return cls(coeffs=(float(value),) + (0.0,) * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def derivative(self) -> 'DerivativeJet':
        if self.order < 1:
            raise JetDepthError('cannot differentiate a zeroth-order jet')
        return DerivativeJet(coeffs=self.coeffs[1:])

    def truncate(self, order: int) -> 'DerivativeJet':
        if not 0 <= order <= self.order:
            raise JetDepthError(f'cannot truncate a jet of order {self.order} to {order}')
        return DerivativeJet(coeffs=self.coeffs[:order + 1])

    def __add__(self, other: Union['DerivativeJet', float]) -> 'DerivativeJet':
        if isinstance(other, DerivativeJet):
            return DerivativeJet(coeffs=tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))
        return DerivativeJet(coeffs=(self.coeffs[0] + other,) + self.coeffs[1:])

    __radd__ = __add__

    def __neg__(self) -> 'DerivativeJet':
        return DerivativeJet(coeffs=tuple(-a for a in self.coeffs))

    def __sub__(self, other: Union['DerivativeJet', float]) -> 'DerivativeJet':
        return self + (-other)

    def __rsub__(self, other: float) -> 'DerivativeJet':
        return (-self) + other

    def __mul__(self, other: Union['DerivativeJet', float]) -> 'DerivativeJet':
        if isinstance(other, DerivativeJet):
            return DerivativeJet(coeffs=leibniz(self.coeffs, other.coeffs))
        return DerivativeJet(coeffs=tuple(other * a for a in self.coeffs))

    __rmul__ = __mul__

    def __repr__(self):
        return f'<DerivativeJet order={self.order} coeffs={self.coeffs}>'


def jet_lift_state(x: Sequence[float], index: int, order: int) -> DerivativeJet:
    """Jet of ``x_index`` (1-based) along the chain ``x_i' = x_{i+1}``.

    Only derivatives that are states themselves are available; asking for
    ``x_n'`` would need the input.
    """
    n = len(x)
    if not 1 <= index <= n:
        raise InvalidArgument(f'index must be in 1..{n}, got {index!r}')
    if order < 0:
        raise InvalidArgument(f'order must be >= 0, got {order!r}')
    if index + order > n:
        raise JetDepthError(f'x_{index} to order {order} needs derivatives beyond x_{n}, which depend on u')
    return DerivativeJet(coeffs=tuple(float(v) for v in x[index - 1:index + order]))


def jet_of_mu(m: int, t_rel: float, T: float, order: int, mu_max: float = math.inf) -> DerivativeJet:
    coeffs, _ = mu_jet_coeffs(m, t_rel, T, order, mu_max)
    return DerivativeJet(coeffs=coeffs)
