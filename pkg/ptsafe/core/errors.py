# -*- coding: utf-8 -*-
"""
# ptsafe's exception hierarchy

PTSafeException
 +-- InvalidArgument
 +-- DomainError
 +-- JetDepthError
 +-- BarrierError
      +-- InitiallyUnsafe
      +-- DegenerateBarrier
 +-- UnsupportedOrder
 +-- FilterStateError
 +-- NumericError
 +-- PreconditionError
 +-- ScenarioError
      +-- ScenarioSyntaxError
      +-- SchemaError
      +-- InvariantViolation
           +-- UnsafeInitialState       # also an InitiallyUnsafe
 +-- VerificationFailure

Every class carries the process exit code the CLI reports for it.
"""

from typing import (
    Optional,
    Sequence,
    Dict,
    Union,
)

from .utils import flatten_error_dict

__all__ = (
    'PTSafeException',
    'InvalidArgument',
    'DomainError',
    'JetDepthError',
    'BarrierError',
    'InitiallyUnsafe',
    'DegenerateBarrier',
    'UnsupportedOrder',
    'FilterStateError',
    'NumericError',
    'PreconditionError',
    'ScenarioError',
    'ScenarioSyntaxError',
    'SchemaError',
    'InvariantViolation',
    'UnsafeInitialState',
    'VerificationFailure',
    'exit_code_for',
)


class PTSafeException(Exception):
    """Base exception class for ptsafe.
       Ideally speaking, this could be caught to handle any exceptions thrown from this library."""
    exit_code = 2


class InvalidArgument(PTSafeException):
    """Exception that's thrown when an argument to a function
    is invalid some way (e.g. wrong length or out-of-range parameter).

    This could be considered the analogous of ``ValueError`` and
    ``TypeError`` except inherited from :exc:`PTSafeException`.
    """
    exit_code = 1


class DomainError(PTSafeException):
    """The blow-up calculus was evaluated outside of its domain,
    usually at or past the terminal time."""
    pass


class JetDepthError(PTSafeException):
    """A state lift asked for a derivative that depends on the input."""
    pass


class BarrierError(PTSafeException):
    """Base for failures of the backstepping barrier chain at the initial time.

    Attributes
    ------------
    stage: :class:`int`
        1-based index of the barrier that failed. ``None`` if not stage specific.
    """
    exit_code = 1

    def __init__(self, message: str, *, stage: Optional[int] = None) -> None:
        self.stage = stage
        super().__init__(message)


class InitiallyUnsafe(BarrierError):
    """The output starts on or beyond the barrier (x_1(t0) >= 0)."""
    pass


class DegenerateBarrier(BarrierError):
    """An intermediate barrier is numerically zero (or not positive) at t0."""
    pass


class UnsupportedOrder(PTSafeException):
    """The operation is only defined for a specific chain length."""
    pass


class FilterStateError(PTSafeException):
    """The post-terminal filter was called without the terminal output value."""
    pass


class NumericError(PTSafeException):
    """A control value or state became non-finite.

    Attributes
    ------------
    t: :class:`float`
        The time stamp at which the failure was detected.
    x: Sequence[:class:`float`]
        The state at that time.
    """

    def __init__(self, message: str, *, t: float, x: Sequence[float] = ()) -> None:
        self.t = t
        self.x = tuple(float(v) for v in x)
        super().__init__(f'{message} at t={t!r} with x={self.x!r}')


class PreconditionError(PTSafeException):
    pass


class ScenarioError(PTSafeException):
    """Exception that's thrown when a scenario document cannot be used.

    Attributes
    ------------
    errors: Dict[:class:`str`, :class:`str`]
        Flattened mapping of offending key path to message, e.g. ``{'x0[0]': '...'}``.
    """
    exit_code = 1

    def __init__(self, errors: Union[str, dict], *, summary: str = None) -> None:
        if isinstance(errors, dict):
            self.errors: Dict[str, str] = flatten_error_dict(errors)
        else:
            self.errors = {'': errors}

        base = summary or self.__class__.__doc__.splitlines()[0]
        helpful = '\n'.join(f'In {k}: {v}' if k else v for k, v in self.errors.items())
        super().__init__(base + '\n' + helpful if helpful else base)


class ScenarioSyntaxError(ScenarioError):
    """Scenario document is not valid JSON."""
    pass


class SchemaError(ScenarioError):
    """Scenario document does not match the scenario schema."""
    pass


class InvariantViolation(ScenarioError):
    """Scenario violates a cross-field invariant."""
    pass


class UnsafeInitialState(InvariantViolation, InitiallyUnsafe):
    """Scenario starts initially unsafe (x0[0] >= 0) with a filter enabled."""

    def __init__(self, errors: Union[str, dict], **kwargs) -> None:
        InvariantViolation.__init__(self, errors, **kwargs)
        self.stage = 1


class VerificationFailure(PTSafeException):
    """One or more verification checks failed."""
    exit_code = 3


def exit_code_for(exc: BaseException) -> int:
    return getattr(exc, 'exit_code', 2)
