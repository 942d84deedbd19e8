from enum import Enum


class FilterKind(Enum):

    PTSF = 'ptsf'
    ESF = 'esf'
    NONE = 'none'


class NominalKind(Enum):

    TRACKING_SINE = 'tracking_sine'
    CONSTANT = 'constant'
    PD_SETPOINT = 'pd_setpoint'
    EXTERNAL = 'external'


class GainPolicyKind(Enum):

    AUTO = 'auto'
    MANUAL = 'manual'


class Suite(Enum):
    """Selectors accepted by the verification runner."""

    KERNEL = 'kernel'
    BACKSTEPPING = 'backstepping'
    ORACLES = 'oracles'
    SAFETY = 'safety'
    ALL = 'all'
