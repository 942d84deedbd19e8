import math


class FilterDefaults:
    """Library-wide defaults. Scenario files and CLI flags override them per run;
    nothing is read from the environment."""

    __slots__ = (
        'steps_per_horizon',
        'margin',
        'ramp_m',
        'ramp_T',
        'mu_max',
        'terminal_eps',
        't_end_pad',
        'tracking_k1',
        'tracking_k2',
        'tracking_A',
        'tracking_b',
        'degenerate_threshold',
        'rk4_stability_limit',
        'seed',
    )

    def __init__(self, **options):
        self.steps_per_horizon = 4000
        self.margin = 0.1
        self.ramp_m = 2
        self.ramp_T = 0.5
        self.mu_max = 1000.0
        self.terminal_eps = 1e-3
        self.t_end_pad = 1.0
        self.tracking_k1 = 4.0
        self.tracking_k2 = 4.0
        self.tracking_A = 1.0
        self.tracking_b = 0.8
        self.degenerate_threshold = 1e-12
        # largest |z| on the negative real axis inside RK4's stability region
        self.rk4_stability_limit = 2.785
        self.seed = 20240229
        for k, v in options.items():
            self.__setattr__(k, v)

    def default_dt(self, T: float) -> float:
        return T / self.steps_per_horizon

    def default_t_end(self, t0: float, T: float, ramp_T: float = None) -> float:
        return t0 + T + (self.ramp_T if ramp_T is None else ramp_T) + self.t_end_pad

    def tracking_omega(self, T: float) -> float:
        return 2 * math.pi / T

    def __repr__(self):
        return f'<FilterDefaults margin={self.margin} mu_max={self.mu_max} ramp=({self.ramp_m}, {self.ramp_T})>'


DEFAULTS = FilterDefaults()
