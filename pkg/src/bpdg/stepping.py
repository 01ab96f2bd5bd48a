"""Strong-stability-preserving Runge-Kutta built from convex Euler stages.

Each stage has the form  u <- a * u0 + b * (u + dt * L(u)), so any property
preserved by a forward-Euler step and closed under convex combinations
(nonnegative cell averages, after limiting) carries over to the full step.
"""

from .errors import ConfigError

# (a, b) per stage with a + b = 1.
SSP_STAGES = {
    1: [(0.0, 1.0)],
    2: [(0.0, 1.0), (0.5, 0.5)],
    3: [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)],
}

# Effective weight of each stage's rate in the total update (mass bookkeeping).
SSP_MASS_WEIGHTS = {
    1: [1.0],
    2: [0.5, 0.5],
    3: [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
}


def ssp_rk_step(u0, rhs, dt, order, post_stage=None):
    """Advance u0 by one SSP-RK step of the given order (1, 2 or 3).

    ``rhs(u)`` returns du/dt; ``post_stage(u)`` (e.g. the limiter) is applied
    after every Euler stage and must preserve whatever rhs conserves.
    """
    if order not in SSP_STAGES:
        raise ConfigError(f"rk_order must be one of {sorted(SSP_STAGES)}")
    u = u0
    for a, b in SSP_STAGES[order]:
        u = a * u0 + b * (u + dt * rhs(u))
        if post_stage is not None:
            u = post_stage(u)
    return u


def euler_step(u0, rhs, dt, post_stage=None):
    """Single forward-Euler step (identical to ssp_rk_step with order 1)."""
    return ssp_rk_step(u0, rhs, dt, 1, post_stage)
