"""Energy band models: energy vs momentum magnitude and derived quantities.

Everything is nondimensional with energies in thermal units, so the built-in
bands are fixed by at most two parameters.  Both satisfy the monotonicity the
transport scheme relies on (d(energy)/dp > 0 away from the band minimum), and
both have closed-form inverses.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

PARABOLIC = "parabolic"
KANE = "kane"


@dataclass(frozen=True)
class BandModel:
    """Energy band in the momentum magnitude.

    kind        "parabolic" or "kane"
    m_eff       effective mass (nondimensional), > 0
    kane_alpha  nonparabolicity (inverse energy); only used by the Kane band
    """

    kind: str
    m_eff: float = 1.0
    kane_alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in (PARABOLIC, KANE):
            raise ConfigError(f"unknown band kind {self.kind!r}")
        if self.m_eff <= 0.0:
            raise ConfigError("band m_eff must be positive")
        if self.kind == KANE and self.kane_alpha <= 0.0:
            raise ConfigError("kane band needs kane_alpha > 0")


def _check_nonneg(x, name):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise DomainError(f"{name} must be nonnegative")
    return x


def energy(model, p):
    """Band energy at momentum magnitude p (p >= 0)."""
    p = _check_nonneg(p, "momentum")
    u = p * p / (2.0 * model.m_eff)
    if model.kind == PARABOLIC:
        return u
    # Positive root of e*(1 + a*e) = u, written to avoid cancellation at small u.
    a = model.kane_alpha
    return 2.0 * u / (1.0 + np.sqrt(1.0 + 4.0 * a * u))


def velocity(model, p):
    """d(energy)/dp at momentum magnitude p (the group speed)."""
    p = _check_nonneg(p, "momentum")
    if model.kind == PARABOLIC:
        return p / model.m_eff
    e = energy(model, p)
    return p / (model.m_eff * (1.0 + 2.0 * model.kane_alpha * e))


def momentum_of_energy(model, e):
    """Inverse of :func:`energy` (e >= 0)."""
    e = _check_nonneg(e, "energy")
    if model.kind == PARABOLIC:
        return np.sqrt(2.0 * model.m_eff * e)
    return np.sqrt(2.0 * model.m_eff * e * (1.0 + model.kane_alpha * e))


def dos_factor(model, e):
    """Density-of-states factor p(e)^2 * dp/de, with the analytic 0 limit at e = 0."""
    e = _check_nonneg(e, "energy")
    p = momentum_of_energy(model, e)
    # p^2 / velocity(p) with the removable singularity at the band minimum:
    # p^2 * dp/de = m * p for parabolic, m * p * (1 + 2*a*e) for Kane.
    if model.kind == PARABOLIC:
        return model.m_eff * p
    return model.m_eff * p * (1.0 + 2.0 * model.kane_alpha * e)
