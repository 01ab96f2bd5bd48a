"""Gauss and Gauss-Lobatto rules on [0, 1] and the per-cell Legendre basis.

All rules are tabulated analytically (orders up to 5) so nodes and weights
are exact to machine precision; weights sum to 1 on the unit interval.
The modal basis is the shifted Legendre family ``P_a(2t - 1)`` with the
standard normalization ``P_a(1) = 1``, so the reference mass matrix is
``diag(1/(2a+1))``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

GAUSS = "gauss"
LOBATTO = "lobatto"

MAX_ORDER = 5
MAX_DEGREE = 3

_S3 = np.sqrt(3.0)
_S5 = np.sqrt(5.0)
_S30 = np.sqrt(30.0)
_S70 = np.sqrt(70.0)

# Nodes/weights on [-1, 1]; mapped to [0, 1] below.
_GAUSS_11 = {
    1: ([0.0], [2.0]),
    2: ([-1.0 / _S3, 1.0 / _S3], [1.0, 1.0]),
    3: ([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)],
        [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]),
    4: ([-np.sqrt((3.0 + 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
         -np.sqrt((3.0 - 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
         np.sqrt((3.0 - 2.0 * np.sqrt(6.0 / 5.0)) / 7.0),
         np.sqrt((3.0 + 2.0 * np.sqrt(6.0 / 5.0)) / 7.0)],
        [(18.0 - _S30) / 36.0, (18.0 + _S30) / 36.0,
         (18.0 + _S30) / 36.0, (18.0 - _S30) / 36.0]),
    5: ([-np.sqrt(5.0 + 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
         -np.sqrt(5.0 - 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
         0.0,
         np.sqrt(5.0 - 2.0 * np.sqrt(10.0 / 7.0)) / 3.0,
         np.sqrt(5.0 + 2.0 * np.sqrt(10.0 / 7.0)) / 3.0],
        [(322.0 - 13.0 * _S70) / 900.0, (322.0 + 13.0 * _S70) / 900.0,
         128.0 / 225.0,
         (322.0 + 13.0 * _S70) / 900.0, (322.0 - 13.0 * _S70) / 900.0]),
}

_LOBATTO_11 = {
    2: ([-1.0, 1.0], [1.0, 1.0]),
    3: ([-1.0, 0.0, 1.0], [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]),
    4: ([-1.0, -1.0 / _S5, 1.0 / _S5, 1.0],
        [1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0]),
    5: ([-1.0, -np.sqrt(3.0 / 7.0), 0.0, np.sqrt(3.0 / 7.0), 1.0],
        [1.0 / 10.0, 49.0 / 90.0, 32.0 / 45.0, 49.0 / 90.0, 1.0 / 10.0]),
}


@dataclass(frozen=True)
class QuadRule:
    """A 1D quadrature rule on the reference interval [0, 1]."""

    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def endpoint_weight(self):
        """Weight attached to the interval endpoints (Lobatto rules only)."""
        return float(self.weights[-1])

    @property
    def exactness_degree(self):
        if self.kind == GAUSS:
            return 2 * self.order - 1
        return 2 * self.order - 3


def quad_rule(kind, order):
    """Return the tabulated rule of the given kind and node count."""
    kind = kind.lower()
    if kind == GAUSS:
        table = _GAUSS_11
        if order < 1:
            raise ConfigError("gauss rule needs order >= 1")
    elif kind == LOBATTO:
        table = _LOBATTO_11
        if order < 2:
            raise ConfigError("lobatto rule needs order >= 2")
    else:
        raise ConfigError(f"unknown quadrature kind {kind!r}")
    if order not in table:
        raise ConfigError(f"{kind} rule of order {order} not tabulated (max {MAX_ORDER})")
    x, w = table[order]
    nodes = (1.0 + np.asarray(x, dtype=np.float64)) / 2.0
    weights = np.asarray(w, dtype=np.float64) / 2.0
    return QuadRule(kind, order, nodes, weights)


def legendre_vals(degree, t):
    """Shifted Legendre values P_a(2t-1) for a = 0..degree at points t.

    Returns an array of shape (degree+1, len(t)).
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    u = 2.0 * t - 1.0
    out = np.empty((degree + 1, t.size))
    out[0] = 1.0
    if degree >= 1:
        out[1] = u
    if degree >= 2:
        out[2] = 1.5 * u * u - 0.5
    if degree >= 3:
        out[3] = 2.5 * u ** 3 - 1.5 * u
    if degree > MAX_DEGREE:
        raise ConfigError(f"basis degree {degree} not supported (max {MAX_DEGREE})")
    return out


def legendre_derivs(degree, t):
    """d/dt of the shifted Legendre basis at points t; shape (degree+1, len(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    u = 2.0 * t - 1.0
    out = np.zeros((degree + 1, t.size))
    if degree >= 1:
        out[1] = 2.0
    if degree >= 2:
        out[2] = 6.0 * u
    if degree >= 3:
        out[3] = 15.0 * u * u - 3.0
    if degree > MAX_DEGREE:
        raise ConfigError(f"basis degree {degree} not supported (max {MAX_DEGREE})")
    return out


def legendre_norms_sq(degree):
    """Reference-interval squared norms: int_0^1 P_a(2t-1)^2 dt = 1/(2a+1)."""
    return 1.0 / (2.0 * np.arange(degree + 1) + 1.0)


# Monomial expansion of the shifted basis, rows = basis index, cols = power of t.
_LEGENDRE_MONOMIAL = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [-1.0, 2.0, 0.0, 0.0],
    [1.0, -6.0, 6.0, 0.0],
    [-1.0, 12.0, -30.0, 20.0],
])


def legendre_to_monomial(coeffs):
    """Convert coefficients in the shifted Legendre basis to powers of t.

    ``coeffs`` has basis index on the last axis; the returned array has the
    monomial power on the last axis (same length).
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = coeffs.shape[-1]
    if n - 1 > MAX_DEGREE:
        raise ConfigError(f"basis degree {n - 1} not supported (max {MAX_DEGREE})")
    return coeffs @ _LEGENDRE_MONOMIAL[:n, :n]
