"""Convex-split CFL controller and the average-preserving slope limiter.

One forward-Euler step of the cell average splits as

    avg_new = alpha * (avg + transport_increment / alpha)
            + (1 - alpha) * (avg + collision_increment / (1 - alpha))

and each bracket stays nonnegative under its own time-step bound provided
the field is nonnegative on the positivity node set.  The transport bracket
is further split across the three advection directions with convex weights
(s1, s2, s3); balancing the Lobatto endpoint weight against the worst-case
upwind flux gives one bound per direction:

    dt <= alpha * s1 * wN * dx    / (max vel * max |mu_face|)
    dt <= alpha * s2 * wN * dp    / (q max |E| * max |mu_face|)
    dt <= alpha * s3 * wN * dmu * p_min_node / (q max |E| * max (1 - mu_face^2))

each minimized over cells.  In the first p-cell the third bound uses the
smallest strictly positive Lobatto node (the node at p = 0 carries zero
geometric weight, so it imposes no constraint and the textbook denominator
p_{k-} = 0 would spuriously lock dt at zero).  The collision bound scans
the assembled source at the volume nodes:  dt <= (1 - alpha) * min f/|Q|
over nodes with Q < 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import band as band_mod
from . import kernels
from .errors import ConfigError, PositivityError, StallError
from .field import averages_of_coeffs

ALPHA_MAX = 1.0 - 1e-6
ALPHA_MIN = 1e-6


@dataclass
class StepControl:
    alpha: float
    s: tuple
    dt_x: float
    dt_p: float
    dt_mu: float
    dt_collision: float
    dt_accepted: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must lie strictly inside (0, 1)")
        if any(sl < 0.0 for sl in self.s) or abs(sum(self.s) - 1.0) > 1e-12:
            raise ConfigError("direction weights must be a convex combination")
        bounds = [self.dt_x, self.dt_p, self.dt_mu, self.dt_collision]
        if self.dt_accepted > min(bounds) * (1.0 + 1e-12):
            raise ConfigError("accepted dt exceeds a positivity bound")


def transport_cfl_raw(tables, potential, rule=None, charge=1.0):
    """Per-direction bound coefficients B_l with alpha = s_l = 1.

    The full bound for direction l is alpha * s_l * B_l.
    """
    t = tables
    rule = rule or t.lobatto_rule
    wn = rule.endpoint_weight
    mesh = t.mesh

    pnodes = mesh.p_edges[:-1, None] + mesh.dp[:, None] * rule.nodes[None, :]
    velmax = float(band_mod.velocity(t.band, pnodes).max())
    mu_absmax = float(t.mu_absmax.max())
    b_x = wn * float(mesh.dx.min()) / (velmax * mu_absmax)

    EL = potential.efield_nodes(rule.nodes)
    emax = charge * float(np.abs(EL).max())
    if emax == 0.0:
        return b_x, math.inf, math.inf

    b_p = wn * float(mesh.dp.min()) / (emax * mu_absmax)

    pstar = mesh.p_edges[:-1].copy()
    positive_nodes = rule.nodes[rule.nodes > 0.0]
    pstar[0] = mesh.dp[0] * float(positive_nodes.min())
    dmu_fac = float((mesh.dmu / t.om2max_face).min())
    b_mu = wn * float(pstar.min()) * dmu_fac / emax
    return b_x, b_p, b_mu


def transport_cfl(tables, potential, rule, alpha, s, charge=1.0):
    """The three directional bounds alpha * s_l * B_l for a given Lobatto rule."""
    if not (0.0 < alpha < 1.0):
        raise ConfigError("alpha must lie strictly inside (0, 1)")
    s = tuple(float(v) for v in s)
    if len(s) != 3 or any(v < 0.0 for v in s) or abs(sum(s) - 1.0) > 1e-12:
        raise ConfigError("s must be three nonnegative weights summing to 1")
    raw = transport_cfl_raw(tables, potential, rule, charge)
    out = []
    for sl, bl in zip(s, raw):
        if sl == 0.0:
            if math.isfinite(bl):
                raise ConfigError("zero direction weight with active advection")
            out.append(math.inf)
        else:
            out.append(alpha * sl * bl)
    return tuple(out)


def collision_cfl_raw(fvals, qvals):
    """min over nodes with Q < 0 of f / |Q| (alpha factor not applied)."""
    neg = qvals < 0.0
    if not np.any(neg):
        return math.inf
    ratios = np.where(neg, np.maximum(fvals, 0.0) / np.where(neg, -qvals, 1.0), math.inf)
    flat = int(np.argmin(ratios))
    idx = np.unravel_index(flat, ratios.shape)
    bound = float(ratios[flat if ratios.ndim == 1 else idx])
    if bound == 0.0:
        raise StallError(
            f"collision bound collapsed: f = 0 with Q < 0 in cell {idx[:3]}")
    return bound


def collision_cfl(fvals, qvals, alpha):
    """(1 - alpha) * min over nodes with Q < 0 of f / |Q|; +inf if Q >= 0."""
    if not (0.0 < alpha < 1.0):
        raise ConfigError("alpha must lie strictly inside (0, 1)")
    return (1.0 - alpha) * collision_cfl_raw(fvals, qvals)


def choose_split(raw_bounds, collision_bound, safety=0.9):
    """Equalize the split so the overall dt bound is as large as possible.

    With transport coefficients B_l the transport bound is alpha * B* where
    B* = (sum 1/B_l)^-1 at s_l proportional to 1/B_l; balancing against the
    collision bound (1 - alpha) * B_c gives alpha = B_c / (B* + B_c).
    Infinite coefficients drop out (their direction gets weight 0).
    """
    raw = [float(b) for b in raw_bounds]
    if any(b <= 0.0 for b in raw) or collision_bound <= 0.0:
        raise StallError("a positivity bound is zero; cannot advance")
    inv = [0.0 if math.isinf(b) else 1.0 / b for b in raw]
    inv_sum = sum(inv)
    if inv_sum == 0.0:
        bstar = math.inf
        s = (1.0, 0.0, 0.0)  # no transport constraint at all; weights unused
    else:
        bstar = 1.0 / inv_sum
        s = tuple(iv / inv_sum for iv in inv)
    bc = float(collision_bound)
    if math.isinf(bc) and math.isinf(bstar):
        alpha = 0.5
        dt_raw = math.inf
    elif math.isinf(bc):
        alpha = ALPHA_MAX
        dt_raw = alpha * bstar
    elif math.isinf(bstar):
        alpha = ALPHA_MIN
        dt_raw = (1.0 - alpha) * bc
    else:
        alpha = bc / (bstar + bc)
        alpha = min(max(alpha, ALPHA_MIN), ALPHA_MAX)
        dt_raw = min(alpha * bstar, (1.0 - alpha) * bc)
    dts = [alpha * sl * bl if sl > 0.0 else math.inf for sl, bl in zip(s, raw)]
    return StepControl(
        alpha=alpha, s=s,
        dt_x=dts[0], dt_p=dts[1], dt_mu=dts[2],
        dt_collision=(1.0 - alpha) * bc,
        dt_accepted=safety * dt_raw,
    )


@dataclass
class LimiterReport:
    limited_cells: int
    min_node_before: float
    min_node_after: float
    min_average: float


def apply_limiter(field, tables, avg_tol=1e-12):
    """Zhang-Shu style scaling toward the cell average; mutates the field.

    Requires all p^2-weighted cell averages >= -avg_tol (the scheme's
    positivity guarantee); scales the deviation from the average so the
    minimum over the positivity node set becomes nonnegative.
    """
    C = field.coeffs
    avgs = averages_of_coeffs(C, tables)
    amin = float(avgs.min())
    if amin < -avg_tol:
        idx = np.unravel_index(int(np.argmin(avgs)), avgs.shape)
        raise PositivityError(
            f"cell average {amin:.3e} < 0 in cell {idx}; positivity guarantee violated")
    minima = kernels.node_minima(C, tables.BL, tables.BG)
    min_before = float(minima.min())
    mask = minima < 0.0
    count = int(mask.sum())
    if count:
        orig = C[mask].copy()
        av = avgs[mask]
        mn = minima[mask]
        theta = np.clip(np.maximum(av, 0.0) / (av - mn), 0.0, 1.0)
        for _ in range(4):
            C[mask] = theta[:, None, None, None] * orig
            C[mask, 0, 0, 0] += (1.0 - theta) * av
            minima = kernels.node_minima(C, tables.BL, tables.BG)
            bad = minima[mask] < 0.0
            if not np.any(bad):
                break
            # shave one ulp-scale factor off theta where roundoff undershot;
            # the average is preserved for any theta, so this is free
            theta = np.where(bad, theta * (1.0 - 4.0e-16), theta)
    return LimiterReport(
        limited_cells=count,
        min_node_before=min_before,
        min_node_after=float(minima.min()),
        min_average=amin,
    )
