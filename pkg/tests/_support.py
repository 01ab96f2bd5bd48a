"""Shared builders for the positivity and acceptance tests."""

import numpy as np

from bpdg.band import BandModel
from bpdg.collision import PhononParams, collision_node_values
from bpdg.field import Field, averages_of_coeffs
from bpdg.mesh import build_uniform
from bpdg.poisson import PotentialState
from bpdg.positivity import apply_limiter, choose_split, collision_cfl_raw, transport_cfl_raw
from bpdg.tables import CollisionTables, DGTables
from bpdg.transport import diode_bc, periodic_bc, transport_rows_raw


def linear_e_state(mesh, e0, e1):
    """Synthetic potential with E(x) = e0 + e1 x and V its exact antiderivative."""
    nx = mesh.nx
    emon = np.zeros((nx, 2))
    emon[:, 0] = e0 + e1 * mesh.x_edges[:-1]
    emon[:, 1] = e1 * mesh.dx
    # V(x) = -(e0 x + e1 x^2 / 2), per cell in local coordinates
    vmon = np.zeros((nx, 3))
    x0 = mesh.x_edges[:-1]
    h = mesh.dx
    vmon[:, 0] = -(e0 * x0 + 0.5 * e1 * x0 ** 2)
    vmon[:, 1] = -(e0 * h + e1 * x0 * h)
    vmon[:, 2] = -0.5 * e1 * h ** 2
    return PotentialState(mesh.x_edges, vmon, emon, 0.0)


def random_nonneg_field(mesh, tables, rng, slope_scale=0.6):
    """Random degree-1 field with positive averages and nonnegative node values."""
    nb1 = tables.nb1
    C = slope_scale * rng.standard_normal(mesh.shape() + (nb1,) * 3)
    C[:, :, :, 0, 0, 0] = 0.0
    f = Field(mesh, tables.degree, C)
    avgs = averages_of_coeffs(C, tables)
    C[:, :, :, 0, 0, 0] = rng.uniform(0.2, 1.0, mesh.shape()) + np.maximum(-avgs, 0.0)
    apply_limiter(f, tables)
    return f


def euler_positivity_trial(rng, with_collisions, bc_mode="periodic", safety=1.0,
                           nx=4, np_=5, nmu=4):
    """One randomized Euler step at the accepted dt; returns min new average."""
    mesh = build_uniform(1.0, 1.2, nx, np_, nmu)
    band = BandModel("parabolic", float(rng.uniform(0.5, 2.0)))
    tables = DGTables(mesh, band, 1)
    f = random_nonneg_field(mesh, tables, rng)
    pot = linear_e_state(mesh, float(rng.uniform(-2.0, 2.0)), float(rng.uniform(-2.0, 2.0)))
    bc = periodic_bc() if bc_mode == "periodic" else diode_bc(tables, 0.5, 0.5)

    raw = transport_cfl_raw(tables, pot)
    if with_collisions:
        ph = PhononParams(float(rng.uniform(0.1, 0.5)), float(rng.uniform(0.0, 1.0)),
                          float(rng.uniform(0.2, 2.0)), float(rng.uniform(0.0, 1.0)))
        ct = CollisionTables(tables, ph)
        qvals, fvals = collision_node_values(f, tables, ct)
        bc_raw = collision_cfl_raw(fvals, qvals)
    else:
        bc_raw = np.inf
    control = choose_split(raw, bc_raw, safety=safety)
    dt = control.dt_accepted
    if not np.isfinite(dt):
        dt = 0.01

    rows, _ = transport_rows_raw(f, pot, tables, bc)
    if with_collisions:
        from bpdg import kernels
        t = tables
        crows = kernels.collision_rows(qvals, t.dx, t.dp, t.dmu, t.wg, t.p2G, t.BG)
        rows = rows + crows
    rate = tables.rate_from_rows(rows)
    new_avgs = averages_of_coeffs(f.coeffs + dt * rate, tables)
    return float(new_avgs.min()), control
