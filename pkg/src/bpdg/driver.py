"""Time-integration driver: step loop, diagnostics streams, snapshots."""

import math
import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import band as band_mod
from . import kernels
from .collision import collision_node_values
from .diagnostics import entropy_norm, total_mass
from .errors import StallError
from .field import Field, project, read_snapshot, write_snapshot, zeros_like_field
from .poisson import solve_for_field, write_poisson_csv, zero_potential
from .positivity import apply_limiter, choose_split, collision_cfl_raw, transport_cfl_raw
from .stepping import SSP_MASS_WEIGHTS, SSP_STAGES
from .tables import CollisionTables, DGTables
from .transport import diode_bc, periodic_bc, transport_rows_raw

DIAG_COLUMNS = ("t", "dt", "total_mass", "entropy_norm", "min_nodal_value",
                "min_cell_average", "collision_mass_residual", "limited_cells")
CONTROL_COLUMNS = ("step", "t", "alpha", "s1", "s2", "s3", "dt_x", "dt_p",
                   "dt_mu", "dt_collision", "dt_accepted", "limited_cells")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


@dataclass
class StepRecord:
    step: int
    t: float
    dt: float
    total_mass: float
    entropy: float
    min_node: float
    min_average: float
    mass_residual_rate: float
    boundary_rate: float
    limited_cells: int
    control: object


@dataclass
class RunResult:
    status: int
    steps: int
    t: float
    records: list = dc_field(default_factory=list)
    out_dir: str = "."


class Simulation:
    """Owns the discrete state and advances it one positivity-safe step at a time."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.tables = DGTables(cfg.mesh, cfg.band, cfg.degree)
        self.ctables = CollisionTables(self.tables, cfg.phonon)
        self.has_collisions = (cfg.phonon.coupling > 0.0 or cfg.phonon.elastic > 0.0)
        if cfg.bc == "diode":
            self.bc = diode_bc(self.tables,
                               density_left=float(cfg.doping.at(0.0)),
                               density_right=float(cfg.doping.at(cfg.mesh.length)))
        else:
            self.bc = periodic_bc()
        self.field = self._initial_field()
        apply_limiter(self.field, self.tables)
        self.t = 0.0
        self.steps = 0
        self._frozen = None
        if cfg.poisson_mode == "frozen":
            self._frozen = solve_for_field(self.field, cfg.doping, self.tables,
                                           cfg.permittivity, cfg.bias, cfg.charge)

    def _initial_field(self):
        cfg = self.cfg
        kind = cfg.initial["kind"]
        if kind == "uniform":
            f = zeros_like_field(cfg.mesh, cfg.degree)
            f.coeffs[:, :, :, 0, 0, 0] = cfg.initial["value"]
            return f
        if kind == "table":
            return read_snapshot(cfg.mesh, cfg.degree, cfg.initial["path"])
        # maxwellian, optionally scaled to the local doping density
        amp = cfg.initial.get("amplitude")
        band = cfg.band
        if amp is None:
            from scipy.integrate import quad
            norm, _ = quad(lambda p: np.exp(-band_mod.energy(band, p)) * p * p,
                           0.0, cfg.mesh.p_max, limit=200)
            doping = cfg.doping

            def fn(x, p, mu):
                return doping.at(x) / (4.0 * np.pi * norm) \
                    * np.exp(-band_mod.energy(band, p)) + 0.0 * mu
        else:
            def fn(x, p, mu):
                return amp * np.exp(-band_mod.energy(band, p)) + 0.0 * x * mu
        return project(cfg.mesh, cfg.degree, fn)

    def potential_for(self, field):
        cfg = self.cfg
        if cfg.poisson_mode == "off":
            return zero_potential(cfg.mesh)
        if cfg.poisson_mode == "frozen":
            return self._frozen
        return solve_for_field(field, cfg.doping, self.tables,
                               cfg.permittivity, cfg.bias, cfg.charge)

    def step_control(self):
        """Positivity bounds and the accepted dt for the current state."""
        pot = self.potential_for(self.field)
        raw = transport_cfl_raw(self.tables, pot, charge=self.cfg.charge)
        if self.has_collisions:
            qvals, fvals = collision_node_values(self.field, self.tables, self.ctables)
            bc_raw = collision_cfl_raw(fvals, qvals)
        else:
            bc_raw = math.inf
        return choose_split(raw, bc_raw, safety=self.cfg.safety)

    def _rhs_factory(self, stage_aux):
        cfg = self.cfg
        t = self.tables

        def rhs(coeffs):
            f = Field(cfg.mesh, cfg.degree, coeffs)
            pot = self.potential_for(f)
            rows, bflux = transport_rows_raw(f, pot, t, self.bc, cfg.charge)
            if self.has_collisions:
                qvals, _ = collision_node_values(f, t, self.ctables)
                crows = kernels.collision_rows(qvals, t.dx, t.dp, t.dmu, t.wg,
                                               t.p2G, t.BG)
                mass_res = float(crows[:, :, :, 0, 0, 0].sum())
                rows = rows + crows
            else:
                mass_res = 0.0
            stage_aux.append((bflux, mass_res))
            return t.rate_from_rows(rows)

        return rhs

    def advance(self, dt, control):
        """One SSP-RK step at the given dt; returns the step record."""
        cfg = self.cfg
        stage_aux = []
        limited = 0
        reports = []

        def post_stage(coeffs):
            nonlocal limited
            f = Field(cfg.mesh, cfg.degree, coeffs)
            rep = apply_limiter(f, self.tables)
            limited += rep.limited_cells
            reports.append(rep)
            return f.coeffs

        rhs = self._rhs_factory(stage_aux)
        u = self.field.coeffs
        for a, b in SSP_STAGES[cfg.rk_order]:
            u = a * self.field.coeffs + b * (u + dt * rhs(u))
            u = post_stage(u)
        self.field = Field(cfg.mesh, cfg.degree, u)
        self.t += dt
        self.steps += 1

        weights = SSP_MASS_WEIGHTS[cfg.rk_order]
        bflux_rate = sum(w * aux[0] for w, aux in zip(weights, stage_aux))
        mass_rate = sum(w * aux[1] for w, aux in zip(weights, stage_aux))
        pot = self.potential_for(self.field)
        return StepRecord(
            step=self.steps, t=self.t, dt=dt,
            total_mass=total_mass(self.field, self.tables),
            entropy=entropy_norm(self.field, pot, self.tables, cfg.charge),
            min_node=min(rep.min_node_after for rep in reports),
            min_average=min(rep.min_average for rep in reports),
            mass_residual_rate=mass_rate,
            boundary_rate=bflux_rate,
            limited_cells=limited,
            control=control,
        )


def run(cfg, out_dir="."):
    """Execute the configured run; returns a RunResult (exceptions propagate)."""
    os.makedirs(out_dir, exist_ok=True)
    sim = Simulation(cfg)
    records = []

    diag_path = os.path.join(out_dir, "diagnostics.csv")
    ctrl_path = os.path.join(out_dir, "stepcontrol.csv")

    def snapshot(tag):
        write_snapshot(sim.field, sim.tables, os.path.join(out_dir, f"snapshot_{tag:06d}.csv"))
        pot = sim.potential_for(sim.field)
        write_poisson_csv(os.path.join(out_dir, f"poisson_{tag:06d}.csv"),
                          pot, sim.field, cfg.doping, sim.tables)

    with open(diag_path, "w", newline="") as diag, \
            open(ctrl_path, "w", newline="") as ctrl:
        diag.write(",".join(DIAG_COLUMNS) + "\n")
        ctrl.write(",".join(CONTROL_COLUMNS) + "\n")
        snapshot(0)
        while sim.t < cfg.t_end and sim.steps < cfg.max_steps:
            control = sim.step_control()
            dt = min(control.dt_accepted, cfg.dt_max, cfg.t_end - sim.t)
            if not (dt > 0.0) or not math.isfinite(dt):
                raise StallError(f"time step collapsed to {dt!r} at t = {sim.t}")
            rec = sim.advance(dt, control)
            records.append(rec)
            diag.write(",".join(_fmt(v) for v in (
                rec.t, rec.dt, rec.total_mass, rec.entropy, rec.min_node,
                rec.min_average, rec.mass_residual_rate, rec.limited_cells)) + "\n")
            diag.flush()
            ctrl.write(",".join(_fmt(v) for v in (
                rec.step, rec.t, control.alpha, control.s[0], control.s[1],
                control.s[2], control.dt_x, control.dt_p, control.dt_mu,
                control.dt_collision, control.dt_accepted, rec.limited_cells)) + "\n")
            ctrl.flush()
            if cfg.snapshot_every > 0 and sim.steps % cfg.snapshot_every == 0:
                snapshot(sim.steps)
        if cfg.snapshot_every <= 0 or sim.steps % max(cfg.snapshot_every, 1) != 0:
            if sim.steps > 0:
                snapshot(sim.steps)

    return RunResult(status=0, steps=sim.steps, t=sim.t, records=records,
                     out_dir=out_dir)
