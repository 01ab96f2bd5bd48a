#!/usr/bin/env python3
"""Time the numpy and numba kernel backends on a medium-size state.

Usage:  python benchmarks/bench_backends.py [--nx 24 --np 16 --nmu 8 --reps 20]

The first numba call includes JIT compilation (cached on disk afterwards);
it is excluded from the timings via a warmup call.
"""

import argparse
import time

import numpy as np

from bpdg.band import BandModel
from bpdg.collision import PhononParams
from bpdg.kernels import numba_backend, numpy_backend
from bpdg.mesh import build_uniform
from bpdg.poisson import zero_potential
from bpdg.tables import CollisionTables, DGTables


def build_state(nx, np_, nmu, degree):
    mesh = build_uniform(1.0, 3.0, nx, np_, nmu)
    band = BandModel("parabolic", 1.0)
    tables = DGTables(mesh, band, degree)
    ph = PhononParams.with_detailed_balance(0.3, 0.5, 0.3)
    ct = CollisionTables(tables, ph)
    rng = np.random.default_rng(0)
    nb1 = degree + 1
    C = np.abs(rng.standard_normal(mesh.shape() + (nb1,) * 3))
    EL = zero_potential(mesh).efield_nodes(tables.xl) + 0.5
    return mesh, tables, ct, C, EL


def transport_args(tables, C, EL):
    t = tables
    fin = np.exp(-t.pL ** 2)
    return (C, EL, 1, fin, fin, 1.0,
            t.dx, t.dp, t.dmu,
            t.BG, t.dBG, t.BL, t.B0, t.B1, t.wg, t.wl,
            t.p2G, t.p2L, t.pL, t.velL, t.muL, t.om2G,
            t.mu_plus, t.mu_minus, t.p2_edges, t.om2_edges)


def timeit(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nx", type=int, default=24)
    ap.add_argument("--np", type=int, dest="np_", default=16)
    ap.add_argument("--nmu", type=int, default=8)
    ap.add_argument("--degree", type=int, default=1)
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    mesh, tables, ct, C, EL = build_state(args.nx, args.np_, args.nmu, args.degree)
    targs = transport_args(tables, C, EL)
    cargs = (C, tables.dmu, tables.BG, ct.gain_coef, ct.gain_cell,
             ct.gain_basis, ct.nuG)

    cases = {
        "transport_rows": (lambda b: b.transport_rows(*targs)),
        "collision_values": (lambda b: b.collision_values(*cargs)),
        "node_minima": (lambda b: b.node_minima(C, tables.BL, tables.BG)),
    }
    qvals, _ = numpy_backend.collision_values(*cargs)
    cases["collision_rows"] = (lambda b: b.collision_rows(
        qvals, tables.dx, tables.dp, tables.dmu, tables.wg, tables.p2G, tables.BG))

    print(f"grid {args.nx} x {args.np_} x {args.nmu}, degree {args.degree}, "
          f"best of {args.reps} reps")
    print(f"{'kernel':<18} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name, call in cases.items():
        call(numba_backend)  # warmup / JIT
        t_np = timeit(lambda: call(numpy_backend), args.reps) * 1e3
        t_nb = timeit(lambda: call(numba_backend), args.reps) * 1e3
        print(f"{name:<18} {t_np:>12.3f} {t_nb:>12.3f} {t_np / t_nb:>8.2f}x")

    # consistency spot check
    r_np, b_np = numpy_backend.transport_rows(*targs)
    r_nb, b_nb = numba_backend.transport_rows(*targs)
    err = np.max(np.abs(r_np - r_nb)) / (np.max(np.abs(r_np)) + 1e-300)
    print(f"\nbackend agreement (transport rows): rel diff {err:.2e}")


if __name__ == "__main__":
    main()
