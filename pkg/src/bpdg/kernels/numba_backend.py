"""Numba loop implementation of the hot assembly kernels.

Same signatures and same results (to summation roundoff) as
:mod:`bpdg.kernels.numpy_backend`; the cell loops of the heavy kernels run
under ``prange`` with strictly cell-local writes, so results are identical
for any thread count.  Reductions (the boundary mass rate) are accumulated
serially in a fixed order.
"""

import numba as nb
import numpy as np
from numba import njit, prange

# workqueue is always available and plays well with cell-local parallel writes
nb.config.THREADING_LAYER = "workqueue"

BC_PERIODIC = 0
BC_DIODE = 1


@njit(cache=True)
def _traces_x(C, BL, B0, B1):
    nx, npc, nmu, nb1 = C.shape[0], C.shape[1], C.shape[2], C.shape[3]
    nq = BL.shape[1]
    txr = np.zeros((nx, npc, nmu, nq, nq))
    txl = np.zeros((nx, npc, nmu, nq, nq))
    for i in range(nx):
        for k in range(npc):
            for m in range(nmu):
                for r in range(nq):
                    for s in range(nq):
                        vr = 0.0
                        vl = 0.0
                        for a in range(nb1):
                            for b in range(nb1):
                                for c in range(nb1):
                                    w = C[i, k, m, a, b, c] * BL[b, r] * BL[c, s]
                                    vr += w * B1[a]
                                    vl += w * B0[a]
                        txr[i, k, m, r, s] = vr
                        txl[i, k, m, r, s] = vl
    return txr, txl


@njit(cache=True)
def _traces_p(C, BL, B0, B1):
    nx, npc, nmu, nb1 = C.shape[0], C.shape[1], C.shape[2], C.shape[3]
    nq = BL.shape[1]
    tpu = np.zeros((nx, npc, nmu, nq, nq))
    tpd = np.zeros((nx, npc, nmu, nq, nq))
    for i in range(nx):
        for k in range(npc):
            for m in range(nmu):
                for q in range(nq):
                    for s in range(nq):
                        vu = 0.0
                        vd = 0.0
                        for a in range(nb1):
                            for b in range(nb1):
                                for c in range(nb1):
                                    w = C[i, k, m, a, b, c] * BL[a, q] * BL[c, s]
                                    vu += w * B1[b]
                                    vd += w * B0[b]
                        tpu[i, k, m, q, s] = vu
                        tpd[i, k, m, q, s] = vd
    return tpu, tpd


@njit(cache=True)
def _traces_mu(C, BL, B0, B1):
    nx, npc, nmu, nb1 = C.shape[0], C.shape[1], C.shape[2], C.shape[3]
    nq = BL.shape[1]
    tmu = np.zeros((nx, npc, nmu, nq, nq))
    tmd = np.zeros((nx, npc, nmu, nq, nq))
    for i in range(nx):
        for k in range(npc):
            for m in range(nmu):
                for q in range(nq):
                    for r in range(nq):
                        vu = 0.0
                        vd = 0.0
                        for a in range(nb1):
                            for b in range(nb1):
                                for c in range(nb1):
                                    w = C[i, k, m, a, b, c] * BL[a, q] * BL[b, r]
                                    vu += w * B1[c]
                                    vd += w * B0[c]
                        tmu[i, k, m, q, r] = vu
                        tmd[i, k, m, q, r] = vd
    return tmu, tmd


@njit(cache=True, parallel=True)
def _transport_cells(C, EL, FX, FP, FM, qc,
                     dxv, dpv, dmuv, BG, dBG, BL, B0, B1, wg, wl,
                     p2G, p2L, pL, velL, muL, om2G, p2_edges, om2_edges):
    nx, npc, nmu, nb1 = C.shape[0], C.shape[1], C.shape[2], C.shape[3]
    nq = wg.shape[0]
    rows = np.zeros((nx, npc, nmu, nb1, nb1, nb1))
    for i in prange(nx):
        f1 = np.zeros((nq, nq, nq))
        f2 = np.zeros((nq, nq, nq))
        f3 = np.zeros((nq, nq, nq))
        for k in range(npc):
            for m in range(nmu):
                # field values at the three volume node sets
                for q in range(nq):
                    for r in range(nq):
                        for s in range(nq):
                            v1 = 0.0
                            v2 = 0.0
                            v3 = 0.0
                            for a in range(nb1):
                                for b in range(nb1):
                                    for c in range(nb1):
                                        cc = C[i, k, m, a, b, c]
                                        v1 += cc * BG[a, q] * BL[b, r] * BL[c, s]
                                        v2 += cc * BL[a, q] * BG[b, r] * BL[c, s]
                                        v3 += cc * BL[a, q] * BL[b, r] * BG[c, s]
                            f1[q, r, s] = v1
                            f2[q, r, s] = v2
                            f3[q, r, s] = v3
                for A in range(nb1):
                    for B in range(nb1):
                        for Cc in range(nb1):
                            acc = 0.0
                            # x-advection volume
                            for q in range(nq):
                                for r in range(nq):
                                    for s in range(nq):
                                        w1 = (dpv[k] * dmuv[m] * wg[q] * wl[r] * wl[s]
                                              * velL[k, r] * p2L[k, r] * muL[m, s])
                                        acc += f1[q, r, s] * w1 * dBG[A, q] * BL[B, r] * BL[Cc, s]
                            # p-advection volume
                            for q in range(nq):
                                hw = -qc * EL[i, q] * wl[q] * dxv[i]
                                for r in range(nq):
                                    for s in range(nq):
                                        w2 = (dmuv[m] * wg[r] * wl[s]
                                              * p2G[k, r] * muL[m, s]) * hw
                                        acc += f2[q, r, s] * w2 * BL[A, q] * dBG[B, r] * BL[Cc, s]
                            # mu-advection volume
                            for q in range(nq):
                                hw = -qc * EL[i, q] * wl[q] * dxv[i]
                                for r in range(nq):
                                    for s in range(nq):
                                        w3 = (dpv[k] * wl[r] * wg[s]
                                              * pL[k, r] * om2G[m, s]) * hw
                                        acc += f3[q, r, s] * w3 * BL[A, q] * BL[B, r] * dBG[Cc, s]
                            # x faces
                            sxf = 0.0
                            for r in range(nq):
                                for s in range(nq):
                                    w = dpv[k] * dmuv[m] * wl[r] * wl[s] * p2L[k, r]
                                    sxf += w * (FX[i + 1, k, m, r, s] * B1[A]
                                                - FX[i, k, m, r, s] * B0[A]) * BL[B, r] * BL[Cc, s]
                            acc -= sxf
                            # p faces
                            spf = 0.0
                            for q in range(nq):
                                for s in range(nq):
                                    w = dxv[i] * dmuv[m] * wl[q] * wl[s]
                                    spf += w * (p2_edges[k + 1] * FP[k + 1, i, m, q, s] * B1[B]
                                                - p2_edges[k] * FP[k, i, m, q, s] * B0[B]) \
                                        * BL[A, q] * BL[Cc, s]
                            acc -= spf
                            # mu faces
                            smf = 0.0
                            for q in range(nq):
                                for r in range(nq):
                                    w = dxv[i] * dpv[k] * wl[q] * wl[r] * pL[k, r]
                                    smf += w * (om2_edges[m + 1] * FM[m + 1, i, k, q, r] * B1[Cc]
                                                - om2_edges[m] * FM[m, i, k, q, r] * B0[Cc]) \
                                        * BL[A, q] * BL[B, r]
                            acc -= smf
                            rows[i, k, m, A, B, Cc] = acc
    return rows


@njit(cache=True)
def _face_fluxes(C, EL, bc_code, fin_left, fin_right, qc,
                 BL, B0, B1, velL, muL, mu_plus, mu_minus):
    nx, npc, nmu = C.shape[0], C.shape[1], C.shape[2]
    nq = BL.shape[1]
    txr, txl = _traces_x(C, BL, B0, B1)
    tpu, tpd = _traces_p(C, BL, B0, B1)
    tmu, tmd = _traces_mu(C, BL, B0, B1)

    FX = np.zeros((nx + 1, npc, nmu, nq, nq))
    for f in range(nx + 1):
        for k in range(npc):
            for m in range(nmu):
                for r in range(nq):
                    for s in range(nq):
                        if 0 < f < nx:
                            fm = txr[f - 1, k, m, r, s]
                            fp = txl[f, k, m, r, s]
                        elif bc_code == BC_PERIODIC:
                            fm = txr[nx - 1, k, m, r, s]
                            fp = txl[0, k, m, r, s]
                        elif f == 0:
                            fm = fin_left[k, r]
                            fp = txl[0, k, m, r, s]
                        else:
                            fm = txr[nx - 1, k, m, r, s]
                            fp = fin_right[k, r]
                        FX[f, k, m, r, s] = velL[k, r] * (mu_plus[m, s] * fm
                                                          + mu_minus[m, s] * fp)

    FP = np.zeros((npc + 1, nx, nmu, nq, nq))
    for f in range(1, npc + 1):
        for i in range(nx):
            for m in range(nmu):
                for q in range(nq):
                    h = -qc * EL[i, q]
                    for s in range(nq):
                        hp = h * muL[m, s]
                        hpp = hp if hp > 0.0 else 0.0
                        hpm = hp if hp < 0.0 else 0.0
                        below = tpu[i, f - 1, m, q, s]
                        above = tpd[i, f, m, q, s] if f < npc else 0.0
                        FP[f, i, m, q, s] = hpp * below + hpm * above

    FM = np.zeros((nmu + 1, nx, npc, nq, nq))
    for f in range(1, nmu):
        for i in range(nx):
            for k in range(npc):
                for q in range(nq):
                    h = -qc * EL[i, q]
                    hp = h if h > 0.0 else 0.0
                    hm = h if h < 0.0 else 0.0
                    for r in range(nq):
                        FM[f, i, k, q, r] = (hp * tmu[i, k, f - 1, q, r]
                                             + hm * tmd[i, k, f, q, r])
    return FX, FP, FM


@njit(cache=True)
def _boundary_rate(FX, FP, bc_code, dxv, dpv, dmuv, wl, p2L, p2_edges):
    nx = FX.shape[0] - 1
    npc = FX.shape[1]
    nmu = FX.shape[2]
    nq = wl.shape[0]
    bflux = 0.0
    for i in range(nx):
        for m in range(nmu):
            for q in range(nq):
                for s in range(nq):
                    bflux -= (dxv[i] * dmuv[m] * wl[q] * wl[s]
                              * p2_edges[npc] * FP[npc, i, m, q, s])
    if bc_code == BC_DIODE:
        for k in range(npc):
            for m in range(nmu):
                for r in range(nq):
                    for s in range(nq):
                        w = dpv[k] * dmuv[m] * wl[r] * wl[s] * p2L[k, r]
                        bflux += w * (FX[0, k, m, r, s] - FX[nx, k, m, r, s])
    return bflux


def transport_rows(C, EL, bc_code, fin_left, fin_right, qc,
                   dxv, dpv, dmuv,
                   BG, dBG, BL, B0, B1, wg, wl,
                   p2G, p2L, pL, velL, muL, om2G,
                   mu_plus, mu_minus, p2_edges, om2_edges):
    FX, FP, FM = _face_fluxes(C, EL, bc_code, fin_left, fin_right, qc,
                              BL, B0, B1, velL, muL, mu_plus, mu_minus)
    rows = _transport_cells(C, EL, FX, FP, FM, qc, dxv, dpv, dmuv,
                            BG, dBG, BL, B0, B1, wg, wl,
                            p2G, p2L, pL, velL, muL, om2G, p2_edges, om2_edges)
    bflux = _boundary_rate(FX, FP, bc_code, dxv, dpv, dmuv, wl, p2L, p2_edges)
    return rows, float(bflux)


@njit(cache=True, parallel=True)
def _collision_values(C, dmuv, BG, gain_coef, gain_cell, gain_basis, nuG):
    nx, npc, nmu, nb1 = C.shape[0], C.shape[1], C.shape[2], C.shape[3]
    nq = BG.shape[1]
    qvals = np.zeros((nx, npc, nmu, nq, nq, nq))
    fvals = np.zeros((nx, npc, nmu, nq, nq, nq))
    for i in prange(nx):
        # mu-integrated coefficients per p-cell
        D = np.zeros((npc, nb1, nb1))
        for k2 in range(npc):
            for a in range(nb1):
                for b in range(nb1):
                    acc = 0.0
                    for m in range(nmu):
                        acc += dmuv[m] * C[i, k2, m, a, b, 0]
                    D[k2, a, b] = acc
        gain = np.zeros((nq, npc, nq))
        for k in range(npc):
            for r in range(nq):
                for j in range(3):
                    coef = gain_coef[k, r, j]
                    if coef == 0.0:
                        continue
                    kt = gain_cell[k, r, j]
                    for q in range(nq):
                        acc = 0.0
                        for a in range(nb1):
                            for b in range(nb1):
                                acc += D[kt, a, b] * BG[a, q] * gain_basis[k, r, j, b]
                        gain[q, k, r] += coef * acc
        for k in range(npc):
            for m in range(nmu):
                for q in range(nq):
                    for r in range(nq):
                        for s in range(nq):
                            fv = 0.0
                            for a in range(nb1):
                                for b in range(nb1):
                                    for c in range(nb1):
                                        fv += (C[i, k, m, a, b, c]
                                               * BG[a, q] * BG[b, r] * BG[c, s])
                            fvals[i, k, m, q, r, s] = fv
                            qvals[i, k, m, q, r, s] = gain[q, k, r] - nuG[k, r] * fv
    return qvals, fvals


def collision_values(C, dmuv, BG, gain_coef, gain_cell, gain_basis, nuG):
    return _collision_values(C, dmuv, BG, gain_coef, gain_cell, gain_basis, nuG)


@njit(cache=True, parallel=True)
def _collision_rows(qvals, dxv, dpv, dmuv, wg, p2G, BG):
    nx, npc, nmu = qvals.shape[0], qvals.shape[1], qvals.shape[2]
    nq = wg.shape[0]
    nb1 = BG.shape[0]
    rows = np.zeros((nx, npc, nmu, nb1, nb1, nb1))
    for i in prange(nx):
        for k in range(npc):
            for m in range(nmu):
                jac = dxv[i] * dpv[k] * dmuv[m]
                for A in range(nb1):
                    for B in range(nb1):
                        for Cc in range(nb1):
                            acc = 0.0
                            for q in range(nq):
                                for r in range(nq):
                                    for s in range(nq):
                                        acc += (qvals[i, k, m, q, r, s]
                                                * wg[q] * wg[r] * wg[s] * p2G[k, r]
                                                * BG[A, q] * BG[B, r] * BG[Cc, s])
                            rows[i, k, m, A, B, Cc] = acc * jac
    return rows


def collision_rows(qvals, dxv, dpv, dmuv, wg, p2G, BG):
    return _collision_rows(qvals, dxv, dpv, dmuv, wg, p2G, BG)


@njit(cache=True, parallel=True)
def _node_minima(C, BL, BG):
    nx, npc, nmu, nb1 = C.shape[0], C.shape[1], C.shape[2], C.shape[3]
    nq = BL.shape[1]
    mins = np.empty((nx, npc, nmu))
    for i in prange(nx):
        for k in range(npc):
            for m in range(nmu):
                best = np.inf
                for q in range(nq):
                    for r in range(nq):
                        for s in range(nq):
                            vl = 0.0
                            vg = 0.0
                            for a in range(nb1):
                                for b in range(nb1):
                                    for c in range(nb1):
                                        cc = C[i, k, m, a, b, c]
                                        vl += cc * BL[a, q] * BL[b, r] * BL[c, s]
                                        vg += cc * BG[a, q] * BG[b, r] * BG[c, s]
                            if vl < best:
                                best = vl
                            if vg < best:
                                best = vg
                mins[i, k, m] = best
    return mins


def node_minima(C, BL, BG):
    return _node_minima(C, BL, BG)
