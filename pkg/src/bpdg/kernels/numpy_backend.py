"""Vectorized numpy implementation of the hot assembly kernels.

This is the reference backend: every function here has a loop-level numba
twin in :mod:`bpdg.kernels.numba_backend` with the same signature, and the
test suite asserts the two agree to roundoff.
"""

import numpy as np

BC_PERIODIC = 0
BC_DIODE = 1


def transport_rows(C, EL, bc_code, fin_left, fin_right, qc,
                   dxv, dpv, dmuv,
                   BG, dBG, BL, B0, B1, wg, wl,
                   p2G, p2L, pL, velL, muL, om2G,
                   mu_plus, mu_minus, p2_edges, om2_edges):
    """Weak-form rows of the transport operator plus the boundary mass rate.

    C        coefficients (nx, np, nmu, nb1, nb1, nb1)
    EL       electric field at the per-cell Lobatto x-nodes (nx, nq)
    returns  (rows like C, d(total mass)/dt from domain-boundary fluxes)
    """
    nx, npc, nmu = C.shape[:3]
    nq = wg.size

    # --- x-advection volume term ------------------------------------------
    F1 = np.einsum("IKMabc,aq,br,cs->IKMqrs", C, BG, BL, BL, optimize=True)
    w1 = wg[:, None, None] * (wl[:, None] * wl[None, :])[None, :, :]      # (q,r,s)
    w1 = w1[None, None] * (velL * p2L)[:, None, None, :, None] * muL[None, :, None, None, :]
    w1 = w1 * dpv[:, None, None, None, None] * dmuv[None, :, None, None, None]
    rows = np.einsum("IKMqrs,KMqrs,Aq,Br,Cs->IKMABC", F1, w1, dBG, BL, BL, optimize=True)

    # Upwind fluxes on the nx+1 x-faces at the (Lobatto p) x (Lobatto mu) nodes.
    TXR = np.einsum("IKMabc,a,br,cs->IKMrs", C, B1, BL, BL, optimize=True)
    TXL = np.einsum("IKMabc,a,br,cs->IKMrs", C, B0, BL, BL, optimize=True)
    mup = mu_plus[None, :, None, :]
    mum = mu_minus[None, :, None, :]
    vel5 = velL[None, :, None, :, None]
    FX = np.empty((nx + 1, npc, nmu, nq, nq))
    FX[1:nx] = vel5 * (mup * TXR[:-1] + mum * TXL[1:])
    if bc_code == BC_PERIODIC:
        seam = vel5[0] * (mup[0] * TXR[-1] + mum[0] * TXL[0])
        FX[0] = seam
        FX[nx] = seam
    else:
        fl = fin_left[:, None, :, None]
        fr = fin_right[:, None, :, None]
        FX[0] = vel5[0] * (mup[0] * fl + mum[0] * TXL[0])
        FX[nx] = vel5[0] * (mup[0] * TXR[-1] + mum[0] * fr)
    sxw = (dpv[:, None, None, None] * dmuv[None, :, None, None]
           * (wl[:, None] * wl[None, :])[None, None] * p2L[:, None, :, None])
    ZR = np.einsum("IKMrs,KMrs,Br,Cs->IKMBC", FX[1:], sxw, BL, BL, optimize=True)
    ZL = np.einsum("IKMrs,KMrs,Br,Cs->IKMBC", FX[:-1], sxw, BL, BL, optimize=True)
    rows -= (ZR[:, :, :, None] * B1[None, None, None, :, None, None]
             - ZL[:, :, :, None] * B0[None, None, None, :, None, None])

    # --- p-advection -------------------------------------------------------
    HX = -qc * EL                                       # advection factor at x-nodes
    F2 = np.einsum("IKMabc,aq,br,cs->IKMqrs", C, BL, BG, BL, optimize=True)
    wKM = (p2G[:, None, :, None] * muL[None, :, None, :]
           * (wg[:, None] * wl[None, :])[None, None]
           * dmuv[None, :, None, None])                 # (K, M, r, s)
    Z2 = F2 * (wl[None, None, None, :, None, None] * HX[:, None, None, :, None, None]
               * dxv[:, None, None, None, None, None])
    Z2 *= wKM[None, :, :, None]
    rows += np.einsum("IKMqrs,Aq,Br,Cs->IKMABC", Z2, BL, dBG, BL, optimize=True)

    TPU = np.einsum("IKMabc,aq,b,cs->IKMqs", C, BL, B1, BL, optimize=True)
    TPD = np.einsum("IKMabc,aq,b,cs->IKMqs", C, BL, B0, BL, optimize=True)
    HP = HX[:, None, :, None] * muL[None, :, None, :]   # (nx, nmu, nq_x, nq_mu)
    HPp = np.maximum(HP, 0.0)
    HPm = np.minimum(HP, 0.0)
    TPU_t = TPU.transpose(1, 0, 2, 3, 4)                # (np, nx, nmu, q, s)
    TPD_t = TPD.transpose(1, 0, 2, 3, 4)
    FP = np.empty((npc + 1, nx, nmu, nq, nq))
    FP[1:npc] = HPp[None] * TPU_t[:-1] + HPm[None] * TPD_t[1:]
    FP[0] = 0.0                                         # geometric factor p^2 = 0
    FP[npc] = HPp * TPU_t[npc - 1]                      # zero inflow at p_max
    spw = (dxv[:, None, None, None] * dmuv[None, :, None, None]
           * (wl[:, None] * wl[None, :])[None, None])   # (I, M, q, s)
    ZU = np.einsum("KIMqs,IMqs,Aq,Cs->IKMAC",
                   FP[1:] * p2_edges[1:, None, None, None, None], spw, BL, BL, optimize=True)
    ZD = np.einsum("KIMqs,IMqs,Aq,Cs->IKMAC",
                   FP[:-1] * p2_edges[:-1, None, None, None, None], spw, BL, BL, optimize=True)
    rows -= (ZU[:, :, :, :, None] * B1[None, None, None, None, :, None]
             - ZD[:, :, :, :, None] * B0[None, None, None, None, :, None])

    # --- mu-advection ------------------------------------------------------
    F3 = np.einsum("IKMabc,aq,br,cs->IKMqrs", C, BL, BL, BG, optimize=True)
    wKM3 = (pL[:, None, :, None] * om2G[None, :, None, :]
            * (wl[:, None] * wg[None, :])[None, None]
            * dpv[:, None, None, None])                 # (K, M, r, s)
    Z3 = F3 * (wl[None, None, None, :, None, None] * HX[:, None, None, :, None, None]
               * dxv[:, None, None, None, None, None])
    Z3 *= wKM3[None, :, :, None]
    rows += np.einsum("IKMqrs,Aq,Br,Cs->IKMABC", Z3, BL, BL, dBG, optimize=True)

    TMU = np.einsum("IKMabc,aq,br,c->IKMqr", C, BL, BL, B1, optimize=True)
    TMD = np.einsum("IKMabc,aq,br,c->IKMqr", C, BL, BL, B0, optimize=True)
    HMp = np.maximum(HX, 0.0)[:, None, :, None]         # (nx, 1, nq_x, 1)
    HMm = np.minimum(HX, 0.0)[:, None, :, None]
    TMU_t = TMU.transpose(2, 0, 1, 3, 4)                # (nmu, nx, np, q, r)
    TMD_t = TMD.transpose(2, 0, 1, 3, 4)
    FM = np.empty((nmu + 1, nx, npc, nq, nq))
    FM[1:nmu] = HMp[None] * TMU_t[:-1] + HMm[None] * TMD_t[1:]
    FM[0] = 0.0                                         # (1 - mu^2) vanishes at poles
    FM[nmu] = 0.0
    smw = (dxv[:, None, None, None] * dpv[None, :, None, None]
           * (wl[:, None] * wl[None, :])[None, None] * pL[None, :, None, :])
    ZMU = np.einsum("MIKqr,IKqr,Aq,Br->IKMAB",
                    FM[1:] * om2_edges[1:, None, None, None, None], smw, BL, BL, optimize=True)
    ZMD = np.einsum("MIKqr,IKqr,Aq,Br->IKMAB",
                    FM[:-1] * om2_edges[:-1, None, None, None, None], smw, BL, BL, optimize=True)
    rows -= (ZMU[:, :, :, :, :, None] * B1[None, None, None, None, None, :]
             - ZMD[:, :, :, :, :, None] * B0[None, None, None, None, None, :])

    # --- boundary mass rate --------------------------------------------------
    bflux = -float(np.einsum("IMqs,IMqs->", FP[npc] * p2_edges[npc], spw))
    if bc_code == BC_DIODE:
        wface = (dpv[:, None, None, None] * dmuv[None, :, None, None]
                 * (wl[:, None] * wl[None, :])[None, None] * p2L[:, None, :, None])
        bflux += float(np.einsum("KMrs,KMrs->", FX[0], wface))
        bflux -= float(np.einsum("KMrs,KMrs->", FX[nx], wface))
    return rows, bflux


def collision_values(C, dmuv, BG, gain_coef, gain_cell, gain_basis, nuG):
    """Gain, Q = gain - nu*f, and f at the tensor Gauss nodes.

    Returns (qvals, fvals) with shape (nx, np, nmu, nq, nq, nq).
    """
    fvals = np.einsum("IKMabc,aq,br,cs->IKMqrs", C, BG, BG, BG, optimize=True)
    # mu'-integral of f at fixed (x-node, p'): exact, only c = 0 modes survive.
    D = np.einsum("IKMab,M->IKab", C[:, :, :, :, :, 0], dmuv)     # (nx, np, a, b)
    npc, nq = nuG.shape
    nx = C.shape[0]
    gain = np.zeros((nx, nq, npc, nq))
    for j in range(3):
        coef = gain_coef[:, :, j]
        if not np.any(coef):
            continue
        tgt = gain_cell[:, :, j]                                  # (np, nq)
        Dt = D[:, tgt]                                            # (nx, np, nq, a, b)
        bas = gain_basis[:, :, j, :]                              # (np, nq, b)
        gain += coef[None, None] * np.einsum("IKRab,aq,KRb->IqKR", Dt, BG, bas, optimize=True)
    qvals = (gain.transpose(0, 2, 1, 3)[:, :, None, :, :, None]
             - nuG[None, :, None, None, :, None] * fvals)
    return qvals, fvals


def collision_rows(qvals, dxv, dpv, dmuv, wg, p2G, BG):
    """Project Q against the tensor test basis with the p^2 weight."""
    w3 = wg[:, None, None] * (wg[:, None] * wg[None, :])[None]    # (q, r, s)
    wk = p2G[:, None, :, None] * w3[None]                         # (np, q, r, s)
    Z = qvals * wk[None, :, None]
    rows = np.einsum("IKMqrs,Aq,Br,Cs->IKMABC", Z, BG, BG, BG, optimize=True)
    jac = dxv[:, None, None] * dpv[None, :, None] * dmuv[None, None, :]
    return rows * jac[..., None, None, None]


def node_minima(C, BL, BG):
    """Per-cell minimum over the positivity node set (Lobatto and Gauss tensors)."""
    FL = np.einsum("IKMabc,aq,br,cs->IKMqrs", C, BL, BL, BL, optimize=True)
    FG = np.einsum("IKMabc,aq,br,cs->IKMqrs", C, BG, BG, BG, optimize=True)
    return np.minimum(FL.min(axis=(3, 4, 5)), FG.min(axis=(3, 4, 5)))
