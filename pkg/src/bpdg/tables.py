"""Precomputed basis, geometry, and collision-gather tables for assembly.

The semi-discrete operator is defined by fixed quadratures:

* volume integrals use tensor Gauss with degree+2 nodes per direction;
* every face integral uses Gauss-Lobatto (degree+2 nodes) in the in-face
  directions, and the volume term of each advection direction shares the
  same in-face rule so constants are annihilated exactly.

The Lobatto choice on faces is what lets the p^2-weighted cell average be
rewritten as a positively weighted sum over the tensor Lobatto nodes with
the endpoint values balancing the face fluxes; the time-step bounds in
:mod:`bpdg.positivity` are derived from exactly these tables.
"""

from dataclasses import dataclass

import numpy as np

from . import band as band_mod
from .errors import ConfigError
from .mesh import cell_volumes
from .quadrature import GAUSS, LOBATTO, legendre_derivs, legendre_vals, quad_rule

SUPPORTED_DEGREES = (1, 2)


@dataclass
class DGTables:
    """Geometry/basis tables tied to one (mesh, band, degree) triple."""

    mesh: object
    band: object
    degree: int

    def __post_init__(self):
        if self.degree not in SUPPORTED_DEGREES:
            raise ConfigError(f"degree must be one of {SUPPORTED_DEGREES}")
        mesh, band, k = self.mesh, self.band, self.degree
        self.nb1 = k + 1
        self.nq = k + 2

        g = quad_rule(GAUSS, self.nq)
        l = quad_rule(LOBATTO, self.nq)
        self.xg, self.wg = g.nodes, g.weights
        self.xl, self.wl = l.nodes, l.weights
        self.lobatto_rule = l

        self.BG = legendre_vals(k, self.xg)       # (nb1, nq)
        self.dBG = legendre_derivs(k, self.xg)
        self.BL = legendre_vals(k, self.xl)
        self.B0 = legendre_vals(k, [0.0])[:, 0]
        self.B1 = legendre_vals(k, [1.0])[:, 0]
        self.norms_sq = 1.0 / (2.0 * np.arange(self.nb1) + 1.0)

        self.dx = mesh.dx
        self.dp = mesh.dp
        self.dmu = mesh.dmu

        pe = mesh.p_edges
        self.pG = pe[:-1, None] + mesh.dp[:, None] * self.xg[None, :]
        self.pL = pe[:-1, None] + mesh.dp[:, None] * self.xl[None, :]
        self.p2G = self.pG ** 2
        self.p2L = self.pL ** 2
        self.velL = band_mod.velocity(band, self.pL)
        self.p2_edges = pe ** 2

        me = mesh.mu_edges
        self.muG = me[:-1, None] + mesh.dmu[:, None] * self.xg[None, :]
        self.muL = me[:-1, None] + mesh.dmu[:, None] * self.xl[None, :]
        self.om2G = 1.0 - self.muG ** 2
        self.mu_plus = 0.5 * (self.muL + np.abs(self.muL))
        self.mu_minus = 0.5 * (self.muL - np.abs(self.muL))
        self.om2_edges = 1.0 - me ** 2
        # Clamp roundoff at the poles: the geometric factor vanishes there.
        self.om2_edges[0] = 0.0
        self.om2_edges[-1] = 0.0

        self.xG_nodes = mesh.x_edges[:-1, None] + mesh.dx[:, None] * self.xg[None, :]
        self.xL_nodes = mesh.x_edges[:-1, None] + mesh.dx[:, None] * self.xl[None, :]

        # Weighted reference Gram per p-cell: W[k][a,b] = int P_a P_b p(eta)^2 d(eta),
        # exact under the volume Gauss rule (integrand degree 2k+2 <= 2(k+2)-1).
        wgt = self.wg[None, :] * self.p2G
        self.W = np.einsum("kq,aq,bq->kab", wgt, self.BG, self.BG)
        self.Winv = np.linalg.inv(self.W)
        self.w2 = self.W[:, 0, :]          # int P_b p^2 d(eta)

        self.cellvol = cell_volumes(mesh)

        # Per-direction time-step bound ingredients.
        self.velmaxL = self.velL.max(axis=1)
        self.mu_absmax = np.maximum(np.abs(me[:-1]), np.abs(me[1:]))
        self.om2max_face = np.maximum(self.om2_edges[:-1], self.om2_edges[1:])
        # Smallest strictly positive Lobatto p-node per cell; equals p_{k-}
        # except in the first cell, where the node at p = 0 drops out of the
        # constraint set (its geometric weight vanishes identically).
        self.pstar = pe[:-1].copy()
        self.pstar[0] = mesh.dp[0] * self.xl[1]

        self._verify_average_decomposition()

    def _verify_average_decomposition(self):
        """The p^2 cell average must be a nonnegative combination of Lobatto nodes."""
        # Directional-scan weights share the structure w_q * w_r * w_s * p2L;
        # nonnegativity is structural, the sum condition checks exactness.
        sums = self.wl @ np.ones(self.nq)  # = 1
        if abs(sums - 1.0) > 1e-14:
            raise ConfigError("lobatto weights do not sum to 1")
        lob_p2 = self.p2L @ self.wl        # per-cell int p^2 via Lobatto
        ref = self.w2[:, 0]
        if np.any(lob_p2 < 0.0):
            raise ConfigError("negative positivity-node weight")
        if np.max(np.abs(lob_p2 - ref) / np.maximum(ref, 1e-300)) > 1e-12:
            raise ConfigError("positivity-node weights do not reproduce the cell average")

    def rate_from_rows(self, rows):
        """Convert weak-form rows to coefficient rates (apply the inverse mass)."""
        jac = (self.dx[:, None, None] * self.dp[None, :, None] * self.dmu[None, None, :])
        out = np.einsum("KBb,IKMAbC->IKMABC", self.Winv, rows, optimize=True)
        out *= (1.0 / self.norms_sq)[None, None, None, :, None, None]
        out *= (1.0 / self.norms_sq)[None, None, None, None, None, :]
        out /= jac[..., None, None, None]
        return out


PHONON_SHIFT_INDEX = (-1, 0, 1)


@dataclass
class CollisionTables:
    """Gather tables for the gain term and the pointwise collision frequency.

    Built for the volume Gauss nodes, which are also the nodes scanned by the
    collision time-step bound, so the assembled source and the bound always
    see identical values.
    """

    tables: DGTables
    phonon: object

    def __post_init__(self):
        t = self.tables
        band = t.band
        ph = self.phonon
        mesh = t.mesh

        self.eps_max = float(band_mod.energy(band, mesh.p_max))
        eG = band_mod.energy(band, t.pG)
        coeffs = (ph.c_minus1, ph.c0, ph.c1)
        shifts = (-ph.hbar_omega, 0.0, ph.hbar_omega)

        npc, nq = eG.shape
        self.nuG = np.zeros((npc, nq))
        self.gain_coef = np.zeros((npc, nq, 3))
        self.gain_cell = np.zeros((npc, nq, 3), dtype=np.int64)
        self.gain_basis = np.zeros((npc, nq, 3, t.nb1))

        pe = mesh.p_edges
        for jdx, (cj, dw) in enumerate(zip(coeffs, shifts)):
            # Loss: final states at e - j*hw.
            e_loss = eG - dw
            chi_loss = (e_loss >= 0.0) & (e_loss <= self.eps_max)
            if cj != 0.0:
                self.nuG += np.where(
                    chi_loss, 4.0 * np.pi * cj * band_mod.dos_factor(band, np.maximum(e_loss, 0.0)), 0.0
                )
            # Gain: donor states at e + j*hw.
            e_gain = eG + dw
            chi_gain = (e_gain >= 0.0) & (e_gain <= self.eps_max)
            if cj == 0.0:
                continue
            pprime = band_mod.momentum_of_energy(band, np.maximum(e_gain, 0.0))
            if np.any(chi_gain & (pprime > mesh.p_max * (1.0 + 1e-12))):
                raise ConfigError("admissible donor momentum exceeds p_max")
            kt = np.clip(np.searchsorted(pe, pprime, side="right") - 1, 0, npc - 1)
            eta = (pprime - pe[kt]) / t.dp[kt]
            eta = np.clip(eta, 0.0, 1.0)
            coef = np.where(
                chi_gain, 2.0 * np.pi * cj * band_mod.dos_factor(band, np.maximum(e_gain, 0.0)), 0.0
            )
            self.gain_coef[:, :, jdx] = coef
            self.gain_cell[:, :, jdx] = np.where(chi_gain, kt, 0)
            vals = legendre_vals(t.degree, eta.ravel()).T.reshape(npc, nq, t.nb1)
            self.gain_basis[:, :, jdx, :] = vals
