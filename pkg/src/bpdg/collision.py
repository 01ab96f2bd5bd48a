"""Electron-phonon gain/loss collision operator and its DG weak form.

The kernel is the sum of an elastic channel and one inelastic phonon channel:
emission carries weight (n_ph + 1) K, absorption n_ph K.  The gain term
redistributes the angle-averaged distribution between energy shells shifted
by the phonon energy; the loss term is the collision frequency times f.
An energy cutoff chi restricts all shifted evaluations to [0, eps_max] with
eps_max tied to the momentum grid (eps_max = energy(p_max)), so the gain can
never ask for momenta beyond the mesh.
"""

from dataclasses import dataclass

import numpy as np

from . import band as band_mod
from . import kernels
from .errors import ConfigError, DomainError
from .mesh import cell_volume
from .quadrature import GAUSS, legendre_vals, quad_rule


@dataclass(frozen=True)
class PhononParams:
    """Phonon energy, occupation, and coupling constants (all nondimensional)."""

    hbar_omega: float
    n_ph: float
    coupling: float      # inelastic constant K
    elastic: float = 0.0  # elastic constant c0
    detailed_balance: bool = False

    def __post_init__(self):
        if self.hbar_omega <= 0.0:
            raise ConfigError("phonon energy must be positive")
        if self.n_ph < 0.0 or self.coupling < 0.0 or self.elastic < 0.0:
            raise ConfigError("phonon occupation and couplings must be nonnegative")
        if self.detailed_balance:
            target = 1.0 / np.expm1(self.hbar_omega)
            if abs(self.n_ph - target) > 1e-12 * max(1.0, target):
                raise ConfigError("n_ph inconsistent with detailed balance")

    @classmethod
    def with_detailed_balance(cls, hbar_omega, coupling, elastic=0.0):
        return cls(hbar_omega, 1.0 / np.expm1(hbar_omega), coupling, elastic,
                   detailed_balance=True)

    @property
    def c1(self):
        return (self.n_ph + 1.0) * self.coupling

    @property
    def c_minus1(self):
        return self.n_ph * self.coupling

    @property
    def c0(self):
        return self.elastic


@dataclass(frozen=True)
class EnergyCutoff:
    """chi(e) = 1 iff e in [0, eps_max], with eps_max = energy(p_max)."""

    eps_max: float

    @classmethod
    def from_band(cls, band, p_max):
        return cls(float(band_mod.energy(band, p_max)))

    def chi(self, e):
        e = np.asarray(e, dtype=np.float64)
        return ((e >= 0.0) & (e <= self.eps_max)).astype(np.float64)


def collision_frequency(band, params, cutoff, e):
    """nu(e) = sum_j c_j 4*pi chi(e - j hw) dos(e - j hw), j in {-1, 0, +1}."""
    e = np.asarray(e, dtype=np.float64)
    if np.any(e < 0.0):
        raise DomainError("energy must be nonnegative")
    total = np.zeros_like(e)
    for cj, j in ((params.c_minus1, -1), (params.c0, 0), (params.c1, 1)):
        if cj == 0.0:
            continue
        shifted = e - j * params.hbar_omega
        chi = cutoff.chi(shifted)
        total += 4.0 * np.pi * cj * chi * band_mod.dos_factor(band, np.maximum(shifted, 0.0))
    return total if total.ndim else float(total)


def _mu_integral(field, i, xi, k_target, eta):
    """int_{-1}^{1} f_h(x, p', mu') dmu' for a point inside x-cell i.

    Exact per mu-cell: polynomial integrand, only the constant mu-mode
    survives.
    """
    mesh = field.mesh
    bx = legendre_vals(field.degree, [xi])[:, 0]
    bp = legendre_vals(field.degree, [eta])[:, 0]
    coef = field.coeffs[i, k_target, :, :, :, 0]         # (nmu, a, b)
    per_cell = np.einsum("Mab,a,b->M", coef, bx, bp)
    return float(np.dot(mesh.dmu, per_cell))


def _locate(edges, value):
    idx = int(np.clip(np.searchsorted(edges, value, side="right") - 1, 0, edges.size - 2))
    frac = (value - edges[idx]) / (edges[idx + 1] - edges[idx])
    return idx, float(np.clip(frac, 0.0, 1.0))


def gain(field, band, params, cutoff, x, p):
    """Pointwise gain 2*pi sum_j c_j chi dos(e + j hw) * int f(x, p', mu') dmu'."""
    mesh = field.mesh
    e = float(band_mod.energy(band, p))
    i, xi = _locate(mesh.x_edges, x)
    total = 0.0
    for cj, j in ((params.c_minus1, -1), (params.c0, 0), (params.c1, 1)):
        if cj == 0.0:
            continue
        eshift = e + j * params.hbar_omega
        if eshift < 0.0 or eshift > cutoff.eps_max:
            continue
        pprime = float(band_mod.momentum_of_energy(band, eshift))
        if pprime > mesh.p_max * (1.0 + 1e-12):
            raise ConfigError("admissible donor momentum exceeds p_max")
        kt, eta = _locate(mesh.p_edges, pprime)
        dos = float(band_mod.dos_factor(band, eshift))
        total += 2.0 * np.pi * cj * dos * _mu_integral(field, i, xi, kt, eta)
    return total


def q_operator(field, band, params, cutoff, x, p, mu):
    """Pointwise Q(f_h) = gain(x, p) - nu(e(p)) * f_h(x, p, mu)."""
    from .field import evaluate

    mesh = field.mesh
    i, xi = _locate(mesh.x_edges, x)
    k, eta = _locate(mesh.p_edges, p)
    m, zeta = _locate(mesh.mu_edges, mu)
    fval = evaluate(field, (i, k, m), xi, eta, zeta)
    nu = collision_frequency(band, params, cutoff, band_mod.energy(band, p))
    return gain(field, band, params, cutoff, x, p) - nu * fval


def collision_node_values(field, tables, ctables):
    """(Q, f) at the volume Gauss nodes; shared by assembly and the CFL scan."""
    return kernels.collision_values(
        field.coeffs, tables.dmu, tables.BG,
        ctables.gain_coef, ctables.gain_cell, ctables.gain_basis, ctables.nuG)


def assemble_collision(field, tables, ctables):
    """Coefficient-space rate from the collision operator.

    Returns (rate, qvals, fvals); qvals/fvals feed the collision time-step
    bound so the bound sees exactly the assembled source.
    """
    t = tables
    qvals, fvals = collision_node_values(field, t, ctables)
    rows = kernels.collision_rows(qvals, t.dx, t.dp, t.dmu, t.wg, t.p2G, t.BG)
    return t.rate_from_rows(rows), qvals, fvals


def collision_average_rate(field, tables, ctables, cell):
    """Cell-average rate of the collision source for one cell."""
    t = tables
    qvals, _ = collision_node_values(field, t, ctables)
    rows = kernels.collision_rows(qvals, t.dx, t.dp, t.dmu, t.wg, t.p2G, t.BG)
    i, k, m = cell
    return float(rows[i, k, m, 0, 0, 0] / cell_volume(field.mesh, i, k, m))


def mass_residual(field, tables, ctables, n_quad=None):
    """Total weighted-mass rate of the collision source, sum over all cells.

    ``n_quad`` overrides the per-direction Gauss node count (for convergence
    studies of the quadrature error in the inelastic channels).
    """
    t = tables
    if n_quad is None:
        qvals, _ = collision_node_values(field, t, ctables)
        rows = kernels.collision_rows(qvals, t.dx, t.dp, t.dmu, t.wg, t.p2G, t.BG)
        return float(rows[:, :, :, 0, 0, 0].sum())
    return _mass_residual_refined(field, tables, ctables, n_quad)


def _mass_residual_refined(field, tables, ctables, n_quad):
    """Direct quadrature of int Q p^2 with an arbitrary Gauss node count."""
    band = tables.band
    params = ctables.phonon
    cutoff = EnergyCutoff(ctables.eps_max)
    mesh = field.mesh
    rule = quad_rule(GAUSS, n_quad)
    xq, wq = rule.nodes, rule.weights
    B = legendre_vals(field.degree, xq)                    # (nb1, nq)

    pn = mesh.p_edges[:-1, None] + mesh.dp[:, None] * xq[None, :]
    en = band_mod.energy(band, pn)
    nun = collision_frequency(band, params, cutoff, en)

    # f at the tensor nodes.
    F = np.einsum("IKMabc,aq,br,cs->IKMqrs", field.coeffs, B, B, B, optimize=True)
    D = np.einsum("IKMab,M->IKab", field.coeffs[:, :, :, :, :, 0], mesh.dmu)

    gain_n = np.zeros((mesh.nx, xq.size, mesh.np_, xq.size))
    for cj, j in ((params.c_minus1, -1), (params.c0, 0), (params.c1, 1)):
        if cj == 0.0:
            continue
        eshift = en + j * params.hbar_omega
        chi = (eshift >= 0.0) & (eshift <= cutoff.eps_max)
        pprime = band_mod.momentum_of_energy(band, np.maximum(eshift, 0.0))
        kt = np.clip(np.searchsorted(mesh.p_edges, pprime, side="right") - 1, 0, mesh.np_ - 1)
        eta = np.clip((pprime - mesh.p_edges[kt]) / mesh.dp[kt], 0.0, 1.0)
        coef = np.where(chi, 2.0 * np.pi * cj * band_mod.dos_factor(band, np.maximum(eshift, 0.0)), 0.0)
        bas = legendre_vals(field.degree, eta.ravel()).T.reshape(mesh.np_, xq.size, field.nb1)
        Dt = D[:, kt]
        gain_n += coef[None, None] * np.einsum("IKRab,aq,KRb->IqKR", Dt, B, bas, optimize=True)

    qn = gain_n.transpose(0, 2, 1, 3)[:, :, None, :, :, None] - nun[None, :, None, None, :, None] * F
    w3 = wq[:, None, None] * (wq[:, None] * wq[None, :])[None]
    wk = (pn ** 2)[:, None, :, None] * w3[None]
    jac = mesh.dx[:, None, None] * mesh.dp[None, :, None] * mesh.dmu[None, None, :]
    return float(((qn * wk[None, :, None]).sum(axis=(3, 4, 5)) * jac).sum())
