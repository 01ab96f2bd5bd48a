"""Entropy, mass, and structural diagnostics; all pure functions of the state."""

import math
from dataclasses import dataclass

import numpy as np

from . import band as band_mod

EXP_GUARD = 700.0  # natural-log overflow threshold for float64


def total_mass(field, tables):
    """int f p^2 dp dmu dx over the whole domain (exact for the basis)."""
    t = tables
    jac = t.dx[:, None] * (t.dp * 1.0)[None, :]
    per_xp = np.einsum("IKMb,Kb,M->IK", field.coeffs[:, :, :, 0, :, 0], t.w2, t.dmu)
    return float(np.sum(per_xp * jac))


def _hamiltonian_log_weight(tables, potential, charge):
    """log of exp(energy - q V) at the volume Gauss nodes, plus the guard shift."""
    t = tables
    eG = band_mod.energy(t.band, t.pG)                       # (np, nq)
    vG = potential.potential_nodes(t.xg)                     # (nx, nq)
    eps_max = float(band_mod.energy(t.band, t.mesh.p_max))
    vmin = potential.min_potential()
    shift = eps_max if (eps_max - charge * vmin) > EXP_GUARD else 0.0
    logw = (eG[None, :, None, :] - charge * vG[:, None, :, None] - shift)
    return logw, shift  # indexed (i, k, q_x, r_p)


def entropy_norm(field, potential, tables, charge=1.0, return_log_scale=False):
    """int f_h^2 exp(energy - q V) p^2 dp dmu dx by the volume Gauss rule.

    If the exponent could overflow, the integral is computed with the weight
    rescaled by exp(-energy_max); pass ``return_log_scale=True`` to receive
    ``(scaled_value, log_scale)`` instead of the product (which may overflow
    to inf by design).
    """
    t = tables
    from .field import gauss_node_values

    F = gauss_node_values(field, t)
    logw, shift = _hamiltonian_log_weight(t, potential, charge)
    w3 = t.wg[:, None, None] * (t.wg[:, None] * t.wg[None, :])[None]
    jac = t.dx[:, None, None] * t.dp[None, :, None] * t.dmu[None, None, :]
    integ = (F * F * np.exp(logw)[:, :, None, :, :, None]
             * t.p2G[None, :, None, None, :, None] * w3[None, None, None])
    val = float((integ.sum(axis=(3, 4, 5)) * jac).sum())
    if return_log_scale:
        return val, shift
    if shift == 0.0:
        return val
    with np.errstate(over="ignore"):
        return float(val * math.exp(shift)) if shift < EXP_GUARD else math.inf


def collision_dissipation_pointwise(field, potential, tables, qvals, charge=1.0):
    """Gauss quadrature of int Q(f_h) f_h exp(energy - q V) p^2 dp dmu dx.

    The integrand has jumps inside receiving cells (the gain samples the
    donor cell's polynomial), so this value carries sign-unsafe quadrature
    error; prefer :func:`collision_dissipation` for the entropy check.
    """
    t = tables
    from .field import gauss_node_values

    F = gauss_node_values(field, t)
    logw, shift = _hamiltonian_log_weight(t, potential, charge)
    w3 = t.wg[:, None, None] * (t.wg[:, None] * t.wg[None, :])[None]
    jac = t.dx[:, None, None] * t.dp[None, :, None] * t.dmu[None, None, :]
    integ = (qvals * F * np.exp(logw)[:, :, None, :, :, None]
             * t.p2G[None, :, None, None, :, None] * w3[None, None, None])
    val = float((integ.sum(axis=(3, 4, 5)) * jac).sum())
    return val * math.exp(shift) if shift else val


def collision_dissipation(field, potential, tables, ctables, charge=1.0):
    """int Q(f_h) f_h exp(energy - q V) p^2 dp dmu dx via the pair form.

    Under the detailed-balance weight relation the collision kernel is
    symmetric with respect to the equilibrium exp(-(energy - q V)), and the
    integral equals

        -1/2 sum_j int w_j(x, e) * [phi(e + j hw, mu') - phi(e, mu)]^2

    with phi = f exp(energy - q V) and nonnegative pair weights w_j.  Every
    quadrature term is nonpositive, so the computed value respects the sign
    of the continuum inequality by construction.  Requires parameters
    satisfying c1 exp(-hw) = c_{-1}; otherwise no dissipation statement
    holds and a ValueError is raised.
    """
    ph = ctables.phonon
    if ph.coupling > 0.0:
        balance = abs(ph.c1 * math.exp(-ph.hbar_omega) - ph.c_minus1)
        if balance > 1e-10 * max(ph.c1, 1e-300):
            raise ValueError("dissipation diagnostic needs detailed-balance occupancy")
    t = tables
    band = t.band
    mesh = t.mesh
    C = field.coeffs
    nb1 = t.nb1
    norms = t.norms_sq

    eG = band_mod.energy(band, t.pG)                       # (np, nq)
    vG = potential.potential_nodes(t.xg)                   # (nx, nq)
    eps_max = float(band_mod.energy(band, mesh.p_max))
    vmin = potential.min_potential()
    top = eps_max + ph.hbar_omega - charge * vmin
    shift = top - EXP_GUARD if top > EXP_GUARD else 0.0

    # mu-integrals of f and f^2 at arbitrary (x-node, p-point):
    # f(xi, eta, zeta) = sum_c g_c(xi, eta) P_c(zeta) per mu-cell, so
    # int f dmu = sum_m dmu g_0 and int f^2 dmu = sum_m dmu sum_c |g_c|^2 n_c.
    def mu_moments(kt, basis_p):
        # kt: (np, nq) donor cell ids; basis_p: (np, nq, nb1) P_b at donor coord
        Ct = C[:, kt]                                      # (nx, np, nq, m, a, b, c)
        g = np.einsum("IKRMabc,aq,KRb->IqKRMc", Ct, t.BG, basis_p, optimize=True)
        s1 = np.einsum("IqKRM,M->IqKR", g[..., 0], t.dmu)
        s2 = np.einsum("IqKRMc,c,M->IqKR", g * g, norms, t.dmu, optimize=True)
        return s1, s2

    self_cells = np.broadcast_to(np.arange(mesh.np_)[:, None], eG.shape)
    self_basis = np.broadcast_to(t.BG.T[None, :, :], (mesh.np_, t.nq, nb1)).copy()
    a_self, b_self = mu_moments(np.ascontiguousarray(self_cells), self_basis)

    shifts = (-ph.hbar_omega, 0.0, ph.hbar_omega)
    total = 0.0
    wx = t.dx[:, None] * t.wg[None, :]                     # (nx, nq)
    wp = t.dp[:, None] * t.wg[None, :] * t.p2G             # (np, nq)
    for jdx in range(3):
        coef = ctables.gain_coef[:, :, jdx]                # 2 pi c_j chi dos(e')
        if not np.any(coef):
            continue
        a_don, b_don = mu_moments(ctables.gain_cell[:, :, jdx],
                                  ctables.gain_basis[:, :, jdx, :])
        e_don = eG + shifts[jdx]
        # bracket = 2 [ e^{e'} B' + e^{2e - e'} B - e^{e} A' A ] * e^{-qV}
        exp_don = np.exp(e_don - shift)[None, None]        # (1, 1, np, nq)
        exp_mix = np.exp(eG - shift)[None, None]
        exp_self = np.exp((2.0 * eG - e_don) - shift)[None, None]
        bracket = 2.0 * (exp_don * b_don + exp_self * b_self - exp_mix * a_don * a_self)
        weight = (coef[None, None] * np.exp(-charge * vG)[:, :, None, None]
                  * wx[:, :, None, None] * wp[None, None])
        total += float((weight * bracket).sum())
    val = -0.5 * total
    return val * math.exp(shift) if shift else val


def norm_squared(field, tables):
    """Plain p^2-weighted L2 norm of f_h (entropy weight set to 1)."""
    t = tables
    from .field import gauss_node_values

    F = gauss_node_values(field, t)
    w3 = t.wg[:, None, None] * (t.wg[:, None] * t.wg[None, :])[None]
    jac = t.dx[:, None, None] * t.dp[None, :, None] * t.dmu[None, None, :]
    integ = F * F * t.p2G[None, :, None, None, :, None] * w3[None, None, None]
    return float((integ.sum(axis=(3, 4, 5)) * jac).sum())


@dataclass
class PhaseFlowReport:
    max_divergence: float
    max_flow_dot_gradient: float
    points: int


def beta_identities_check(potential, band, points, charge=1.0):
    """Check the phase-flow vector is divergence-free and energy-orthogonal.

    The flow is (p^2 mu vel, -q E p^2 mu, -q E p (1 - mu^2)); its phase-space
    divergence cancels between the p and mu components, and it is orthogonal
    to the gradient (q E, vel, 0) of the total energy.  Both residuals are
    assembled term by term at the sample points.
    """
    xs = np.asarray([pt[0] for pt in points])
    ps = np.asarray([pt[1] for pt in points])
    mus = np.asarray([pt[2] for pt in points])
    E = potential.efield_at(xs)
    vel = band_mod.velocity(band, ps)

    div_x = np.zeros_like(ps)                      # x-component has no x dependence
    div_p = -charge * E * 2.0 * ps * mus           # d/dp of -qE p^2 mu
    div_mu = charge * E * 2.0 * ps * mus           # d/dmu of -qE p (1 - mu^2)
    div = div_x + div_p + div_mu

    beta_dot_grad = (ps ** 2 * mus * vel) * (charge * E) \
        + (-charge * E * ps ** 2 * mus) * vel
    scale = np.maximum(np.abs(div_p), 1.0)
    return PhaseFlowReport(
        max_divergence=float(np.max(np.abs(div) / scale)),
        max_flow_dot_gradient=float(np.max(np.abs(beta_dot_grad)
                                           / np.maximum(np.abs(ps ** 2 * mus * vel * charge * E), 1.0))),
        points=len(points),
    )
