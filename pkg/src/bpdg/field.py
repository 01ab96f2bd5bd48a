"""DG representation of the distribution: per-cell tensor Legendre polynomials.

Coefficients are stored as ``coeffs[i, k, m, a, b, c]`` where (i, k, m) index
the (x, p, mu) cells and (a, b, c) the per-direction Legendre modes.  The flat
mode order used in snapshots is ``(a * (k+1) + b) * (k+1) + c``.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .quadrature import legendre_vals


@dataclass
class Field:
    mesh: object
    degree: int
    coeffs: np.ndarray

    @property
    def nb1(self):
        return self.degree + 1

    def copy(self):
        return Field(self.mesh, self.degree, self.coeffs.copy())


def zeros_like_field(mesh, degree):
    nb1 = degree + 1
    return Field(mesh, degree, np.zeros(mesh.shape() + (nb1, nb1, nb1)))


def project(mesh, degree, fn):
    """Per-cell L2 projection of ``fn(x, p, mu)`` onto the tensor basis.

    Uses Gauss quadrature with degree+2 nodes per direction on the
    unweighted reference measure.
    """
    from .quadrature import GAUSS, quad_rule

    nb1 = degree + 1
    rule = quad_rule(GAUSS, degree + 2)
    xg, wg = rule.nodes, rule.weights
    B = legendre_vals(degree, xg)
    norms = 1.0 / (2.0 * np.arange(nb1) + 1.0)

    xs = mesh.x_edges[:-1, None] + mesh.dx[:, None] * xg[None, :]
    ps = mesh.p_edges[:-1, None] + mesh.dp[:, None] * xg[None, :]
    mus = mesh.mu_edges[:-1, None] + mesh.dmu[:, None] * xg[None, :]

    X = xs[:, None, None, :, None, None]
    P = ps[None, :, None, None, :, None]
    MU = mus[None, None, :, None, None, :]
    vals = np.asarray(fn(X + 0.0 * MU, P + 0.0 * MU, MU + 0.0 * X), dtype=np.float64)
    vals = np.broadcast_to(vals, mesh.shape() + (xg.size,) * 3)

    wB = wg[None, :] * B  # (nb1, nq)
    coeffs = np.einsum("IKMqrs,aq,br,cs->IKMabc", vals, wB, wB, wB, optimize=True)
    coeffs /= norms[:, None, None] * norms[None, :, None] * norms[None, None, :]
    return Field(mesh, degree, coeffs)


def evaluate(field, cell, xi, eta, zeta):
    """Value of the cell polynomial at reference coordinates in [0, 1]^3."""
    i, k, m = cell
    for v in (xi, eta, zeta):
        if np.any((np.asarray(v) < 0.0) | (np.asarray(v) > 1.0)):
            raise DomainError("reference coordinates must lie in [0, 1]")
    bx = legendre_vals(field.degree, np.atleast_1d(xi))
    bp = legendre_vals(field.degree, np.atleast_1d(eta))
    bm = legendre_vals(field.degree, np.atleast_1d(zeta))
    out = np.einsum("abc,an,bn,cn->n", field.coeffs[i, k, m], bx, bp, bm)
    return float(out[0]) if np.isscalar(xi) else out


def averages_of_coeffs(coeffs, tables):
    """p^2-weighted cell averages of a coefficient array (exact)."""
    w2 = tables.w2
    return np.einsum("IKMb,Kb->IKM", coeffs[:, :, :, 0, :, 0], w2) / w2[None, :, 0, None]


def cell_averages(field, tables):
    """p^2-weighted cell averages for all cells (exact for the tensor basis)."""
    return averages_of_coeffs(field.coeffs, tables)


def cell_average(field, cell, tables):
    i, k, m = cell
    return float(np.dot(field.coeffs[i, k, m, 0, :, 0], tables.w2[k]) / tables.w2[k, 0])


def lobatto_node_values(field, tables):
    """Field values at the tensor Lobatto node set, shape (nx, np, nmu, nq, nq, nq)."""
    BL = tables.BL
    return np.einsum("IKMabc,aq,br,cs->IKMqrs", field.coeffs, BL, BL, BL, optimize=True)


def gauss_node_values(field, tables):
    """Field values at the tensor Gauss (volume quadrature) node set."""
    BG = tables.BG
    return np.einsum("IKMabc,aq,br,cs->IKMqrs", field.coeffs, BG, BG, BG, optimize=True)


def nodal_values(field, cell, direction, tables):
    """Positivity-node values for one cell, scanned direction on the first axis.

    Returns the tensor Lobatto values transposed so axis 0 runs along
    ``direction`` ("x", "p" or "mu"); slices [0] and [-1] are the traces the
    face fluxes use.  The in-face node sets here are also Lobatto, matching
    the face quadrature of the assembled operator.
    """
    i, k, m = cell
    BL = tables.BL
    vals = np.einsum("abc,aq,br,cs->qrs", field.coeffs[i, k, m], BL, BL, BL)
    axes = {"x": (0, 1, 2), "p": (1, 0, 2), "mu": (2, 0, 1)}
    try:
        order = axes[direction]
    except KeyError:
        raise ConfigError(f"unknown direction {direction!r}") from None
    return np.transpose(vals, order)


SNAPSHOT_FIXED_COLS = ("i", "k", "m", "x_c", "p_c", "mu_c", "cell_average")


def write_snapshot(field, tables, path):
    """CSV snapshot, one row per cell in lexicographic (i, k, m) order."""
    mesh = field.mesh
    nb1 = field.nb1
    avgs = cell_averages(field, tables)
    xc = 0.5 * (mesh.x_edges[:-1] + mesh.x_edges[1:])
    pc = 0.5 * (mesh.p_edges[:-1] + mesh.p_edges[1:])
    mc = 0.5 * (mesh.mu_edges[:-1] + mesh.mu_edges[1:])
    ncoef = nb1 ** 3
    header = list(SNAPSHOT_FIXED_COLS) + [f"coeff_{n}" for n in range(ncoef)]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for i in range(mesh.nx):
            for k in range(mesh.np_):
                for m in range(mesh.nmu):
                    flat = field.coeffs[i, k, m].reshape(ncoef)
                    row = [str(i), str(k), str(m),
                           "%.17g" % xc[i], "%.17g" % pc[k], "%.17g" % mc[m],
                           "%.17g" % avgs[i, k, m]]
                    row += ["%.17g" % v for v in flat]
                    wr.writerow(row)


def read_snapshot(mesh, degree, path):
    """Load a snapshot written by :func:`write_snapshot` onto a matching mesh."""
    nb1 = degree + 1
    ncoef = nb1 ** 3
    field = zeros_like_field(mesh, degree)
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if len(header) != len(SNAPSHOT_FIXED_COLS) + ncoef:
            raise ConfigError(f"snapshot {path} does not match degree {degree}")
        count = 0
        for row in rd:
            i, k, m = int(row[0]), int(row[1]), int(row[2])
            vals = np.array([float(v) for v in row[len(SNAPSHOT_FIXED_COLS):]])
            field.coeffs[i, k, m] = vals.reshape(nb1, nb1, nb1)
            count += 1
    if count != mesh.nx * mesh.np_ * mesh.nmu:
        raise ConfigError(f"snapshot {path} has {count} rows, expected {mesh.nx * mesh.np_ * mesh.nmu}")
    return field
