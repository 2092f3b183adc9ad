"""Orthonormal tensor-product Legendre basis and Gauss quadrature.

The basis on a cell ``C`` with center ``(cx, cy)`` and half-widths
``(hx, hy)`` is

    phi_(j1,j2)(x, y) = Lt_j1(xi) * Lt_j2(eta) / sqrt(hx*hy),

with ``xi = (x-cx)/hx``, ``eta = (y-cy)/hy`` and ``Lt_j`` the Legendre
polynomial normalized to unit L2 norm on [-1, 1].  The basis is orthonormal
in L2 over the physical cell; mode (0, 0) is the constant ``1/sqrt(|C|)``.
Modes are ordered lexicographically in the multi-index ``(j1, j2)`` with
``max(j1, j2) <= p-1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import DomainError


@dataclass(frozen=True)
class ModalBasis:
    p: int

    @property
    def modes(self):
        return tuple((j1, j2) for j1 in range(self.p) for j2 in range(self.p))

    @property
    def nmodes(self):
        return self.p * self.p


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class CellRect:
    """Axis-aligned cell given by center and half-widths."""

    cx: float
    cy: float
    hx: float
    hy: float

    @property
    def area(self):
        return 4.0 * self.hx * self.hy


def gauss_legendre_1d(n=5):
    """n-point Gauss rule on [-1, 1]; exact for degree <= 2n-1."""
    x, w = npleg.leggauss(n)
    return QuadRule(x, w)


def tensor_rule(n=5):
    """Tensor-product Gauss rule on [-1, 1]^2, nodes shaped (n*n, 2)."""
    g = gauss_legendre_1d(n)
    xi, eta = np.meshgrid(g.nodes, g.nodes, indexing="ij")
    nodes = np.column_stack([xi.ravel(), eta.ravel()])
    weights = np.outer(g.weights, g.weights).ravel()
    return QuadRule(nodes, weights)


def _legendre_table(p, xi):
    """Normalized Legendre values, shape (len(xi), p)."""
    xi = np.asarray(xi, dtype=float)
    van = npleg.legvander(xi, p - 1)
    scale = np.sqrt((2.0 * np.arange(p) + 1.0) / 2.0)
    return van * scale


def _legendre_deriv_table(p, xi):
    xi = np.asarray(xi, dtype=float)
    out = np.empty((xi.size, p))
    scale = np.sqrt((2.0 * np.arange(p) + 1.0) / 2.0)
    for j in range(p):
        coef = np.zeros(j + 1)
        coef[j] = 1.0
        out[:, j] = npleg.legval(xi, npleg.legder(coef)) if j > 0 else 0.0
    return out * scale


def eval_basis(basis, cell, points):
    """Evaluate all modes at physical points inside the closure of ``cell``.

    Returns an array of shape ``(npoints, nmodes)`` (or ``(nmodes,)`` for a
    single point).  Points outside the cell raise :class:`DomainError`.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xi = (pts[:, 0] - cell.cx) / cell.hx
    eta = (pts[:, 1] - cell.cy) / cell.hy
    if np.any(np.abs(xi) > 1.0 + 1e-12) or np.any(np.abs(eta) > 1.0 + 1e-12):
        raise DomainError("point outside cell")
    v1 = _legendre_table(basis.p, xi)
    v2 = _legendre_table(basis.p, eta)
    j1, j2 = np.divmod(np.arange(basis.nmodes), basis.p)
    vals = v1[:, j1] * v2[:, j2] / np.sqrt(cell.hx * cell.hy)
    return vals[0] if np.ndim(points) == 1 else vals


def l2_project(f, cell, basis, quad=None):
    """Modal coefficients of the L2 projection of ``f`` onto the cell.

    ``f`` maps an (n, 2) array of physical points to values of shape (n,)
    or (n, nvars).  Exact whenever ``f * phi`` has per-direction degree
    <= 2*nq - 1 (nine for the default five-point rule).
    """
    if quad is None:
        quad = tensor_rule(5)
    pts = np.column_stack([
        cell.cx + cell.hx * quad.nodes[:, 0],
        cell.cy + cell.hy * quad.nodes[:, 1],
    ])
    w_phys = quad.weights * cell.hx * cell.hy
    phi = eval_basis(basis, cell, pts)
    fv = np.asarray(f(pts), dtype=float)
    if fv.ndim == 1:
        return phi.T @ (w_phys * fv)
    return np.einsum("qm,q,qv->mv", phi, w_phys, fv)


def gram_matrix(basis, cell, quad=None):
    """Mass matrix of the basis under the quadrature rule (identity if exact)."""
    if quad is None:
        quad = tensor_rule(5)
    pts = np.column_stack([
        cell.cx + cell.hx * quad.nodes[:, 0],
        cell.cy + cell.hy * quad.nodes[:, 1],
    ])
    phi = eval_basis(basis, cell, pts)
    w_phys = quad.weights * cell.hx * cell.hy
    return np.einsum("qm,q,qn->mn", phi, w_phys, phi)


class BlockTables:
    """Precomputed basis/quadrature tables for one uniform mesh block.

    All cells of a block are congruent, so a single set of tables serves the
    whole block: basis values and derivatives at volume quadrature points,
    traces at face quadrature points, exact stiffness-type matrices, limiter
    midpoint values and plot sample values.
    """

    def __init__(self, block, p, nq=5):
        self.block = block
        self.p = p
        self.nq = nq
        self.basis = ModalBasis(p)
        M = self.basis.nmodes
        self.nmodes = M
        hx, hy = block.dx / 2.0, block.dy / 2.0
        self.half = (hx, hy)
        self.norm = np.sqrt(hx * hy)
        self.phi0 = 1.0 / np.sqrt(block.cell_area)

        g = gauss_legendre_1d(nq)
        self.gauss = g
        j1, j2 = np.divmod(np.arange(M), p)
        self.j1, self.j2 = j1, j2
        self.idx10 = p      # mode (1, 0)
        self.idx01 = 1      # mode (0, 1)

        V = _legendre_table(p, g.nodes)          # (nq, p)
        D = _legendre_deriv_table(p, g.nodes)    # (nq, p)
        Vm = _legendre_table(p, [-1.0])[0]
        Vp = _legendre_table(p, [1.0])[0]
        V0 = _legendre_table(p, [0.0])[0]

        # volume points ordered q = a*nq + b, (xi, eta) = (g[a], g[b])
        a, b = np.divmod(np.arange(nq * nq), nq)
        self.vol_ref = np.column_stack([g.nodes[a], g.nodes[b]])
        self.w_vol = g.weights[a] * g.weights[b] * hx * hy
        self.phi_vol = V[a][:, j1] * V[b][:, j2] / self.norm
        dphi = np.empty((2, nq * nq, M))
        dphi[0] = (D[a][:, j1] / hx) * V[b][:, j2] / self.norm
        dphi[1] = V[a][:, j1] * (D[b][:, j2] / hy) / self.norm
        self.dphi_vol = dphi

        # exact: integrand degree <= 2p-3 per direction
        self.stiff = np.einsum("q,qm,kqn->kmn", self.w_vol, self.phi_vol, dphi)

        # faces: trace values at the nq Gauss points along each side,
        # ordered by increasing tangential coordinate
        t = np.arange(nq)
        self.face_phi = {
            "W": Vm[j1] * V[t][:, j2] / self.norm,
            "E": Vp[j1] * V[t][:, j2] / self.norm,
            "S": V[t][:, j1] * Vm[j2] / self.norm,
            "N": V[t][:, j1] * Vp[j2] / self.norm,
        }
        self.face_w = {
            "W": g.weights * hy, "E": g.weights * hy,
            "S": g.weights * hx, "N": g.weights * hx,
        }

        # face midpoints for the limiter, order E, W, N, S
        self.mid_phi = np.stack([
            Vp[j1] * V0[j2], Vm[j1] * V0[j2],
            V0[j1] * Vp[j2], V0[j1] * Vm[j2],
        ]) / self.norm
        if p >= 2:
            self.phi10_mid = float(Vp[1] * V0[0] / self.norm)  # mode (1,0) at E mid
            self.phi01_mid = float(V0[0] * Vp[1] / self.norm)  # mode (0,1) at N mid
        else:
            self.phi10_mid = self.phi01_mid = None

        # plot samples: (p+1)x(p+1) uniform sub-cell centers
        s = -1.0 + (2.0 * np.arange(p + 1) + 1.0) / (p + 1)
        sa, sb = np.divmod(np.arange((p + 1) ** 2), p + 1)
        self.plot_ref = np.column_stack([s[sa], s[sb]])
        Vs = _legendre_table(p, s)
        self.plot_phi = Vs[sa][:, j1] * Vs[sb][:, j2] / self.norm

    def cell_points(self, centers, ref):
        """Physical coordinates of reference points in every cell.

        ``centers``: (nc, 2); ``ref``: (nq, 2) in [-1, 1]^2.
        Returns (nc, nq, 2).
        """
        hx, hy = self.half
        out = np.empty((centers.shape[0], ref.shape[0], 2))
        out[:, :, 0] = centers[:, None, 0] + hx * ref[None, :, 0]
        out[:, :, 1] = centers[:, None, 1] + hy * ref[None, :, 1]
        return out

    def project(self, fn, centers):
        """L2-project a pointwise field onto all cells; returns (nc, M, nv)."""
        pts = self.cell_points(centers, self.vol_ref)
        vals = np.asarray(fn(pts.reshape(-1, 2)), dtype=float)
        nv = 1 if vals.ndim == 1 else vals.shape[-1]
        vals = vals.reshape(centers.shape[0], self.vol_ref.shape[0], nv)
        return np.einsum("cqv,q,qm->cmv", vals, self.w_vol, self.phi_vol)
