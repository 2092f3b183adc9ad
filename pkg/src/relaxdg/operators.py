"""Semi-discrete DG right-hand sides on the two-block mesh.

Two assembly paths share the mesh, basis tables and flux machinery:

* the relaxation-limit scheme, which evolves only the physical states and
  evaluates interface coupling data from projected flux traces, and
* the finite-epsilon relaxation scheme, which evolves auxiliary flux-like
  variables ``(V1, V2)`` on the fluid block (the solid model is linear and
  never relaxed) and treats the stiff source implicitly.

Interior faces use upwind-type fluxes built from trace dissipation plus the
average of the projected flux traces; the dissipation speed is either the
local two-trace wave speed or the subdomain-global speed.  Interface faces
replace the outer trace by the coupling data of the interface Riemann
solver.  Assembly is vectorized over the faces of each structured group.
"""

from __future__ import annotations

import numpy as np

from .basis import BlockTables
from .coupling import fsi_riemann_solver
from .errors import AdmissibilityError, ConfigError
from .fields import DGField, FluxTallies
from .mesh import SIDE_NORMAL
from .models import rotate_elastic, rotate_fluid


def _tangent(n):
    return np.array([-n[1], n[0]])


def interior_flux(U_minus, U_plus, n, model, speed_mode="local",
                  global_speed=None, Fn_minus=None, Fn_plus=None):
    """Upwind-type numerical flux at a non-interface face.

    ``Fn_minus``/``Fn_plus`` are the traces of the projected normal flux; if
    omitted, the pointwise normal flux of the traces is used (exact for
    linear models, adequate for standalone evaluations).
    """
    if Fn_minus is None:
        Fn_minus = model.normal_flux(U_minus, n)
    if Fn_plus is None:
        Fn_plus = model.normal_flux(U_plus, n)
    if speed_mode == "global":
        if global_speed is None:
            raise ConfigError("global speed mode requires a speed value")
        lam = global_speed
        diss = lam * (np.asarray(U_minus) - np.asarray(U_plus))
    else:
        lam = np.maximum(model.max_wave_speed(U_minus, n),
                         model.max_wave_speed(U_plus, n))
        diss = lam[..., None] * (np.asarray(U_minus) - np.asarray(U_plus))
    return 0.5 * diss + 0.5 * (np.asarray(Fn_minus) + np.asarray(Fn_plus))


def interface_flux(U_minus, U_plus, Fn_minus, Fn_plus, n, lam_pair,
                   elastic_model, fluid_model):
    """Coupled interface fluxes from the interface Riemann solver.

    ``n`` points from the solid into the fluid.  Returns the pair
    ``(solid flux, fluid flux)``, each with respect to the owning cell's own
    outward normal (``n`` for the solid side, ``-n`` for the fluid side),
    together with the Riemann-solver result for diagnostics.
    """
    lam1, lam2 = lam_pair
    Umr = rotate_elastic(U_minus, n)
    Upr = rotate_fluid(U_plus, n)
    Fmr = rotate_elastic(Fn_minus, n)
    Fpr = rotate_fluid(Fn_plus, n)

    res = fsi_riemann_solver(Umr, Upr, Fpr, lam2, elastic_model.params,
                             fluid_model.params)
    # unrelaxed side: the auxiliary state collapses onto the physical flux
    VnR = res.U_R @ elastic_model.A1.T
    g_solid = 0.5 * lam1 * (Umr - res.U_R) + 0.5 * (Fmr + VnR)
    g_fluid = 0.5 * lam2 * (Upr - res.U_L) - 0.5 * (Fpr + res.V_L)
    return (rotate_elastic(g_solid, n, inverse=True),
            rotate_fluid(g_fluid, n, inverse=True), res)


def relaxation_flux(Q_in, Q_out, n, lam):
    """Godunov flux of the equal-speed relaxation system in closed form.

    ``Q = (U, V1, V2)`` along the last axis; ``n`` is the outward unit
    normal of the owning cell and ``lam`` the relaxation speed.  Equals the
    flux-vector splitting A^{n,+} Q_in + A^{n,-} Q_out of the block system.
    """
    m = Q_in.shape[-1] // 3
    Ui, V1i, V2i = Q_in[..., :m], Q_in[..., m:2 * m], Q_in[..., 2 * m:]
    Uo, V1o, V2o = Q_out[..., :m], Q_out[..., m:2 * m], Q_out[..., 2 * m:]
    Vni = n[0] * V1i + n[1] * V2i
    Vno = n[0] * V1o + n[1] * V2o
    f = np.empty_like(Q_in)
    f[..., :m] = 0.5 * lam * (Ui - Uo) + 0.5 * (Vni + Vno)
    fv = 0.5 * lam * (Vni - Vno) + 0.5 * lam ** 2 * (Ui + Uo)
    f[..., m:2 * m] = n[0] * fv
    f[..., 2 * m:] = n[1] * fv
    return f


def _minmod3(a, b, c):
    sa = np.sign(a)
    agree = (sa == np.sign(b)) & (sa == np.sign(c))
    return np.where(agree, sa * np.minimum(np.abs(a),
                    np.minimum(np.abs(b), np.abs(c))), 0.0)


def _minmod_tvb(a, dp, dm, tol):
    return np.where(np.abs(a) <= tol, a, _minmod3(a, dp, dm))


class DGOperators:
    """Assembles right-hand sides, limiter and diagnostics for one setup."""

    def __init__(self, mesh, p, models, *, speed_mode="local",
                 interface_safety=1.0, boundary="outflow", tvb_m=50.0):
        if speed_mode not in ("local", "global"):
            raise ConfigError(f"unknown speed mode {speed_mode!r}")
        if boundary not in ("outflow", "reflective"):
            raise ConfigError(f"unknown boundary policy {boundary!r}")
        self.mesh = mesh
        self.p = p
        self.models = tuple(models)
        self.speed_mode = speed_mode
        self.interface_safety = interface_safety
        self.boundary = boundary
        self.tvb_m = tvb_m
        self.tables = tuple(BlockTables(b, p) for b in mesh.blocks)
        self.centers = tuple(b.centers() for b in mesh.blocks)
        if mesh.interface is not None:
            if len(self.models) != 2:
                raise ConfigError("coupled mesh needs one model per block")
            if self.models[0].name != "elastic" or self.models[1].name != "fluid":
                raise ConfigError(
                    "interface coupling expects (elastic, fluid) models")

    # -- projection and evaluation --------------------------------------

    def project(self, fns):
        """L2-project per-block pointwise fields; fns[b](points)->(n, nv)."""
        return DGField([self.tables[b].project(fns[b], self.centers[b])
                        for b in range(len(self.mesh.blocks))])

    def volume_values(self, coef, b):
        return np.einsum("qm,cmv->cqv", self.tables[b].phi_vol, coef)

    def trace(self, coef, cells, b, side):
        return np.einsum("qm,cmv->cqv", self.tables[b].face_phi[side],
                         coef[cells])

    def cell_means(self, coef, b):
        return coef[:, 0, :] * self.tables[b].phi0

    def total_integrals(self, field):
        """Per-block integral of every variable over the subdomain."""
        out = []
        for b, coef in enumerate(field.blocks):
            out.append(coef[:, 0, :].sum(axis=0)
                       * np.sqrt(self.mesh.blocks[b].cell_area))
        return out

    def eval_points(self, field, b, points, deriv=None):
        """Evaluate the field (or a first derivative) at physical points."""
        from .basis import _legendre_deriv_table, _legendre_table
        blk = self.mesh.blocks[b]
        tab = self.tables[b]
        pts = np.atleast_2d(points)
        cells = blk.locate(pts)
        cen = self.centers[b][cells]
        hx, hy = tab.half
        xi = (pts[:, 0] - cen[:, 0]) / hx
        eta = (pts[:, 1] - cen[:, 1]) / hy
        Vx = _legendre_table(self.p, xi)
        Vy = _legendre_table(self.p, eta)
        if deriv == 0:
            Vx = _legendre_deriv_table(self.p, xi) / hx
        elif deriv == 1:
            Vy = _legendre_deriv_table(self.p, eta) / hy
        phi = Vx[:, tab.j1] * Vy[:, tab.j2] / tab.norm
        return np.einsum("nm,nmv->nv", phi, field.blocks[b][cells])

    # -- flux projection -------------------------------------------------

    def flux_coefficients(self, coef, b, check_context=""):
        """Modal coefficients of both directional fluxes, shape (2, nc, M, nv)."""
        model = self.models[b]
        tab = self.tables[b]
        if model.name == "elastic":
            out = np.empty((2,) + coef.shape)
            out[0] = coef @ model.A1.T
            out[1] = coef @ model.A2.T
            return out
        Uq = self.volume_values(coef, b)
        ok = model.admissible(Uq)
        if not np.all(ok):
            cell, node = map(int, np.argwhere(~ok)[0])
            raise AdmissibilityError(
                "inadmissible state at volume quadrature node",
                block=b + 1, cell=cell, node=node, where=check_context)
        F = np.stack([model.flux(Uq, 1), model.flux(Uq, 2)])
        return np.einsum("kcqv,q,qm->kcmv", F, tab.w_vol, tab.phi_vol,
                         optimize=True)

    def flux_projection(self, field, b, direction):
        """Spec-facing single-direction flux projection (direction 1 or 2)."""
        return self.flux_coefficients(field.blocks[b], b)[direction - 1]

    # -- wave speeds ------------------------------------------------------

    def wave_speeds(self, field):
        """Per-block maximal wave speed bounds from the current field."""
        speeds = []
        for b, model in enumerate(self.models):
            if model.name == "elastic":
                speeds.append(model.params.c1)
                continue
            vals = self.volume_values(field.blocks[b], b)[..., :model.nvars]
            model.check_admissible(vals, where="wave speed scan")
            lam = float(np.max(model.max_wave_speed(vals)))
            if self.mesh.interface is not None:
                g = self.mesh.interface
                tr = self.trace(field.blocks[b][:, :, :model.nvars],
                                g.cells2, b, g.side2)
                lam = max(lam, float(np.max(model.max_wave_speed(tr))))
            if lam <= 0.0:
                raise ConfigError("zero wave speed everywhere: static problem")
            speeds.append(lam)
        return tuple(speeds)

    # -- limit-scheme right-hand side --------------------------------------

    def rhs_limit(self, field, lam_pair):
        """Volume minus surface terms of the relaxation-limit scheme.

        Returns ``(time derivative, flux tallies)``.
        """
        mesh = self.mesh
        nblocks = len(mesh.blocks)
        fcoefs = [self.flux_coefficients(field.blocks[b], b, "volume term")
                  for b in range(nblocks)]
        out = []
        tallies = FluxTallies.zeros([f.shape[-1] for f in fcoefs])
        for b in range(nblocks):
            tab = self.tables[b]
            H = np.einsum("kcmv,kmj->cjv", fcoefs[b], tab.stiff)
            out.append(H)

        for b in range(nblocks):
            coef = field.blocks[b]
            model = self.models[b]
            tab = self.tables[b]
            for grp in mesh.interior_groups[b]:
                axis = 0 if grp.normal[0] != 0.0 else 1
                Um = self.trace(coef, grp.left, b, grp.left_side)
                Up = self.trace(coef, grp.right, b, grp.right_side)
                Fm = self.trace(fcoefs[b][axis], grp.left, b, grp.left_side)
                Fp = self.trace(fcoefs[b][axis], grp.right, b, grp.right_side)
                g = interior_flux(Um, Up, grp.normal, model, self.speed_mode,
                                  lam_pair[b], Fm, Fp)
                wq = tab.face_w[grp.left_side]
                out[b][grp.left] -= np.einsum(
                    "fqv,q,qm->fmv", g, wq, tab.face_phi[grp.left_side])
                out[b][grp.right] += np.einsum(
                    "fqv,q,qm->fmv", g, wq, tab.face_phi[grp.right_side])

            for side, cells in mesh.boundary_groups[b].items():
                n = SIDE_NORMAL[side]
                axis = 0 if n[0] != 0.0 else 1
                sgn = n[axis]
                Um = self.trace(coef, cells, b, side)
                Fm = sgn * self.trace(fcoefs[b][axis], cells, b, side)
                Up, Fp = self._ghost(Um, Fm, n, model)
                g = interior_flux(Um, Up, n, model, self.speed_mode,
                                  lam_pair[b], Fm, Fp)
                wq = tab.face_w[side]
                out[b][cells] -= np.einsum(
                    "fqv,q,qm->fmv", g, wq, tab.face_phi[side])
                tallies.outer[b] += np.einsum("fqv,q->v", g, wq)

        if mesh.interface is not None:
            self._interface_limit(field, fcoefs, lam_pair, out, tallies)
        return DGField(out), tallies

    def _ghost(self, Um, Fm, n, model):
        if self.boundary == "outflow":
            return Um, Fm
        return model.mirror(Um, n), -model.mirror(Fm, n)

    def _interface_limit(self, field, fcoefs, lam_pair, out, tallies):
        mesh = self.mesh
        g = mesh.interface
        n = g.normal
        axis = 0 if n[0] != 0.0 else 1
        sgn = n[axis]
        t1, t2 = self.tables
        lam2 = lam_pair[1] * self.interface_safety

        Um = self.trace(field.blocks[0], g.cells1, 0, g.side1)
        Up = self.trace(field.blocks[1], g.cells2, 1, g.side2)
        Fm = sgn * self.trace(fcoefs[0][axis], g.cells1, 0, g.side1)
        Fp = sgn * self.trace(fcoefs[1][axis], g.cells2, 1, g.side2)
        try:
            gs, gf, _ = interface_flux(Um, Up, Fm, Fp, n,
                                       (lam_pair[0], lam2),
                                       self.models[0], self.models[1])
        except AdmissibilityError as exc:
            raise AdmissibilityError(
                "interface Riemann solver rejected coupling data",
                normal=tuple(n), **exc.context) from exc
        wq1 = t1.face_w[g.side1]
        wq2 = t2.face_w[g.side2]
        out[0][g.cells1] -= np.einsum("fqv,q,qm->fmv", gs, wq1,
                                      t1.face_phi[g.side1])
        out[1][g.cells2] -= np.einsum("fqv,q,qm->fmv", gf, wq2,
                                      t2.face_phi[g.side2])
        tallies.interface[0] += np.einsum("fqv,q->v", gs, wq1)
        tallies.interface[1] += np.einsum("fqv,q->v", gf, wq2)

    # -- finite-epsilon relaxation right-hand side ------------------------

    def split_relax(self, coef):
        """Views (U, V1, V2) of a fluid-block relaxation coefficient array."""
        nv = self.models[1].nvars
        return coef[..., :nv], coef[..., nv:2 * nv], coef[..., 2 * nv:3 * nv]

    def rhs_relax(self, field, lam_pair):
        """Nonstiff part (transport) of the relaxation scheme; the stiff
        source is handled by ``stiff_residual``/``stiff_solve``."""
        mesh = self.mesh
        if mesh.interface is None or len(mesh.blocks) != 2:
            raise ConfigError("relaxation path expects the coupled mesh")
        solid, fluid = self.models
        t1, t2 = self.tables
        lam2 = lam_pair[1] * self.interface_safety

        # solid block: identical to the limit path
        fc0 = self.flux_coefficients(field.blocks[0], 0, "volume term")
        H0 = np.einsum("kcmv,kmj->cjv", fc0, t1.stiff)

        # fluid block: linear relaxation transport
        coef = field.blocks[1]
        U, V1, V2 = self.split_relax(coef)
        G = np.empty_like(coef)
        G[..., :4] = (np.einsum("cmv,mj->cjv", V1, t2.stiff[0])
                      + np.einsum("cmv,mj->cjv", V2, t2.stiff[1]))
        G[..., 4:8] = lam2 ** 2 * np.einsum("cmv,mj->cjv", U, t2.stiff[0])
        G[..., 8:12] = lam2 ** 2 * np.einsum("cmv,mj->cjv", U, t2.stiff[1])
        out = [H0, G]

        # solid interior and boundary faces
        coef0 = field.blocks[0]
        for grp in mesh.interior_groups[0]:
            axis = 0 if grp.normal[0] != 0.0 else 1
            Um = self.trace(coef0, grp.left, 0, grp.left_side)
            Upl = self.trace(coef0, grp.right, 0, grp.right_side)
            Fm = self.trace(fc0[axis], grp.left, 0, grp.left_side)
            Fp = self.trace(fc0[axis], grp.right, 0, grp.right_side)
            g = interior_flux(Um, Upl, grp.normal, solid, self.speed_mode,
                              lam_pair[0], Fm, Fp)
            wq = t1.face_w[grp.left_side]
            out[0][grp.left] -= np.einsum("fqv,q,qm->fmv", g, wq,
                                          t1.face_phi[grp.left_side])
            out[0][grp.right] += np.einsum("fqv,q,qm->fmv", g, wq,
                                           t1.face_phi[grp.right_side])
        for side, cells in mesh.boundary_groups[0].items():
            n = SIDE_NORMAL[side]
            axis = 0 if n[0] != 0.0 else 1
            Um = self.trace(coef0, cells, 0, side)
            Fm = n[axis] * self.trace(fc0[axis], cells, 0, side)
            Upl, Fp = self._ghost(Um, Fm, n, solid)
            g = interior_flux(Um, Upl, n, solid, self.speed_mode,
                              lam_pair[0], Fm, Fp)
            out[0][cells] -= np.einsum("fqv,q,qm->fmv", g,
                                       t1.face_w[side], t1.face_phi[side])

        # fluid interior and boundary faces: upwind fluxes of the linear
        # relaxation system
        def relax_face_flux(Qin, Qout, nvec):
            return relaxation_flux(Qin, Qout, nvec, lam2)

        for grp in mesh.interior_groups[1]:
            Qm = self.trace(coef, grp.left, 1, grp.left_side)
            Qp = self.trace(coef, grp.right, 1, grp.right_side)
            g = relax_face_flux(Qm, Qp, grp.normal)
            wq = t2.face_w[grp.left_side]
            out[1][grp.left] -= np.einsum("fqv,q,qm->fmv", g, wq,
                                          t2.face_phi[grp.left_side])
            out[1][grp.right] += np.einsum("fqv,q,qm->fmv", g, wq,
                                           t2.face_phi[grp.right_side])
        for side, cells in mesh.boundary_groups[1].items():
            n = SIDE_NORMAL[side]
            Qm = self.trace(coef, cells, 1, side)
            if self.boundary == "outflow":
                Qp = Qm
            else:
                Qp = self._mirror_relax(Qm, n)
            g = relax_face_flux(Qm, Qp, n)
            out[1][cells] -= np.einsum("fqv,q,qm->fmv", g,
                                       t2.face_w[side], t2.face_phi[side])

        # interface: RS fed with the evolved normal relaxation trace
        g = mesh.interface
        n = g.normal
        axis = 0 if n[0] != 0.0 else 1
        sgn = n[axis]
        tvec = _tangent(n)
        Um = self.trace(coef0, g.cells1, 0, g.side1)
        Fm = sgn * self.trace(fc0[axis], g.cells1, 0, g.side1)
        Qp = self.trace(coef, g.cells2, 1, g.side2)
        Up, V1p, V2p = Qp[..., :4], Qp[..., 4:8], Qp[..., 8:12]
        Vn_p = n[0] * V1p + n[1] * V2p
        Vt_p = tvec[0] * V1p + tvec[1] * V2p

        Umr = rotate_elastic(Um, n)
        Upr = rotate_fluid(Up, n)
        Vnr = rotate_fluid(Vn_p, n)
        res = fsi_riemann_solver(Umr, Upr, Vnr, lam2, solid.params, fluid.params)
        VnR = res.U_R @ solid.A1.T
        gs = 0.5 * lam_pair[0] * (Umr - res.U_R) + 0.5 * (rotate_elastic(Fm, n) + VnR)
        gs = rotate_elastic(gs, n, inverse=True)
        out[0][g.cells1] -= np.einsum("fqv,q,qm->fmv", gs, t1.face_w[g.side1],
                                      t1.face_phi[g.side1])

        U_L = rotate_fluid(res.U_L, n, inverse=True)
        Vn_L = rotate_fluid(res.V_L, n, inverse=True)
        Q_L = np.concatenate([
            U_L,
            n[0] * Vn_L + tvec[0] * Vt_p,
            n[1] * Vn_L + tvec[1] * Vt_p,
        ], axis=-1)
        gf = relax_face_flux(Qp, Q_L, -n)
        out[1][g.cells2] -= np.einsum("fqv,q,qm->fmv", gf, t2.face_w[g.side2],
                                      t2.face_phi[g.side2])
        return DGField(out)

    def _mirror_relax(self, Q, n):
        fluid = self.models[1]
        U, V1, V2 = Q[..., :4], Q[..., 4:8], Q[..., 8:12]
        tvec = _tangent(n)
        Vn = n[0] * V1 + n[1] * V2
        Vt = tvec[0] * V1 + tvec[1] * V2
        Ug = fluid.mirror(U, n)
        Vng = -fluid.mirror(Vn, n)
        Vtg = fluid.mirror(Vt, n)
        return np.concatenate([
            Ug, n[0] * Vng + tvec[0] * Vtg, n[1] * Vng + tvec[1] * Vtg,
        ], axis=-1)

    def stiff_residual(self, field):
        """Relaxation source R (not scaled by 1/eps): projection of the flux
        minus the auxiliary coefficients, zero on physical components."""
        out = [np.zeros_like(field.blocks[0])]
        coef = field.blocks[1]
        U, V1, V2 = self.split_relax(coef)
        fproj = self.flux_coefficients(U, 1, "stiff source")
        R = np.zeros_like(coef)
        R[..., 4:8] = fproj[0] - V1
        R[..., 8:12] = fproj[1] - V2
        out.append(R)
        return DGField(out)

    def stiff_solve(self, partial, coeff):
        """Solve Q = partial + coeff * R(Q) in closed form (R affine in V)."""
        out = [partial.blocks[0].copy()]
        coef = partial.blocks[1].copy()
        U, V1, V2 = self.split_relax(coef)
        fproj = self.flux_coefficients(U, 1, "stiff solve")
        fac = 1.0 / (1.0 + coeff)
        coef[..., 4:8] = (V1 + coeff * fproj[0]) * fac
        coef[..., 8:12] = (V2 + coeff * fproj[1]) * fac
        out.append(coef)
        return DGField(out)

    def compatible_relax_field(self, limit_field):
        """Extend a limit-path field with V = projection of F(U)."""
        U = limit_field.blocks[1]
        fproj = self.flux_coefficients(U, 1, "compatibility init")
        return DGField([limit_field.blocks[0].copy(),
                        np.concatenate([U, fproj[0], fproj[1]], axis=-1)])

    def limit_view(self, relax_field):
        """Physical-state view of a relaxation field (drops V1, V2)."""
        return DGField([relax_field.blocks[0].copy(),
                        relax_field.blocks[1][..., :4].copy()])

    # -- interface residual ------------------------------------------------

    def interface_residual(self, field):
        """Max |Psi_U| per component over all interface quadrature points."""
        g = self.mesh.interface
        if g is None:
            return (0.0, 0.0)
        from .coupling import psi_u
        Um = self.trace(field.blocks[0], g.cells1, 0, g.side1)
        Up = self.trace(field.blocks[1][..., :4], g.cells2, 1, g.side2)
        r = psi_u(Um, Up, g.normal, self.models[1].params)
        return (float(np.max(np.abs(r[..., 0]))),
                float(np.max(np.abs(r[..., 1]))))

    # -- TVB (minmod) limiter ----------------------------------------------

    def tvb_limit(self, field, M=None):
        """Per-cell slope limiter with TVB tolerance M*h^2.

        A cell is flagged when either face-midpoint deviation of the full
        polynomial exceeds the (TVB-relaxed) minmod of the neighbor mean
        differences in that direction; flagged cells are rebuilt as linear
        with minmod-limited slopes.  Cell means are never altered.  Missing
        neighbors (outer boundary, interface) impose no constraint.
        """
        if M is None:
            M = self.tvb_m
        if self.p == 1:
            return field.copy()
        out = []
        for b, coef in enumerate(field.blocks):
            out.append(self._limit_block(coef, b, M))
        return DGField(out)

    def _limit_block(self, coef, b, M):
        blk = self.mesh.blocks[b]
        tab = self.tables[b]
        nx, ny, nm = blk.nx, blk.ny, tab.nmodes
        nv = coef.shape[-1]
        c = coef.reshape(ny, nx, nm, nv)
        mean = c[:, :, 0, :] * tab.phi0
        mids = np.einsum("sm,yxmv->syxv", tab.mid_phi, c)
        devE = mids[0] - mean
        devW = mean - mids[1]
        devN = mids[2] - mean
        devS = mean - mids[3]

        big = np.inf
        dxp = np.full_like(mean, big)
        dxm = np.full_like(mean, big)
        dxp[:, :-1] = mean[:, 1:] - mean[:, :-1]
        dxm[:, 1:] = mean[:, 1:] - mean[:, :-1]
        dyp = np.full_like(mean, big)
        dym = np.full_like(mean, big)
        dyp[:-1, :] = mean[1:, :] - mean[:-1, :]
        dym[1:, :] = mean[1:, :] - mean[:-1, :]

        def edged(d, a):
            return np.where(np.isinf(d), a, d)

        tol_x = M * blk.dx ** 2
        tol_y = M * blk.dy ** 2
        mE = _minmod_tvb(devE, edged(dxp, devE), edged(dxm, devE), tol_x)
        mW = _minmod_tvb(devW, edged(dxp, devW), edged(dxm, devW), tol_x)
        mN = _minmod_tvb(devN, edged(dyp, devN), edged(dym, devN), tol_y)
        mS = _minmod_tvb(devS, edged(dyp, devS), edged(dym, devS), tol_y)
        trigger = ((mE != devE) | (mW != devW) | (mN != devN) | (mS != devS))
        if not np.any(trigger):
            return coef.copy()

        lin_x = c[:, :, tab.idx10, :] * tab.phi10_mid
        lin_y = c[:, :, tab.idx01, :] * tab.phi01_mid
        sx = _minmod_tvb(lin_x, edged(dxp, lin_x), edged(dxm, lin_x), tol_x)
        sy = _minmod_tvb(lin_y, edged(dyp, lin_y), edged(dym, lin_y), tol_y)

        rebuilt = np.zeros_like(c)
        rebuilt[:, :, 0, :] = c[:, :, 0, :]
        rebuilt[:, :, tab.idx10, :] = sx / tab.phi10_mid
        rebuilt[:, :, tab.idx01, :] = sy / tab.phi01_mid
        new = np.where(trigger[:, :, None, :], rebuilt, c)
        return new.reshape(coef.shape)

    # -- plot sampling -----------------------------------------------------

    def plot_samples(self, field, b):
        """(points, values) on the uniform (p+1)^2 sub-cell sample grid."""
        tab = self.tables[b]
        pts = self.cell_points(b, tab.plot_ref)
        vals = np.einsum("qm,cmv->cqv", tab.plot_phi, field.blocks[b])
        return pts.reshape(-1, 2), vals.reshape(-1, vals.shape[-1])

    def cell_points(self, b, ref):
        return self.tables[b].cell_points(self.centers[b], ref)
