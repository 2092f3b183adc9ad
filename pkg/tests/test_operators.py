import numpy as np
import pytest

from relaxdg.basis import CellRect, ModalBasis, eval_basis, gauss_legendre_1d
from relaxdg.errors import AdmissibilityError
from relaxdg.fields import DGField
from relaxdg.mesh import build_mesh, single_block_mesh
from relaxdg.models import (ElasticModel, ElasticParams, FluidModel,
                            FluidParams)
from relaxdg.operators import (DGOperators, interface_flux, interior_flux,
                               relaxation_flux)

EL = ElasticParams(rho_s=1.0, c1=2.0, c2=1.0)
FL = FluidParams(gamma=1.4, pi=0.0)
DOM1 = (-1.0, 0.0, 0.0, 1.0)
DOM2 = (0.0, 1.0, 0.0, 1.0)


def coupled_ops(nx=3, ny=4, p=3, **kw):
    mesh = build_mesh(DOM1, DOM2, nx, ny, nx, ny)
    return DGOperators(mesh, p, (ElasticModel(EL), FluidModel(FL)), **kw)


def equilibrium_field(ops, p_val=1.0):
    solid = np.array([0.0, 0.0, -p_val, 0.0, 0.0])
    fm = ops.models[1]
    fluid = fm.from_primitive(1.0, np.array([0.0, 0.0]), p_val)
    return ops.project([
        lambda x: np.broadcast_to(solid, (x.shape[0], 5)),
        lambda x: np.broadcast_to(fluid, (x.shape[0], 4)),
    ])


# -- flux projection ------------------------------------------------------

def test_flux_projection_elastic_exact():
    ops = coupled_ops()
    rng = np.random.default_rng(0)
    coef = rng.normal(size=(ops.mesh.blocks[0].ncells, 9, 5))
    fc = ops.flux_coefficients(coef, 0)
    model = ops.models[0]
    assert np.max(np.abs(fc[0] - coef @ model.A1.T)) < 1e-13
    # projection of a linear flux equals the flux of the coefficients
    field = DGField([coef, np.zeros((ops.mesh.blocks[1].ncells, 9, 4))])
    assert np.allclose(ops.flux_projection(field, 0, 1), fc[0])


def test_flux_projection_constant_fluid():
    ops = coupled_ops()
    U = FluidModel(FL).from_primitive(1.2, np.array([0.3, -0.2]), 2.0)
    nc = ops.mesh.blocks[1].ncells
    coef = np.zeros((nc, 9, 4))
    area = ops.mesh.blocks[1].cell_area
    coef[:, 0, :] = U * np.sqrt(area)
    fc = ops.flux_coefficients(coef, 1)
    F1 = FluidModel(FL).flux(U, 1)
    assert np.allclose(fc[0][:, 0, :], F1 * np.sqrt(area), rtol=1e-13)
    assert np.max(np.abs(fc[0][:, 1:, :])) < 1e-12 * np.max(np.abs(F1))


def test_flux_projection_dense_oracle():
    """Quadrature projection of a nonlinear flux against a least-squares fit
    on a 50x50 sample grid (linear conserved field, constant density)."""
    ops = coupled_ops(nx=1, ny=1, p=3)
    blk = ops.mesh.blocks[1]
    fm = ops.models[1]

    def initial(x):
        out = np.empty((x.shape[0], 4))
        out[:, 0] = 1.2
        out[:, 1] = 0.1 + 0.3 * x[:, 0] + 0.2 * x[:, 1]
        out[:, 2] = -0.05 + 0.1 * x[:, 0]
        out[:, 3] = 2.5 + 0.4 * x[:, 0] - 0.3 * x[:, 1]
        return out

    field = ops.project([
        lambda x: np.zeros((x.shape[0], 5)), initial])
    fc = ops.flux_coefficients(field.blocks[1], 1)

    # dense weighted least-squares oracle on a 20x20 sample grid
    cell = CellRect(0.5, 0.5, blk.dx / 2, blk.dy / 2)
    basis = ModalBasis(3)
    g = gauss_legendre_1d(20)
    X, Y = np.meshgrid(0.5 + 0.5 * g.nodes, 0.5 + 0.5 * g.nodes)
    W = np.sqrt(np.outer(g.weights, g.weights).ravel() * 0.25)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    phi = eval_basis(basis, cell, pts)
    Uh = phi @ field.blocks[1][0]
    for k in (1, 2):
        F = fm.flux(Uh, k)
        coef_ls, *_ = np.linalg.lstsq(W[:, None] * phi, W[:, None] * F,
                                      rcond=None)
        assert np.max(np.abs(coef_ls - fc[k - 1][0])) < 1e-10


def test_flux_projection_inadmissible_names_cell_and_node():
    ops = coupled_ops(nx=2, ny=2)
    nc = ops.mesh.blocks[1].ncells
    coef = np.zeros((nc, 9, 4))
    area = ops.mesh.blocks[1].cell_area
    U = FluidModel(FL).from_primitive(1.0, np.array([0.0, 0.0]), 1.0)
    coef[:, 0, :] = U * np.sqrt(area)
    coef[2, 0, 0] = -1.0  # negative density in cell 2
    with pytest.raises(AdmissibilityError) as err:
        ops.flux_coefficients(coef, 1)
    assert err.value.context["cell"] == 2
    assert "node" in err.value.context


# -- interior flux ---------------------------------------------------------

def test_interior_flux_consistency():
    fm = FluidModel(FL)
    U = fm.from_primitive(1.1, np.array([0.4, -0.7]), 1.6)
    n = np.array([0.0, 1.0])
    g = interior_flux(U, U, n, fm, "local")
    assert np.allclose(g, fm.normal_flux(U, n), rtol=1e-14)


def test_interior_flux_antisymmetry():
    rng = np.random.default_rng(8)
    fm = FluidModel(FL)
    for _ in range(20):
        Um = fm.from_primitive(rng.uniform(0.3, 3), rng.uniform(-2, 2, 2),
                               rng.uniform(0.2, 4))
        Up = fm.from_primitive(rng.uniform(0.3, 3), rng.uniform(-2, 2, 2),
                               rng.uniform(0.2, 4))
        th = rng.uniform(0, 2 * np.pi)
        n = np.array([np.cos(th), np.sin(th)])
        a = interior_flux(Um, Up, n, fm, "local")
        b = interior_flux(Up, Um, -n, fm, "local")
        assert np.max(np.abs(a + b)) < 1e-13 * max(1.0, np.max(np.abs(a)))


def test_relaxation_flux_matches_eigen_splitting():
    """Closed-form relaxation flux against A+ Q- + A- Q+ built from the
    explicit eigenmatrices of the block system."""
    rng = np.random.default_rng(4)
    m, lam = 4, 2.3
    I = np.eye(m)
    Z = np.zeros((m, m))
    for _ in range(10):
        th = rng.uniform(0, 2 * np.pi)
        n1, n2 = np.cos(th), np.sin(th)
        t1, t2 = -n2, n1
        A = np.block([[Z, n1 * I, n2 * I],
                      [n1 * lam ** 2 * I, Z, Z],
                      [n2 * lam ** 2 * I, Z, Z]])
        R = np.block([[Z, I, I],
                      [t1 * I, -n1 * lam * I, n1 * lam * I],
                      [t2 * I, -n2 * lam * I, n2 * lam * I]])
        Rinv = np.block([[Z, t1 * I, t2 * I],
                         [0.5 * I, -0.5 * n1 / lam * I, -0.5 * n2 / lam * I],
                         [0.5 * I, 0.5 * n1 / lam * I, 0.5 * n2 / lam * I]])
        assert np.max(np.abs(R @ Rinv - np.eye(3 * m))) < 1e-12
        D = np.concatenate([np.zeros(m), -lam * np.ones(m), lam * np.ones(m)])
        assert np.max(np.abs(R @ np.diag(D) @ Rinv - A)) < 1e-12
        Ap = R @ np.diag(np.maximum(D, 0.0)) @ Rinv
        Am = R @ np.diag(np.minimum(D, 0.0)) @ Rinv
        Qm = rng.normal(size=3 * m)
        Qp = rng.normal(size=3 * m)
        expected = Ap @ Qm + Am @ Qp
        got = relaxation_flux(Qm, Qp, np.array([n1, n2]), lam)
        assert np.max(np.abs(got - expected)) < 1e-12


# -- semidiscrete RHS -------------------------------------------------------

def test_free_stream_preservation():
    ops = coupled_ops(nx=3, ny=4, p=3)
    field = equilibrium_field(ops, p_val=2.0)
    lam = ops.wave_speeds(field)
    rhs, tallies = ops.rhs_limit(field, lam)
    assert rhs.norm_inf() < 1e-12 * max(1.0, field.norm_inf())
    # at equilibrium the interface contributes exactly the physical flux:
    # no dissipation, and the fluid mass flux through Gamma vanishes
    iface_len = sum(f.length for f in ops.mesh.interface_faces)
    solid_phys = ops.models[0].normal_flux(
        np.array([0.0, 0.0, -2.0, 0.0, 0.0]), np.array([1.0, 0.0]))
    assert np.allclose(tallies.interface[0], solid_phys * iface_len,
                       atol=1e-12)
    fluid_eq = ops.models[1].from_primitive(1.0, np.zeros(2), 2.0)
    fluid_phys = -ops.models[1].normal_flux(fluid_eq, np.array([1.0, 0.0]))
    assert np.allclose(tallies.interface[1], fluid_phys * iface_len,
                       atol=1e-12)
    assert abs(tallies.interface[1][0]) < 1e-13  # no mass exchange


def test_free_stream_horizontal_interface():
    # interface normal (0,1): the coupling condition constrains sigma_22
    mesh = build_mesh((0, 1, -1, 0), (0, 1, 0, 1), 3, 2, 3, 2)
    ops = DGOperators(mesh, 2, (ElasticModel(EL), FluidModel(FL)))
    p_val = 1.5
    solid = np.array([0.0, 0.0, 0.0, 0.0, -p_val])
    fluid = ops.models[1].from_primitive(1.0, np.zeros(2), p_val)
    field = ops.project([
        lambda x: np.broadcast_to(solid, (x.shape[0], 5)),
        lambda x: np.broadcast_to(fluid, (x.shape[0], 4)),
    ])
    lam = ops.wave_speeds(field)
    rhs, _ = ops.rhs_limit(field, lam)
    assert rhs.norm_inf() < 1e-12


def test_single_cell_rhs_dense_quadrature_oracle():
    """Hand-assembled one-cell elastic RHS with a 20-point Gauss rule."""
    mesh = single_block_mesh((0.0, 1.0, 0.0, 1.0), 1, 1)
    model = ElasticModel(EL)
    ops = DGOperators(mesh, 3, (model,))
    rng = np.random.default_rng(12)
    a0 = rng.normal(size=5)
    ax = rng.normal(size=5)
    ay = rng.normal(size=5)

    def lin(x):
        return a0 + np.outer(x[:, 0], ax) + np.outer(x[:, 1], ay)

    field = ops.project([lin])
    rhs, _ = ops.rhs_limit(field, ops.wave_speeds(field))

    g = gauss_legendre_1d(20)
    basis = ModalBasis(3)
    cell = CellRect(0.5, 0.5, 0.5, 0.5)
    xq = 0.5 + 0.5 * g.nodes
    X, Y = np.meshgrid(xq, xq, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    W = np.outer(g.weights, g.weights).ravel() * 0.25
    U = lin(pts)
    F1 = model.flux(U, 1)
    F2 = model.flux(U, 2)
    # central differences are exact for the per-direction-quadratic basis,
    # so a large step only reduces roundoff
    eps = 1e-3

    def dphi(pts, axis):
        shift = np.zeros(2)
        shift[axis] = eps
        return (eval_basis(basis, CellRect(0.5 - shift[0], 0.5 - shift[1], 0.5, 0.5), pts)
                - eval_basis(basis, CellRect(0.5 + shift[0], 0.5 + shift[1], 0.5, 0.5), pts)) / (2 * eps)

    H = (np.einsum("q,qm,qv->mv", W, dphi(pts, 0), F1)
         + np.einsum("q,qm,qv->mv", W, dphi(pts, 1), F2))
    C = np.zeros((9, 5))
    for side, nvec, fixed in (("E", [1, 0], (1.0, None)), ("W", [-1, 0], (0.0, None)),
                              ("N", [0, 1], (None, 1.0)), ("S", [0, -1], (None, 0.0))):
        s = 0.5 + 0.5 * g.nodes
        if fixed[0] is not None:
            bpts = np.column_stack([np.full(20, fixed[0]), s])
        else:
            bpts = np.column_stack([s, np.full(20, fixed[1])])
        Ub = lin(bpts)
        gflux = model.normal_flux(Ub, np.array(nvec, float))
        phib = eval_basis(basis, cell, bpts)
        C += np.einsum("q,qv,qm->mv", g.weights * 0.5, gflux, phib)
    oracle = H - C
    assert np.max(np.abs(rhs.blocks[0][0] - oracle)) < 1e-11


def test_conservation_identity():
    """d/dt of block totals equals minus (outer + interface) flux tallies."""
    ops = coupled_ops(nx=4, ny=3, p=2)
    fm = ops.models[1]

    def solid_init(x):
        out = np.zeros((x.shape[0], 5))
        out[:, 0] = 0.08 * np.sin(2 * np.pi * x[:, 1])
        out[:, 2] = -1.0 + 0.1 * x[:, 0]
        return out

    def fluid_init(x):
        rho = 1.0 + 0.2 * np.exp(-8 * ((x[:, 0] - 0.5) ** 2 + x[:, 1] ** 2))
        v = np.column_stack([0.1 * x[:, 1], 0.05 * np.cos(x[:, 0])])
        p = 1.0 + 0.1 * x[:, 0]
        return fm.from_primitive(rho, v, p)

    field = ops.project([solid_init, fluid_init])
    rhs, tallies = ops.rhs_limit(field, ops.wave_speeds(field))
    for b in range(2):
        area = np.sqrt(ops.mesh.blocks[b].cell_area)
        d_total = rhs.blocks[b][:, 0, :].sum(0) * area
        expected = -(tallies.outer[b] + tallies.interface[b])
        scale = np.maximum(1.0, np.abs(expected))
        assert np.max(np.abs(d_total - expected) / scale) < 1e-12


# -- relaxation path ---------------------------------------------------------

def test_relaxation_compatibility_and_stiff_source():
    ops = coupled_ops(nx=3, ny=4, p=2)
    field = equilibrium_field(ops, p_val=2.0)
    relax = ops.compatible_relax_field(field)
    # R vanishes on compatible data
    R = ops.stiff_residual(relax)
    assert R.norm_inf() < 1e-12
    # nonstiff part agrees with the limit RHS on the physical components
    lam = ops.wave_speeds(field)
    gb = ops.rhs_relax(relax, lam)
    limit_rhs, _ = ops.rhs_limit(field, lam)
    assert np.max(np.abs(gb.blocks[0] - limit_rhs.blocks[0])) < 1e-11
    assert np.max(np.abs(gb.blocks[1][..., :4] - limit_rhs.blocks[1])) < 1e-11

    # offsetting one V coefficient by delta shifts R by -delta there
    delta = 0.37
    relax.blocks[1][5, 2, 6] += delta
    R2 = ops.stiff_residual(relax)
    assert R2.blocks[1][5, 2, 6] == pytest.approx(-delta, rel=1e-12)
    mask = np.ones_like(R2.blocks[1], dtype=bool)
    mask[5, 2, 6] = False
    assert np.max(np.abs(R2.blocks[1][mask])) < 1e-12


def test_stiff_solve_closed_form():
    ops = coupled_ops(nx=2, ny=2, p=2)
    field = equilibrium_field(ops)
    relax = ops.compatible_relax_field(field)
    rng = np.random.default_rng(3)
    relax.blocks[1][..., 4:] += 0.1 * rng.normal(size=relax.blocks[1][..., 4:].shape)
    coeff = 7.3
    solved = ops.stiff_solve(relax, coeff)
    # verify Q = partial + coeff * R(Q)
    R = ops.stiff_residual(solved)
    recon = relax.blocks[1] + coeff * R.blocks[1]
    assert np.max(np.abs(solved.blocks[1] - recon)) < 1e-11


# -- limiter ------------------------------------------------------------------

def test_limiter_smooth_field_untouched():
    ops = coupled_ops(nx=4, ny=4, p=3)
    fm = ops.models[1]

    def fluid_init(x):
        rho = 1.0 + 0.05 * np.sin(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])
        return fm.from_primitive(rho, np.zeros((x.shape[0], 2)),
                                 np.ones(x.shape[0]))

    field = ops.project([
        lambda x: np.tile([0.0, 0, -1.0, 0, 0], (x.shape[0], 1)), fluid_init])
    out = ops.tvb_limit(field, M=1000.0)
    assert np.max(np.abs(out.blocks[1] - field.blocks[1])) < 1e-14


def test_limiter_constant_unchanged():
    ops = coupled_ops(p=3)
    field = equilibrium_field(ops)
    out = ops.tvb_limit(field, M=0.0)
    for b in range(2):
        assert np.allclose(out.blocks[b], field.blocks[b], atol=1e-13)


def test_limiter_step_profile_minmod():
    """Three-cell line with a step: limited slope equals the minmod of the
    mean jumps."""
    mesh = single_block_mesh((0.0, 3.0, 0.0, 1.0), 3, 1)
    model = FluidModel(FL)
    ops = DGOperators(mesh, 2, (model,))
    means = np.array([1.0, 2.0, 5.0])
    coef = np.zeros((3, 4, 4))
    area = np.sqrt(mesh.blocks[0].cell_area)
    for c in range(3):
        coef[c, 0, 0] = means[c] * area
        coef[c, 0, 3] = 10.0 * area
    # huge slope in the middle cell, variable 0
    tab = ops.tables[0]
    coef[1, tab.idx10, 0] = 4.0
    field = DGField([coef])
    out = ops.tvb_limit(field, M=0.0)
    # expected slope deviation: minmod(huge, 5-2, 2-1) = 1.0 at face midpoint
    dev = out.blocks[0][1, tab.idx10, 0] * tab.phi10_mid
    assert dev == pytest.approx(1.0, rel=1e-12)
    # means bit-identical
    assert np.all(out.blocks[0][:, 0, :] == coef[:, 0, :])


def test_limiter_never_alters_means():
    ops = coupled_ops(nx=5, ny=4, p=3)
    rng = np.random.default_rng(9)
    field = equilibrium_field(ops)
    for b in range(2):
        field.blocks[b] += 0.3 * rng.normal(size=field.blocks[b].shape)
    out = ops.tvb_limit(field, M=0.0)
    for b in range(2):
        assert np.all(out.blocks[b][:, 0, :] == field.blocks[b][:, 0, :])


# -- interface flux (standalone) ---------------------------------------------

def test_interface_flux_equilibrium_is_physical_flux():
    em, fm = ElasticModel(EL), FluidModel(FL)
    Um = np.array([0.0, 0.0, -1.0, 0.0, 0.0])
    Up = fm.from_primitive(1.0, np.array([0.0, 0.0]), 1.0)
    n = np.array([1.0, 0.0])
    Fm = em.normal_flux(Um, n)
    Fp = fm.normal_flux(Up, n)
    gs, gf, res = interface_flux(Um, Up, Fm, Fp, n, (EL.c1, 2.0), em, fm)
    assert np.allclose(gs, Fm, atol=1e-13)
    assert np.allclose(gf, -Fp, atol=1e-13)


def test_interface_flux_rotated_matches_canonical():
    em, fm = ElasticModel(EL), FluidModel(FL)
    rng = np.random.default_rng(21)
    Um = np.array([0.1, -0.2, -1.1, 0.05, 0.3])
    Up = fm.from_primitive(1.2, np.array([0.1, -0.05]), 1.3)
    n0 = np.array([1.0, 0.0])
    Fm0 = em.normal_flux(Um, n0)
    Fp0 = fm.normal_flux(Up, n0)
    lam2 = float(fm.max_wave_speed(Up, n0)) * 1.4
    gs0, gf0, _ = interface_flux(Um, Up, Fm0, Fp0, n0, (EL.c1, lam2), em, fm)
    for th in rng.uniform(0, 2 * np.pi, 8):
        n = np.array([np.cos(th), np.sin(th)])
        Umr = em.rotate(Um, n, inverse=True)
        Upr = fm.rotate(Up, n, inverse=True)
        gs, gf, _ = interface_flux(Umr, Upr, em.normal_flux(Umr, n),
                                   fm.normal_flux(Upr, n), n,
                                   (EL.c1, lam2), em, fm)
        assert np.allclose(gs, em.rotate(gs0, n, inverse=True), atol=1e-12)
        assert np.allclose(gf, fm.rotate(gf0, n, inverse=True), atol=1e-12)
