"""End-to-end simulation orchestration.

Builds the mesh and models from a :class:`~relaxdg.config.SimConfig`, sets
up initial data for the configured scenario, runs the adaptive time loop
(explicit SSP for the limit scheme, IMEX for finite relaxation rates),
collects per-step diagnostics and writes CSV snapshots.

Snapshot format (one file per snapshot per subdomain): comment header lines
``# time, # subdomain, # p, # cells, # variables`` followed by a column
header and one row per (cell, plot sample point) with ``x1, x2`` and the
state variables; fluid rows carry the derived pressure as an extra column,
solid rows the negative normal stress ``-sig11``.  Sample points are the
(p+1) x (p+1) uniform sub-cell centers; floats are written with 17
significant digits, comma delimited.

The diagnostics log has one row per step: step counter, time, step size,
both subdomain wave speeds, the per-component interface residual maxima,
the totals of every conserved variable per subdomain and the accumulated
outer-boundary and interface flux integrals (the conservation ledger).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .errors import AdmissibilityError, ConfigError
from .fields import FluxTallies
from .mesh import build_mesh
from .models import ElasticModel, FluidModel
from .operators import DGOperators
from .timestepping import IMEX_TABLES, compute_dt, imex_step, ssp_step

R_AIR = 287.058  # J/(kg K), used for the temperature -> density conversion

CAVITATION_DOMAIN1 = (-0.22, 0.0, -0.22, 0.22)
CAVITATION_DOMAIN2 = (0.0, 0.11, -0.22, 0.22)
CAVITATION = dict(
    p_out=20e6, T_out=293.0, p_in=1e6, T_in=693.0,
    center=(0.02, 0.0), radius=0.015,
)

SOLID_VARS = ("w1", "w2", "sig11", "sig12", "sig22")
FLUID_VARS = ("rho", "rhov1", "rhov2", "rhoE")


def make_operators(cfg: SimConfig):
    mesh = build_mesh(cfg.mesh.domain1, cfg.mesh.domain2,
                      cfg.mesh.nx1, cfg.mesh.ny1, cfg.mesh.nx2, cfg.mesh.ny2)
    models = (ElasticModel(cfg.models.elastic_params()),
              FluidModel(cfg.models.fluid_params()))
    s = cfg.scheme
    return DGOperators(mesh, s.p, models, speed_mode=s.speed_mode,
                       interface_safety=s.interface_safety,
                       boundary=s.boundary, tvb_m=s.tvb_m)


def _solid_equilibrium_state(normal, p_wall):
    """Uniform solid state whose normal stress balances the pressure."""
    state = np.zeros(5)
    if abs(normal[0]) > 0.5:
        state[2] = -p_wall
    else:
        state[4] = -p_wall
    return state


def initialize_cavitation(ops, params=None):
    """High-temperature low-pressure gas bubble near the solid wall.

    Outside the bubble: p = 20 MPa at 293 K; inside: 1 MPa at 693 K;
    densities follow the ideal-gas relation with R = 287.058.  The solid is
    uniform with sig12 = sig22 = 0 and sig11 balancing the outer pressure so
    the coupling condition holds along the interface at t = 0.
    """
    P = dict(CAVITATION)
    if params:
        P.update(params)
    mesh = ops.mesh
    b1, b2 = mesh.blocks
    exp1, exp2 = CAVITATION_DOMAIN1, CAVITATION_DOMAIN2
    got1 = (b1.x0, b1.x1, b1.y0, b1.y1)
    got2 = (b2.x0, b2.x1, b2.y0, b2.y1)
    if (np.max(np.abs(np.subtract(got1, exp1))) > 1e-12
            or np.max(np.abs(np.subtract(got2, exp2))) > 1e-12):
        raise ConfigError(
            "cavitation scenario requires the reference domains "
            f"{exp1} and {exp2}, got {got1} and {got2}")

    rho_out = P["p_out"] / (R_AIR * P["T_out"])
    rho_in = P["p_in"] / (R_AIR * P["T_in"])
    fm = ops.models[1]
    cx, cy = P["center"]

    def fluid_init(x):
        inside = (x[:, 0] - cx) ** 2 + (x[:, 1] - cy) ** 2 < P["radius"] ** 2
        rho = np.where(inside, rho_in, rho_out)
        p = np.where(inside, P["p_in"], P["p_out"])
        return fm.from_primitive(rho, np.zeros((x.shape[0], 2)), p)

    solid = _solid_equilibrium_state(mesh.interface.normal, P["p_out"])

    def solid_init(x):
        return np.broadcast_to(solid, (x.shape[0], 5)).copy()

    return ops.project([solid_init, fluid_init])


def initialize_equilibrium(ops, params=None):
    """Spatially uniform coupled equilibrium (free-stream data)."""
    P = dict(p=20e6, T=293.0)
    if params:
        P.update(params)
    rho = P["p"] / (R_AIR * P["T"])
    fm = ops.models[1]
    U = fm.from_primitive(rho, np.zeros(2), P["p"])
    solid = _solid_equilibrium_state(ops.mesh.interface.normal, P["p"])
    return ops.project([
        lambda x: np.broadcast_to(solid, (x.shape[0], 5)).copy(),
        lambda x: np.broadcast_to(U, (x.shape[0], 4)).copy(),
    ])


def initialize_gaussian_pulse(ops, params=None):
    """Smooth pressure bump in the fluid, solid in background equilibrium."""
    P = dict(p=20e6, T=293.0, center=(0.055, 0.0), width=0.02, amplitude=0.4)
    if params:
        P.update(params)
    rho0 = P["p"] / (R_AIR * P["T"])
    fm = ops.models[1]
    gamma = fm.params.gamma
    cx, cy = P["center"]

    def fluid_init(x):
        r2 = (x[:, 0] - cx) ** 2 + (x[:, 1] - cy) ** 2
        p = P["p"] * (1.0 + P["amplitude"] * np.exp(-r2 / P["width"] ** 2))
        rho = rho0 * (p / P["p"]) ** (1.0 / gamma)
        return fm.from_primitive(rho, np.zeros((x.shape[0], 2)), p)

    solid = _solid_equilibrium_state(ops.mesh.interface.normal, P["p"])
    return ops.project([
        lambda x: np.broadcast_to(solid, (x.shape[0], 5)).copy(), fluid_init])


INITIALIZERS = {
    "cavitation": initialize_cavitation,
    "equilibrium": initialize_equilibrium,
    "gaussian_pulse": initialize_gaussian_pulse,
}


def apply_boundary_conditions(field, ops, policy=None):
    """Ghost traces for every outer boundary face group.

    Returns ``{(block, side): (ghost states, ghost normal-flux traces)}``;
    the interior fluxes are then computed with the standard interior flux.
    """
    policy = policy or ops.boundary
    if policy not in ("outflow", "reflective"):
        raise ConfigError(f"unknown boundary policy {policy!r}")
    from .mesh import SIDE_NORMAL
    out = {}
    for b, groups in enumerate(ops.mesh.boundary_groups):
        model = ops.models[b]
        fcoef = ops.flux_coefficients(field.blocks[b][..., :model.nvars], b)
        for side, cells in groups.items():
            n = SIDE_NORMAL[side]
            axis = 0 if n[0] != 0.0 else 1
            Um = ops.trace(field.blocks[b][..., :model.nvars], cells, b, side)
            Fm = n[axis] * ops.trace(fcoef[axis], cells, b, side)
            if policy == "outflow":
                out[(b, side)] = (Um, Fm)
            else:
                out[(b, side)] = (model.mirror(Um, n), -model.mirror(Fm, n))
    return out


@dataclass
class RunResult:
    config: SimConfig
    ops: DGOperators
    final_state: object
    times: list
    diagnostics: dict
    snapshot_files: list
    diagnostics_file: str | None


class _StiffAdapter:
    def __init__(self, ops):
        self.ops = ops

    def residual(self, state):
        return self.ops.stiff_residual(state)

    def solve(self, partial, coeff):
        return self.ops.stiff_solve(partial, coeff)


def _fmt(x):
    return f"{x:.17g}"


def write_snapshot(path, ops, field, t, b):
    blk = ops.mesh.blocks[b]
    pts, vals = ops.plot_samples(field, b)
    if b == 0:
        names = SOLID_VARS + ("neg_sig11",)
        extra = -vals[:, 2]
    else:
        names = FLUID_VARS + ("pressure",)
        extra = ops.models[1].pressure(vals)
    data = np.column_stack([pts, vals, extra])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# time,{_fmt(t)}\n")
        fh.write(f"# subdomain,{b + 1}\n")
        fh.write(f"# p,{ops.p}\n")
        fh.write(f"# cells,{blk.nx},{blk.ny}\n")
        fh.write("# variables," + ",".join(names) + "\n")
        fh.write("x1,x2," + ",".join(names) + "\n")
        for row in data:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


DIAG_COLUMNS = (
    ["step", "t", "dt", "lambda1", "lambda2", "max_psi_u_1", "max_psi_u_2"]
    + [f"total_1_{v}" for v in SOLID_VARS]
    + [f"total_2_{v}" for v in FLUID_VARS]
    + [f"cum_outer_2_{v}" for v in FLUID_VARS]
    + [f"cum_iface_2_{v}" for v in FLUID_VARS]
)


def run(cfg: SimConfig, observer=None):
    """Run the configured simulation; returns a :class:`RunResult`.

    ``observer(step, t, state, ops)`` is invoked once on the initial data
    and after every completed step with the physical-state field.
    """
    ops = make_operators(cfg)
    state = INITIALIZERS[cfg.run.scenario](ops, cfg.run.scenario_params)
    limiter = (lambda f: ops.tvb_limit(f)) if cfg.scheme.limiter else None
    if limiter is not None:
        # projected discontinuous data overshoots inside cells; limit once
        # before the first admissibility-checked flux evaluation
        state = limiter(state)

    relax = cfg.relaxation.enabled
    if relax:
        pair = IMEX_TABLES[cfg.relaxation.imex_pair]
        stiff = _StiffAdapter(ops)
        state = ops.compatible_relax_field(state)

    out_dir = cfg.run.output_dir
    snapshot_files = []
    snap_idx = 0
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    def physical(s):
        return ops.limit_view(s) if relax else s

    last_snap_t = -1.0

    def snapshot(s, t):
        nonlocal snap_idx, last_snap_t
        if not out_dir:
            return
        for b in range(2):
            name = f"{cfg.run.label}_snap{snap_idx:04d}_sub{b + 1}.csv"
            snapshot_files.append(
                write_snapshot(os.path.join(out_dir, name), ops,
                               physical(s), t, b))
        snap_idx += 1
        last_snap_t = t

    t = 0.0
    step = 0
    t_end = cfg.run.t_end
    interval = cfg.run.snapshot_interval
    next_snap = interval if interval else None
    rows = []
    cum_outer = np.zeros(4)
    cum_iface = np.zeros(4)
    times = [0.0]

    snapshot(state, 0.0)
    if observer is not None:
        observer(0, 0.0, physical(state), ops)

    def record(dt, speeds):
        phys = physical(state)
        psi1, psi2 = ops.interface_residual(phys)
        totals = ops.total_integrals(phys)
        rows.append([step, t, dt, speeds[0], speeds[1], psi1, psi2,
                     *totals[0], *totals[1], *cum_outer, *cum_iface])

    record(0.0, ops.wave_speeds(state))

    while t < t_end * (1.0 - 1e-12):
        if cfg.run.fixed_dt is not None:
            speeds = ops.wave_speeds(state)
            dt = cfg.run.fixed_dt
        else:
            dt, speeds = compute_dt(state, ops, cfg.scheme.cfl)
        dt = min(dt, t_end - t)
        if next_snap is not None and t + dt > next_snap:
            dt = next_snap - t

        try:
            if relax:
                state = imex_step(lambda s: ops.rhs_relax(s, speeds), stiff,
                                  state, dt, cfg.relaxation.epsilon, pair,
                                  limiter)
            else:
                state, tallies = ssp_step(
                    lambda s: ops.rhs_limit(s, speeds), state, dt,
                    cfg.scheme.ssp_order, limiter)
                if tallies is not None:
                    cum_outer = cum_outer + dt * tallies.outer[1]
                    cum_iface = cum_iface + dt * tallies.interface[1]
        except AdmissibilityError as exc:
            raise AdmissibilityError(
                "run aborted", time=t, step=step, **exc.context) from exc
        if not state.allfinite():
            raise RuntimeError(
                f"non-finite coefficient at t={t:.6e}, step {step}")

        t += dt
        step += 1
        times.append(t)
        record(dt, speeds)
        if next_snap is not None and t >= next_snap * (1.0 - 1e-12):
            snapshot(state, t)
            next_snap += interval
        if observer is not None:
            observer(step, t, physical(state), ops)

    if out_dir and last_snap_t < t * (1.0 - 1e-12):
        snapshot(state, t)

    diag_file = None
    data = np.asarray(rows)
    if out_dir:
        diag_file = os.path.join(out_dir, f"{cfg.run.label}_diag.csv")
        with open(diag_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(DIAG_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    diagnostics = {name: data[:, k] for k, name in enumerate(DIAG_COLUMNS)}
    return RunResult(cfg, ops, state, times, diagnostics,
                     snapshot_files, diag_file)
