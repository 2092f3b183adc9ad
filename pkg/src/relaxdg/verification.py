"""Verification utilities behind the ``check`` and ``oracle`` CLI commands
and the acceptance suite: guarded random sampling of interface trace data,
the closed-form-versus-root-finder sweep, tableau checks and the basis
orthonormality check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .basis import CellRect, ModalBasis, gram_matrix
from .coupling import (admissibility_guard, fsi_riemann_solver,
                       oracle_solve_coupling_system)
from .errors import OracleError
from .models import ElasticParams, FluidModel, FluidParams

DEFAULT_ELASTIC = ElasticParams(rho_s=1.3, c1=2.4, c2=1.1)
DEFAULT_FLUID = FluidParams(gamma=1.4, pi=0.0)


def sample_guarded_inputs(rng, n, elastic=DEFAULT_ELASTIC, fluid=DEFAULT_FLUID,
                          v_perturbation=0.0):
    """Random interface trace data satisfying the admissibility guard.

    Returns ``(Um (n,5), Up (n,4), Vp (n,4), lam2 (n,))``.  With
    ``v_perturbation`` set, the auxiliary data is drawn off the manifold
    ``V+ = F2n(U+)``; those samples are kept only when the resulting
    coupling state is admissible, since the guard bounds are formulated
    for flux-compatible auxiliary data.
    """
    fm = FluidModel(fluid)
    Um_out, Up_out, Vp_out, lam_out = [], [], [], []
    kept = 0
    while kept < n:
        m = 4 * (n - kept) + 64
        rho = rng.uniform(0.2, 5.0, m)
        v = rng.uniform(-2.0, 2.0, (m, 2))
        p = rng.uniform(0.1, 8.0, m)
        Up = fm.from_primitive(rho, v, p)
        Um = np.column_stack([
            rng.uniform(-2.0, 2.0, m), rng.uniform(-2.0, 2.0, m),
            rng.uniform(-8.0, 8.0, m), rng.uniform(-4.0, 4.0, m),
            rng.uniform(-8.0, 8.0, m),
        ])
        c = fm.sound_speed(Up)
        lam2 = (np.abs(v[:, 0]) + c) * rng.uniform(1.05, 2.5, m)
        guard = admissibility_guard(Um, Up, lam2, elastic, fluid)
        mask = guard.all_hold
        Vp = fm.flux(Up, 1)
        if v_perturbation:
            Vp = Vp + v_perturbation * rng.normal(size=Vp.shape) * (
                1.0 + np.abs(Vp))
            res = fsi_riemann_solver(Um, Up, Vp, lam2, elastic, fluid,
                                     check=False)
            pL = res.sigma1 * elastic.rho_s * elastic.c1 - Um[:, 2]
            mask = mask & (res.U_L[:, 0] > 1e-10) & (pL >= -fluid.pi)
        take = np.flatnonzero(mask)[: n - kept]
        Um_out.append(Um[take])
        Up_out.append(Up[take])
        Vp_out.append(Vp[take])
        lam_out.append(lam2[take])
        kept += take.size
    return (np.concatenate(Um_out), np.concatenate(Up_out),
            np.concatenate(Vp_out), np.concatenate(lam_out))


def componentwise_error(a, b):
    """Relative error with unit floor (sampling produces order-one data)."""
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


@dataclass
class OracleSweepReport:
    samples: int
    max_error: float
    max_idempotency_error: float
    admissible_fraction: float
    unguarded_violation_fraction: float
    oracle_failures: int
    elapsed: float

    def lines(self):
        return [
            f"samples:                      {self.samples}",
            f"max closed-form/oracle error: {self.max_error:.3e}",
            f"max idempotency error:        {self.max_idempotency_error:.3e}",
            f"guarded admissible fraction:  {self.admissible_fraction:.4f}",
            f"unguarded violation fraction: {self.unguarded_violation_fraction:.4f}",
            f"oracle failures:              {self.oracle_failures}",
            f"elapsed seconds:              {self.elapsed:.2f}",
        ]


def oracle_sweep(n=1000, seed=0, elastic=DEFAULT_ELASTIC, fluid=DEFAULT_FLUID):
    """Compare the closed-form Riemann solver against the Newton oracle on
    guarded samples; report admissibility statistics for unguarded data."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    Um, Up, Vp, lam2 = sample_guarded_inputs(rng, n, elastic, fluid)
    closed = fsi_riemann_solver(Um, Up, Vp, lam2, elastic, fluid)
    max_err = 0.0
    failures = 0
    for k in range(n):
        try:
            orac = oracle_solve_coupling_system(Um[k], Up[k], Vp[k],
                                                float(lam2[k]), elastic, fluid)
        except OracleError:
            failures += 1
            continue
        for a, b in zip((closed.U_R[k], closed.U_L[k], closed.V_L[k]),
                        orac.astuple()):
            max_err = max(max_err, float(np.max(componentwise_error(a, b))))

    again = fsi_riemann_solver(closed.U_R, closed.U_L, closed.V_L, lam2,
                               elastic, fluid, check=False)
    idem = max(float(np.max(componentwise_error(a, b)))
               for a, b in zip(closed.astuple(), again.astuple()))

    pL = closed.sigma1 * elastic.rho_s * elastic.c1 - Um[:, 2]
    adm = float(np.mean((closed.U_L[:, 0] > 0.0) & (pL >= -fluid.pi)))

    # unguarded random data: report (not assert) how often the coupling
    # state leaves the admissible set
    fm = FluidModel(fluid)
    m = n
    rho = rng.uniform(0.05, 5.0, m)
    v = rng.uniform(-4.0, 4.0, (m, 2))
    p = rng.uniform(0.02, 8.0, m)
    Upu = fm.from_primitive(rho, v, p)
    Umu = np.column_stack([
        rng.uniform(-6.0, 6.0, m), rng.uniform(-6.0, 6.0, m),
        rng.uniform(-20.0, 20.0, m), rng.uniform(-8.0, 8.0, m),
        rng.uniform(-20.0, 20.0, m)])
    lamu = (np.abs(v[:, 0]) + fm.sound_speed(Upu)) * rng.uniform(1.01, 2.0, m)
    resu = fsi_riemann_solver(Umu, Upu, fm.flux(Upu, 1), lamu, elastic, fluid,
                              check=False)
    pLu = resu.sigma1 * elastic.rho_s * elastic.c1 - Umu[:, 2]
    viol = float(np.mean((resu.U_L[:, 0] <= 0.0) | (pLu < -fluid.pi)))
    return OracleSweepReport(n, max_err, idem, adm, viol,
                             failures, time.perf_counter() - t0)


def gram_report(p_max=5):
    """Worst deviation of the quadrature Gram matrix from identity."""
    worst = 0.0
    cell = CellRect(0.37, -0.21, 0.41, 0.73)
    for p in range(1, p_max + 1):
        G = gram_matrix(ModalBasis(p), cell)
        worst = max(worst, float(np.max(np.abs(G - np.eye(p * p)))))
    return worst
