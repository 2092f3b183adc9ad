"""Time integrators: CFL step control, explicit SSP-RK (orders 1-3) for the
limit scheme, and diagonally-implicit IMEX-RK pairs for the finite-epsilon
relaxation scheme.

The IMEX stage solves are closed-form because the stiff source is affine in
the auxiliary variables with coefficient -1/eps per cell and mode; no
iterative solver appears anywhere in the time loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ConfigError


@dataclass(frozen=True)
class ButcherPair:
    """Explicit tableau (A_exp, b_exp) paired with a diagonally implicit
    tableau (A_imp, b_imp)."""

    name: str
    A_exp: np.ndarray
    b_exp: np.ndarray
    A_imp: np.ndarray
    b_imp: np.ndarray

    @property
    def s(self):
        return len(self.b_exp)

    @property
    def c_exp(self):
        return self.A_exp.sum(axis=1)

    @property
    def c_imp(self):
        return self.A_imp.sum(axis=1)


_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)

# second order SSP2(2,2,2) pair, gamma = 1 - 1/sqrt(2)
TABLE_SSP2_222 = ButcherPair(
    "ssp2_222",
    A_exp=np.array([[0.0, 0.0], [1.0, 0.0]]),
    b_exp=np.array([0.5, 0.5]),
    A_imp=np.array([[_GAMMA, 0.0], [1.0 - 2.0 * _GAMMA, _GAMMA]]),
    b_imp=np.array([0.5, 0.5]),
)

# first order unsplit pair: explicit transport, implicit Euler in the source
TABLE_UNSPLIT1 = ButcherPair(
    "unsplit1",
    A_exp=np.array([[0.0, 0.0], [1.0, 0.0]]),
    b_exp=np.array([1.0, 0.0]),
    A_imp=np.array([[0.0, 0.0], [0.0, 1.0]]),
    b_imp=np.array([0.0, 1.0]),
)

IMEX_TABLES = {t.name: t for t in (TABLE_SSP2_222, TABLE_UNSPLIT1)}

# explicit SSP tableaux in Butcher form (forward Euler, Heun, Shu-Osher 3)
SSP_EXPLICIT = {
    1: (np.array([[0.0]]), np.array([1.0])),
    2: (np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5])),
    3: (np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.25, 0.25, 0.0]]),
        np.array([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0])),
}


def explicit_order(A, b, tol=1e-13):
    """Largest classical order (up to 3) certified by the order conditions."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    c = A.sum(axis=1)
    if abs(b.sum() - 1.0) > tol:
        return 0
    if abs(b @ c - 0.5) > tol:
        return 1
    if abs(b @ c ** 2 - 1.0 / 3.0) > tol or abs(b @ (A @ c) - 1.0 / 6.0) > tol:
        return 2
    return 3


def validate_pair(pair, ssp_order=None):
    """Check the structural clauses an SSP-IMEX pair must satisfy.

    Returns a list of violated clause descriptions (empty when valid).
    """
    bad = []
    s = pair.s
    if np.any(np.triu(pair.A_exp) != 0.0):
        bad.append("explicit tableau is not strictly lower triangular")
    if np.any(np.triu(pair.A_imp, k=1) != 0.0):
        bad.append("implicit tableau is not lower triangular")
    if abs(pair.b_exp.sum() - 1.0) > 1e-14:
        bad.append("explicit weights do not sum to one")
    if abs(pair.b_imp.sum() - 1.0) > 1e-14:
        bad.append("implicit weights do not sum to one")
    if np.any(pair.A_exp < 0.0) or np.any(pair.b_exp < 0.0):
        bad.append("explicit tableau has negative entries")
    for nu in range(1, s):
        if pair.A_imp[nu, nu] == 0.0:
            bad.append(f"implicit diagonal vanishes at stage {nu + 1}")
    if pair.A_imp[0, 0] == 0.0:
        gsa = (np.allclose(pair.b_exp, pair.A_exp[s - 1], atol=1e-15)
               and np.allclose(pair.b_imp, pair.A_imp[s - 1], atol=1e-15))
        if not gsa:
            bad.append("a11 = 0 but the pair is not globally stiffly accurate")
    if ssp_order is not None and explicit_order(pair.A_exp, pair.b_exp) < ssp_order:
        bad.append(f"explicit part is below order {ssp_order}")
    return bad


def is_globally_stiffly_accurate(pair):
    s = pair.s
    return (np.allclose(pair.b_exp, pair.A_exp[s - 1], atol=1e-15)
            and np.allclose(pair.b_imp, pair.A_imp[s - 1], atol=1e-15))


def compute_dt(field, ops, cfl):
    """Adaptive step from the CFL condition: cfl * min_i min_cells
    diam(cell)/lambda_i with the current per-subdomain wave speeds."""
    if not 0.0 < cfl <= 1.0:
        raise ConfigError(f"cfl must lie in (0, 1], got {cfl}")
    speeds = ops.wave_speeds(field)
    dt = min(ops.mesh.blocks[b].cell_diameter / speeds[b]
             for b in range(len(speeds)))
    return cfl * dt, speeds


def _eval(rhs, y):
    r = rhs(y)
    return r if isinstance(r, tuple) else (r, None)


def _acc(total, aux, w):
    if aux is None:
        return total
    return aux * w if total is None else total + aux * w


def ssp_step(rhs, field, dt, order, limiter=None):
    """One strong-stability-preserving explicit step (order 1, 2 or 3).

    The limiter hook is applied after every stage.  Returns the new state
    and the b-weighted combination of the auxiliary outputs of ``rhs``
    (flux tallies), or None when the rhs produces none.
    """
    lim = limiter if limiter is not None else (lambda u: u)
    try:
        if order == 1:
            k1, a1 = _eval(rhs, field)
            return lim(field + dt * k1), _acc(None, a1, 1.0)
        if order == 2:
            k1, a1 = _eval(rhs, field)
            s1 = lim(field + dt * k1)
            k2, a2 = _eval(rhs, s1)
            new = lim(0.5 * field + 0.5 * (s1 + dt * k2))
            return new, _acc(_acc(None, a1, 0.5), a2, 0.5)
        if order == 3:
            k1, a1 = _eval(rhs, field)
            s1 = lim(field + dt * k1)
            k2, a2 = _eval(rhs, s1)
            s2 = lim(0.75 * field + 0.25 * (s1 + dt * k2))
            k3, a3 = _eval(rhs, s2)
            new = lim((1.0 / 3.0) * field + (2.0 / 3.0) * (s2 + dt * k3))
            aux = _acc(_acc(_acc(None, a1, 1 / 6), a2, 1 / 6), a3, 2 / 3)
            return new, aux
    except AdmissibilityError as exc:
        raise AdmissibilityError(
            f"step aborted inside SSP{order} stage", **exc.context) from exc
    raise ConfigError(f"unsupported SSP order {order}")


def imex_step(nonstiff, stiff, field, dt, epsilon, pair, limiter=None):
    """One diagonally-implicit IMEX-RK step for the relaxation scheme.

    ``nonstiff(state)`` evaluates the transport terms; ``stiff`` provides
    ``residual(state)`` (the unscaled source R) and ``solve(partial, coeff)``
    solving ``Q = partial + coeff * R(Q)`` in closed form.  The recovered
    stage sources avoid evaluating R/eps directly wherever a diagonal solve
    happened.
    """
    lim = limiter if limiter is not None else (lambda u: u)
    s = pair.s
    kG = [None] * s
    kR = [None] * s
    try:
        for nu in range(s):
            acc = field
            for ell in range(nu):
                a = pair.A_exp[nu, ell]
                if a != 0.0:
                    acc = acc + (dt * a) * kG[ell]
                a = pair.A_imp[nu, ell]
                if a != 0.0:
                    acc = acc + (dt * a) * kR[ell]
            ann = pair.A_imp[nu, nu]
            if ann != 0.0:
                y = stiff.solve(acc, ann * dt / epsilon)
                kR[nu] = (1.0 / (dt * ann)) * (y - acc)
            else:
                y = acc
                needed = (pair.b_imp[nu] != 0.0
                          or np.any(pair.A_imp[nu + 1:, nu] != 0.0))
                kR[nu] = (1.0 / epsilon) * stiff.residual(y) if needed else None
            y = lim(y)
            kG[nu], _ = _eval(nonstiff, y)
        new = field
        for nu in range(s):
            if pair.b_exp[nu] != 0.0:
                new = new + (dt * pair.b_exp[nu]) * kG[nu]
            if pair.b_imp[nu] != 0.0 and kR[nu] is not None:
                new = new + (dt * pair.b_imp[nu]) * kR[nu]
        return lim(new)
    except AdmissibilityError as exc:
        raise AdmissibilityError(
            "step aborted inside IMEX stage", **exc.context) from exc
