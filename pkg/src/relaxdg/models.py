"""The two coupled physical systems behind one model abstraction.

Subdomain 1 carries 2D linear elasticity in deformation-velocity/stress
form with state ``(w1, w2, sig11, sig12, sig22)``; subdomain 2 carries the
2D compressible Euler equations with a stiffened-gas equation of state and
conserved state ``(rho, rho*v1, rho*v2, rho*E)``.

Both models expose directional fluxes, wave speeds, admissibility checks and
frame rotation for arbitrary unit normals.  States are numpy arrays with the
variable index last; every operation broadcasts over leading batch axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, DomainError


def rotation_matrix(n):
    """Orthogonal frame matrix with rows (n, t), t = (-n2, n1)."""
    n = np.asarray(n, dtype=float)
    if abs(float(n @ n) - 1.0) > 1e-12:
        raise DomainError(f"normal {n} is not a unit vector")
    return np.array([[n[0], n[1]], [-n[1], n[0]]])


def rotate_elastic(U, n, inverse=False):
    """Rotate a solid state into the n-frame (or back): w as a vector,
    sigma as a rank-2 tensor."""
    T = rotation_matrix(n)
    if inverse:
        T = T.T
    a, b = T[0, 0], T[0, 1]
    U = np.asarray(U, dtype=float)
    out = np.empty_like(U)
    out[..., 0] = a * U[..., 0] + b * U[..., 1]
    out[..., 1] = -b * U[..., 0] + a * U[..., 1]
    s11, s12, s22 = U[..., 2], U[..., 3], U[..., 4]
    out[..., 2] = a * a * s11 + 2 * a * b * s12 + b * b * s22
    out[..., 3] = -a * b * s11 + (a * a - b * b) * s12 + a * b * s22
    out[..., 4] = b * b * s11 - 2 * a * b * s12 + a * a * s22
    return out


def rotate_fluid(U, n, inverse=False):
    """Rotate a fluid state (or any state-shaped vector) into the n-frame."""
    T = rotation_matrix(n)
    if inverse:
        T = T.T
    a, b = T[0, 0], T[0, 1]
    U = np.asarray(U, dtype=float)
    out = U.copy()
    out[..., 1] = a * U[..., 1] + b * U[..., 2]
    out[..., 2] = -b * U[..., 1] + a * U[..., 2]
    return out


@dataclass(frozen=True)
class ElasticParams:
    """Material data stored as (rho_s, c1, c2); Lame constants are derived."""

    rho_s: float
    c1: float
    c2: float

    def __post_init__(self):
        if self.rho_s <= 0:
            raise ValueError("rho_s must be positive")
        if not (self.c1 > self.c2 > 0):
            raise ValueError("wave speeds must satisfy c1 > c2 > 0")

    @property
    def alpha(self):
        return 1.0 - 2.0 * (self.c2 / self.c1) ** 2

    @property
    def beta(self):
        return self.c1 ** 2 - self.c2 ** 2

    @property
    def mu(self):
        return self.rho_s * self.c2 ** 2

    @property
    def lam(self):
        # c1^2 = 2/rho_s (mu + lam)
        return 0.5 * self.rho_s * self.c1 ** 2 - self.mu

    @classmethod
    def from_lame(cls, rho_s, mu, lam):
        c1 = math.sqrt(2.0 * (mu + lam) / rho_s)
        c2 = math.sqrt(mu / rho_s)
        return cls(rho_s, c1, c2)


@dataclass(frozen=True)
class FluidParams:
    gamma: float
    pi: float = 0.0

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.pi < 0.0:
            raise ValueError("pi must be nonnegative")


class ElasticModel:
    """Linear elasticity; fluxes are F_j(U) = A_j @ U with constant A_j."""

    nvars = 5
    name = "elastic"

    def __init__(self, params):
        self.params = params
        rs, c1, c2, al = params.rho_s, params.c1, params.c2, params.alpha
        self.A1 = -np.array([
            [0.0, 0.0, 1.0 / rs, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0 / rs, 0.0],
            [rs * c1 ** 2, 0.0, 0.0, 0.0, 0.0],
            [0.0, rs * c2 ** 2, 0.0, 0.0, 0.0],
            [al * rs * c1 ** 2, 0.0, 0.0, 0.0, 0.0],
        ])
        # row 3 carries alpha*rho_s*c1^2 so that sig11 is driven by the Lame
        # coefficient lam under d/dy(w2); this keeps A^n rotation-invariant
        self.A2 = -np.array([
            [0.0, 0.0, 0.0, 1.0 / rs, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0 / rs],
            [0.0, al * rs * c1 ** 2, 0.0, 0.0, 0.0],
            [rs * c2 ** 2, 0.0, 0.0, 0.0, 0.0],
            [0.0, rs * c1 ** 2, 0.0, 0.0, 0.0],
        ])

    def flux(self, U, j):
        A = self.A1 if j == 1 else self.A2
        return np.asarray(U) @ A.T

    def normal_matrix(self, n):
        return n[0] * self.A1 + n[1] * self.A2

    def normal_flux(self, U, n):
        return np.asarray(U) @ self.normal_matrix(n).T

    def max_wave_speed(self, U, n=None):
        U = np.asarray(U)
        return np.broadcast_to(self.params.c1, U.shape[:-1]).copy()

    def global_speed_bound(self, U):
        return self.params.c1

    def admissible(self, U):
        U = np.asarray(U)
        return np.ones(U.shape[:-1], dtype=bool)

    def check_admissible(self, U, **context):
        return None

    def rotate(self, U, n, inverse=False):
        return rotate_elastic(U, n, inverse=inverse)

    def mirror(self, vec, n):
        """Reflective-wall image: negate w.n and sigma_nt in the n-frame."""
        v = self.rotate(vec, n)
        v[..., 0] = -v[..., 0]
        v[..., 3] = -v[..., 3]
        return self.rotate(v, n, inverse=True)


class FluidModel:
    """Compressible Euler with stiffened-gas EoS p = (gamma-1) rho e - gamma pi."""

    nvars = 4
    name = "fluid"

    def __init__(self, params):
        self.params = params

    def pressure(self, U):
        U = np.asarray(U, dtype=float)
        g = self.params.gamma
        ke = 0.5 * (U[..., 1] ** 2 + U[..., 2] ** 2) / U[..., 0]
        return (g - 1.0) * (U[..., 3] - ke) - g * self.params.pi

    def sound_speed(self, U):
        p = self.pressure(U)
        return np.sqrt(self.params.gamma * (p + self.params.pi) / np.asarray(U)[..., 0])

    def primitive(self, U):
        """Conserved -> (rho, v, p); requires rho > 0."""
        U = np.asarray(U, dtype=float)
        rho = U[..., 0]
        if np.any(rho <= 0.0):
            raise AdmissibilityError("nonpositive density in primitive conversion")
        v = U[..., 1:3] / rho[..., None]
        return rho, v, self.pressure(U)

    def from_primitive(self, rho, v, p):
        rho = np.asarray(rho, dtype=float)
        v = np.asarray(v, dtype=float)
        p = np.asarray(p, dtype=float)
        g, piS = self.params.gamma, self.params.pi
        U = np.empty(rho.shape + (4,))
        U[..., 0] = rho
        U[..., 1] = rho * v[..., 0]
        U[..., 2] = rho * v[..., 1]
        U[..., 3] = (p + g * piS) / (g - 1.0) + 0.5 * rho * (
            v[..., 0] ** 2 + v[..., 1] ** 2)
        return U

    def flux(self, U, j):
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        p = self.pressure(U)
        rho = U[..., 0]
        vj = U[..., j] / rho
        out = np.empty_like(U)
        out[..., 0] = U[..., j]
        out[..., 1] = U[..., 1] * vj
        out[..., 2] = U[..., 2] * vj
        out[..., j] += p
        out[..., 3] = vj * (U[..., 3] + p)
        return out

    def normal_flux(self, U, n):
        return n[0] * self.flux(U, 1) + n[1] * self.flux(U, 2)

    def max_wave_speed(self, U, n=None):
        """|v.n| + c for a given unit normal, |v| + c when n is None."""
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        rho = U[..., 0]
        c = self.sound_speed(U)
        if n is None:
            vmag = np.hypot(U[..., 1], U[..., 2]) / rho
            return vmag + c
        vn = (n[0] * U[..., 1] + n[1] * U[..., 2]) / rho
        return np.abs(vn) + c

    def global_speed_bound(self, U):
        return float(np.max(self.max_wave_speed(U)))

    def admissible(self, U):
        U = np.asarray(U, dtype=float)
        g, piS = self.params.gamma, self.params.pi
        with np.errstate(invalid="ignore", divide="ignore"):
            mask = U[..., 0] > 0.0
            ke = np.where(mask, 0.5 * (U[..., 1] ** 2 + U[..., 2] ** 2)
                          / np.where(mask, U[..., 0], 1.0), 0.0)
            p = (g - 1.0) * (U[..., 3] - ke) - g * piS
        # closed bound p >= -pi with slack for EoS round-off (cancellation
        # against gamma*pi dominates near the bound)
        slack = 64.0 * np.finfo(float).eps * (
            g * piS + (g - 1.0) * (np.abs(U[..., 3]) + ke))
        return mask & (p >= -piS - slack)

    def check_admissible(self, U, **context):
        ok = self.admissible(U)
        if not np.all(ok):
            idx = np.argwhere(~np.atleast_1d(ok))
            first = tuple(int(k) for k in idx[0])
            raise AdmissibilityError(
                "inadmissible fluid state", index=first, **context)

    def rotate(self, U, n, inverse=False):
        return rotate_fluid(U, n, inverse=inverse)

    def mirror(self, vec, n):
        """Reflective-wall image: negate the normal momentum in the n-frame."""
        v = self.rotate(vec, n)
        v[..., 1] = -v[..., 1]
        return self.rotate(v, n, inverse=True)


def max_wave_speed(model, U, n):
    """Spectral bound of the directional flux Jacobian along the unit normal."""
    rotation_matrix(n)  # unit-normal validation
    return model.max_wave_speed(U, n)


def subcharacteristic_ok(lam, model, U, n=None):
    """Check lam >= |v.n| + c (or the direction-uniform bound for n=None)."""
    return np.asarray(lam) >= model.max_wave_speed(U, n)
