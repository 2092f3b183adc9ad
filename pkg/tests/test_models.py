import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaxdg.errors import AdmissibilityError, DomainError
from relaxdg.models import (ElasticModel, ElasticParams, FluidModel,
                            FluidParams, max_wave_speed, rotation_matrix,
                            subcharacteristic_ok)

EL = ElasticParams(rho_s=1.0, c1=2.0, c2=1.0)  # alpha = 0.5
FL = FluidParams(gamma=1.4, pi=0.0)


def random_admissible(rng, size):
    rho = rng.uniform(0.2, 5.0, size)
    v = rng.uniform(-3.0, 3.0, (size, 2))
    p = rng.uniform(0.05, 8.0, size)
    return FluidModel(FL).from_primitive(rho, v, p)


def test_params_validation():
    with pytest.raises(ValueError):
        ElasticParams(rho_s=-1.0, c1=2.0, c2=1.0)
    with pytest.raises(ValueError):
        ElasticParams(rho_s=1.0, c1=1.0, c2=2.0)
    with pytest.raises(ValueError):
        FluidParams(gamma=1.0)
    with pytest.raises(ValueError):
        FluidParams(gamma=1.4, pi=-1.0)


def test_lame_round_trip():
    # c1^2 = 2/rho_s (mu + lam), c2^2 = mu / rho_s
    p = ElasticParams.from_lame(rho_s=1226.0, mu=1.4093e9, lam=1.4093e9)
    assert p.mu == pytest.approx(1.4093e9, rel=1e-12)
    assert p.lam == pytest.approx(1.4093e9, rel=1e-12)
    assert p.c1 ** 2 == pytest.approx(2.0 / p.rho_s * (p.mu + p.lam), rel=1e-12)
    assert p.alpha == pytest.approx(0.5)
    assert p.beta > 0.0


def test_elastic_flux_columns():
    m = ElasticModel(EL)
    f = m.flux(np.array([1.0, 0, 0, 0, 0]), 1)
    assert np.allclose(f, [0, 0, -4.0, 0, -2.0])
    f = m.flux(np.array([0, 0, 1.0, 0, 0]), 1)
    assert np.allclose(f, [-1.0, 0, 0, 0, 0])
    assert np.allclose(m.flux(np.zeros(5), 2), np.zeros(5))


def test_elastic_eigenvalues():
    m = ElasticModel(EL)
    ev = np.sort(np.linalg.eigvals(m.A1).real)
    assert np.allclose(ev, [-2.0, -1.0, 0.0, 1.0, 2.0], atol=1e-12)
    ev2 = np.sort(np.linalg.eigvals(m.A2).real)
    assert np.allclose(ev2, [-2.0, -1.0, 0.0, 1.0, 2.0], atol=1e-12)
    # along an oblique normal the spectrum is the same (isotropy)
    n = np.array([0.6, 0.8])
    ev3 = np.sort(np.linalg.eigvals(m.normal_matrix(n)).real)
    assert np.allclose(ev3, [-2.0, -1.0, 0.0, 1.0, 2.0], atol=1e-12)


def test_euler_flux_values():
    m = FluidModel(FL)
    U = np.array([1.0, 0.0, 0.0, 2.5])  # p = 1
    assert np.allclose(m.flux(U, 1), [0, 1, 0, 0])
    assert np.allclose(m.flux(U, 2), [0, 0, 1, 0])
    # rho=1, v=(2,0), p=1 -> rhoE = 1/0.4 + 2 = 4.5, F1 = (2, 5, 0, 11)
    U = m.from_primitive(1.0, np.array([2.0, 0.0]), 1.0)
    assert U[3] == pytest.approx(4.5)
    assert np.allclose(m.flux(U, 1), [2.0, 5.0, 0.0, 11.0])


def test_primitive_round_trip():
    m = FluidModel(FL)
    U = np.array([1.0, 0.0, 0.0, 2.5])
    rho, v, p = m.primitive(U)
    assert p == pytest.approx(1.0)
    assert np.allclose(m.from_primitive(rho, v, p), U, rtol=1e-13)

    stiff = FluidModel(FluidParams(gamma=4.4, pi=6e8))
    U = stiff.from_primitive(1000.0, np.array([0.0, 0.0]), 1e5)
    e = (1e5 + 4.4 * 6e8) / ((4.4 - 1.0) * 1000.0)
    assert U[3] == pytest.approx(1000.0 * e, rel=1e-13)
    rho, v, p = stiff.primitive(U)
    assert p == pytest.approx(1e5, rel=1e-10)


def test_admissibility_boundary():
    stiff = FluidModel(FluidParams(gamma=4.4, pi=6e8))
    U = stiff.from_primitive(1000.0, np.array([0.0, 0.0]), -6e8)  # p = -pi exactly
    assert stiff.admissible(U)
    with pytest.raises(AdmissibilityError):
        FluidModel(FL).primitive(np.array([-1.0, 0, 0, 1.0]))
    with pytest.raises(AdmissibilityError):
        FluidModel(FL).flux(np.array([1.0, 0, 0, -1.0]), 1)


def test_wave_speeds():
    m = ElasticModel(EL)
    assert max_wave_speed(m, np.zeros(5), np.array([1.0, 0.0])) == pytest.approx(2.0)
    f = FluidModel(FL)
    U = np.array([1.0, 0.0, 0.0, 2.5])
    assert max_wave_speed(f, U, np.array([1.0, 0.0])) == pytest.approx(
        np.sqrt(1.4), rel=1e-12)
    # v=(3,4), c=2, n=(0,1) -> 6;  sound speed 2 at rho=1, gamma=1.4 -> p = 4/1.4
    U = f.from_primitive(1.0, np.array([3.0, 4.0]), 4.0 / 1.4)
    assert max_wave_speed(f, U, np.array([0.0, 1.0])) == pytest.approx(6.0, rel=1e-12)


def test_rotation_examples():
    f = FluidModel(FL)
    e = ElasticModel(EL)
    U = f.from_primitive(1.2, np.array([0.7, -0.3]), 2.0)
    assert np.allclose(f.rotate(U, np.array([1.0, 0.0])), U)
    W = np.array([0.1, 0.2, -1.0, 0.3, -2.0])
    assert np.allclose(e.rotate(W, np.array([1.0, 0.0])), W)

    # n = (0,1): fluid (a, b) -> (b, -a)
    r = f.rotate(U, np.array([0.0, 1.0]))
    assert r[1] == pytest.approx(U[2])
    assert r[2] == pytest.approx(-U[1])

    # diagonal stress rotated by n=(0,1): frame sigma_11 becomes s2
    S = np.array([0.0, 0.0, 3.0, 0.0, 7.0])
    rs = e.rotate(S, np.array([0.0, 1.0]))
    assert rs[2] == pytest.approx(7.0)
    assert rs[4] == pytest.approx(3.0)
    assert rs[3] == pytest.approx(0.0, abs=1e-14)


def test_non_unit_normal_rejected():
    with pytest.raises(DomainError):
        rotation_matrix(np.array([1.0, 1.0]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_rotation_round_trip(seed):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi)
    n = np.array([np.cos(th), np.sin(th)])
    f, e = FluidModel(FL), ElasticModel(EL)
    U = random_admissible(rng, 3)
    W = rng.normal(size=(3, 5))
    assert np.allclose(f.rotate(f.rotate(U, n), n, inverse=True), U, atol=1e-13)
    assert np.allclose(e.rotate(e.rotate(W, n), n, inverse=True), W, atol=1e-13)


def test_rotational_flux_consistency():
    """F.n equals rotate-out of the x1-flux of the rotated state."""
    rng = np.random.default_rng(42)
    f = FluidModel(FL)
    e = ElasticModel(EL)
    U = random_admissible(rng, 100)
    W = rng.normal(size=(100, 5))
    th = rng.uniform(0, 2 * np.pi, 100)
    worst_f = worst_e = 0.0
    for k in range(100):
        n = np.array([np.cos(th[k]), np.sin(th[k])])
        Fn = n[0] * f.flux(U[k], 1) + n[1] * f.flux(U[k], 2)
        alt = f.rotate(f.flux(f.rotate(U[k], n), 1), n, inverse=True)
        worst_f = max(worst_f, np.max(np.abs(Fn - alt)))
        Gn = n[0] * e.flux(W[k], 1) + n[1] * e.flux(W[k], 2)
        alt_e = e.rotate(e.flux(e.rotate(W[k], n), 1), n, inverse=True)
        worst_e = max(worst_e, np.max(np.abs(Gn - alt_e)))
    assert worst_f < 1e-12 * 10
    assert worst_e < 1e-12 * 10


def test_mirror_states():
    f = FluidModel(FL)
    U = f.from_primitive(1.0, np.array([1.0, 0.5]), 2.0)
    g = f.mirror(U, np.array([1.0, 0.0]))
    rho, v, p = f.primitive(g)
    assert v[0] == pytest.approx(-1.0)
    assert v[1] == pytest.approx(0.5)
    assert p == pytest.approx(2.0)

    e = ElasticModel(EL)
    W = np.array([1.0, 2.0, -3.0, 4.0, 5.0])
    gw = e.mirror(W, np.array([1.0, 0.0]))
    assert np.allclose(gw, [-1.0, 2.0, -3.0, -4.0, 5.0])


def test_subcharacteristic_check():
    f = FluidModel(FL)
    U = np.array([1.0, 0.0, 0.0, 2.5])
    c = np.sqrt(1.4)
    assert subcharacteristic_ok(c + 0.01, f, U)
    assert not subcharacteristic_ok(c - 0.01, f, U)
    states = random_admissible(np.random.default_rng(1), 50)
    lam = float(np.max(f.max_wave_speed(states)))
    assert np.all(subcharacteristic_ok(lam, f, states))
