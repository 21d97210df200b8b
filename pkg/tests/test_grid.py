"""Grid geometry, ghost closures, derivative accuracy, quadrature."""

from __future__ import annotations

import numpy as np
import pytest

from azmodes.grid import (EVEN, ODD, apply_diff, build_grid, d_r, d_rr, d_z,
                          d_zz, integrate, laplacian, lp_norm_weighted,
                          m_norm, vector_lp_norm, weight_drift)

from conftest import small_grid


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def test_grid_geometry():
    g = build_grid(R=6.0, Zmax=4.0, nr=12, nz=9)
    assert g.dr == pytest.approx(0.5)
    assert g.dz == pytest.approx(1.0)
    # half-offset cell centers in r, endpoint-inclusive nodes in z
    assert g.r[0] == pytest.approx(0.25)
    assert g.r[-1] == pytest.approx(5.75)
    assert g.z[0] == pytest.approx(-4.0)
    assert g.z[-1] == pytest.approx(4.0)
    assert g.rc.shape == (12, 1)
    assert g.w.shape == (12, 9)


def test_grid_rejects_bad_extents_and_sizes():
    with pytest.raises(ValueError):
        build_grid(R=0.0, Zmax=4.0, nr=16, nz=16)
    with pytest.raises(ValueError):
        build_grid(R=4.0, Zmax=-1.0, nr=16, nz=16)
    with pytest.raises(ValueError):
        build_grid(R=4.0, Zmax=4.0, nr=4, nz=16)
    with pytest.raises(ValueError):
        build_grid(R=4.0, Zmax=4.0, nr=16, nz=7)


def test_quadrature_exact_on_low_order_integrands():
    g = small_grid()
    vol = 2.0 * np.pi * g.R**2 * g.Zmax  # integral of 1 over the cylinder
    assert integrate(g, np.ones(g.shape())) == pytest.approx(vol, rel=1e-13)
    # the weighted integrand 2 pi r (z + 2) is linear in each direction, so
    # midpoint in r and trapezoid in z are both exact
    f = np.broadcast_to(g.z[None, :] + 2.0, g.shape()).copy()
    expect = 2.0 * np.pi * (g.R**2 / 2.0) * (2.0 * 2.0 * g.Zmax)
    assert integrate(g, f) == pytest.approx(expect, rel=1e-13)


# ---------------------------------------------------------------------------
# derivatives and parity ghosts
# ---------------------------------------------------------------------------

def _gauss(g):
    return np.exp(-g.rc**2 - g.z[None, :] ** 2)


def test_dr_odd_parity_exact_on_linear_field():
    g = small_grid()
    f = np.broadcast_to(3.0 * g.rc, g.shape()).copy()
    df = d_r(g, f, ODD)
    # centered stencil with the odd axis ghost reproduces the slope exactly
    # on every row except the Dirichlet rim row
    assert np.max(np.abs(df[:-1, :] - 3.0)) < 1e-12


def test_dr_even_parity_exact_on_quadratic_at_axis():
    g = small_grid()
    f = np.broadcast_to(g.rc**2, g.shape()).copy()
    df = d_r(g, f, EVEN)
    want = np.broadcast_to(2.0 * g.rc, g.shape())
    assert np.max(np.abs(df[:-1, :] - want[:-1, :])) < 1e-12


def test_dz_exact_on_quadratic_interior():
    g = small_grid()
    f = np.broadcast_to(g.z[None, :] ** 2, g.shape()).copy()
    df = d_z(g, f)
    zz = g.z[None, :]
    # linear-extension end ghosts are first order; interior is exact
    assert np.max(np.abs(df[:, 1:-1] - 2.0 * zz[:, 1:-1])) < 1e-12


def test_second_derivatives_exact_on_quadratics():
    g = small_grid()
    fr = np.broadcast_to(g.rc**2, g.shape()).copy()
    fz = np.broadcast_to(g.z[None, :] ** 2, g.shape()).copy()
    assert np.max(np.abs(d_rr(g, fr, EVEN)[:-1, :] - 2.0)) < 1e-11
    assert np.max(np.abs(d_zz(g, fz)[:, 1:-1] - 2.0)) < 1e-11


def test_derivative_convergence_second_order():
    # Gaussian bump centered off-axis; interior max error drops ~4x per
    # grid doubling for both first derivatives and the Laplacian
    errs_r, errs_lap = [], []
    for nr, nz in ((32, 64), (64, 128)):
        g = build_grid(R=8.0, Zmax=8.0, nr=nr, nz=nz)
        rr, zz = g.rc, g.z[None, :]
        f = np.exp(-((rr - 3.0) ** 2) - zz**2)
        df_true = -2.0 * (rr - 3.0) * f
        lap_true = f * (4.0 * (rr - 3.0) ** 2 + 4.0 * zz**2 - 4.0
                        - 2.0 * (rr - 3.0) / rr)
        sl = np.s_[1:-1, 1:-1]
        errs_r.append(np.max(np.abs((d_r(g, f, EVEN) - df_true)[sl])))
        errs_lap.append(np.max(np.abs((laplacian(g, f, EVEN) - lap_true)[sl])))
    assert errs_r[0] / errs_r[1] == pytest.approx(4.0, rel=0.25)
    assert errs_lap[0] / errs_lap[1] == pytest.approx(4.0, rel=0.25)


def test_weight_drift_frozen_value_on_constant():
    # L(1) = 4(1 - r^2)/(1 + r^2)^2 pointwise; the d_r part of the operator
    # vanishes exactly for a constant on all rows except the rim closure
    g = small_grid()
    f = np.ones(g.shape())
    got = weight_drift(g, f, EVEN)
    want = 4.0 * (1.0 - g.rc**2) / (1.0 + g.rc**2) ** 2
    want = np.broadcast_to(want, g.shape())
    assert np.max(np.abs(got[:-1, :] - want[:-1, :])) < 1e-12


def test_apply_diff_dispatch_and_errors():
    g = small_grid()
    f = _gauss(g)
    assert np.allclose(apply_diff(g, f, "dr", EVEN), d_r(g, f, EVEN))
    assert np.allclose(apply_diff(g, f, "dz"), d_z(g, f))
    assert np.allclose(apply_diff(g, f, "laplace", EVEN), laplacian(g, f, EVEN))
    with pytest.raises(ValueError):
        apply_diff(g, f, "curl")


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def test_lp_norm_weighted_closed_form():
    # ||r^a f||_p with f = r: integrand 2 pi r^(a p + p + 1) dr dz
    g = small_grid(nr=64, nz=32)
    f = np.broadcast_to(g.rc, g.shape()).copy()
    val = lp_norm_weighted(g, f, 2.0, 1.0)
    # integral of 2 pi r^5 over r in (0, R), z in (-Z, Z); midpoint rule in
    # r carries an O(dr^2) defect so compare loosely
    expect = (2.0 * np.pi * g.R**6 / 6.0 * 2.0 * g.Zmax) ** 0.5
    assert val == pytest.approx(expect, rel=1e-3)


def test_vector_lp_norm_matches_scalar_on_single_component():
    g = small_grid()
    rng = np.random.default_rng(3)
    f = rng.standard_normal(g.shape())
    zero = np.zeros_like(f)
    a = vector_lp_norm(g, (f, zero, zero), 2.0, -1.5)
    b = lp_norm_weighted(g, f, 2.0, -1.5)
    assert a == pytest.approx(b, rel=1e-13)


def test_m_norm_homogeneous_and_positive():
    g = small_grid()
    rng = np.random.default_rng(5)
    f = rng.standard_normal(g.shape()) * np.exp(-g.rc)
    v = m_norm(g, f, ODD)
    assert v > 0.0
    assert m_norm(g, 2.0 * f, ODD) == pytest.approx(2.0 * v, rel=1e-12)
    assert m_norm(g, np.zeros(g.shape()), ODD) == 0.0
