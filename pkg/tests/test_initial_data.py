"""First-harmonic data: compatibility, swirl generation, state layout."""

from __future__ import annotations

import numpy as np
import pytest

from azmodes.grid import build_grid
from azmodes.initial_data import (BumpParams, compatibility_residual,
                                  init_state, make_stream_data)
from azmodes.state import MODE_COMPONENTS, RunConfig

from conftest import small_grid


def test_stream_data_satisfies_constraints_to_second_order():
    # the tuple is built from analytic derivatives, so the discrete
    # constraint residual is pure truncation error: halving h divides by 4
    res = []
    for nr, nz in ((32, 64), (64, 128)):
        g = build_grid(R=8.0, Zmax=8.0, nr=nr, nz=nz)
        tup = make_stream_data(g, BumpParams(swirl_sin=0.3, swirl_cos=0.4))
        res.append(compatibility_residual(g, tup))
    for fam in (0, 1):
        ratio = res[0][fam] / res[1][fam]
        assert ratio == pytest.approx(4.0, rel=0.3)


def test_swirl_slots_follow_amplitudes():
    g = small_grid()
    tup0 = make_stream_data(g, BumpParams())
    assert np.all(tup0.a_theta == 0.0) and np.all(tup0.b_theta == 0.0)
    tup1 = make_stream_data(g, BumpParams(swirl_sin=0.5))
    assert np.max(np.abs(tup1.a_theta)) > 0.0
    assert np.all(tup1.b_theta == 0.0)
    # swirl generation adds a radial bump to the opposite family
    assert np.max(np.abs(tup1.b_r - tup0.b_r)) > 0.0
    assert np.max(np.abs(tup1.a_r - tup0.a_r)) == 0.0


def test_zero_amplitudes_give_zero_tuple():
    g = small_grid()
    p = BumpParams(amp_sin=0.0, amp_cos=0.0, amp_temp_sin=0.0,
                   amp_temp_cos=0.0)
    tup = make_stream_data(g, p)
    for name in ("a_r", "a_theta", "a_z", "b_r", "b_theta", "b_z", "c", "d"):
        assert np.all(getattr(tup, name) == 0.0), name


def test_bad_widths_rejected():
    g = small_grid()
    with pytest.raises(ValueError):
        make_stream_data(g, BumpParams(r_width=0.0))


def test_init_state_layout_and_swirl_scaling():
    g = small_grid()
    n_base = 4
    tup = make_stream_data(g, BumpParams(swirl_sin=0.3, swirl_cos=0.2))
    s = init_state(g, n_base, 3, tup=tup)
    m1 = s.mode(1)
    assert np.array_equal(m1.u_r_sin, tup.a_r)
    assert np.array_equal(m1.u_z_cos, tup.b_z)
    assert np.array_equal(m1.temp_sin, tup.c)
    # the ansatz carries the swirl at amplitude 1/N
    assert np.allclose(m1.u_theta_sin, tup.a_theta / n_base, atol=0.0)
    assert np.allclose(m1.u_theta_cos, tup.b_theta / n_base, atol=0.0)
    for k in (2, 3):
        for name in MODE_COMPONENTS:
            assert np.all(getattr(s.mode(k), name) == 0.0)
    for name in ("u_r", "u_theta", "u_z", "pressure", "temp"):
        assert np.all(getattr(s.lead, name) == 0.0)


def test_init_state_projection_flag():
    from azmodes.diagnostics import divergence_residual
    g = small_grid(nr=32, nz=64)
    raw = init_state(g, 4, 2)
    proj = init_state(g, 4, 2, project=True)
    assert divergence_residual(raw) > 1e-6       # O(h^2) truncation level
    assert divergence_residual(proj) < 1e-10     # solver-exact constraints


def test_bump_params_from_config_mirrors_fields():
    cfg = RunConfig(amp_sin=2.0, swirl_cos=0.9, r_center=2.5, z_width=1.5)
    p = BumpParams.from_config(cfg)
    assert p.amp_sin == 2.0 and p.swirl_cos == 0.9
    assert p.r_center == 2.5 and p.z_width == 1.5
