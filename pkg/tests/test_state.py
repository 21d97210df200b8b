"""Containers, config surface, validation, and snapshot round trips."""

from __future__ import annotations

import json

import numpy as np
import pytest

from azmodes.state import (EnergyParams, RunConfig, SpectralState, load_npz,
                           save_npz, states_allclose, validate_state)

from conftest import random_state, small_grid


# ---------------------------------------------------------------------------
# state containers
# ---------------------------------------------------------------------------

def test_zeros_layout():
    g = small_grid()
    s = SpectralState.zeros(g, n_base=4, n_modes=3)
    assert s.t == 0.0
    assert len(s.modes) == 3
    assert [m.k for m in s.modes] == [1, 2, 3]
    assert s.lead.u_r.shape == g.shape()
    assert s.mode(2).u_theta_cos.shape == g.shape()
    with pytest.raises(ValueError):
        s.mode(0)
    with pytest.raises(ValueError):
        s.mode(4)
    with pytest.raises(ValueError):
        SpectralState.zeros(g, n_base=0, n_modes=2)


def test_copy_is_deep():
    g = small_grid()
    rng = np.random.default_rng(11)
    s = random_state(g, 2, 2, rng)
    c = s.copy()
    c.lead.u_r[3, 5] += 1.0
    c.modes[1].temp_cos[0, 0] += 2.0
    assert s.lead.u_r[3, 5] != c.lead.u_r[3, 5]
    assert s.modes[1].temp_cos[0, 0] != c.modes[1].temp_cos[0, 0]


def test_validate_state_reports_problems():
    g = small_grid()
    s = SpectralState.zeros(g, 2, 2)
    assert validate_state(s) == []
    s.lead.u_z = np.zeros((3, 3))
    s.modes[0].temp_sin[0, 0] = np.nan
    s.modes[1].k = 7
    problems = validate_state(s)
    text = "\n".join(problems)
    assert "u_z" in text and "shape" in text
    assert "non-finite" in text
    assert "k=7" in text


# ---------------------------------------------------------------------------
# energy parameters
# ---------------------------------------------------------------------------

def test_energy_params_defaults_admissible():
    EnergyParams().validate()


def test_energy_params_rejections():
    with pytest.raises(ValueError, match=r"\(5, 6\)"):
        EnergyParams(p=4.0).validate()
    with pytest.raises(ValueError, match=r"beta"):
        EnergyParams(beta=0.5).validate()
    with pytest.raises(ValueError, match=r"alpha"):
        EnergyParams(alpha=1.0).validate()


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

def test_config_aliases_and_roundtrip():
    cfg = RunConfig.from_dict({"N": 16, "K": 3, "T": 0.25, "nr": 32, "nz": 64})
    assert cfg.n_base == 16 and cfg.n_modes == 3 and cfg.t_final == 0.25
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ValueError, match="unknown config key"):
        RunConfig.from_dict({"viscosity": 2.0})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"scheme": "rk4"})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"fixed_dt": -1.0})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"K": 0})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"record_every": 0})


def test_config_nested_energy_block():
    cfg = RunConfig.from_dict({"energy": {"p": 5.5, "alpha": 0.05,
                                          "beta": 1.05}})
    assert cfg.energy.p == 5.5
    with pytest.raises(ValueError):
        RunConfig.from_dict({"energy": {"p": 6.5}})


def test_config_json_is_valid_json():
    d = json.loads(RunConfig().to_json())
    assert d["n_base"] == 8 and d["energy"]["beta"] == pytest.approx(17 / 16)


# ---------------------------------------------------------------------------
# snapshot i/o
# ---------------------------------------------------------------------------

def test_npz_roundtrip_exact(tmp_path):
    g = small_grid()
    rng = np.random.default_rng(23)
    s = random_state(g, 5, 2, rng)
    s.t = 0.375
    s.modes[0].pressure_sin = rng.standard_normal(g.shape())
    path = tmp_path / "snap.npz"
    save_npz(path, s)
    back = load_npz(path)
    assert back.t == s.t
    assert states_allclose(back, s, rtol=0.0, atol=0.0)
    back.lead.temp[0, 0] += 1e-9
    assert not states_allclose(back, s, rtol=0.0, atol=1e-12)
