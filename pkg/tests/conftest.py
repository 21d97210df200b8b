"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from azmodes.grid import Grid, build_grid
from azmodes.state import MODE_COMPONENTS, SpectralState

Array = np.ndarray


def small_grid(nr: int = 24, nz: int = 48) -> Grid:
    return build_grid(R=8.0, Zmax=8.0, nr=nr, nz=nz)


def bump_noise(grid: Grid, rng: np.random.Generator) -> Array:
    """Random field damped to zero near the axis, rim, and vertical ends.

    Smooth-ish support keeps boundary closures out of the picture when a
    test wants to probe interior behavior only.
    """
    rr = grid.rc
    zz = grid.z[None, :]
    env = np.exp(-((rr - 0.45 * grid.R) / (0.18 * grid.R)) ** 2
                 - (zz / (0.3 * grid.Zmax)) ** 2)
    return rng.standard_normal(grid.shape()) * env


def random_state(grid: Grid, n_base: int, n_modes: int,
                 rng: np.random.Generator, lead: bool = True,
                 smooth: bool = False) -> SpectralState:
    """State with every mode slot filled; optionally the lead block too."""
    draw = (lambda: bump_noise(grid, rng)) if smooth \
        else (lambda: rng.standard_normal(grid.shape()))
    s = SpectralState.zeros(grid, n_base, n_modes)
    for m in s.modes:
        for name in MODE_COMPONENTS:
            setattr(m, name, draw())
    if lead:
        for name in ("u_r", "u_theta", "u_z", "temp"):
            setattr(s.lead, name, draw())
    return s


def source_fields(src):
    """Flatten a SourceSet into (label, array) pairs for comparisons."""
    pairs = [("lead_r", src.lead_r), ("lead_theta", src.lead_theta),
             ("lead_z", src.lead_z), ("lead_temp", src.lead_temp)]
    for m in src.modes:
        for name in ("r_sin", "r_cos", "theta_sin", "theta_cos",
                     "z_sin", "z_cos", "temp_sin", "temp_cos"):
            pairs.append((f"k{m.k}:{name}", getattr(m, name)))
    return pairs
