"""Compactly supported first-harmonic initial data.

The meridional pair of each family comes from a stream bump

    psi(r, z) = A * r**2 * E(r, z),
    E(r, z)   = exp(-((r - r0)/sr)**2 - ((z - z0)/sz)**2),

via  u_r = d_z psi,  u_z = -(1/r) d_r(r psi),  which satisfies the
swirl-free compatibility constraint identically.  Both derivatives are
evaluated analytically (not by differencing), so the *discrete* constraint
residual of the returned fields is a genuine O(h^2) truncation measurement.

Optional swirl components are produced from exact particular solutions of
the constraints with an extra bump pair: adding

    a_plus_r = S * r * E,   a_plus_z = 0

to the sin family forces  b_theta = d_r(r * a_plus_r) = S*r*E*(2 - 2r(r-r0)/sr**2)
on the cos swirl slot, and symmetrically b_plus_r generates a_theta with a
minus sign.  The temperature bumps c, d are free of constraints.

Families and constraints (base wavenumber N, first harmonic):

    sin:  d_r a_r + a_r/r + d_z a_z - b_theta/r = 0,
    cos:  d_r b_r + b_r/r + d_z b_z + a_theta/r = 0.

The harmonic ansatz divides swirl amplitudes by N, so the state receives
u_theta_sin = a_theta/N and u_theta_cos = b_theta/N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ODD, d_r, d_z
from .state import RunConfig, SpectralState

Array = np.ndarray


@dataclass
class InitialTuple:
    """Physical-amplitude first-harmonic data (a_*, b_*, c, d)."""

    a_r: Array
    a_theta: Array
    a_z: Array
    b_r: Array
    b_theta: Array
    b_z: Array
    c: Array
    d: Array


@dataclass(frozen=True)
class BumpParams:
    """Amplitudes and geometry of the Gaussian stream bumps."""

    amp_sin: float = 1.0        # A for the sin-family stream bump
    amp_cos: float = 0.7        # A for the cos-family stream bump
    amp_temp_sin: float = 0.5   # temperature bump feeding c
    amp_temp_cos: float = 0.5   # temperature bump feeding d
    swirl_sin: float = 0.0      # S generating a_theta (via a cos-family bump)
    swirl_cos: float = 0.0      # S generating b_theta (via a sin-family bump)
    r_center: float = 3.0
    z_center: float = 0.0
    r_width: float = 0.8
    z_width: float = 1.0

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "BumpParams":
        return cls(amp_sin=cfg.amp_sin, amp_cos=cfg.amp_cos,
                   amp_temp_sin=cfg.amp_temp_sin, amp_temp_cos=cfg.amp_temp_cos,
                   swirl_sin=cfg.swirl_sin, swirl_cos=cfg.swirl_cos,
                   r_center=cfg.r_center, z_center=cfg.z_center,
                   r_width=cfg.r_width, z_width=cfg.z_width)


def _envelope(grid: Grid, p: BumpParams) -> tuple[Array, Array, Array]:
    """Gaussian envelope E and the factors (r - r0)/sr^2, (z - z0)/sz^2."""
    rr = grid.rc
    zz = grid.z[None, :]
    xr = (rr - p.r_center) / p.r_width
    xz = (zz - p.z_center) / p.z_width
    E = np.exp(-xr**2 - xz**2)
    return E, xr / p.r_width, xz / p.z_width


def _stream_pair(grid: Grid, p: BumpParams, amp: float) -> tuple[Array, Array]:
    """Analytic (u_r, u_z) of the stream bump psi = amp * r^2 * E."""
    E, gr, gz = _envelope(grid, p)
    rr = grid.rc
    psi = amp * rr**2 * E
    u_r = -2.0 * gz * psi
    # -(1/r) d_r(r psi) = -amp * r * E * (3 - 2 r (r - r0)/sr^2)
    u_z = -amp * rr * E * (3.0 - 2.0 * rr * gr)
    return u_r, u_z


def _swirl_from_bump(grid: Grid, p: BumpParams, amp: float) -> Array:
    """d_r(r * w) for the auxiliary radial bump w = amp * r * E."""
    E, gr, _ = _envelope(grid, p)
    rr = grid.rc
    return amp * rr * E * (2.0 - 2.0 * rr * gr)


def make_stream_data(grid: Grid, params: BumpParams | None = None) -> InitialTuple:
    """Build the compatible first-harmonic tuple from bump parameters.

    Returns
    -------
    InitialTuple
        Fields of shape (nr, nz) at physical amplitude (no 1/N factor yet).
    """
    p = params if params is not None else BumpParams()
    if p.r_width <= 0 or p.z_width <= 0:
        raise ValueError("bump widths must be positive")
    E, _, _ = _envelope(grid, p)
    rr = grid.rc
    shape = grid.shape()

    a_r, a_z = _stream_pair(grid, p, p.amp_sin)
    b_r, b_z = _stream_pair(grid, p, p.amp_cos)
    a_theta = np.zeros(shape)
    b_theta = np.zeros(shape)

    if p.swirl_cos != 0.0:
        # extra sin-family bump; its divergence feeds the cos swirl slot
        ar_plus = p.swirl_cos * rr * E
        a_r = a_r + ar_plus
        b_theta = _swirl_from_bump(grid, p, p.swirl_cos)
    if p.swirl_sin != 0.0:
        br_plus = p.swirl_sin * rr * E
        b_r = b_r + br_plus
        a_theta = -_swirl_from_bump(grid, p, p.swirl_sin)

    c = p.amp_temp_sin * rr**2 * E
    d = p.amp_temp_cos * rr**2 * E
    return InitialTuple(a_r=a_r, a_theta=a_theta, a_z=a_z,
                        b_r=b_r, b_theta=b_theta, b_z=b_z, c=c, d=d)


def compatibility_residual(grid: Grid, tup: InitialTuple) -> tuple[float, float]:
    """Discrete max-norm residuals of the two family constraints.

    Measured on vertical-interior rows with the solver's own centered
    stencils; decays at O(h^2) for data built by make_stream_data.
    """
    rr = grid.rc
    res_sin = (d_r(grid, tup.a_r, ODD) + tup.a_r / rr + d_z(grid, tup.a_z)
               - tup.b_theta / rr)
    res_cos = (d_r(grid, tup.b_r, ODD) + tup.b_r / rr + d_z(grid, tup.b_z)
               + tup.a_theta / rr)
    inner = np.s_[:, 1:-1]
    return (float(np.max(np.abs(res_sin[inner]))),
            float(np.max(np.abs(res_cos[inner]))))


def init_state(grid: Grid, n_base: int, n_modes: int,
               tup: InitialTuple | None = None,
               params: BumpParams | None = None,
               project: bool = False,
               backend: str = "direct") -> SpectralState:
    """Assemble the t = 0 state: zero lead, data on harmonic 1, rest zero.

    The first-harmonic slots receive (a_r, b_r, a_theta/N, b_theta/N,
    a_z, b_z) and the temperature pair (c, d); harmonics 2..K start at
    zero, as do all pressures and the lead block.

    Parameters
    ----------
    project : bool
        When True, apply the discrete family projections once so the data
        satisfies the constraints to solver precision instead of O(h^2).
    """
    if tup is None:
        tup = make_stream_data(grid, params)
    s = SpectralState.zeros(grid, n_base, n_modes)
    m1 = s.modes[0]
    m1.u_r_sin = tup.a_r.copy()
    m1.u_r_cos = tup.b_r.copy()
    m1.u_theta_sin = tup.a_theta / n_base
    m1.u_theta_cos = tup.b_theta / n_base
    m1.u_z_sin = tup.a_z.copy()
    m1.u_z_cos = tup.b_z.copy()
    m1.temp_sin = tup.c.copy()
    m1.temp_cos = tup.d.copy()
    if project:
        from .elliptic import project_state
        project_state(s, backend=backend)
    return s
