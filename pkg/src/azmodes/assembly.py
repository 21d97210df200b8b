"""Physical-field reconstruction and the full-system residual check.

Sampling
--------
Every assembled field is periodic in the rescaled angle phi = N*theta, so
sampling one fundamental period phi_l = 2*pi*l/M, l = 0..M-1 (that is,
theta_l = phi_l / N) represents the whole circle.  Uniform quadrature in
phi integrates trig polynomials of degree < M exactly, hence M >= 2K+2
makes L^2 quantities of a K-harmonic state exact and the default
M = 4K+4 covers fourth powers of quadratics in the residual integrand.
Azimuthal derivatives are evaluated exactly on the coefficients
(d_theta maps the sin stack to +kN cos and the cos stack to -kN sin);
meridional derivatives use the same centered stencils as module grid,
with the axis ghost taken from the sampled field itself:

    f(-r, theta) = sign * f(r, theta + pi),

sign -1 for u^r, u^theta and +1 for u^z, pi, eta; theta + pi shifts the
sample index by N*M/2 mod M (M must be even).  This closure is exact, not
a parity approximation.  The outer rim uses the odd Dirichlet ghost.

The residual evaluator writes the momentum equation in Cartesian
components (where the vector Laplacian is three scalar Laplacians) while
keeping cylindrical sample storage; the buoyant gravity term and the
temperature drift terms carry the 1/(1+r^2) profile weights.  Time
derivatives are difference quotients of consecutive snapshots, spatial
terms use the midpoint state, and the pressure gradient uses the later
snapshot's stored potentials (produced by the step that connects the
two).  The L^2 norm runs over the vertical interior.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid
from .state import SpectralState

Array = np.ndarray

# component reflection signs across the axis
_SIGNS = {"u_r": -1.0, "u_theta": -1.0, "u_z": 1.0, "pressure": 1.0,
          "temp": 1.0}


def _tables(n_modes: int, m_theta: int) -> tuple[Array, Array, Array]:
    phi = 2.0 * np.pi * np.arange(m_theta) / m_theta
    k = np.arange(1, n_modes + 1)
    return np.sin(np.outer(phi, k)), np.cos(np.outer(phi, k)), phi


def _stacks(s: SpectralState, comp: str) -> tuple[Array, Array]:
    sins = np.stack([getattr(m, comp + "_sin") for m in s.modes]) \
        if s.n_modes else np.zeros((0,) + s.grid.shape())
    coss = np.stack([getattr(m, comp + "_cos") for m in s.modes]) \
        if s.n_modes else np.zeros((0,) + s.grid.shape())
    return sins, coss


def _sample(lead: Array, sins: Array, coss: Array,
            sin_t: Array, cos_t: Array) -> Array:
    out = np.tensordot(sin_t, sins, axes=(1, 0)) \
        + np.tensordot(cos_t, coss, axes=(1, 0))
    return out + lead[None, :, :]


def _sample_component(s: SpectralState, comp: str, sin_t: Array,
                      cos_t: Array, theta_order: int = 0) -> Array:
    """Sampled field or its exact theta-derivative (order 0, 1, or 2)."""
    lead = getattr(s.lead, comp)
    sins, coss = _stacks(s, comp)
    if theta_order == 0:
        return _sample(lead, sins, coss, sin_t, cos_t)
    kn = (np.arange(1, s.n_modes + 1) * s.n_base).astype(float)
    kn = kn[:, None, None]
    zero = np.zeros_like(lead)
    if theta_order == 1:
        return _sample(zero, -kn * coss, kn * sins, sin_t, cos_t)
    if theta_order == 2:
        return _sample(zero, -kn**2 * sins, -kn**2 * coss, sin_t, cos_t)
    raise ValueError(f"theta_order must be 0, 1, or 2, got {theta_order}")


# ---------------------------------------------------------------------------
# meridional derivatives of sampled fields
# ---------------------------------------------------------------------------

def _pad_r_samples(F: Array, sign: float, shift: int) -> Array:
    ghost_in = sign * np.roll(F[:, 0, :], -shift, axis=0)
    ghost_out = -F[:, -1, :]
    return np.concatenate([ghost_in[:, None, :], F, ghost_out[:, None, :]],
                          axis=1)


def _d_r_samples(grid: Grid, F: Array, sign: float, shift: int) -> Array:
    P = _pad_r_samples(F, sign, shift)
    return (P[:, 2:, :] - P[:, :-2, :]) / (2.0 * grid.dr)


def _d_z_samples(grid: Grid, F: Array) -> Array:
    lo = (2.0 * F[:, :, :1] - F[:, :, 1:2])
    hi = (2.0 * F[:, :, -1:] - F[:, :, -2:-1])
    P = np.concatenate([lo, F, hi], axis=2)
    return (P[:, :, 2:] - P[:, :, :-2]) / (2.0 * grid.dz)


def _lap_merid_samples(grid: Grid, F: Array, sign: float, shift: int) -> Array:
    P = _pad_r_samples(F, sign, shift)
    d2r = (P[:, 2:, :] - 2.0 * P[:, 1:-1, :] + P[:, :-2, :]) / grid.dr**2
    d1r = (P[:, 2:, :] - P[:, :-2, :]) / (2.0 * grid.dr)
    lo = (2.0 * F[:, :, :1] - F[:, :, 1:2])
    hi = (2.0 * F[:, :, -1:] - F[:, :, -2:-1])
    Q = np.concatenate([lo, F, hi], axis=2)
    d2z = (Q[:, :, 2:] - 2.0 * Q[:, :, 1:-1] + Q[:, :, :-2]) / grid.dz**2
    return d2r + d1r / grid.rc[None] + d2z


def _axis_shift(n_base: int, m_theta: int) -> int:
    if m_theta % 2 != 0:
        raise ValueError(f"m_theta must be even, got {m_theta}")
    return (n_base * (m_theta // 2)) % m_theta


# ---------------------------------------------------------------------------
# public reconstruction
# ---------------------------------------------------------------------------

def assemble(s: SpectralState, m_theta: int) -> dict:
    """Sample all physical fields; arrays shaped (m_theta, nr, nz).

    Returns u_r, u_theta, u_z, pressure, temp, rho = temp/(1+r^2), and the
    theta sample positions (one fundamental period, theta = phi/N).
    """
    if m_theta < 2 * s.n_modes + 2:
        raise ValueError(
            f"m_theta={m_theta} too small: need >= {2 * s.n_modes + 2}")
    sin_t, cos_t, phi = _tables(s.n_modes, m_theta)
    out = {"theta": phi / s.n_base}
    for comp in ("u_r", "u_theta", "u_z", "pressure", "temp"):
        out[comp] = _sample_component(s, comp, sin_t, cos_t)
    out["rho"] = out["temp"] / (1.0 + s.grid.rc[None] ** 2)
    return out


def spectral_l2_norms(s: SpectralState) -> dict:
    """Coefficient-route L^2 norms (Plancherel): lead^2 + half the stacks."""
    g = s.grid

    def pl(*comps: str) -> float:
        total = 0.0
        for comp in comps:
            total += float(np.sum(g.w * getattr(s.lead, comp) ** 2))
            for m in s.modes:
                total += 0.5 * float(np.sum(
                    g.w * (getattr(m, comp + "_sin") ** 2
                           + getattr(m, comp + "_cos") ** 2)))
        return total

    return {
        "u_L2": np.sqrt(pl("u_r", "u_theta", "u_z")),
        "eta_L2": np.sqrt(pl("temp")),
        "u_theta_L2": np.sqrt(pl("u_theta")),
    }


def assembled_norms(s: SpectralState, m_theta: int | None = None) -> dict:
    """Sample-route norms: L^2, H^1 seminorm, L^5 (velocity Euclidean)."""
    if m_theta is None:
        m_theta = 4 * s.n_modes + 4
    g = s.grid
    sin_t, cos_t, _ = _tables(s.n_modes, m_theta)
    shift = _axis_shift(s.n_base, m_theta)
    w3 = g.w[None, :, :] / m_theta
    rc = g.rc[None]

    f = {c: _sample_component(s, c, sin_t, cos_t)
         for c in ("u_r", "u_theta", "u_z", "temp")}
    dth = {c: _sample_component(s, c, sin_t, cos_t, theta_order=1)
           for c in ("u_r", "u_theta", "u_z", "temp")}

    u2 = f["u_r"] ** 2 + f["u_theta"] ** 2 + f["u_z"] ** 2
    grad2_u = np.zeros_like(u2)
    for c in ("u_r", "u_theta", "u_z"):
        grad2_u += _d_r_samples(g, f[c], _SIGNS[c], shift) ** 2
        grad2_u += _d_z_samples(g, f[c]) ** 2
    grad2_u += ((dth["u_r"] - f["u_theta"]) ** 2
                + (dth["u_theta"] + f["u_r"]) ** 2
                + dth["u_z"] ** 2) / rc**2
    grad2_eta = (_d_r_samples(g, f["temp"], 1.0, shift) ** 2
                 + _d_z_samples(g, f["temp"]) ** 2
                 + dth["temp"] ** 2 / rc**2)
    return {
        "u_L2": float(np.sqrt(np.sum(w3 * u2))),
        "eta_L2": float(np.sqrt(np.sum(w3 * f["temp"] ** 2))),
        "u_theta_L2": float(np.sqrt(np.sum(w3 * f["u_theta"] ** 2))),
        "u_H1": float(np.sqrt(np.sum(w3 * grad2_u))),
        "eta_H1": float(np.sqrt(np.sum(w3 * grad2_eta))),
        "u_L5": float(np.sum(w3 * u2**2.5)) ** 0.2,
    }


def u_L5_power(s: SpectralState, m_theta: int | None = None) -> float:
    """||u||_{L^5}^5 of the assembled velocity (per-step accumulant)."""
    if m_theta is None:
        m_theta = 4 * s.n_modes + 4
    sin_t, cos_t, _ = _tables(s.n_modes, m_theta)
    u2 = sum(_sample_component(s, c, sin_t, cos_t) ** 2
             for c in ("u_r", "u_theta", "u_z"))
    return float(np.sum(s.grid.w[None, :, :] / m_theta * u2**2.5))


def dump_fields(s: SpectralState, path, m_theta: int | None = None) -> None:
    """Write assembled fields with axis metadata to a .npz container."""
    if m_theta is None:
        m_theta = 4 * s.n_modes + 4
    fields = assemble(s, m_theta)
    np.savez(path, r=s.grid.r, z=s.grid.z, t=s.t, n_base=s.n_base,
             **{k: np.asarray(v) for k, v in fields.items()})


# ---------------------------------------------------------------------------
# full-system residual
# ---------------------------------------------------------------------------

def pde_residual(prev: SpectralState, next_s: SpectralState, dt: float,
                 m_theta: int | None = None) -> float:
    """Discrete residual of the primitive buoyant system between snapshots.

    Momentum is checked in Cartesian components u1, u2, u3 (gravity e3
    weighted by 1/(1+r^2)) and the temperature in its drift form; the
    returned value is the combined L^2 norm over the vertical interior.
    O(dt + h^2) on smooth solver output.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if prev.n_base != next_s.n_base or prev.n_modes != next_s.n_modes:
        raise ValueError("snapshots disagree in n_base or n_modes")
    ga, gb = prev.grid, next_s.grid
    if (ga.nr, ga.nz) != (gb.nr, gb.nz) or \
            (ga.R, ga.Zmax) != (gb.R, gb.Zmax):
        raise ValueError("snapshots live on different grids")

    g = ga
    K = prev.n_modes
    if m_theta is None:
        m_theta = 4 * K + 4
    sin_t, cos_t, phi = _tables(K, m_theta)
    shift = _axis_shift(prev.n_base, m_theta)
    theta = (phi / prev.n_base)[:, None, None]
    cth, sth = np.cos(theta), np.sin(theta)
    rc = g.rc[None]

    mid = prev.copy()
    dot = prev.copy()
    for name in ("u_r", "u_theta", "u_z", "temp"):
        setattr(mid.lead, name, 0.5 * (getattr(prev.lead, name)
                                       + getattr(next_s.lead, name)))
        setattr(dot.lead, name, (getattr(next_s.lead, name)
                                 - getattr(prev.lead, name)) / dt)
        for i in range(K):
            for suf in ("_sin", "_cos"):
                a = getattr(prev.modes[i], name + suf)
                b = getattr(next_s.modes[i], name + suf)
                setattr(mid.modes[i], name + suf, 0.5 * (a + b))
                setattr(dot.modes[i], name + suf, (b - a) / dt)

    comps = ("u_r", "u_theta", "u_z", "temp")
    F = {c: _sample_component(mid, c, sin_t, cos_t) for c in comps}
    Fth = {c: _sample_component(mid, c, sin_t, cos_t, 1) for c in comps}
    Fthth = {c: _sample_component(mid, c, sin_t, cos_t, 2) for c in comps}
    Fr = {c: _d_r_samples(g, F[c], _SIGNS[c], shift) for c in comps}
    Fz = {c: _d_z_samples(g, F[c]) for c in comps}
    Flap = {c: _lap_merid_samples(g, F[c], _SIGNS[c], shift) for c in comps}
    Ft = {c: _sample_component(dot, c, sin_t, cos_t) for c in comps}

    pres = _sample_component(next_s, "pressure", sin_t, cos_t)
    pres_th = _sample_component(next_s, "pressure", sin_t, cos_t, 1)
    pres_r = _d_r_samples(g, pres, 1.0, shift)
    pres_z = _d_z_samples(g, pres)

    ur, ut, uz, eta = F["u_r"], F["u_theta"], F["u_z"], F["temp"]

    def cart(fr, ft):
        """Pair of Cartesian combinations of a cylindrical vector pair."""
        return fr * cth - ft * sth, fr * sth + ft * cth

    # advection of a scalar sample given its three derivative samples
    def adv(gr, gth, gz):
        return ur * gr + (ut / rc) * gth + uz * gz

    u1, u2 = cart(ur, ut)
    du1 = {
        "r": Fr["u_r"] * cth - Fr["u_theta"] * sth,
        "z": Fz["u_r"] * cth - Fz["u_theta"] * sth,
        "th": (Fth["u_r"] - ut) * cth - (Fth["u_theta"] + ur) * sth,
    }
    du2 = {
        "r": Fr["u_r"] * sth + Fr["u_theta"] * cth,
        "z": Fz["u_r"] * sth + Fz["u_theta"] * cth,
        "th": (Fth["u_r"] - ut) * sth + (Fth["u_theta"] + ur) * cth,
    }
    lap_u1 = (Flap["u_r"] * cth - Flap["u_theta"] * sth
              + (Fthth["u_r"] - 2.0 * Fth["u_theta"] - ur) * cth / rc**2
              - (Fthth["u_theta"] + 2.0 * Fth["u_r"] - ut) * sth / rc**2)
    lap_u2 = (Flap["u_r"] * sth + Flap["u_theta"] * cth
              + (Fthth["u_r"] - 2.0 * Fth["u_theta"] - ur) * sth / rc**2
              + (Fthth["u_theta"] + 2.0 * Fth["u_r"] - ut) * cth / rc**2)
    lap_u3 = Flap["u_z"] + Fthth["u_z"] / rc**2
    lap_eta = Flap["temp"] + Fthth["temp"] / rc**2

    dt_u1, dt_u2 = cart(Ft["u_r"], Ft["u_theta"])
    grad_p1 = pres_r * cth - (sth / rc) * pres_th
    grad_p2 = pres_r * sth + (cth / rc) * pres_th

    prof = 1.0 + rc**2
    res1 = dt_u1 + adv(du1["r"], du1["th"], du1["z"]) - lap_u1 + grad_p1
    res2 = dt_u2 + adv(du2["r"], du2["th"], du2["z"]) - lap_u2 + grad_p2
    res3 = (Ft["u_z"] + adv(Fr["u_z"], Fth["u_z"], Fz["u_z"]) - lap_u3
            + pres_z - eta / prof)
    res4 = (Ft["temp"] + adv(Fr["temp"], Fth["temp"], Fz["temp"]) - lap_eta
            - 2.0 * rc * ur * eta / prof
            + 4.0 * rc * Fr["temp"] / prof
            + 4.0 * (1.0 - rc**2) * eta / prof**2)

    mask = np.ones(g.shape())
    mask[:, 0] = 0.0
    mask[:, -1] = 0.0
    w3 = g.w[None, :, :] * mask[None, :, :] / m_theta
    total = np.sum(w3 * (res1**2 + res2**2 + res3**2 + res4**2))
    return float(np.sqrt(total))
