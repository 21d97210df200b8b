"""Quadratic mode-mode interactions and lead/mode linear couplings.

Source convention
-----------------
Every source field S produced here sits on the right-hand side with a
minus sign: the evolution equations read

    d_t f + (transport + couplings + pressure + diffusion) = -S,

so the explicit update *subtracts* dt * S.  The same convention holds for
the bundles returned by linear_couplings.

Structure of the convolutions
-----------------------------
The fluctuation fields are trigonometric polynomials in the azimuth with
coefficient pairs (sin, cos) at wavenumbers a*N, a = 1..K.  Products are
reduced with

    sin A sin B = (cos(A-B) - cos(A+B)) / 2,
    cos A cos B = (cos(A-B) + cos(A+B)) / 2,
    sin A cos B = (sin(A+B) + sin(A-B)) / 2,

so an ordered coefficient pair (a, b) feeds the mean (a == b), the sum
harmonic a + b <= K, and the difference harmonic |a - b| >= 1.  Everything
above harmonic K is truncated (Galerkin).  The accumulation loop runs over
ascending a, then b, which fixes the floating-point summation order and
makes runs bit-reproducible.

The quadratic operators reduced this way are the fluctuation parts of the
advective derivatives,

    T_r  = u.grad u^r - (u^t)^2/r,      T_t = u.grad u^t + u^r u^t / r,
    T_z  = u.grad u^z,                  T_e = u.grad eta - 2r/(1+r^2) u^r eta,

with u.grad = u^r d_r + (u^t/r) d_t + u^z d_z, all factors fluctuations.
pseudospectral_oracle evaluates the same operators on an equispaced
azimuthal sample grid and projects back; with M >= 3K + 1 samples the
projection of a degree-3K trig polynomial is exact, which pins the
convolution bookkeeping to rounding error.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, ODD, d_r, d_z
from .state import ModeSources, SourceSet, SpectralState

Array = np.ndarray

# mode component stacking order used throughout this module
_COMPS = ("u_r", "u_theta", "u_z", "temp")


def _mode_stacks(s: SpectralState) -> dict[str, Array]:
    """Stack mode coefficients and their meridional derivatives.

    Returns arrays of shape (K, nr, nz) keyed by e.g. "u_r_sin",
    "dr_u_r_sin", "dz_u_r_sin".  All mode slices carry odd axis parity.
    """
    g = s.grid
    out: dict[str, Array] = {}
    for comp in _COMPS:
        for phase in ("sin", "cos"):
            name = f"{comp}_{phase}"
            stack = np.stack([getattr(m, name) for m in s.modes])
            out[name] = stack
            flat = stack.transpose(1, 0, 2).reshape(g.nr, -1)
            out[f"dr_{name}"] = (
                d_r(g, flat, ODD).reshape(g.nr, s.n_modes, g.nz).transpose(1, 0, 2))
            # d_z acts along the last axis; batching over modes is free
            out[f"dz_{name}"] = np.stack([d_z(g, stack[i])
                                          for i in range(s.n_modes)])
    return out


def _bilinear_terms(st: dict[str, Array], grid: Grid, n_base: int):
    """Term table for the four quadratic operators.

    Each entry is (target, A_sin, A_cos, B_sin, B_cos, prefactor) where A
    and B are (K, nr, nz) coefficient stacks of the two factors and the
    prefactor is a broadcastable array.  Azimuthal derivative factors are
    encoded directly: d_theta f has sin coefficient -aN * f_cos[a] and cos
    coefficient +aN * f_sin[a].
    """
    K = st["u_r_sin"].shape[0]
    kn = (n_base * np.arange(1, K + 1))[:, None, None].astype(float)
    inv_r = 1.0 / grid.rc
    one = 1.0
    temp_w = -2.0 * grid.rc / (1.0 + grid.rc**2)

    def dth(comp: str) -> tuple[Array, Array]:
        return -kn * st[f"{comp}_cos"], kn * st[f"{comp}_sin"]

    terms = []
    for tgt, comp in (("r", "u_r"), ("theta", "u_theta"),
                      ("z", "u_z"), ("temp", "temp")):
        # u^r d_r X + u^z d_z X
        terms.append((tgt, st["u_r_sin"], st["u_r_cos"],
                      st[f"dr_{comp}_sin"], st[f"dr_{comp}_cos"], one))
        terms.append((tgt, st["u_z_sin"], st["u_z_cos"],
                      st[f"dz_{comp}_sin"], st[f"dz_{comp}_cos"], one))
        # (u^t / r) d_theta X
        bs, bc = dth(comp)
        terms.append((tgt, st["u_theta_sin"], st["u_theta_cos"], bs, bc, inv_r))
    # curvature terms: -(u^t)^2/r on r, +u^r u^t/r on theta
    terms.append(("r", st["u_theta_sin"], st["u_theta_cos"],
                  st["u_theta_sin"], st["u_theta_cos"], -inv_r))
    terms.append(("theta", st["u_r_sin"], st["u_r_cos"],
                  st["u_theta_sin"], st["u_theta_cos"], inv_r))
    # temperature weight term: -2r/(1+r^2) u^r eta
    terms.append(("temp", st["u_r_sin"], st["u_r_cos"],
                  st["temp_sin"], st["temp_cos"], temp_w))
    return terms


def compute_sources(s: SpectralState) -> SourceSet:
    """Evaluate all quadratic sources by direct coefficient convolution."""
    g = s.grid
    K = s.n_modes
    shape = g.shape()
    st = _mode_stacks(s)
    terms = _bilinear_terms(st, g, s.n_base)

    lead = {t: np.zeros(shape) for t in ("r", "theta", "z", "temp")}
    sin_out = {t: np.zeros((K,) + shape) for t in ("r", "theta", "z", "temp")}
    cos_out = {t: np.zeros((K,) + shape) for t in ("r", "theta", "z", "temp")}

    for a in range(1, K + 1):
        for b in range(1, K + 1):
            ia, ib = a - 1, b - 1
            for tgt, As, Ac, Bs, Bc, pref in terms:
                ss = pref * (As[ia] * Bs[ib])
                cc = pref * (Ac[ia] * Bc[ib])
                sc = pref * (As[ia] * Bc[ib])
                cs = pref * (Ac[ia] * Bs[ib])
                if a == b:
                    lead[tgt] += 0.5 * (ss + cc)
                ksum = a + b
                if ksum <= K:
                    sin_out[tgt][ksum - 1] += 0.5 * (sc + cs)
                    cos_out[tgt][ksum - 1] += 0.5 * (cc - ss)
                kdif = abs(a - b)
                if kdif >= 1:
                    # sin(a-b) flips sign with the ordering, cos does not
                    sgn = 1.0 if a > b else -1.0
                    sin_out[tgt][kdif - 1] += 0.5 * sgn * (sc - cs)
                    cos_out[tgt][kdif - 1] += 0.5 * (cc + ss)

    modes = [ModeSources(
        k=k,
        r_sin=sin_out["r"][k - 1], r_cos=cos_out["r"][k - 1],
        theta_sin=sin_out["theta"][k - 1], theta_cos=cos_out["theta"][k - 1],
        z_sin=sin_out["z"][k - 1], z_cos=cos_out["z"][k - 1],
        temp_sin=sin_out["temp"][k - 1], temp_cos=cos_out["temp"][k - 1],
    ) for k in range(1, K + 1)]
    return SourceSet(lead_r=lead["r"], lead_theta=lead["theta"],
                     lead_z=lead["z"], lead_temp=lead["temp"], modes=modes)


def lead_sources(s: SpectralState) -> tuple[Array, Array, Array, Array]:
    """Mode-mode feedback onto the axisymmetric block (r, theta, z, temp)."""
    src = compute_sources(s)
    return src.lead_r, src.lead_theta, src.lead_z, src.lead_temp


def mode_sources(s: SpectralState) -> list[ModeSources]:
    """Quadratic sources for every retained harmonic."""
    return compute_sources(s).modes


# ---------------------------------------------------------------------------
# angular collocation oracle
# ---------------------------------------------------------------------------

def pseudospectral_oracle(s: SpectralState, m_theta: int) -> SourceSet:
    """Evaluate the quadratic sources by azimuthal collocation.

    Samples the fluctuation fields at phi_l = 2 pi l / m_theta (phi the
    azimuth scaled by the base wavenumber), forms the quadratic operators
    pointwise with the same meridional stencils and exact azimuthal
    derivatives, and projects back onto the retained harmonics by DFT.

    Requires m_theta >= 3K + 1 so that the degree-3K products are
    projected without aliasing; then the result matches compute_sources to
    rounding error.
    """
    K = s.n_modes
    if m_theta < 3 * K + 1:
        raise ValueError(
            f"m_theta={m_theta} aliases products; need at least {3 * K + 1}")
    g = s.grid
    phi = 2.0 * np.pi * np.arange(m_theta) / m_theta
    ks = np.arange(1, K + 1)
    sin_t = np.sin(np.outer(phi, ks))          # (M, K)
    cos_t = np.cos(np.outer(phi, ks))
    kn = (s.n_base * ks).astype(float)

    st = _mode_stacks(s)

    def sample(comp: str) -> Array:
        return (np.tensordot(sin_t, st[f"{comp}_sin"], axes=(1, 0))
                + np.tensordot(cos_t, st[f"{comp}_cos"], axes=(1, 0)))

    def sample_dth(comp: str) -> Array:
        return (np.tensordot(cos_t * kn, st[f"{comp}_sin"], axes=(1, 0))
                - np.tensordot(sin_t * kn, st[f"{comp}_cos"], axes=(1, 0)))

    def sample_dr(comp: str) -> Array:
        return (np.tensordot(sin_t, st[f"dr_{comp}_sin"], axes=(1, 0))
                + np.tensordot(cos_t, st[f"dr_{comp}_cos"], axes=(1, 0)))

    def sample_dz(comp: str) -> Array:
        return (np.tensordot(sin_t, st[f"dz_{comp}_sin"], axes=(1, 0))
                + np.tensordot(cos_t, st[f"dz_{comp}_cos"], axes=(1, 0)))

    ur, ut, uz, eta = (sample(c) for c in _COMPS)
    rc = grid_rc = g.rc[None, :, :]
    adv = {c: (ur * sample_dr(c) + (ut / rc) * sample_dth(c)
               + uz * sample_dz(c)) for c in _COMPS}
    T = {
        "r": adv["u_r"] - ut * ut / rc,
        "theta": adv["u_theta"] + ur * ut / rc,
        "z": adv["u_z"],
        "temp": adv["temp"] - (2.0 * grid_rc / (1.0 + grid_rc**2)) * ur * eta,
    }

    lead = {t: np.mean(T[t], axis=0) for t in T}
    sin_c = {t: 2.0 / m_theta * np.tensordot(sin_t, T[t], axes=(0, 0)) for t in T}
    cos_c = {t: 2.0 / m_theta * np.tensordot(cos_t, T[t], axes=(0, 0)) for t in T}

    modes = [ModeSources(
        k=k,
        r_sin=sin_c["r"][k - 1], r_cos=cos_c["r"][k - 1],
        theta_sin=sin_c["theta"][k - 1], theta_cos=cos_c["theta"][k - 1],
        z_sin=sin_c["z"][k - 1], z_cos=cos_c["z"][k - 1],
        temp_sin=sin_c["temp"][k - 1], temp_cos=cos_c["temp"][k - 1],
    ) for k in range(1, K + 1)]
    return SourceSet(lead_r=lead["r"], lead_theta=lead["theta"],
                     lead_z=lead["z"], lead_temp=lead["temp"], modes=modes)


# ---------------------------------------------------------------------------
# linear lead/mode couplings
# ---------------------------------------------------------------------------

def linear_couplings(s: SpectralState, buoyancy: bool = True) -> SourceSet:
    """Explicit transport and coupling terms, excluding quadratic sources.

    Reuses the SourceSet container as a per-field bundle.  Values follow
    the same sign convention as the sources (d_t f = -term + implicit
    part), so the stepper can add couplings and sources directly.  The
    implicit diffusion shifts (including the (kN)^2/r^2 penalty and the
    temperature drift operator) are *not* included here.
    """
    g = s.grid
    rc = g.rc
    inv_r = 1.0 / rc
    buoy_w = (1.0 / (1.0 + rc**2)) if buoyancy else 0.0
    temp_w = 2.0 * rc / (1.0 + rc**2)
    L = s.lead

    dU_r = {  # lead gradients, parity per field
        "u_r": (d_r(g, L.u_r, ODD), d_z(g, L.u_r)),
        "u_theta": (d_r(g, L.u_theta, ODD), d_z(g, L.u_theta)),
        "u_z": (d_r(g, L.u_z, 1), d_z(g, L.u_z)),
        "temp": (d_r(g, L.temp, 1), d_z(g, L.temp)),
    }

    def lead_adv(f: Array, parity: int) -> Array:
        return L.u_r * d_r(g, f, parity) + L.u_z * d_z(g, f)

    out = SourceSet.zeros(g.shape(), s.n_modes)
    out.lead_r = lead_adv(L.u_r, ODD) - L.u_theta**2 * inv_r
    out.lead_theta = lead_adv(L.u_theta, ODD) + L.u_r * L.u_theta * inv_r
    out.lead_z = lead_adv(L.u_z, 1) - buoy_w * L.temp
    out.lead_temp = lead_adv(L.temp, 1) - temp_w * L.u_r * L.temp

    for m in s.modes:
        kn = m.k * s.n_base
        o = out.mode(m.k)
        km_r = kn * inv_r
        km_rr = 2.0 * kn * inv_r**2

        def tilt(fr: Array, fz: Array, comp: str) -> Array:
            # (mode meridional velocity) . grad of a lead field
            gr, gz = dU_r[comp]
            return fr * gr + fz * gz

        o.r_sin = (lead_adv(m.u_r_sin, ODD) + tilt(m.u_r_sin, m.u_z_sin, "u_r")
                   - km_r * L.u_theta * m.u_r_cos
                   - 2.0 * inv_r * L.u_theta * m.u_theta_sin
                   - km_rr * m.u_theta_cos)
        o.r_cos = (lead_adv(m.u_r_cos, ODD) + tilt(m.u_r_cos, m.u_z_cos, "u_r")
                   + km_r * L.u_theta * m.u_r_sin
                   - 2.0 * inv_r * L.u_theta * m.u_theta_cos
                   + km_rr * m.u_theta_sin)
        o.theta_sin = (lead_adv(m.u_theta_sin, ODD)
                       + tilt(m.u_r_sin, m.u_z_sin, "u_theta")
                       - km_r * L.u_theta * m.u_theta_cos
                       + inv_r * (L.u_r * m.u_theta_sin + m.u_r_sin * L.u_theta)
                       + km_rr * m.u_r_cos)
        o.theta_cos = (lead_adv(m.u_theta_cos, ODD)
                       + tilt(m.u_r_cos, m.u_z_cos, "u_theta")
                       + km_r * L.u_theta * m.u_theta_sin
                       + inv_r * (L.u_r * m.u_theta_cos + m.u_r_cos * L.u_theta)
                       - km_rr * m.u_r_sin)
        o.z_sin = (lead_adv(m.u_z_sin, ODD) + tilt(m.u_r_sin, m.u_z_sin, "u_z")
                   - km_r * L.u_theta * m.u_z_cos - buoy_w * m.temp_sin)
        o.z_cos = (lead_adv(m.u_z_cos, ODD) + tilt(m.u_r_cos, m.u_z_cos, "u_z")
                   + km_r * L.u_theta * m.u_z_sin - buoy_w * m.temp_cos)
        o.temp_sin = (lead_adv(m.temp_sin, ODD)
                      + tilt(m.u_r_sin, m.u_z_sin, "temp")
                      - km_r * L.u_theta * m.temp_cos
                      - temp_w * (L.u_r * m.temp_sin + m.u_r_sin * L.temp))
        o.temp_cos = (lead_adv(m.temp_cos, ODD)
                      + tilt(m.u_r_cos, m.u_z_cos, "temp")
                      + km_r * L.u_theta * m.temp_sin
                      - temp_w * (L.u_r * m.temp_cos + m.u_r_cos * L.temp))
    return out
