"""Energy functionals, weighted component norms, and scaling fits.

The monitored functional couples an instantaneous part with running time
integrals.  Per harmonic k (azimuthal order m = kN) and field f:

    A(f) = ||r^{(p-3)/2} |f|^{p/2}||_{L^2}^2  =  ||r^{1-3/p} f||_{L^p}^p,
    B(f) = ||r^{(p-3)/2} |grad f| |f|^{p/2-1}||_{L^2}^2,
    C(f) = ||r^{(p-5)/2} |f|^{p/2}||_{L^2}^2,

and the reported values are

    E_p(t)    = sum_k w_k sum_f [A_f(t) + int_0^t (B_f + m^2 C_f)],
    calE_p(t) = same over the two temperature slots,
    D(t)      = sum_k int_0^t ||r^{-3/2} U_k||^2 + ||r^{-3/2} V_k||^2,

with block weights w_k = N^{-2 alpha_p} for k = 1 and (kN)^{2 beta_p} for
k >= 2, and an extra (kN)^{p/2} on the two swirl slots of the velocity
functional.  Sums over k are truncated at K; the k = K share of E_p is
reported as a truncation indicator.  Time integrals accumulate by the
left-endpoint rule: a call with step dt reports the values at the current
time and then adds dt times the current integrand to the accumulators.

All quadrature comes from module grid (midpoint in r, trapezoid in z);
no independent rules, so closed-form identities hold to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, ODD, d_r, d_z, lp_norm_weighted, vector_lp_norm
from .state import EnergyParams, RunConfig, SpectralState

Array = np.ndarray


# ---------------------------------------------------------------------------
# accumulators
# ---------------------------------------------------------------------------

@dataclass
class EnergyAccumulators:
    """Running time integrals feeding E_p, calE_p, D and the L^5 record."""

    ep_int: Array          # (K,) weighted dissipation integrals of E_p
    cal_int: Array         # (K,) same for the temperature functional
    d_int: float = 0.0     # integral of the r^{-3/2} dissipation functional
    u5_int: float = 0.0    # integral of ||u(t)||_{L^5}^5

    @classmethod
    def zeros(cls, n_modes: int) -> "EnergyAccumulators":
        return cls(ep_int=np.zeros(n_modes), cal_int=np.zeros(n_modes))


# ---------------------------------------------------------------------------
# per-field building blocks
# ---------------------------------------------------------------------------

def _abc_terms(grid: Grid, f: Array, p: float) -> tuple[float, float, float]:
    """Instantaneous A and the two dissipation integrands B, C for one field."""
    rc = grid.rc
    absf = np.abs(f)
    a = float(np.sum(grid.w * rc ** (p - 3.0) * absf**p))
    grad2 = d_r(grid, f, ODD) ** 2 + d_z(grid, f) ** 2
    b = float(np.sum(grid.w * rc ** (p - 3.0) * grad2 * absf ** (p - 2.0)))
    c = float(np.sum(grid.w * rc ** (p - 5.0) * absf**p))
    return a, b, c


def _energy_terms(s: SpectralState, params: EnergyParams):
    """Per-k instantaneous values and integrands of E_p, calE_p, and D."""
    p = params.p
    g = s.grid
    K = s.n_modes
    inst_ep = np.zeros(K)
    integ_ep = np.zeros(K)
    inst_cal = np.zeros(K)
    integ_cal = np.zeros(K)
    d_integrand = 0.0
    for i, m in enumerate(s.modes):
        mm = float(m.k * s.n_base)
        w_k = (s.n_base ** (-2.0 * params.alpha) if m.k == 1
               else mm ** (2.0 * params.beta))
        th_w = w_k * mm ** (p / 2.0)
        for f in (m.u_r_sin, m.u_r_cos, m.u_z_sin, m.u_z_cos):
            a, b, c = _abc_terms(g, f, p)
            inst_ep[i] += w_k * a
            integ_ep[i] += w_k * (b + mm**2 * c)
        for f in (m.u_theta_sin, m.u_theta_cos):
            a, b, c = _abc_terms(g, f, p)
            inst_ep[i] += th_w * a
            integ_ep[i] += th_w * (b + mm**2 * c)
        for f in (m.temp_sin, m.temp_cos):
            a, b, c = _abc_terms(g, f, p)
            inst_cal[i] += w_k * a
            integ_cal[i] += w_k * (b + mm**2 * c)
        d_integrand += (
            vector_lp_norm(g, (m.u_r_sin, m.u_theta_sin, m.u_z_sin),
                           2.0, -1.5) ** 2
            + vector_lp_norm(g, (m.u_r_cos, m.u_theta_cos, m.u_z_cos),
                             2.0, -1.5) ** 2)
    return inst_ep, integ_ep, inst_cal, integ_cal, d_integrand


def energy_functionals(s: SpectralState, params: EnergyParams,
                       acc: EnergyAccumulators, dt: float
                       ) -> tuple[float, float, float]:
    """Report (E_p, calE_p, D) at the current time, then accumulate dt.

    Left-endpoint rule: the returned values use the integrals up to the
    current time; afterwards the current integrands times dt are added to
    acc.  Pass dt = 0 to evaluate without advancing the integrals.
    """
    params.validate()
    inst_ep, integ_ep, inst_cal, integ_cal, d_integ = _energy_terms(s, params)
    e_p = float(np.sum(inst_ep) + np.sum(acc.ep_int))
    cal = float(np.sum(inst_cal) + np.sum(acc.cal_int))
    d_val = acc.d_int
    if dt != 0.0:
        acc.ep_int += dt * integ_ep
        acc.cal_int += dt * integ_cal
        acc.d_int += dt * d_integ
    return e_p, cal, d_val


# ---------------------------------------------------------------------------
# component norms
# ---------------------------------------------------------------------------

def component_norms(s: SpectralState, p: float) -> dict:
    """Weighted p-th power norms per harmonic plus the lead L^3 norms.

    varpi[k-1] carries the six meridional/temperature slots plainly and
    the two swirl slots with a (kN)^{p/2} factor (the sqrt(kN) weight of
    the component tuple raised to the p-th power).
    """
    if not 5.0 < p < 6.0:
        raise ValueError(f"p must lie in (5, 6), got {p}")
    g = s.grid
    a = 1.0 - 3.0 / p
    varpi = []
    for m in s.modes:
        mm = float(m.k * s.n_base)
        total = 0.0
        for f in (m.u_r_sin, m.u_r_cos, m.u_z_sin, m.u_z_cos,
                  m.temp_sin, m.temp_cos):
            total += lp_norm_weighted(g, f, p, a) ** p
        for f in (m.u_theta_sin, m.u_theta_cos):
            total += mm ** (p / 2.0) * lp_norm_weighted(g, f, p, a) ** p
        varpi.append(total)
    return {
        "varpi": varpi,
        "lead_L3_U": vector_lp_norm(
            g, (s.lead.u_r, s.lead.u_theta, s.lead.u_z), 3.0),
        "lead_L3_xi": lp_norm_weighted(g, s.lead.temp, 3.0),
    }


def divergence_residual(s: SpectralState) -> float:
    """Sup-norm of the masked discrete divergence over all families."""
    from .elliptic import projector_for
    g = s.grid
    worst = float(np.max(np.abs(
        projector_for(g, 0, 1).divergence(s.lead.u_r, None, s.lead.u_z))))
    for m in s.modes:
        mm = m.k * s.n_base
        d_sin = projector_for(g, mm, 1).divergence(
            m.u_r_sin, m.u_theta_cos, m.u_z_sin)
        d_cos = projector_for(g, mm, -1).divergence(
            m.u_r_cos, m.u_theta_sin, m.u_z_cos)
        worst = max(worst, float(np.max(np.abs(d_sin))),
                    float(np.max(np.abs(d_cos))))
    return worst


def scaling_fit(points) -> float:
    """Least-squares slope of log(value) against log(N)."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points, got {len(pts)}")
    n = np.array([float(q[0]) for q in pts])
    v = np.array([float(q[1]) for q in pts])
    if np.any(n <= 0.0) or np.any(v <= 0.0):
        raise ValueError("scaling fit needs positive N and positive values")
    return float(np.polyfit(np.log(n), np.log(v), 1)[0])


# ---------------------------------------------------------------------------
# run record
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class DiagnosticsRecord:
    """Ordered diagnostic rows; serialized as deterministic CSV."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    @classmethod
    def for_modes(cls, n_modes: int) -> "DiagnosticsRecord":
        cols = ["t", "E_p", "calE_p", "D", "lead_L3_U", "lead_L3_xi",
                "div_max", "u_L2", "eta_L2", "u_L5_acc"]
        cols += [f"varpi_{k}" for k in range(1, n_modes + 1)]
        cols += ["u_theta_L2", "ep_share_topk"]
        return cls(columns=cols)

    def add_row(self, values: dict) -> None:
        self.rows.append([float(values[c]) for c in self.columns])

    def column(self, name: str) -> Array:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(x) for x in row))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def record_row(record: DiagnosticsRecord | None, s: SpectralState,
               cfg: RunConfig, acc: EnergyAccumulators, dt: float) -> None:
    """Advance the accumulators by dt; append a full row when record given.

    Called every step with the upcoming interval length (left-endpoint
    rule); passing record=None accumulates without emitting a row.
    """
    from .assembly import assembled_norms, u_L5_power
    params = cfg.energy
    inst_ep, integ_ep, inst_cal, integ_cal, d_integ = _energy_terms(s, params)
    e_p = float(np.sum(inst_ep) + np.sum(acc.ep_int))
    cal = float(np.sum(inst_cal) + np.sum(acc.cal_int))
    d_val = acc.d_int
    u5_acc = acc.u5_int ** 0.2
    share = 0.0
    if s.n_modes > 0 and e_p > 0.0:
        share = float(inst_ep[-1] + acc.ep_int[-1]) / e_p

    row = None
    if record is not None:
        norms = assembled_norms(s)
        comp = component_norms(s, params.p)
        row = {
            "t": s.t, "E_p": e_p, "calE_p": cal, "D": d_val,
            "lead_L3_U": comp["lead_L3_U"], "lead_L3_xi": comp["lead_L3_xi"],
            "div_max": divergence_residual(s),
            "u_L2": norms["u_L2"], "eta_L2": norms["eta_L2"],
            "u_L5_acc": u5_acc, "u_theta_L2": norms["u_theta_L2"],
            "ep_share_topk": share,
        }
        for k, val in enumerate(comp["varpi"], start=1):
            row[f"varpi_{k}"] = val

    if dt != 0.0:
        acc.ep_int += dt * integ_ep
        acc.cal_int += dt * integ_cal
        acc.d_int += dt * d_integ
        acc.u5_int += dt * u_L5_power(s)
    if row is not None:
        record.add_row(row)
