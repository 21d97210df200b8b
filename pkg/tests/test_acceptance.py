"""Acceptance gate: nine structural and scaling criteria, one test each.

Each test prints a single [PASS]/[FAIL] line (shown with -s, or on
failure) and asserts the stated tolerance, so the suite both documents
and enforces the contract: exact oracle agreement, discrete operator
identities, second-order convergence, the invariant subspace, the
closed-form energy value, viscous decay, and the base-wavenumber
scaling trends.
"""

from __future__ import annotations

import numpy as np

from azmodes.assembly import pde_residual
from azmodes.cli import run_sweep
from azmodes.diagnostics import (EnergyAccumulators, energy_functionals,
                                 scaling_fit)
from azmodes.elliptic import (EllipticProblem, interior_mask,
                              projector_for, prop_decay_chart, solve_Lm)
from azmodes.grid import build_grid, lp_norm_weighted
from azmodes.initial_data import BumpParams, init_state
from azmodes.nonlinear import compute_sources, pseudospectral_oracle
from azmodes.state import EnergyParams, RunConfig
from azmodes.timestepper import Stepper, run

from conftest import random_state, source_fields


def _verdict(ok: bool, name: str, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


def _fresh(cfg: RunConfig):
    g = cfg.make_grid()
    s = init_state(g, cfg.n_base, cfg.n_modes,
                   params=BumpParams.from_config(cfg),
                   project=cfg.project_initial)
    return g, s


# ---------------------------------------------------------------------------
# criterion 1: convolution sources match the pseudospectral oracle
# ---------------------------------------------------------------------------

def test_c1_oracle_equivalence():
    rng = np.random.default_rng(20260819)
    g = build_grid(8.0, 8.0, 48, 96)
    combos = [(k, n) for k in (2, 4, 8) for n in (2, 4)]
    worst = 0.0
    for trial in range(50):
        n_modes, n_base = combos[trial % len(combos)]
        s = random_state(g, n_base, n_modes, rng)
        src = compute_sources(s)
        orc = pseudospectral_oracle(s, 4 * n_modes + 4)
        num = den = 0.0
        for (_, have), (_, want) in zip(source_fields(src),
                                        source_fields(orc)):
            num = max(num, float(np.max(np.abs(have - want))))
            den = max(den, float(np.max(np.abs(want))))
        worst = max(worst, num / den)
    assert _verdict(worst <= 1e-12, "criterion 1 (oracle equivalence)",
                    f"50 states, K in (2,4,8), N in (2,4), 48x96: "
                    f"worst relative error {worst:.3e} (tol 1e-12)")


# ---------------------------------------------------------------------------
# criterion 2: projection exactness, algebraically and along a run
# ---------------------------------------------------------------------------

def test_c2_projection_exactness():
    g = build_grid(8.0, 8.0, 48, 96)
    rng = np.random.default_rng(23)
    mask = interior_mask(g)
    worst_adj = worst_comp = 0.0
    for m in (0, 4, 9):
        proj = projector_for(g, m)
        for _ in range(5):
            q = rng.standard_normal(g.shape())
            wr, wt, wz = (rng.standard_normal(g.shape()) for _ in range(3))
            if m == 0:
                wt = None
            gr, gth, gz = proj.gradient(q)
            lhs = float(np.sum(g.w * (gr * wr + gz * wz)))
            if gth is not None:
                lhs += float(np.sum(g.w * gth * wt))
            rhs = -float(np.sum(g.w * q * proj.divergence(wr, wt, wz)))
            worst_adj = max(worst_adj,
                            abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
            comp = proj.apply_L(q) + proj.divergence(*proj.gradient(q))
            worst_comp = max(worst_comp, float(np.max(np.abs(mask * comp)))
                             / float(np.max(np.abs(proj.apply_L(q)))))

    cfg = RunConfig(nr=32, nz=64, n_base=4, n_modes=2, fixed_dt=1e-3,
                    t_final=0.2, record_every=1, project_initial=True)
    _, record = run(cfg)
    div_sup = float(np.max(record.column("div_max")))
    steps = len(record.rows) - 1

    ok = worst_adj <= 1e-12 and worst_comp <= 1e-12 and div_sup <= 1e-10
    assert _verdict(ok, "criterion 2 (projection exactness)",
                    f"adjointness {worst_adj:.3e}, composition "
                    f"{worst_comp:.3e} (tol 1e-12); divergence over "
                    f"{steps} recorded steps {div_sup:.3e} (tol 1e-10)")


# ---------------------------------------------------------------------------
# criterion 3: manufactured elliptic convergence
# ---------------------------------------------------------------------------

def test_c3_manufactured_convergence():
    errs = []
    for nr, nz in ((24, 48), (48, 96), (96, 192), (192, 384)):
        g = build_grid(8.0, 8.0, nr, nz)
        ee = np.exp(-g.rc**2 - g.z[None, :] ** 2)
        g_star = g.rc * ee
        rhs = 2.0 * g.rc * (5.0 - 2.0 * g.rc**2
                            - 2.0 * g.z[None, :] ** 2) * ee
        sol = solve_Lm(g, EllipticProblem(m=1, rhs=rhs))
        errs.append(float(np.max(np.abs(sol - g_star))))
    orders = [float(np.log2(errs[i] / errs[i + 1])) for i in range(3)]
    ok = all(1.7 <= o <= 2.3 for o in orders)
    assert _verdict(ok, "criterion 3 (manufactured convergence)",
                    f"orders over three doublings "
                    f"{[f'{o:.3f}' for o in orders]} (want 2.0 +- 0.3)")


# ---------------------------------------------------------------------------
# criterion 4: end-to-end residual scaling in dt and h
# ---------------------------------------------------------------------------

def test_c4_pde_residual_scaling():
    # data on the first harmonic only, two retained harmonics: every
    # quadratic product stays inside the truncation, so the measured
    # first-step residual is pure discretization error with no
    # truncation floor
    def residual(nr, nz, dt):
        cfg = RunConfig(nr=nr, nz=nz, n_base=2, n_modes=2,
                        project_initial=True)
        g, s = _fresh(cfg)
        stepper = Stepper(g, cfg.n_base, cfg.n_modes, cfg)
        s1 = stepper.step(s, dt)
        return pde_residual(s, s1, dt)

    r_dt = [residual(96, 192, dt) for dt in (4e-3, 2e-3)]
    ratio_dt = r_dt[0] / r_dt[1]

    r_h = [residual(nr, nz, 2e-5)
           for nr, nz in ((32, 64), (64, 128), (128, 256))]
    ratios_h = [r_h[0] / r_h[1], r_h[1] / r_h[2]]

    ok = 1.7 <= ratio_dt <= 2.3 and all(3.4 <= r <= 4.6 for r in ratios_h)
    assert _verdict(ok, "criterion 4 (residual scaling)",
                    f"dt-halving ratio {ratio_dt:.3f} (want 2.0 +- 0.3); "
                    f"h-halving ratios "
                    f"{[f'{r:.3f}' for r in ratios_h]} (want 4.0 +- 0.6)")


# ---------------------------------------------------------------------------
# criterion 5: the structurally invariant subspace stays zero
# ---------------------------------------------------------------------------

def test_c5_invariant_subspace():
    cfg = RunConfig(nr=32, nz=64, n_base=8, n_modes=8, amp_sin=0.0,
                    amp_cos=0.8, amp_temp_sin=0.0, amp_temp_cos=0.5,
                    swirl_sin=0.0, swirl_cos=0.0, project_initial=True)
    g, s = _fresh(cfg)
    stepper = Stepper(g, cfg.n_base, cfg.n_modes, cfg)
    for _ in range(500):
        s = stepper.step(s, 1e-3)

    zero_sup = float(np.max(np.abs(s.lead.u_theta)))
    live_sup = 0.0
    for m in s.modes:
        for name in ("u_r_sin", "u_z_sin", "u_theta_cos", "pressure_sin",
                     "temp_sin"):
            zero_sup = max(zero_sup, float(np.max(np.abs(getattr(m, name)))))
        for name in ("u_r_cos", "u_z_cos", "u_theta_sin", "temp_cos"):
            live_sup = max(live_sup, float(np.max(np.abs(getattr(m, name)))))
    ok = zero_sup <= 1e-8 * live_sup and live_sup > 0.0
    assert _verdict(ok, "criterion 5 (invariant subspace)",
                    f"500 steps at N=8, K=8: zero-family sup {zero_sup:.3e} "
                    f"vs live scale {live_sup:.3e} (tol 1e-8 relative)")


# ---------------------------------------------------------------------------
# criterion 6: the t = 0 energy value in closed form
# ---------------------------------------------------------------------------

def test_c6_initial_energy_closed_form():
    g = build_grid(8.0, 8.0, 48, 96)
    n_base = 4
    params = EnergyParams()
    s = init_state(g, n_base, 3,
                   params=BumpParams(swirl_sin=0.4, swirl_cos=0.3))
    acc = EnergyAccumulators.zeros(3)
    e_p, cal, _ = energy_functionals(s, params, acc, 0.0)

    p, a = params.p, 1.0 - 3.0 / params.p
    m1 = s.modes[0]

    def A(f):
        return lp_norm_weighted(g, f, p, a) ** p

    closed_e = n_base ** (-2 * params.alpha) * (
        A(m1.u_r_sin) + A(m1.u_r_cos) + A(m1.u_z_sin) + A(m1.u_z_cos)) \
        + n_base ** (p / 2 - 2 * params.alpha) * (
        A(m1.u_theta_sin) + A(m1.u_theta_cos))
    closed_cal = n_base ** (-2 * params.alpha) * (
        A(m1.temp_sin) + A(m1.temp_cos))
    rel_e = abs(e_p - closed_e) / closed_e
    rel_cal = abs(cal - closed_cal) / closed_cal
    ok = rel_e <= 1e-10 and rel_cal <= 1e-10
    assert _verdict(ok, "criterion 6 (initial energy closed form)",
                    f"velocity gap {rel_e:.3e}, temperature gap "
                    f"{rel_cal:.3e} (tol 1e-10)")


# ---------------------------------------------------------------------------
# criterion 7: pure Navier-Stokes energy decay
# ---------------------------------------------------------------------------

def test_c7_energy_decay_without_buoyancy():
    cfg = RunConfig(nr=32, nz=64, n_base=4, n_modes=2, buoyancy=False,
                    amp_temp_sin=0.0, amp_temp_cos=0.0, swirl_cos=0.3,
                    project_initial=True, fixed_dt=2e-3, t_final=0.2,
                    record_every=1)
    _, record = run(cfg)
    u = record.column("u_L2")
    worst = float(np.max(np.diff(u) / u[:-1]))
    ok = worst <= 1e-8
    assert _verdict(ok, "criterion 7 (viscous energy decay)",
                    f"u_L2 over {len(u)} rows: worst relative increase "
                    f"{worst:.3e} (slack 1e-8); "
                    f"{u[0]:.4f} -> {u[-1]:.4f}")


# ---------------------------------------------------------------------------
# criterion 8: base-wavenumber scaling trends
# ---------------------------------------------------------------------------

def test_c8_base_wavenumber_sweep(tmp_path):
    cfg = RunConfig(nr=64, nz=128, n_base=8, n_modes=8, t_final=0.5,
                    swirl_sin=0.6, swirl_cos=0.4, project_initial=True,
                    output_dir=str(tmp_path / "sweep"))
    assert run_sweep(cfg, [8, 16, 32, 64]) == 0

    with open(tmp_path / "sweep" / "sweep_summary.csv") as fh:
        lines = fh.read().strip().split("\n")
    cols = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        vals = ln.split(",")
        row = dict(zip(cols, vals))
        assert row["status"] == "ok"
        rows.append({c: (int(row[c]) if c == "N" else row[c])
                     for c in cols})

    u5 = [(r["N"], float(r["u_L5T"])) for r in rows]
    decreasing = all(a[1] > b[1] for a, b in zip(u5, u5[1:]))
    slope_u5 = scaling_fit(u5)
    slope_swirl = scaling_fit([(r["N"], float(r["swirl_ratio"]))
                               for r in rows])
    wsum = [(r["N"], float(r["varpi_wsum_k2"])) for r in rows]
    if all(v > 0 for _, v in wsum):
        print(f"    higher-harmonic weighted sum slope "
              f"{scaling_fit(wsum):+.3f} "
              f"(upper-bound target {-2 * cfg.energy.alpha:.3f}, "
              f"reported only)")

    ok = decreasing and slope_u5 <= -0.1 and slope_swirl <= -0.3
    assert _verdict(ok, "criterion 8 (base-wavenumber sweep)",
                    f"u_L5T {[f'{v:.4g}' for _, v in u5]} "
                    f"decreasing={decreasing}, slope {slope_u5:+.3f} "
                    f"(want <= -0.1); swirl-ratio slope {slope_swirl:+.3f} "
                    f"(want <= -0.3)")


# ---------------------------------------------------------------------------
# criterion 9: weighted resolvent decay chart
# ---------------------------------------------------------------------------

def test_c9_decay_chart_reported():
    g = build_grid(8.0, 8.0, 64, 128)
    f = np.exp(-((g.rc - 3.0) ** 2) - g.z[None, :] ** 2)
    chart = prop_decay_chart(g, f)
    ratios = chart["ratios"]
    ok = (sorted(ratios) == [2, 4, 8, 16]
          and all(np.isfinite(v) and v > 0 for v in ratios.values())
          and np.isfinite(chart["slope"])
          and abs(chart["target"] - (-2.0 / 3.0)) <= 1e-12)
    assert _verdict(ok, "criterion 9 (decay chart presence)",
                    f"fitted slope {chart['slope']:+.3f} vs target "
                    f"{chart['target']:+.3f} (reported, not asserted); "
                    f"ratios {[f'{ratios[m]:.3e}' for m in sorted(ratios)]}")
