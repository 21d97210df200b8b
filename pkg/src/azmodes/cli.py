"""Command-line driver: single runs, N-sweeps, and the self-check suite.

Configuration is JSON with the field names of state.RunConfig (aliases N,
K, T accepted; lengths share the grid units, time is in viscous units).
Every run directory receives diagnostics.csv (schema below), snapshot
.npz files, status.json, and manifest.json echoing the full config.

CSV columns, one row per recorded interval:

    t, E_p, calE_p, D, lead_L3_U, lead_L3_xi, div_max, u_L2, eta_L2,
    u_L5_acc, varpi_1..varpi_K, u_theta_L2, ep_share_topk

u_L5_acc is the running (int ||u||_5^5 dt)^{1/5}; ep_share_topk the k=K
share of E_p (truncation indicator); the rest are instantaneous values.

Sweeps rerun one configuration over a list of base wavenumbers N and fit
log-log slopes of the summary columns against N.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .state import RunConfig
from .timestepper import StepError, run

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_RUN_FAILED = 3
EXIT_CHECK_FAILED = 1


def _load_config(path: str | None) -> RunConfig:
    """Parse and validate; error messages carry file and line anchors."""
    if path is None:
        # demo defaults: nothing on disk, moderate resolution
        return RunConfig(n_base=8, n_modes=8, nr=64, nz=128, t_final=0.5)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise SystemExit(f"{path}: {err.strerror}") from err
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise SystemExit(
            f"{path}:{err.lineno}:{err.colno}: {err.msg}") from err
    try:
        return RunConfig.from_dict(raw)
    except (ValueError, TypeError) as err:
        raise SystemExit(f"{path}: invalid config: {err}") from err


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.n_base is not None:
        cfg.n_base = args.n_base
    if args.modes is not None:
        cfg.n_modes = args.modes
    if args.grid is not None:
        try:
            nr, nz = (int(v) for v in args.grid.lower().split("x"))
        except ValueError:
            raise SystemExit(
                f"--grid expects NRxNZ (e.g. 64x128), got {args.grid!r}")
        cfg.nr, cfg.nz = nr, nz
    if args.t_final is not None:
        cfg.t_final = args.t_final
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.dump_fields:
        cfg.dump_fields = True
    try:
        cfg.validate()
    except ValueError as err:
        raise SystemExit(f"invalid config after overrides: {err}")
    return cfg


def _manifest(cfg: RunConfig, status: dict) -> dict:
    import scipy
    return {
        "config": json.loads(cfg.to_json()),
        "grid": {"R": cfg.R, "Zmax": cfg.Zmax, "nr": cfg.nr, "nz": cfg.nz},
        "n_base": cfg.n_base,
        "n_modes": cfg.n_modes,
        "seeds": None,  # the pipeline is deterministic, no RNG anywhere
        "versions": {
            "azmodes": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        **status,
    }


def _write_manifest(out_dir: str, manifest: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------

def run_single(cfg: RunConfig) -> int:
    if cfg.output_dir is None:
        cfg.output_dir = "azmodes_out"
    t0 = time.perf_counter()
    try:
        snapshots, record = run(cfg, progress=True)
    except StepError as err:
        _write_manifest(cfg.output_dir, _manifest(cfg, {
            "status": "incomplete", "error": str(err),
            "wall_time_s": time.perf_counter() - t0,
        }))
        print(f"run failed: {err}", file=sys.stderr)
        return EXIT_RUN_FAILED
    wall = time.perf_counter() - t0
    _write_manifest(cfg.output_dir, _manifest(cfg, {
        "status": "complete", "wall_time_s": wall,
        "rows": len(record.rows), "t_reached": snapshots[-1].t,
    }))
    last = dict(zip(record.columns, record.rows[-1]))
    print(f"completed t={last['t']:.6g} in {wall:.1f}s: "
          f"u_L2={last['u_L2']:.6g} u_L5_acc={last['u_L5_acc']:.6g} "
          f"E_p={last['E_p']:.6g} div_max={last['div_max']:.3e}")
    print(f"artifacts in {cfg.output_dir}/")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def run_sweep(cfg: RunConfig, n_list: list[int]) -> int:
    import gc
    from .diagnostics import scaling_fit
    if len(n_list) < 2:
        raise SystemExit("--sweep needs at least two values of N")
    base_out = cfg.output_dir or "azmodes_sweep"
    os.makedirs(base_out, exist_ok=True)
    beta = cfg.energy.beta
    alpha = cfg.energy.alpha
    rows = []
    for n in n_list:
        sub = RunConfig.from_dict(json.loads(cfg.to_json()))
        sub.n_base = n
        sub.output_dir = os.path.join(base_out, f"N{n}")
        t0 = time.perf_counter()
        try:
            _, record = run(sub, progress=True)
        except StepError as err:
            print(f"N={n} failed: {err}", file=sys.stderr)
            rows.append({"N": n, "status": "failed"})
            continue
        _write_manifest(sub.output_dir, _manifest(sub, {
            "status": "complete", "wall_time_s": time.perf_counter() - t0,
        }))
        varpi_sup = {}
        for k in range(1, sub.n_modes + 1):
            varpi_sup[k] = float(np.max(record.column(f"varpi_{k}")))
        wsum_k2 = sum((k * n) ** (2.0 * beta) * varpi_sup[k]
                      for k in range(2, sub.n_modes + 1))
        sum_k2 = sum(varpi_sup[k] for k in range(2, sub.n_modes + 1))
        u_sup = float(np.max(record.column("u_L2")))
        th_sup = float(np.max(record.column("u_theta_L2")))
        rows.append({
            "N": n, "status": "ok",
            "u_L5T": float(record.column("u_L5_acc")[-1]),
            "lead_L3_sup": float(np.max(record.column("lead_L3_U"))),
            "varpi_sum_k2": sum_k2,
            "varpi_wsum_k2": wsum_k2,
            "u_theta_L2_sup": th_sup,
            "swirl_ratio": th_sup / u_sup if u_sup > 0 else 0.0,
        })
        print(f"N={n}: u_L5T={rows[-1]['u_L5T']:.6g} "
              f"swirl_ratio={rows[-1]['swirl_ratio']:.6g}")
        # the finished run's grid, states and factorizations form cycles;
        # reclaim them before building the next wavenumber's operators
        gc.collect()

    ok = [r for r in rows if r["status"] == "ok"]
    cols = ["N", "status", "u_L5T", "lead_L3_sup", "varpi_sum_k2",
            "varpi_wsum_k2", "u_theta_L2_sup", "swirl_ratio"]
    csv_lines = [",".join(cols)]
    for r in rows:
        csv_lines.append(",".join(
            repr(r[c]) if isinstance(r.get(c), float) else str(r.get(c, ""))
            for c in cols))
    with open(os.path.join(base_out, "sweep_summary.csv"), "w") as fh:
        fh.write("\n".join(csv_lines) + "\n")

    report = [f"sweep over N = {n_list}", ""]
    for r in rows:
        report.append("  " + "  ".join(f"{c}={r.get(c)}" for c in cols))
    report.append("")
    if len(ok) >= 2:
        fits = [
            ("u_L5T", "u_L5T", "-1/5 (upper-bound exponent)"),
            ("swirl_ratio", "swirl_ratio", "-1 (swirl carries 1/N)"),
            ("varpi_wsum_k2", "varpi_wsum_k2",
             f"{-2 * alpha:.4g} (-2*alpha_p, upper bound; reported only)"),
            ("lead_L3_sup", "lead_L3_sup", "0 (bounded)"),
        ]
        for key, label, target in fits:
            vals = [(r["N"], r[key]) for r in ok if r[key] > 0]
            if len(vals) >= 2:
                slope = scaling_fit(vals)
                report.append(f"slope[{label}] = {slope:+.4f}   "
                              f"target {target}")
    else:
        report.append("fewer than 2 successful runs; no slopes fitted")
    text = "\n".join(report) + "\n"
    with open(os.path.join(base_out, "sweep_report.txt"), "w") as fh:
        fh.write(text)
    print(text)
    return EXIT_OK if len(ok) >= 2 else EXIT_RUN_FAILED


# ---------------------------------------------------------------------------
# self-check
# ---------------------------------------------------------------------------

def _check(cfg: RunConfig) -> int:
    """Fast oracle and invariant suite; nonzero exit on any failure."""
    from .elliptic import EllipticProblem, projector_for, solve_Lm
    from .diagnostics import EnergyAccumulators, energy_functionals
    from .grid import build_grid, lp_norm_weighted
    from .initial_data import init_state
    from .nonlinear import compute_sources, pseudospectral_oracle
    from .state import SpectralState
    failures = 0

    def report(name: str, passed: bool, detail: str) -> None:
        nonlocal failures
        if not passed:
            failures += 1
        print(f"[{'ok' if passed else 'FAIL'}] {name}: {detail}")

    rng = np.random.default_rng(7)
    grid = build_grid(8.0, 8.0, 32, 64)
    s = SpectralState.zeros(grid, n_base=3, n_modes=3)
    for m in s.modes:
        for name in ("u_r_sin", "u_r_cos", "u_theta_sin", "u_theta_cos",
                     "u_z_sin", "u_z_cos", "temp_sin", "temp_cos"):
            setattr(m, name, rng.standard_normal(grid.shape()))
    for name in ("u_r", "u_theta", "u_z", "temp"):
        setattr(s.lead, name, rng.standard_normal(grid.shape()))

    src = compute_sources(s)
    orc = pseudospectral_oracle(s, 4 * s.n_modes + 4)
    worst = 0.0
    scale = 0.0
    for have, want in ((src.lead_r, orc.lead_r), (src.lead_theta, orc.lead_theta),
                       (src.lead_z, orc.lead_z), (src.lead_temp, orc.lead_temp)):
        worst = max(worst, float(np.max(np.abs(have - want))))
        scale = max(scale, float(np.max(np.abs(want))))
    for k in range(1, s.n_modes + 1):
        a, b = src.mode(k), orc.mode(k)
        for name in ("r_sin", "r_cos", "theta_sin", "theta_cos",
                     "z_sin", "z_cos", "temp_sin", "temp_cos"):
            worst = max(worst, float(np.max(np.abs(
                getattr(a, name) - getattr(b, name)))))
            scale = max(scale, float(np.max(np.abs(getattr(b, name)))))
    rel = worst / scale
    report("convolution vs pseudospectral oracle", rel <= 1e-12,
           f"relative max error {rel:.2e} (tol 1e-12)")

    proj = projector_for(grid, 6, 1)
    q = rng.standard_normal(grid.shape())
    wf = [rng.standard_normal(grid.shape()) for _ in range(3)]
    gr, gth, gz = proj.gradient(q)
    lhs = float(np.sum(grid.w * (gr * wf[0] + gth * wf[1] + gz * wf[2])))
    rhs = -float(np.sum(grid.w * q * proj.divergence(*wf)))
    den = max(abs(lhs), abs(rhs), 1e-300)
    adj = abs(lhs - rhs) / den
    report("gradient/divergence adjointness", adj <= 1e-12,
           f"relative defect {adj:.2e} (tol 1e-12)")

    wr, wth, wz, _ = proj.project(*wf)
    div = float(np.max(np.abs(proj.divergence(wr, wth, wz))))
    report("projection exactness", div <= 1e-10,
           f"post-projection divergence {div:.2e} (tol 1e-10)")

    errs = []
    for nr, nz in ((32, 64), (64, 128), (128, 256)):
        g2 = build_grid(8.0, 8.0, nr, nz)
        ee = np.exp(-g2.rc**2 - g2.z[None, :] ** 2)
        g_star = g2.rc * ee
        rhs2 = 2.0 * g2.rc * (5.0 - 2.0 * g2.rc**2
                              - 2.0 * g2.z[None, :] ** 2) * ee
        sol = solve_Lm(g2, EllipticProblem(m=1, rhs=rhs2))
        errs.append(float(np.max(np.abs(sol - g_star))))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok_ord = all(1.7 <= o <= 2.3 for o in orders)
    report("manufactured elliptic convergence", ok_ord,
           f"orders {[f'{o:.2f}' for o in orders]} (want 2.0 +- 0.3)")

    si = init_state(grid, n_base=4, n_modes=2)
    acc = EnergyAccumulators.zeros(2)
    e_p, _, _ = energy_functionals(si, cfg.energy, acc, 0.0)
    p, a = cfg.energy.p, 1.0 - 3.0 / cfg.energy.p
    n4 = 4.0
    m1 = si.modes[0]
    closed = n4 ** (-2 * cfg.energy.alpha) * (
        lp_norm_weighted(grid, m1.u_r_sin, p, a) ** p
        + lp_norm_weighted(grid, m1.u_r_cos, p, a) ** p
        + lp_norm_weighted(grid, m1.u_z_sin, p, a) ** p
        + lp_norm_weighted(grid, m1.u_z_cos, p, a) ** p) \
        + n4 ** (p / 2 - 2 * cfg.energy.alpha) * (
        lp_norm_weighted(grid, m1.u_theta_sin, p, a) ** p
        + lp_norm_weighted(grid, m1.u_theta_cos, p, a) ** p)
    rel_e = abs(e_p - closed) / closed
    report("E_p(0) closed form", rel_e <= 1e-10,
           f"relative gap {rel_e:.2e} (tol 1e-10)")

    print(f"{5 - failures}/5 checks passed")
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="azmodes",
        description="Spectral-in-angle Boussinesq mode simulator")
    parser.add_argument("config", nargs="?", default=None,
                        help="JSON config path (demo defaults when omitted)")
    parser.add_argument("--output-dir", default=None,
                        help="artifact directory")
    parser.add_argument("--n-base", type=int, default=None,
                        help="override base wavenumber N")
    parser.add_argument("--modes", type=int, default=None,
                        help="override harmonic count K")
    parser.add_argument("--grid", default=None,
                        help="override grid as NRxNZ, e.g. 64x128")
    parser.add_argument("--t-final", type=float, default=None,
                        help="override final time")
    parser.add_argument("--sweep", default=None, metavar="N=8,16,32",
                        help="run a base-wavenumber sweep")
    parser.add_argument("--check", action="store_true",
                        help="run the fast oracle/invariant suite and exit")
    parser.add_argument("--dump-fields", action="store_true",
                        help="also write assembled physical fields")
    args = parser.parse_args(argv)

    cfg = _load_config(args.config)
    cfg = _apply_overrides(cfg, args)

    if args.check:
        return _check(cfg)
    if args.sweep is not None:
        spec_txt = args.sweep
        if spec_txt.startswith("N="):
            spec_txt = spec_txt[2:]
        try:
            n_list = [int(v) for v in spec_txt.split(",") if v]
        except ValueError:
            raise SystemExit(f"--sweep expects N=8,16,32; got {args.sweep!r}")
        return run_sweep(cfg, n_list)
    return run_single(cfg)


if __name__ == "__main__":
    sys.exit(main())
