"""IMEX time integration of the lead + harmonic systems.

Scheme
------
First-order IMEX Euler.  Explicit: all transport (lead self-advection and
the mode tilting terms), exchange/rotation couplings, buoyancy, and the
quadratic sources.  Implicit: the stiff linear part of each field,

    lead u_r, u_theta:      -lap + 1/r^2
    lead u_z:               -lap
    lead temp:              -lap (+ optional extra d_rr) + drift
    mode u_r, u_theta:      -lap + (1 + (kN)^2)/r^2
    mode u_z:               -lap + (kN)^2/r^2
    mode temp:              -lap + (kN)^2/r^2 + drift

(lap the meridional Laplacian, drift the profile-weight operator).  The
+-2kN/r^2 rotation exchange stays explicit; it is dominated pointwise by
the implicit (1 + (kN)^2)/r^2 diagonal, so it does not restrict dt.  After
the solves, each incompressibility family is projected and the correction
potential divided by dt is stored as that family's pressure.

One step maps state at t to a new state at t + dt:

    rhs  = P (f - dt * (couplings + sources))     [P pins z-end rows]
    f*   = (P (I + dt A) P + (I - P))^{-1} rhs
    f_new, q = project(f*)                        [per family]

An optional second-order variant ("cn") treats the implicit part by the
trapezoid rule and extrapolates the explicit tendency over two steps,
1.5 T_n - 0.5 T_{n-1}, when the caller supplies the previous tendency
(run threads it through; a lone step starts with plain T_n).  Vertical
end rows are homogeneous Dirichlet for every evolved field; the outer
rim is Dirichlet via the ghost closures; the axis needs no condition
beyond parity.

All loops run in fixed order and the elliptic factorizations are cached
per (operator, dt), so repeated runs of one configuration are
bit-reproducible.
"""

from __future__ import annotations

import sys
import time as _time

import numpy as np
import scipy.sparse as sp

from .elliptic import (EllipticError, _Solver, interior_mask,
                       laplacian_matrix, projector_for, radial_second_matrix,
                       weight_drift_matrix)
from .grid import EVEN, Grid, ODD
from .state import RunConfig, SpectralState, validate_state
from .nonlinear import compute_sources, linear_couplings

Array = np.ndarray


class StepError(RuntimeError):
    """An implicit solve or projection failed inside a step."""


# ---------------------------------------------------------------------------
# implicit operators
# ---------------------------------------------------------------------------

class _ImplicitField:
    """Shifted-diffusion solver (I + dt*A) for one field class."""

    def __init__(self, grid: Grid, parity: int, penalty: Array | None = None,
                 drift: bool = False, extra_drr: bool = False,
                 backend: str = "direct", tol: float = 1e-12, label: str = ""):
        A = -laplacian_matrix(grid, parity)
        if extra_drr:
            A = A - radial_second_matrix(grid, parity)
        if penalty is not None:
            A = A + sp.diags(np.broadcast_to(penalty, grid.shape()).ravel())
        if drift:
            A = A + weight_drift_matrix(grid, parity)
        self.A = A.tocsr()
        self.grid = grid
        self.backend = backend
        self.tol = tol
        self.label = label
        self._mask = interior_mask(grid)
        self._P = sp.diags(self._mask.ravel(), format="csr")
        self._eye = sp.identity(grid.nr * grid.nz, format="csr")
        self._solvers: dict[tuple[float, float], _Solver] = {}

    def _solver(self, dt: float, theta: float) -> _Solver:
        key = (dt, theta)
        sol = self._solvers.get(key)
        if sol is None:
            M = self._eye + (theta * dt) * self.A
            M = self._P @ M @ self._P + (self._eye - self._P)
            sol = _Solver(M.tocsr(), self.grid, self.backend,
                          self.tol, label=self.label)
            self._solvers[key] = sol
            # factorizations are megabytes each; drop stale dt values
            while len(self._solvers) > 4:
                self._solvers.pop(next(iter(self._solvers)))
        return sol

    def advance(self, f: Array, expl: Array | None, dt: float,
                scheme: str) -> Array:
        """One implicit update; expl is the explicit tendency (may be None)."""
        rhs = f if expl is None else f - dt * expl
        if scheme == "cn":
            rhs = rhs - (0.5 * dt) * (self.A @ f.ravel()).reshape(f.shape)
            theta = 0.5
        else:
            theta = 1.0
        rhs = rhs * self._mask
        out = self._solver(dt, theta).solve(rhs.ravel())
        return out.reshape(f.shape)


class Stepper:
    """Cached operator bundle for one (grid, n_base, n_modes, config) family."""

    def __init__(self, grid: Grid, n_base: int, n_modes: int, cfg: RunConfig):
        self.grid = grid
        self.n_base = n_base
        self.n_modes = n_modes
        self.cfg = cfg
        inv_r2 = (1.0 / grid.r**2)[:, None]
        be, tol = cfg.backend, cfg.cg_tol
        self.lead_h = _ImplicitField(grid, ODD, penalty=inv_r2,
                                     backend=be, tol=tol, label="lead horizontal")
        self.lead_z = _ImplicitField(grid, EVEN, backend=be, tol=tol,
                                     label="lead vertical")
        self.lead_temp = _ImplicitField(grid, EVEN, drift=True,
                                        extra_drr=cfg.lead_temp_extra_drr,
                                        backend=be, tol=tol, label="lead temp")
        self.mode_h: list[_ImplicitField] = []
        self.mode_z: list[_ImplicitField] = []
        self.mode_temp: list[_ImplicitField] = []
        for k in range(1, n_modes + 1):
            m2 = float(k * n_base) ** 2
            self.mode_h.append(_ImplicitField(
                grid, ODD, penalty=(1.0 + m2) * inv_r2, backend=be, tol=tol,
                label=f"mode k={k} horizontal"))
            self.mode_z.append(_ImplicitField(
                grid, ODD, penalty=m2 * inv_r2, backend=be, tol=tol,
                label=f"mode k={k} vertical"))
            self.mode_temp.append(_ImplicitField(
                grid, ODD, penalty=m2 * inv_r2, drift=True, backend=be,
                tol=tol, label=f"mode k={k} temp"))

    # -- single step ----------------------------------------------------

    def explicit_tendency(self, s: SpectralState):
        """(couplings, sources) at the current state, for extrapolation."""
        return (linear_couplings(s, buoyancy=self.cfg.buoyancy),
                compute_sources(s))

    def step(self, s: SpectralState, dt: float, *, skip_explicit: bool = False,
             skip_projection: bool = False, tendency=None,
             tendency_prev=None) -> SpectralState:
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        cfg = self.cfg
        out = s.copy()
        out.t = s.t + dt
        if skip_explicit:
            coup = src = None
        else:
            coup, src = tendency if tendency is not None \
                else self.explicit_tendency(s)
        prev = tendency_prev if (cfg.scheme == "cn" and coup is not None) \
            else None

        def expl(cset, sset, name):
            if cset is None:
                return None
            cur = getattr(cset, name) + getattr(sset, name)
            if prev is None:
                return cur
            return 1.5 * cur - 0.5 * (getattr(prev[0], name)
                                      + getattr(prev[1], name))

        try:
            L = s.lead
            out.lead.u_r = self.lead_h.advance(
                L.u_r, expl(coup, src, "lead_r"), dt, cfg.scheme)
            out.lead.u_theta = self.lead_h.advance(
                L.u_theta, expl(coup, src, "lead_theta"), dt, cfg.scheme)
            out.lead.u_z = self.lead_z.advance(
                L.u_z, expl(coup, src, "lead_z"), dt, cfg.scheme)
            out.lead.temp = self.lead_temp.advance(
                L.temp, expl(coup, src, "lead_temp"), dt, cfg.scheme)
            for i, m in enumerate(s.modes):
                om = out.modes[i]
                ck = coup.mode(m.k) if coup is not None else None
                sk = src.mode(m.k) if src is not None else None
                pk = None if prev is None else (prev[0].mode(m.k),
                                                prev[1].mode(m.k))

                def e(name):
                    if ck is None:
                        return None
                    cur = getattr(ck, name) + getattr(sk, name)
                    if pk is None:
                        return cur
                    return 1.5 * cur - 0.5 * (getattr(pk[0], name)
                                              + getattr(pk[1], name))

                h, v, te = self.mode_h[i], self.mode_z[i], self.mode_temp[i]
                om.u_r_sin = h.advance(m.u_r_sin, e("r_sin"), dt, cfg.scheme)
                om.u_r_cos = h.advance(m.u_r_cos, e("r_cos"), dt, cfg.scheme)
                om.u_theta_sin = h.advance(m.u_theta_sin, e("theta_sin"),
                                           dt, cfg.scheme)
                om.u_theta_cos = h.advance(m.u_theta_cos, e("theta_cos"),
                                           dt, cfg.scheme)
                om.u_z_sin = v.advance(m.u_z_sin, e("z_sin"), dt, cfg.scheme)
                om.u_z_cos = v.advance(m.u_z_cos, e("z_cos"), dt, cfg.scheme)
                om.temp_sin = te.advance(m.temp_sin, e("temp_sin"),
                                         dt, cfg.scheme)
                om.temp_cos = te.advance(m.temp_cos, e("temp_cos"),
                                         dt, cfg.scheme)
        except EllipticError as err:
            raise StepError(f"implicit solve failed at t={s.t:.6g}: {err}") from err

        if skip_projection:
            for m in out.modes:
                m.pressure_sin = np.zeros(self.grid.shape())
                m.pressure_cos = np.zeros(self.grid.shape())
            out.lead.pressure = np.zeros(self.grid.shape())
            self._ensure_finite(out)
            return out

        try:
            be, tol = cfg.backend, cfg.cg_tol
            lead_proj = projector_for(self.grid, 0, 1, be, tol)
            out.lead.u_r, _, out.lead.u_z, q = lead_proj.project(
                out.lead.u_r, None, out.lead.u_z)
            out.lead.pressure = q / dt
            for m in out.modes:
                mm = m.k * self.n_base
                sin_p = projector_for(self.grid, mm, 1, be, tol)
                cos_p = projector_for(self.grid, mm, -1, be, tol)
                m.u_r_sin, m.u_theta_cos, m.u_z_sin, q = sin_p.project(
                    m.u_r_sin, m.u_theta_cos, m.u_z_sin)
                m.pressure_sin = q / dt
                m.u_r_cos, m.u_theta_sin, m.u_z_cos, q = cos_p.project(
                    m.u_r_cos, m.u_theta_sin, m.u_z_cos)
                m.pressure_cos = q / dt
        except EllipticError as err:
            raise StepError(
                f"projection failed at t={s.t:.6g}: {err}") from err
        self._ensure_finite(out)
        return out

    def _ensure_finite(self, out: SpectralState) -> None:
        problems = validate_state(out)
        if problems:
            raise StepError(
                f"state invalid after step to t={out.t:.6g}: {problems[0]}")


def _stepper_for(s: SpectralState, cfg: RunConfig) -> Stepper:
    # the cache lives on the grid object so it is reclaimed with the grid
    per_grid = getattr(s.grid, "_stepper_cache", None)
    if per_grid is None:
        per_grid = {}
        # not a field mutation: attaches cache storage to the frozen grid
        object.__setattr__(s.grid, "_stepper_cache", per_grid)
    # every config knob the step consults must be part of the key
    key = (s.n_base, s.n_modes, cfg.backend, cfg.cg_tol,
           cfg.lead_temp_extra_drr, cfg.scheme, cfg.buoyancy)
    if key not in per_grid:
        per_grid[key] = Stepper(s.grid, s.n_base, s.n_modes, cfg)
    return per_grid[key]


# ---------------------------------------------------------------------------
# public stepping interface
# ---------------------------------------------------------------------------

def cfl_dt(s: SpectralState, cfg: RunConfig) -> float:
    """Advective time-step bound: min(dt_max, CFL*min(dr,dz)/V_max).

    V_max bounds the assembled meridional advection speed pointwise:
    |U^r| + |U^z| plus the magnitudes of every harmonic's sin and cos
    velocity triples.  cfg.fixed_dt bypasses the clamp entirely.
    """
    if cfg.fixed_dt is not None:
        return cfg.fixed_dt
    v = np.abs(s.lead.u_r) + np.abs(s.lead.u_z)
    for m in s.modes:
        v = v + np.sqrt(m.u_r_sin**2 + m.u_theta_sin**2 + m.u_z_sin**2)
        v = v + np.sqrt(m.u_r_cos**2 + m.u_theta_cos**2 + m.u_z_cos**2)
    vmax = max(1e-12, float(np.max(v)))
    return min(cfg.dt_max, cfg.cfl * min(s.grid.dr, s.grid.dz) / vmax)


def imex_step(s: SpectralState, dt: float, cfg: RunConfig, *,
              skip_explicit: bool = False,
              skip_projection: bool = False) -> SpectralState:
    """Advance one step; returns a new state (operators cached per grid)."""
    return _stepper_for(s, cfg).step(s, dt, skip_explicit=skip_explicit,
                                     skip_projection=skip_projection)


def _write_outputs(cfg: RunConfig, snapshots, record, status: dict) -> None:
    import json
    import os
    from .assembly import dump_fields
    from .state import save_npz
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    record.write(os.path.join(out, "diagnostics.csv"))
    names = ["initial", "final"]
    for name, snap in zip(names, snapshots):
        save_npz(os.path.join(out, f"snapshot_{name}.npz"), snap)
        if cfg.dump_fields:
            dump_fields(snap, os.path.join(out, f"fields_{name}.npz"))
    with open(os.path.join(out, "status.json"), "w") as fh:
        json.dump(status, fh, indent=2, sort_keys=True)


def _lattice_dt(cfg: RunConfig, dt_raw: float) -> float:
    """Snap a CFL-limited dt down to dt_max/2^j.

    Each distinct dt costs a fresh factorization of every implicit
    operator; the lattice keeps that set tiny while still honoring the
    advective bound.  Fixed-dt runs pass through untouched.
    """
    if cfg.fixed_dt is not None or dt_raw >= cfg.dt_max:
        return dt_raw
    j = int(np.ceil(np.log2(cfg.dt_max / dt_raw)))
    return cfg.dt_max / 2.0**j


def run(cfg: RunConfig, progress: bool = False):
    """Integrate from t=0 to t_final, recording diagnostics.

    Returns (snapshots, record): snapshots holds deep copies of the
    initial and final states; the DiagnosticsRecord carries one row per
    recorded interval (first and final rows always present).  When
    cfg.output_dir is set, the CSV, the snapshots, and a status file are
    written there; a step failure still writes the partial record, with
    status "incomplete", before the error propagates.
    """
    from .diagnostics import DiagnosticsRecord, EnergyAccumulators, record_row
    from .initial_data import BumpParams, init_state

    cfg.validate()
    grid = cfg.make_grid()
    s = init_state(grid, cfg.n_base, cfg.n_modes,
                   params=BumpParams.from_config(cfg),
                   project=cfg.project_initial, backend=cfg.backend)
    stepper = _stepper_for(s, cfg)
    acc = EnergyAccumulators.zeros(cfg.n_modes)
    record = DiagnosticsRecord.for_modes(cfg.n_modes)
    snapshots = [s.copy()]

    t_final = cfg.t_final
    step_idx = 0
    tend_prev = None
    t0 = _time.perf_counter()
    try:
        while True:
            remaining = t_final - s.t
            done = remaining <= 1e-12
            dt_next = 0.0 if done else \
                min(_lattice_dt(cfg, cfl_dt(s, cfg)), remaining)
            # left-endpoint accumulation over the interval about to be taken
            emit = record if (done or step_idx % cfg.record_every == 0) \
                else None
            record_row(emit, s, cfg, acc, dt_next)
            if done:
                break
            if cfg.scheme == "cn":
                tend = stepper.explicit_tendency(s)
                s = stepper.step(s, dt_next, tendency=tend,
                                 tendency_prev=tend_prev)
                tend_prev = tend
            else:
                s = stepper.step(s, dt_next)
            step_idx += 1
            if progress and step_idx % 50 == 0:
                print(f"  t={s.t:.4f}/{t_final} ({step_idx} steps, "
                      f"{_time.perf_counter() - t0:.1f}s)", file=sys.stderr)
    except StepError as err:
        print(f"run aborted after {step_idx} steps: {err}", file=sys.stderr)
        if cfg.output_dir is not None:
            _write_outputs(cfg, [snapshots[0], s.copy()], record, {
                "status": "incomplete", "error": str(err),
                "steps": step_idx, "t_reached": s.t,
                "wall_time_s": _time.perf_counter() - t0,
            })
        raise
    snapshots.append(s.copy())
    if cfg.output_dir is not None:
        _write_outputs(cfg, snapshots, record, {
            "status": "complete", "steps": step_idx, "t_reached": s.t,
            "wall_time_s": _time.perf_counter() - t0,
        })
    return snapshots, record
