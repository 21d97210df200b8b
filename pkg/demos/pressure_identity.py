#!/usr/bin/env python3
"""The discrete pressure equation along an evolving trajectory.

Each family's potential is produced by solving L_{kN} Q = div(sources)
inside the step, so on a state the stepper has just returned, the
stored potential satisfies the identity up to the drift of the sources
across that step.  Two tables: the residual along a short trajectory
(stable, no growth), and the residual after a single step under dt
halving, where the splitting error dominates and the ratios should
approach 2.
"""

from __future__ import annotations

import numpy as np

from azmodes.elliptic import pressure_identity_residual
from azmodes.initial_data import BumpParams, init_state
from azmodes.state import RunConfig
from azmodes.timestepper import Stepper

STEPS = 20
PRINT_EVERY = 4
DTS = (2.0e-3, 1.0e-3, 5.0e-4)


def _setup():
    cfg = RunConfig(nr=48, nz=96, n_base=4, n_modes=2,
                    amp_sin=1.0, amp_cos=0.7, amp_temp_sin=0.5,
                    amp_temp_cos=0.5, swirl_sin=0.4, swirl_cos=0.3,
                    fixed_dt=1.0e-3, project_initial=True)
    g = cfg.make_grid()
    s = init_state(g, cfg.n_base, cfg.n_modes,
                   params=BumpParams.from_config(cfg),
                   project=cfg.project_initial)
    return cfg, g, s


def trajectory_table() -> float:
    cfg, g, s = _setup()
    stepper = Stepper(g, cfg.n_base, cfg.n_modes, cfg)
    print("weighted-L2 residual of L_kN Q_k = div(rhs_k) along a run")
    print(f"{'step':>5} {'t':>8} " +
          " ".join(f"{'k=' + str(k):>12}" for k in (1, 2)))
    worst = 0.0
    for step in range(1, STEPS + 1):
        s = stepper.step(s, cfg.fixed_dt)
        if step % PRINT_EVERY == 0:
            res = pressure_identity_residual(s)
            print(f"{step:>5} {s.t:8.4f} " +
                  " ".join(f"{r:12.3e}" for r in res))
            worst = max(worst, max(res))
    return worst


def refinement_table() -> list[float]:
    cfg, g, s = _setup()
    stepper = Stepper(g, cfg.n_base, cfg.n_modes, cfg)
    print()
    print("residual after one step from the projected initial data")
    print(f"{'dt':>10} {'k=1':>12} {'k=2':>12} {'ratio k=1':>10} {'ratio k=2':>10}")
    prev, ratios = None, []
    for dt in DTS:
        res = pressure_identity_residual(stepper.step(s, dt))
        if prev is None:
            print(f"{dt:10.1e} {res[0]:12.3e} {res[1]:12.3e}")
        else:
            rr = [p / r for p, r in zip(prev, res)]
            ratios += rr
            print(f"{dt:10.1e} {res[0]:12.3e} {res[1]:12.3e} "
                  f"{rr[0]:10.2f} {rr[1]:10.2f}")
        prev = res
    return ratios


def main() -> int:
    worst = trajectory_table()
    ratios = refinement_table()
    stable = np.isfinite(worst) and worst < 1e3
    first_order = all(1.7 <= r <= 2.3 for r in ratios)
    print()
    print(f"residual bounded along the trajectory (worst {worst:.3e}):",
          "yes" if stable else "NO")
    print(f"halving dt halves the one-step residual "
          f"(ratios {[f'{r:.2f}' for r in ratios]}):",
          "yes" if first_order else "NO")
    return 0 if (stable and first_order) else 1


if __name__ == "__main__":
    raise SystemExit(main())
