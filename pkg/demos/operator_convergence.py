#!/usr/bin/env python3
"""Grid-refinement study of the discrete operators and the mode solver.

Two tables.  The first differentiates a smooth compactly-centered field
with d_r and d_z and reports max-norm errors against the analytic
derivatives over a sequence of doubled grids.  The second solves the
variable-coefficient mode problem L_m g = f with a manufactured pair
(g*, f) and reports the observed order of the solution error.

Both tables should show second order: the r stencils see ghost values
from the parity reflection at the axis and the z stencils are plain
centered differences.
"""

from __future__ import annotations

import numpy as np

from azmodes.elliptic import EllipticProblem, solve_Lm
from azmodes.grid import ODD, build_grid, d_r, d_z

Array = np.ndarray

GRIDS = ((24, 48), (48, 96), (96, 192), (192, 384))


def _fields(g) -> tuple[Array, Array, Array]:
    """Odd-in-r test field r e^{-r^2 - z^2} and its two derivatives."""
    rr, zz = g.rc, g.z[None, :]
    ee = np.exp(-rr**2 - zz**2)
    f = rr * ee
    df_dr = (1.0 - 2.0 * rr**2) * ee
    df_dz = -2.0 * zz * rr * ee
    return f, df_dr, df_dz


def derivative_table() -> list[float]:
    print("derivative accuracy (max-norm error, order between rows)")
    print(f"{'grid':>10} {'err d_r':>12} {'ord':>6} {'err d_z':>12} {'ord':>6}")
    prev = None
    worst = []
    for nr, nz in GRIDS:
        g = build_grid(8.0, 8.0, nr, nz)
        f, df_dr, df_dz = _fields(g)
        er = float(np.max(np.abs(d_r(g, f, ODD) - df_dr)))
        ez = float(np.max(np.abs(d_z(g, f) - df_dz)))
        if prev is None:
            print(f"{nr:>4}x{nz:<5} {er:12.3e} {'':>6} {ez:12.3e}")
        else:
            o_r = np.log2(prev[0] / er)
            o_z = np.log2(prev[1] / ez)
            print(f"{nr:>4}x{nz:<5} {er:12.3e} {o_r:6.2f} {ez:12.3e} {o_z:6.2f}")
            worst += [o_r, o_z]
        prev = (er, ez)
    return worst


def solver_table() -> list[float]:
    print()
    print("manufactured solve of L_1 g = f, g* = r e^{-r^2 - z^2}")
    print(f"{'grid':>10} {'err':>12} {'ord':>6}")
    prev = None
    orders = []
    for nr, nz in GRIDS:
        g = build_grid(8.0, 8.0, nr, nz)
        ee = np.exp(-g.rc**2 - g.z[None, :] ** 2)
        g_star = g.rc * ee
        rhs = 2.0 * g.rc * (5.0 - 2.0 * g.rc**2
                            - 2.0 * g.z[None, :] ** 2) * ee
        sol = solve_Lm(g, EllipticProblem(m=1, rhs=rhs))
        err = float(np.max(np.abs(sol - g_star)))
        if prev is None:
            print(f"{nr:>4}x{nz:<5} {err:12.3e}")
        else:
            o = np.log2(prev / err)
            orders.append(o)
            print(f"{nr:>4}x{nz:<5} {err:12.3e} {o:6.2f}")
        prev = err
    return orders


def main() -> int:
    orders = derivative_table() + solver_table()
    ok = all(1.7 <= o <= 2.3 for o in orders)
    print()
    print("all observed orders within 2.0 +- 0.3:", "yes" if ok else "NO")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
