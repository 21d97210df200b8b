"""Sparse elliptic solvers: the singular cylindrical operator and projections.

Discrete design
---------------
The divergence/gradient pair of each incompressibility family is defined
first, as sparse matrices:

    G_m q = (G_r q, sigma*(m/r) q, d_z q),
    D_m w = (1/r) d_r(r w^r) + d_z w^z - sigma*(m/r) w^theta,

with sigma = +1 for the sin family (meridional sin slots + cos swirl) and
sigma = -1 for the cos family; the lead family is m = 0 with no swirl
slot.  The radial pair lives on cell faces: G_r averages the two face
differences r_{j+-1/2}(q difference)/h back to the cell center and the
radial divergence is its exact negative adjoint in the r-weighted inner
product (a transpose, see _div_r_fv).  The axis face carries the exact
factor r_{-1/2} = 0, so no axis condition is ever imposed; the rim face
applies the Dirichlet ghost for the potential.

The elliptic operator is *defined* as the composition

    L_m := -D_m G_m  (+ identity on the pinned vertical end rows),

so the compatibility D_m G_m = -L_m holds to machine precision by
construction and the projection

    solve L_m q = -D_m w,   w <- w - G_m q

annihilates the masked discrete divergence exactly (up to solver
tolerance).  Vertical end rows are pinned: the mask P zeroes them in both
the divergence and the gradient, which realizes homogeneous Dirichlet
conditions for the potential at z = +-Zmax; the outer rim is Dirichlet
through the ghost closure and pins the m = 0 constant mode.

Summation by parts holds exactly for every family, m = 0 included: the
radial divergence is a weighted transpose by construction, the masked
interior block of d_z is skew on uniform vertical weights, and the
azimuthal part is diagonal, so <G_m q, w>_r = -<q, D_m w>_r to rounding
on arbitrary fields and L_m is symmetric positive definite in the
quadrature inner product.  The face-flux composition is also the
classical second-order conservative discretization of the cylindrical
operator, axis row included, which the centered cell-centered pair is
not (its axis closure cannot serve odd and even potentials at once).

Backends: "direct" (sparse LU, factored once per operator and cached) and
"cg" (diagonally preconditioned conjugate gradients in the r-weighted
inner product, residual-checked).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .grid import EVEN, Grid, ODD, laplacian
from .state import SourceSet, SpectralState

Array = np.ndarray


class EllipticError(RuntimeError):
    """Raised when an elliptic solve misses its tolerance."""


# ---------------------------------------------------------------------------
# 1D stencil matrices (ghost closures folded into the corner rows)
# ---------------------------------------------------------------------------

def _d1r(grid: Grid, parity: int) -> sp.csr_matrix:
    n, h = grid.nr, grid.dr
    c = 1.0 / (2.0 * h)
    A = sp.diags([-c, c], [-1, 1], shape=(n, n), format="lil")
    A[0, 0] += -parity * c          # axis ghost = parity * f0
    A[n - 1, n - 1] += -c           # outer ghost = -f_last
    return A.tocsr()


def _d2r(grid: Grid, parity: int) -> sp.csr_matrix:
    n, h = grid.nr, grid.dr
    c = 1.0 / h**2
    A = sp.diags([c, -2.0 * c, c], [-1, 0, 1], shape=(n, n), format="lil")
    A[0, 0] += parity * c
    A[n - 1, n - 1] += -c
    return A.tocsr()


def _d1z(grid: Grid) -> sp.csr_matrix:
    n, h = grid.nz, grid.dz
    c = 1.0 / (2.0 * h)
    A = sp.diags([-c, c], [-1, 1], shape=(n, n), format="lil")
    # linear-extension ghosts give one-sided differences on the end rows
    A[0, 0], A[0, 1] = -1.0 / h, 1.0 / h
    A[n - 1, n - 2], A[n - 1, n - 1] = -1.0 / h, 1.0 / h
    return A.tocsr()


def _d2z(grid: Grid) -> sp.csr_matrix:
    n, h = grid.nz, grid.dz
    c = 1.0 / h**2
    A = sp.diags([c, -2.0 * c, c], [-1, 0, 1], shape=(n, n), format="lil")
    A[0, :] = 0.0                   # linear extension kills end-row curvature
    A[n - 1, :] = 0.0
    return A.tocsr()


def _grad_r_fv(grid: Grid) -> sp.csr_matrix:
    """Face-flux radial gradient: (G q)_j averages the two face differences.

        (G q)_j = [r_{j+1/2}(q_{j+1}-q_j) + r_{j-1/2}(q_j-q_{j-1})] / (2 h r_j)

    The axis face carries r_{-1/2} = 0, so no axis ghost enters for any m;
    the rim face uses the Dirichlet ghost q_n = -q_{n-1}.  Second-order on
    the potentials the solver produces (odd about the axis for m >= 1).
    """
    n, h = grid.nr, grid.dr
    rf = np.arange(1, n + 1) * h            # r_{j+1/2}
    rfm = np.concatenate([[0.0], rf[:-1]])  # r_{j-1/2}
    den = 2.0 * h * grid.r
    A = sp.diags([(-rfm / den)[1:], (rfm - rf) / den, (rf / den)[:-1]],
                 [-1, 0, 1], shape=(n, n), format="lil")
    A[n - 1, n - 1] += -rf[n - 1] / den[n - 1]
    return A.tocsr()


def _div_r_fv(grid: Grid) -> sp.csr_matrix:
    """Radial divergence (1/r) d_r(r w), the exact negative adjoint of
    _grad_r_fv in the r-weighted inner product (built by transposition, so
    summation by parts holds to rounding with no boundary terms: the axis
    face flux vanishes through its r factor and the rim face flux through
    the gradient's Dirichlet fold).  Second-order at the axis row; the rim
    row degrades to a half-flux closure, irrelevant for interior-supported
    fields."""
    inv_r = sp.diags(1.0 / grid.r)
    rr = sp.diags(grid.r)
    return (-(inv_r @ _grad_r_fv(grid).T @ rr)).tocsr()


def _kron_r(grid: Grid, A: sp.spmatrix) -> sp.csr_matrix:
    return sp.kron(A, sp.identity(grid.nz), format="csr")


def _kron_z(grid: Grid, A: sp.spmatrix) -> sp.csr_matrix:
    return sp.kron(sp.identity(grid.nr), A, format="csr")


def _diag2(grid: Grid, profile: Array) -> sp.csr_matrix:
    """Diagonal matrix of an (nr,)- or (nr, nz)-shaped coefficient."""
    vals = np.broadcast_to(np.asarray(profile).reshape(-1, 1)
                           if np.ndim(profile) == 1 else profile,
                           grid.shape())
    return sp.diags(np.ascontiguousarray(vals).ravel(), format="csr")


def interior_mask(grid: Grid) -> Array:
    """1 on vertical-interior rows, 0 on the pinned z-end rows; (nr, nz)."""
    m = np.ones(grid.shape())
    m[:, 0] = 0.0
    m[:, -1] = 0.0
    return m


def _mask_matrix(grid: Grid) -> sp.csr_matrix:
    return sp.diags(interior_mask(grid).ravel(), format="csr")


def laplacian_matrix(grid: Grid, parity: int) -> sp.csr_matrix:
    """Compact meridional Laplacian d_rr + (1/r) d_r + d_zz as a matrix."""
    return (_kron_r(grid, _d2r(grid, parity))
            + _diag2(grid, 1.0 / grid.r) @ _kron_r(grid, _d1r(grid, parity))
            + _kron_z(grid, _d2z(grid))).tocsr()


def weight_drift_matrix(grid: Grid, parity: int) -> sp.csr_matrix:
    r2 = grid.r**2
    return (_diag2(grid, 4.0 * grid.r / (1.0 + r2))
            @ _kron_r(grid, _d1r(grid, parity))
            + _diag2(grid, 4.0 * (1.0 - r2) / (1.0 + r2) ** 2)).tocsr()


def radial_second_matrix(grid: Grid, parity: int) -> sp.csr_matrix:
    """Bare d_rr as a matrix (optional extra term in the lead heat solve)."""
    return _kron_r(grid, _d2r(grid, parity))


# ---------------------------------------------------------------------------
# iterative backend
# ---------------------------------------------------------------------------

def _pcg(A: sp.spmatrix, b: Array, w: Array, tol: float,
         max_iter: int, label: str) -> Array:
    """Preconditioned CG in the w-weighted inner product.

    Stops on the relative true residual ||A x - b|| / ||b||.  The operator
    is self-adjoint in the weight up to boundary-closure asymmetry, which
    CG tolerates at these scales; convergence is verified, not assumed.
    """
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b)
    diag = A.diagonal()
    diag = np.where(np.abs(diag) > 1e-300, diag, 1.0)
    x = np.zeros_like(b)
    res = b - A @ x
    zvec = res / diag
    p = zvec.copy()
    rho = float(np.dot(res * w, zvec))
    for _ in range(max_iter):
        Ap = A @ p
        denom = float(np.dot(p * w, Ap))
        if denom == 0.0:
            break
        alpha = rho / denom
        x += alpha * p
        res -= alpha * Ap
        if np.linalg.norm(res) <= tol * b_norm:
            return x
        zvec = res / diag
        rho_new = float(np.dot(res * w, zvec))
        p = zvec + (rho_new / rho) * p
        rho = rho_new
    achieved = float(np.linalg.norm(b - A @ x)) / b_norm
    if achieved <= tol:
        return x
    raise EllipticError(
        f"{label}: cg stalled at relative residual {achieved:.3e} "
        f"(target {tol:.1e}, {max_iter} iterations)")


class _Solver:
    """Uniform solve interface over the direct and cg backends."""

    def __init__(self, A: sp.csr_matrix, grid: Grid, backend: str,
                 tol: float, label: str):
        if backend not in ("direct", "cg"):
            raise ValueError(f"unknown backend {backend!r}")
        self.A = A
        self.backend = backend
        self.tol = tol
        self.label = label
        self._lu = None
        self._w = grid.w.ravel()

    def solve(self, b: Array) -> Array:
        if self.backend == "direct":
            if self._lu is None:
                self._lu = splu(self.A.tocsc())
            x = self._lu.solve(b)
            b_norm = float(np.linalg.norm(b))
            if b_norm > 0.0:
                rel = float(np.linalg.norm(b - self.A @ x)) / b_norm
                if rel > max(self.tol, 1e-9):
                    raise EllipticError(
                        f"{self.label}: direct solve residual {rel:.3e} "
                        f"exceeds {max(self.tol, 1e-9):.1e}")
            return x
        return _pcg(self.A, b, self._w, self.tol,
                    max_iter=20 * b.size, label=self.label)


# ---------------------------------------------------------------------------
# family projector
# ---------------------------------------------------------------------------

class FamilyProjector:
    """Divergence-free projector for one incompressibility family.

    m = k * n_base is the azimuthal order (0 for the lead family) and
    sigma the swirl sign: +1 couples the sin meridional slots with the cos
    swirl (pressure Q_k), -1 the mirror family (pressure R_k).
    """

    def __init__(self, grid: Grid, m: int, sigma: int = 1,
                 backend: str = "direct", tol: float = 1e-12):
        if m < 0:
            raise ValueError(f"azimuthal order must be >= 0, got {m}")
        self.grid = grid
        self.m = m
        self.sigma = sigma
        P = _mask_matrix(grid)
        Gr = P @ _kron_r(grid, _grad_r_fv(grid)) @ P
        Gz = P @ _kron_z(grid, _d1z(grid)) @ P
        Dr = P @ _kron_r(grid, _div_r_fv(grid)) @ P
        Dz = P @ _kron_z(grid, _d1z(grid)) @ P
        self._Gr, self._Gz, self._Dr, self._Dz = Gr, Gz, Dr, Dz
        if m > 0:
            mth = _diag2(grid, sigma * m / grid.r)
            self._Gth = (P @ mth @ P).tocsr()
            self._Dth = (-(P @ mth @ P)).tocsr()
            L = -(Dr @ Gr + self._Dth @ self._Gth + Dz @ Gz)
        else:
            self._Gth = None
            self._Dth = None
            L = -(Dr @ Gr + Dz @ Gz)
        eye = sp.identity(grid.nr * grid.nz, format="csr")
        self.L = (L + (eye - P)).tocsr()
        self._solver = _Solver(self.L, grid, backend, tol,
                               label=f"projector(m={m}, sigma={sigma})")

    # -- raw operator applications ------------------------------------

    def divergence(self, w_r: Array, w_theta: Array | None,
                   w_z: Array) -> Array:
        """Masked discrete divergence of the family, shape (nr, nz)."""
        v = self._Dr @ w_r.ravel() + self._Dz @ w_z.ravel()
        if self._Dth is not None:
            if w_theta is None:
                raise ValueError("swirl slot required for m >= 1")
            v = v + self._Dth @ w_theta.ravel()
        return v.reshape(self.grid.shape())

    def gradient(self, q: Array) -> tuple[Array, Array | None, Array]:
        shape = self.grid.shape()
        qf = q.ravel()
        gr = (self._Gr @ qf).reshape(shape)
        gz = (self._Gz @ qf).reshape(shape)
        gth = (self._Gth @ qf).reshape(shape) if self._Gth is not None else None
        return gr, gth, gz

    def apply_L(self, q: Array) -> Array:
        return (self.L @ q.ravel()).reshape(self.grid.shape())

    def solve(self, rhs: Array) -> Array:
        """Solve L q = rhs for a masked right-hand side."""
        return self._solver.solve(rhs.ravel()).reshape(self.grid.shape())

    # -- projection -----------------------------------------------------

    def project(self, w_r: Array, w_theta: Array | None, w_z: Array
                ) -> tuple[Array, Array | None, Array, Array]:
        """Remove the gradient part; returns corrected fields and q.

        Solves L q = -(D w) and subtracts G q, after which the masked
        divergence vanishes to solver precision.
        """
        rhs = -self.divergence(w_r, w_theta, w_z)
        q = self.solve(rhs)
        gr, gth, gz = self.gradient(q)
        w_r = w_r - gr
        w_z = w_z - gz
        if gth is not None:
            w_theta = w_theta - gth
        return w_r, w_theta, w_z, q


def projector_for(grid: Grid, m: int, sigma: int = 1,
                  backend: str = "direct", tol: float = 1e-12
                  ) -> FamilyProjector:
    """Cached FamilyProjector; factorizations are reused across steps.

    The cache is an attribute of the grid object, so dropping the grid
    drops every factorization built on it.
    """
    per_grid = getattr(grid, "_projector_cache", None)
    if per_grid is None:
        per_grid = {}
        # not a field mutation: attaches cache storage to the frozen grid
        object.__setattr__(grid, "_projector_cache", per_grid)
    key = (m, sigma, backend, tol)
    if key not in per_grid:
        per_grid[key] = FamilyProjector(grid, m, sigma, backend, tol)
    return per_grid[key]


def project_family(grid: Grid, w_r: Array, w_theta: Array | None, w_z: Array,
                   k: int, n_base: int, sigma: int = 1,
                   backend: str = "direct", tol: float = 1e-12
                   ) -> tuple[Array, Array | None, Array, Array]:
    """Functional wrapper: project one family of harmonic k (0 = lead)."""
    proj = projector_for(grid, k * n_base, sigma, backend, tol)
    return proj.project(w_r, w_theta, w_z)


def project_state(s: SpectralState, backend: str = "direct",
                  tol: float = 1e-12) -> None:
    """Project the lead family and both families of every mode, in place.

    Stores the raw correction potentials in the pressure slots (callers
    that need the physical pressure divide by their dt).
    """
    g = s.grid
    lead = projector_for(g, 0, 1, backend, tol)
    s.lead.u_r, _, s.lead.u_z, s.lead.pressure = lead.project(
        s.lead.u_r, None, s.lead.u_z)
    for m in s.modes:
        mm = m.k * s.n_base
        sin_p = projector_for(g, mm, 1, backend, tol)
        cos_p = projector_for(g, mm, -1, backend, tol)
        m.u_r_sin, m.u_theta_cos, m.u_z_sin, m.pressure_sin = sin_p.project(
            m.u_r_sin, m.u_theta_cos, m.u_z_sin)
        m.u_r_cos, m.u_theta_sin, m.u_z_cos, m.pressure_cos = cos_p.project(
            m.u_r_cos, m.u_theta_sin, m.u_z_cos)


# ---------------------------------------------------------------------------
# generic solves with the same operator
# ---------------------------------------------------------------------------

@dataclass
class EllipticProblem:
    """One solve of the singular operator: order m, right-hand side, tol."""

    m: int
    rhs: Array
    tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.tolerance <= 1e-4:
            raise ValueError(
                f"tolerance {self.tolerance} outside (0, 1e-4]")
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")


def solve_Lm(grid: Grid, p: EllipticProblem, backend: str = "direct") -> Array:
    """Solve the composed operator L_m q = rhs with pinned z-end rows.

    Boundary conditions: Dirichlet 0 at the rim and the vertical ends;
    at the axis the face flux carries an exact factor r = 0, so no
    condition is imposed there and none is needed.
    """
    if not np.all(np.isfinite(p.rhs)):
        raise ValueError("rhs contains non-finite values")
    proj = projector_for(grid, p.m, 1, backend, p.tolerance)
    rhs = p.rhs * interior_mask(grid)
    return proj.solve(rhs)


def buoyant_pressure_part(grid: Grid, k: int, n_base: int, xi_k: Array,
                          form: str = "dz", backend: str = "direct",
                          tol: float = 1e-12) -> Array:
    """Pressure component driven by the buoyancy of one harmonic.

    form="dz" solves L_{kN} q = -(1/(1+r^2)) d_z xi_k, the right-hand
    side the full pressure equation produces; form="plain" drops the d_z
    (an alternative stated elsewhere for the same object, kept selectable
    for comparison).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    from .grid import d_z as _dz
    w = 1.0 / (1.0 + grid.rc**2)
    if form == "dz":
        rhs = -w * _dz(grid, xi_k)
    elif form == "plain":
        rhs = -w * xi_k
    else:
        raise ValueError(f"form must be 'dz' or 'plain', got {form!r}")
    return solve_Lm(grid, EllipticProblem(m=k * n_base, rhs=rhs, tolerance=tol),
                    backend=backend)


# ---------------------------------------------------------------------------
# pressure-identity diagnostic
# ---------------------------------------------------------------------------

def pressure_identity_residual(s: SpectralState, src: SourceSet | None = None,
                               buoyancy: bool = True) -> list[float]:
    """Weighted-L2 residual of the elliptic pressure equation, per harmonic.

    The stored sin-family potential of each harmonic must satisfy

        L_{kN} Q_k = D_k(explicit tendencies + viscous/penalty terms),

    the divergence of the momentum equations of its family.  Both sides
    are evaluated with the solver's own discrete operators; on a freshly
    projected state the residual is O(dt + h^2).
    """
    from .nonlinear import compute_sources, linear_couplings
    if src is None:
        src = compute_sources(s)
    coup = linear_couplings(s, buoyancy=buoyancy)
    g = s.grid
    inv_r2 = 1.0 / g.rc**2
    out: list[float] = []
    for m in s.modes:
        mm = m.k * s.n_base
        proj = projector_for(g, mm, 1)
        pen = (1.0 + mm**2) * inv_r2
        # the 2kN/r^2 exchange terms already arrive through the couplings,
        # so the viscous block here is the diagonal part only
        visc_r = -laplacian(g, m.u_r_sin, ODD) + pen * m.u_r_sin
        visc_t = -laplacian(g, m.u_theta_cos, ODD) + pen * m.u_theta_cos
        visc_z = (-laplacian(g, m.u_z_sin, ODD)
                  + mm**2 * inv_r2 * m.u_z_sin)
        sk = src.mode(m.k)
        ck = coup.mode(m.k)
        rhs = proj.divergence(ck.r_sin + sk.r_sin + visc_r,
                              ck.theta_cos + sk.theta_cos + visc_t,
                              ck.z_sin + sk.z_sin + visc_z)
        lhs = proj.apply_L(m.pressure_sin)
        diff = lhs - rhs
        out.append(float(np.sqrt(np.sum(g.w * diff**2))))
    return out


# ---------------------------------------------------------------------------
# decay-rate chart for the inverse operator
# ---------------------------------------------------------------------------

def prop_decay_chart(grid: Grid, f: Array, m_list=(2, 4, 8, 16),
                     p: float = 6.0, q: float = 2.0,
                     alpha: float = 0.5, beta: float = 0.5) -> dict:
    """Chart ||r^alpha L_m^{-1}(r^(beta-2) f)||_Lp / ||f||_Lq against m.

    Exponents must satisfy alpha + beta > 0, alpha + 1/p >= -3,
    beta - 1/q >= -2 and 1/q = 1/p + (alpha + beta)/3.  Returns the per-m
    ratios, the fitted log-log slope, and the predicted decay exponent
    -(1 + 1/p - 1/q) the slope is to be compared with (not asserted).
    """
    from .diagnostics import scaling_fit
    from .grid import lp_norm_weighted
    if alpha + beta <= 0 or alpha + 1.0 / p < -3 or beta - 1.0 / q < -2:
        raise ValueError("inadmissible weight exponents")
    if abs(1.0 / q - 1.0 / p - (alpha + beta) / 3.0) > 1e-12:
        raise ValueError("scaling relation 1/q = 1/p + (alpha+beta)/3 violated")
    rhs = grid.rc ** (beta - 2.0) * f
    denom = lp_norm_weighted(grid, f, q)
    if denom == 0.0:
        raise ValueError("f must be nonzero")
    ratios = {}
    for m in m_list:
        g_sol = solve_Lm(grid, EllipticProblem(m=int(m), rhs=rhs))
        ratios[int(m)] = lp_norm_weighted(grid, g_sol, p, alpha) / denom
    slope = scaling_fit(sorted(ratios.items()))
    return {"ratios": ratios, "slope": slope,
            "target": -(1.0 + 1.0 / p - 1.0 / q)}
