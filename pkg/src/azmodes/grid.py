"""Meridional (r, z) grid and centered finite-difference operators.

Grid layout
-----------
Radial nodes are cell centers offset from the axis,

    r_j = (j + 1/2) * dr,   j = 0 .. nr-1,   dr = R / nr,

so no unknown sits at r = 0 and the 1/r, 1/r**2 factors stay finite.
Vertical nodes are uniform and include both endpoints,

    z_i = -Zmax + i * dz,   i = 0 .. nz-1,   dz = 2 * Zmax / (nz - 1).

All scalar fields are arrays of shape (nr, nz) with axis 0 radial.

Ghost conventions (one ghost ring per side, applied on the fly):

* axis (r < 0):    ghost = parity * f[0], i.e. even (+1) or odd (-1)
                   reflection across r = 0 through the half-cell offset;
* outer (r > R):   ghost = -f[nr-1], odd reflection about the face r = R
                   (homogeneous Dirichlet at the outer rim);
* z ends:          ghost = 2*f[end] - f[inner], linear extension.  The
                   second difference is exactly zero on the end rows, which
                   is harmless because evolution pins those rows anyway.

Derivatives are second-order centered everywhere; exactness claims in the
tests therefore hold on interior nodes, while the r = R ring and the z end
rows carry the closure bias.

Quadrature: midpoint in r, trapezoid in z, measure 2*pi*r dr dz.  The rule
integrates f(r, z) = (a + b*r)/r * (c + d*z) * r exactly (the integrand
including the r weight is bilinear), which the tests pin down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray

# parity tags for the axis ghost
EVEN = 1
ODD = -1


@dataclass(frozen=True, eq=False)
class Grid:
    """Meridional grid with cached coordinate and quadrature arrays.

    eq=False keeps identity hashing so operator caches can key on the
    grid object itself.
    """

    R: float
    Zmax: float
    nr: int
    nz: int
    r: Array = field(repr=False)
    z: Array = field(repr=False)
    dr: float
    dz: float
    # (nr, 1) radial coordinate ready to broadcast against (nr, nz) fields
    rc: Array = field(repr=False)
    # quadrature weight 2*pi*r*dr*wz, shape (nr, nz)
    w: Array = field(repr=False)

    def shape(self) -> tuple[int, int]:
        return (self.nr, self.nz)


def build_grid(R: float, Zmax: float, nr: int, nz: int) -> Grid:
    """Construct the meridional grid.

    Parameters
    ----------
    R : float
        Outer radius of the domain (0, R) x (-Zmax, Zmax).
    Zmax : float
        Half height of the vertical extent.
    nr, nz : int
        Number of radial cells / vertical nodes.  nz includes both
        endpoints; nr counts half-offset cell centers.

    Returns
    -------
    Grid
    """
    if R <= 0 or Zmax <= 0:
        raise ValueError(f"domain extents must be positive, got R={R}, Zmax={Zmax}")
    if nr < 8 or nz < 8:
        raise ValueError(f"grid too coarse: nr={nr}, nz={nz} (need at least 8 each)")
    dr = R / nr
    dz = 2.0 * Zmax / (nz - 1)
    r = (np.arange(nr) + 0.5) * dr
    z = -Zmax + np.arange(nz) * dz
    rc = r[:, None]
    # midpoint weights in r, trapezoid in z
    wz = np.full(nz, dz)
    wz[0] = wz[-1] = 0.5 * dz
    w = 2.0 * np.pi * rc * dr * wz[None, :]
    return Grid(R=R, Zmax=Zmax, nr=nr, nz=nz, r=r, z=z, dr=dr, dz=dz, rc=rc, w=w)


# ---------------------------------------------------------------------------
# ghost padding
# ---------------------------------------------------------------------------

def _pad_r(f: Array, parity: int) -> Array:
    """Return f extended by one ghost ring on both radial sides."""
    if parity not in (EVEN, ODD):
        raise ValueError(f"parity must be +1 or -1, got {parity}")
    g = np.empty((f.shape[0] + 2, f.shape[1]), dtype=f.dtype)
    g[1:-1] = f
    g[0] = parity * f[0]      # reflection across the axis
    g[-1] = -f[-1]            # odd about the outer face: Dirichlet rim
    return g


def _pad_z(f: Array) -> Array:
    """Return f extended by one linear-extension ghost row top and bottom."""
    g = np.empty((f.shape[0], f.shape[1] + 2), dtype=f.dtype)
    g[:, 1:-1] = f
    g[:, 0] = 2.0 * f[:, 0] - f[:, 1]
    g[:, -1] = 2.0 * f[:, -1] - f[:, -2]
    return g


# ---------------------------------------------------------------------------
# first and second derivatives
# ---------------------------------------------------------------------------

def d_r(grid: Grid, f: Array, parity: int = EVEN) -> Array:
    """Centered radial derivative with parity ghost at the axis."""
    g = _pad_r(f, parity)
    return (g[2:] - g[:-2]) / (2.0 * grid.dr)


def d_z(grid: Grid, f: Array) -> Array:
    """Centered vertical derivative, one-sided (via linear ghost) on end rows."""
    g = _pad_z(f)
    return (g[:, 2:] - g[:, :-2]) / (2.0 * grid.dz)


def d_rr(grid: Grid, f: Array, parity: int = EVEN) -> Array:
    g = _pad_r(f, parity)
    return (g[2:] - 2.0 * g[1:-1] + g[:-2]) / grid.dr**2


def d_zz(grid: Grid, f: Array) -> Array:
    g = _pad_z(f)
    return (g[:, 2:] - 2.0 * g[:, 1:-1] + g[:, :-2]) / grid.dz**2


def laplacian(grid: Grid, f: Array, parity: int = EVEN) -> Array:
    """Meridional Laplacian d_rr + (1/r) d_r + d_zz acting on a scalar slice."""
    return d_rr(grid, f, parity) + d_r(grid, f, parity) / grid.rc + d_zz(grid, f)


def weight_drift(grid: Grid, f: Array, parity: int = EVEN) -> Array:
    """First-order drift plus reaction term from the 1/(1+r^2) profile weight.

    Applies (4r/(1+r^2)) d_r f + (4(1-r^2)/(1+r^2)^2) f.  This is the extra
    operator the temperature field picks up when evolved in weighted form.
    """
    r2 = grid.rc**2
    return (4.0 * grid.rc / (1.0 + r2)) * d_r(grid, f, parity) \
        + (4.0 * (1.0 - r2) / (1.0 + r2) ** 2) * f


_DIFF_OPS = ("dr", "dz", "laplace", "drift")


def apply_diff(grid: Grid, f: Array, which: str, parity: int = EVEN) -> Array:
    """Apply one named differential operator to a scalar field.

    Parameters
    ----------
    f : Array, shape (nr, nz)
    which : {"dr", "dz", "laplace", "drift"}
        Radial derivative, vertical derivative, meridional Laplacian,
        or the profile-weight drift operator.
    parity : {+1, -1}
        Axis reflection parity of f (ignored by "dz").
    """
    if which == "dr":
        return d_r(grid, f, parity)
    if which == "dz":
        return d_z(grid, f)
    if which == "laplace":
        return laplacian(grid, f, parity)
    if which == "drift":
        return weight_drift(grid, f, parity)
    raise ValueError(f"unknown operator {which!r}; expected one of {_DIFF_OPS}")


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------

def integrate(grid: Grid, f: Array) -> float:
    """Quadrature of f over the meridional section with measure 2*pi*r dr dz."""
    return float(np.sum(grid.w * f))


def lp_norm_weighted(grid: Grid, f: Array, p: float, a: float = 0.0) -> float:
    """Weighted norm ||r^a f||_Lp over the cylinder.

    Computes (2*pi * integral |r^a f|^p r dr dz)^(1/p).  For a == 0 this is
    the plain L^p norm of an axisymmetric field.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    ra = grid.rc**a if a != 0.0 else 1.0
    return float(np.sum(grid.w * np.abs(ra * f) ** p) ** (1.0 / p))


def vector_lp_norm(grid: Grid, comps: list[Array] | tuple[Array, ...],
                   p: float, a: float = 0.0) -> float:
    """Same as lp_norm_weighted but on the Euclidean magnitude of comps."""
    mag = np.sqrt(sum(c * c for c in comps))
    return lp_norm_weighted(grid, mag, p, a)


def m_norm(grid: Grid, f: Array, parity: int = EVEN) -> float:
    """Anisotropically weighted norm used to size admissible data profiles.

    ||r^(1/2) f||_L6 + ||f||_L2 + ||grad f||_L2 + ||f/r||_L2, with the
    meridional gradient (d_r f, d_z f) taken at the given axis parity.
    """
    grad = np.hypot(d_r(grid, f, parity), d_z(grid, f))
    return (
        lp_norm_weighted(grid, f, 6.0, 0.5)
        + lp_norm_weighted(grid, f, 2.0)
        + lp_norm_weighted(grid, grad, 2.0)
        + lp_norm_weighted(grid, f, 2.0, -1.0)
    )
