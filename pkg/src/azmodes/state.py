"""State containers for the azimuthal-harmonic Boussinesq system.

A state holds an axisymmetric lead block plus K harmonic blocks.  Mode k
carries the physical azimuthal dependence

    u^r     = U^r(r,z)      + sum_k [ u_r_sin_k     sin(kN t) + u_r_cos_k     cos(kN t) ]
    u^theta = U^theta(r,z)  + sum_k [ u_theta_sin_k sin(kN t) + u_theta_cos_k cos(kN t) ]
    u^z     = U^z(r,z)      + sum_k [ u_z_sin_k     sin(kN t) + u_z_cos_k     cos(kN t) ]

(t the azimuth, N the base wavenumber), and likewise for the weighted
temperature and the pressure.  Every mode component vanishes on the axis
(odd reflection), while the lead block mixes parities: u_r, u_theta odd,
u_z, pressure, temperature even.

Incompressibility splits per mode into two scalar constraints tying the
*sin* meridional velocity to the *cos* swirl and vice versa:

    (d_r + 1/r) u_r_sin + d_z u_z_sin - (kN/r) u_theta_cos = 0,
    (d_r + 1/r) u_r_cos + d_z u_z_cos + (kN/r) u_theta_sin = 0.

The triple (u_r_sin, u_theta_cos, u_z_sin) is referred to as the "sin
family" (pressure_sin belongs to it) and (u_r_cos, u_theta_sin, u_z_cos)
as the "cos family" throughout the package.

Pressures are not prognostic: the stepper stores the projection correction
divided by dt, which is the consistent discrete pressure at each step.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .grid import Grid, ODD, build_grid

Array = np.ndarray

LEAD_PARITY = {
    "u_r": ODD,
    "u_theta": ODD,
    "u_z": 1,
    "pressure": 1,
    "temp": 1,
}

MODE_COMPONENTS = (
    "u_r_sin", "u_r_cos",
    "u_theta_sin", "u_theta_cos",
    "u_z_sin", "u_z_cos",
    "temp_sin", "temp_cos",
)


@dataclass
class LeadFields:
    """Axisymmetric block: meridional velocity, swirl, pressure, temperature."""

    u_r: Array
    u_theta: Array
    u_z: Array
    pressure: Array
    temp: Array

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "LeadFields":
        return cls(*(np.zeros(shape) for _ in range(5)))


@dataclass
class ModeFields:
    """One azimuthal harmonic: sin/cos coefficient pairs at wavenumber k*N."""

    k: int
    u_r_sin: Array
    u_r_cos: Array
    u_theta_sin: Array
    u_theta_cos: Array
    u_z_sin: Array
    u_z_cos: Array
    temp_sin: Array
    temp_cos: Array
    pressure_sin: Array
    pressure_cos: Array

    @classmethod
    def zeros(cls, k: int, shape: tuple[int, int]) -> "ModeFields":
        return cls(k, *(np.zeros(shape) for _ in range(10)))


@dataclass
class SpectralState:
    """Full solver state: grid, truncation, time, lead and mode blocks."""

    grid: Grid
    n_base: int          # azimuthal base wavenumber N
    n_modes: int         # number of retained harmonics K
    t: float
    lead: LeadFields
    modes: list[ModeFields]

    @classmethod
    def zeros(cls, grid: Grid, n_base: int, n_modes: int) -> "SpectralState":
        if n_base < 1 or n_modes < 1:
            raise ValueError(
                f"need n_base >= 1 and n_modes >= 1, got {n_base}, {n_modes}")
        shape = grid.shape()
        return cls(
            grid=grid,
            n_base=n_base,
            n_modes=n_modes,
            t=0.0,
            lead=LeadFields.zeros(shape),
            modes=[ModeFields.zeros(k, shape) for k in range(1, n_modes + 1)],
        )

    def copy(self) -> "SpectralState":
        lead = LeadFields(**{f.name: self_arr.copy()
                             for f, self_arr in zip(fields(LeadFields),
                                                    _lead_arrays(self.lead))})
        modes = []
        for m in self.modes:
            kw = {f.name: (m.k if f.name == "k" else getattr(m, f.name).copy())
                  for f in fields(ModeFields)}
            modes.append(ModeFields(**kw))
        return replace(self, lead=lead, modes=modes)

    def mode(self, k: int) -> ModeFields:
        if not 1 <= k <= self.n_modes:
            raise ValueError(f"mode index k={k} outside 1..{self.n_modes}")
        return self.modes[k - 1]


def _lead_arrays(lead: LeadFields) -> list[Array]:
    return [lead.u_r, lead.u_theta, lead.u_z, lead.pressure, lead.temp]


# ---------------------------------------------------------------------------
# source and coupling containers
# ---------------------------------------------------------------------------

@dataclass
class ModeSources:
    """Quadratic mode-mode sources feeding harmonic k.

    Convention: the evolution reads  d_t f + (linear terms) = -(source),
    i.e. the stepper *subtracts* these fields from the right-hand side.
    """

    k: int
    r_sin: Array
    r_cos: Array
    theta_sin: Array
    theta_cos: Array
    z_sin: Array
    z_cos: Array
    temp_sin: Array
    temp_cos: Array

    @classmethod
    def zeros(cls, k: int, shape: tuple[int, int]) -> "ModeSources":
        return cls(k, *(np.zeros(shape) for _ in range(8)))


@dataclass
class SourceSet:
    """Lead feedback sources plus per-harmonic mode sources."""

    lead_r: Array
    lead_theta: Array
    lead_z: Array
    lead_temp: Array
    modes: list[ModeSources]

    @classmethod
    def zeros(cls, shape: tuple[int, int], n_modes: int) -> "SourceSet":
        return cls(*(np.zeros(shape) for _ in range(4)),
                   [ModeSources.zeros(k, shape) for k in range(1, n_modes + 1)])

    def mode(self, k: int) -> ModeSources:
        return self.modes[k - 1]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_state(s: SpectralState, div_tol: float | None = None) -> list[str]:
    """Check shapes, finiteness, mode ordering; optionally the constraints.

    Returns a list of human-readable problem strings (empty when clean).
    When div_tol is given, the per-family divergence residuals are measured
    on interior vertical rows and compared against it.
    """
    problems: list[str] = []
    shape = s.grid.shape()
    for name in LEAD_PARITY:
        arr = getattr(s.lead, name)
        if arr.shape != shape:
            problems.append(f"lead.{name} has shape {arr.shape}, expected {shape}")
        elif not np.all(np.isfinite(arr)):
            problems.append(f"lead.{name} contains non-finite values")
    if len(s.modes) != s.n_modes:
        problems.append(f"{len(s.modes)} mode blocks for n_modes={s.n_modes}")
    for i, m in enumerate(s.modes):
        if m.k != i + 1:
            problems.append(f"mode block {i} carries k={m.k}, expected {i + 1}")
        for name in MODE_COMPONENTS + ("pressure_sin", "pressure_cos"):
            arr = getattr(m, name)
            if arr.shape != shape:
                problems.append(
                    f"mode {m.k} {name} has shape {arr.shape}, expected {shape}")
            elif not np.all(np.isfinite(arr)):
                problems.append(f"mode {m.k} {name} contains non-finite values")
    if div_tol is not None and not problems:
        from .diagnostics import divergence_residual
        div = divergence_residual(s)
        if div > div_tol:
            problems.append(f"divergence residual {div:.3e} exceeds {div_tol:.3e}")
    return problems


# ---------------------------------------------------------------------------
# energy functional parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyParams:
    """Exponents of the weighted energy functionals.

    Admissibility requires p in (5, 6), 1 < beta < (p-1)/4 and
    0 < 4*alpha < p - 3 - 2*beta.  Defaults: p = 100/19, alpha = 1/30,
    beta = 17/16.
    """

    p: float = 100.0 / 19.0
    alpha: float = 1.0 / 30.0
    beta: float = 17.0 / 16.0

    def validate(self) -> None:
        if not 5.0 < self.p < 6.0:
            raise ValueError(f"p={self.p} outside (5, 6)")
        if not 1.0 < self.beta < (self.p - 1.0) / 4.0:
            raise ValueError(
                f"beta={self.beta} outside (1, (p-1)/4) = (1, {(self.p - 1) / 4})")
        if not 0.0 < 4.0 * self.alpha < self.p - 3.0 - 2.0 * self.beta:
            raise ValueError(
                f"alpha={self.alpha} violates 0 < 4*alpha < p - 3 - 2*beta "
                f"= {self.p - 3.0 - 2.0 * self.beta}")


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything a run needs; JSON-serializable.

    The JSON schema accepts the short aliases "N" and "K" for n_base and
    n_modes.  Lengths are in the same units as the grid extents; time in
    viscous units (viscosity and diffusivity are both 1).
    """

    # domain / discretization
    R: float = 8.0
    Zmax: float = 8.0
    nr: int = 48
    nz: int = 96
    # spectral truncation
    n_base: int = 8
    n_modes: int = 4
    # time stepping
    dt_max: float = 5e-3
    cfl: float = 0.4
    t_final: float = 0.1
    fixed_dt: float | None = None     # bypass the CFL clamp when set
    scheme: str = "euler"             # "euler" | "cn"
    # physics switches
    buoyancy: bool = True
    lead_temp_extra_drr: bool = False  # add d_rr to the lead temperature diffusion
    # initial data bump parameters (see initial_data.make_stream_data)
    amp_sin: float = 1.0
    amp_cos: float = 0.7
    amp_temp_sin: float = 0.5
    amp_temp_cos: float = 0.5
    swirl_sin: float = 0.0
    swirl_cos: float = 0.0
    r_center: float = 3.0
    z_center: float = 0.0
    r_width: float = 0.8
    z_width: float = 1.0
    project_initial: bool = False
    # elliptic backend
    backend: str = "direct"           # "direct" | "cg"
    cg_tol: float = 1e-12
    # diagnostics
    record_every: int = 10
    energy: EnergyParams = field(default_factory=EnergyParams)
    # outputs
    output_dir: str | None = None
    dump_fields: bool = False

    _ALIASES = {"N": "n_base", "K": "n_modes", "T": "t_final"}

    def validate(self) -> None:
        if self.scheme not in ("euler", "cn"):
            raise ValueError(f"scheme must be 'euler' or 'cn', got {self.scheme!r}")
        if self.backend not in ("direct", "cg"):
            raise ValueError(f"backend must be 'direct' or 'cg', got {self.backend!r}")
        if self.n_base < 1 or self.n_modes < 1:
            raise ValueError("n_base and n_modes must be >= 1")
        if self.t_final <= 0 or self.dt_max <= 0 or self.cfl <= 0:
            raise ValueError("t_final, dt_max and cfl must be positive")
        if self.fixed_dt is not None and self.fixed_dt <= 0:
            raise ValueError("fixed_dt must be positive when given")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        self.energy.validate()
        build_grid(self.R, self.Zmax, self.nr, self.nz)  # reuse its checks

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        kw: dict = {}
        for key, val in raw.items():
            name = cls._ALIASES.get(key, key)
            if name == "energy":
                val = EnergyParams(**val)
            elif name not in known:
                raise ValueError(f"unknown config key {key!r}")
            kw[name] = val
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def make_grid(self) -> Grid:
        return build_grid(self.R, self.Zmax, self.nr, self.nz)


# ---------------------------------------------------------------------------
# snapshot i/o
# ---------------------------------------------------------------------------

def save_npz(path, s: SpectralState) -> None:
    """Write a state snapshot.

    Layout: scalars R, Zmax, nr, nz, n_base, n_modes, t; lead fields as
    lead_<name> arrays of shape (nr, nz); mode components stacked as
    mode_<name> arrays of shape (K, nr, nz) with k ascending.
    """
    payload: dict[str, Array | float | int] = {
        "R": s.grid.R, "Zmax": s.grid.Zmax,
        "nr": s.grid.nr, "nz": s.grid.nz,
        "n_base": s.n_base, "n_modes": s.n_modes, "t": s.t,
    }
    for name in LEAD_PARITY:
        payload[f"lead_{name}"] = getattr(s.lead, name)
    for name in MODE_COMPONENTS + ("pressure_sin", "pressure_cos"):
        payload[f"mode_{name}"] = np.stack([getattr(m, name) for m in s.modes])
    np.savez(path, **payload)


def load_npz(path) -> SpectralState:
    """Read a snapshot written by save_npz."""
    with np.load(path) as data:
        grid = build_grid(float(data["R"]), float(data["Zmax"]),
                          int(data["nr"]), int(data["nz"]))
        s = SpectralState.zeros(grid, int(data["n_base"]), int(data["n_modes"]))
        s.t = float(data["t"])
        for name in LEAD_PARITY:
            setattr(s.lead, name, data[f"lead_{name}"].copy())
        for name in MODE_COMPONENTS + ("pressure_sin", "pressure_cos"):
            block = data[f"mode_{name}"]
            for i, m in enumerate(s.modes):
                setattr(m, name, block[i].copy())
    return s


def states_allclose(a: SpectralState, b: SpectralState,
                    rtol: float = 0.0, atol: float = 0.0) -> bool:
    """Fieldwise comparison helper used by round-trip and determinism tests."""
    if (a.n_base, a.n_modes) != (b.n_base, b.n_modes):
        return False
    if abs(a.t - b.t) > atol + rtol * abs(b.t):
        return False
    for name in LEAD_PARITY:
        if not np.allclose(getattr(a.lead, name), getattr(b.lead, name),
                           rtol=rtol, atol=atol):
            return False
    for ma, mb in zip(a.modes, b.modes):
        for name in MODE_COMPONENTS + ("pressure_sin", "pressure_cos"):
            if not np.allclose(getattr(ma, name), getattr(mb, name),
                               rtol=rtol, atol=atol):
                return False
    return True
