"""Grid, material and drive types plus effective-field terms for a 2-D film.

All public inputs that describe applied fields are flux densities in tesla;
effective fields are returned in A/m (H convention, ``B = mu0 * H``).  The
magnetization state is a grid of unit vectors; amplitudes are carried by the
per-cell saturation magnetization ``Ms``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolationError

MU0 = 4.0e-7 * math.pi  # vacuum permeability (T m / A)
GAMMA_LL = 1.760859e11  # electron gyromagnetic ratio (rad s^-1 T^-1)

#: demagnetization treatments supported by :func:`demag_field`
DEMAG_MODES = ("thin-film-local", "none")

_NORM_TOL = 1e-9


def _unit(v, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ContractViolationError(f"{name} must be non-zero")
    return v / n


@dataclass
class SpinField:
    """Magnetization state: unit vectors on an nx x ny grid of one cell layer.

    ``m`` has shape (nx, ny, 3) and every cell must stay within 1e-9 of unit
    norm.  ``dx``/``dy`` are the in-plane cell sizes and ``thickness`` the
    film thickness, all in metres.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    thickness: float
    m: np.ndarray

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ContractViolationError("grid needs nx >= 2 and ny >= 2")
        if self.dx <= 0 or self.dy <= 0 or self.thickness <= 0:
            raise ContractViolationError("dx, dy and thickness must be > 0")
        self.m = np.asarray(self.m, dtype=float)
        if self.m.shape != (self.nx, self.ny, 3):
            raise ContractViolationError(
                f"m has shape {self.m.shape}, expected {(self.nx, self.ny, 3)}"
            )
        norms = np.linalg.norm(self.m, axis=2)
        worst = float(np.max(np.abs(norms - 1.0)))
        if not np.isfinite(worst) or worst > _NORM_TOL:
            raise ContractViolationError(
                f"magnetization is not unit-norm (worst deviation {worst:.3e})"
            )

    @classmethod
    def uniform(
        cls,
        nx: int,
        ny: int,
        dx: float = 5e-9,
        dy: float = 5e-9,
        thickness: float = 15e-9,
        direction=(1.0, 0.0, 0.0),
    ) -> "SpinField":
        """Uniformly magnetized state along ``direction``."""
        d = _unit(direction, "direction")
        m = np.tile(d, (nx, ny, 1))
        return cls(nx, ny, dx, dy, thickness, m)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.thickness

    def copy(self) -> "SpinField":
        return SpinField(self.nx, self.ny, self.dx, self.dy, self.thickness,
                         self.m.copy())

    def with_m(self, m: np.ndarray) -> "SpinField":
        """Same geometry, new magnetization array."""
        return SpinField(self.nx, self.ny, self.dx, self.dy, self.thickness, m)

    def average(self) -> np.ndarray:
        """Spatial average of m, shape (3,)."""
        return self.m.mean(axis=(0, 1))


@dataclass
class MaterialMap:
    """Per-cell material parameters.

    Ms (A/m), Aex (J/m), Ku (J/m^3), unit easy axis, Gilbert damping alpha.
    """

    Ms: np.ndarray
    Aex: np.ndarray
    Ku: np.ndarray
    easy_axis: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        self.Ms = np.asarray(self.Ms, dtype=float)
        self.Aex = np.asarray(self.Aex, dtype=float)
        self.Ku = np.asarray(self.Ku, dtype=float)
        self.easy_axis = np.asarray(self.easy_axis, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        shape = self.Ms.shape
        for name, arr in (("Aex", self.Aex), ("Ku", self.Ku), ("alpha", self.alpha)):
            if arr.shape != shape:
                raise ContractViolationError(f"{name} shape {arr.shape} != Ms shape {shape}")
        if self.easy_axis.shape != shape + (3,):
            raise ContractViolationError(
                f"easy_axis shape {self.easy_axis.shape} != {shape + (3,)}"
            )
        if np.any(self.Ms <= 0):
            raise ContractViolationError("Ms must be > 0 everywhere")
        if np.any(self.Aex < 0):
            raise ContractViolationError("Aex must be >= 0")
        if np.any(self.alpha <= 0) or np.any(self.alpha > 1):
            raise ContractViolationError("alpha must lie in (0, 1]")
        norms = np.linalg.norm(self.easy_axis, axis=-1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ContractViolationError("easy_axis must be unit vectors")

    @classmethod
    def uniform(
        cls,
        nx: int,
        ny: int,
        Ms: float = 1.0e6,
        Aex: float = 1.5e-11,
        Ku: float = 5.0e3,
        easy_axis=(1.0, 0.0, 0.0),
        alpha: float = 0.02,
    ) -> "MaterialMap":
        """Spatially uniform film with CoFeB-like defaults."""
        u = _unit(easy_axis, "easy_axis")
        return cls(
            Ms=np.full((nx, ny), float(Ms)),
            Aex=np.full((nx, ny), float(Aex)),
            Ku=np.full((nx, ny), float(Ku)),
            easy_axis=np.tile(u, (nx, ny, 1)),
            alpha=np.full((nx, ny), float(alpha)),
        )

    def copy(self) -> "MaterialMap":
        return MaterialMap(self.Ms.copy(), self.Aex.copy(), self.Ku.copy(),
                           self.easy_axis.copy(), self.alpha.copy())

    @property
    def shape(self) -> tuple[int, int]:
        return self.Ms.shape


@dataclass(frozen=True)
class Tone:
    """One RF drive tone: peak flux density (T), frequency (Hz), phase (rad),
    unit polarization axis.  The instantaneous field is
    ``amplitude * sin(2*pi*frequency*t + phase) * axis``.
    """

    amplitude: float
    frequency: float
    phase: float = 0.0
    axis: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.amplitude < 0:
            raise ContractViolationError("tone amplitude must be >= 0")
        if self.frequency <= 0:
            raise ContractViolationError("tone frequency must be > 0")
        ax = _unit(self.axis, "tone axis")
        object.__setattr__(self, "axis", (float(ax[0]), float(ax[1]), float(ax[2])))


@dataclass(frozen=True)
class DriveSpec:
    """Static bias flux density plus a list of RF tones (all tesla)."""

    bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    tones: tuple[Tone, ...] = ()

    def __post_init__(self):
        b = np.asarray(self.bias, dtype=float)
        if b.shape != (3,):
            raise ContractViolationError("bias must be a 3-vector")
        object.__setattr__(self, "bias", (float(b[0]), float(b[1]), float(b[2])))
        object.__setattr__(self, "tones", tuple(self.tones))

    def bias_only(self) -> "DriveSpec":
        return DriveSpec(bias=self.bias, tones=())

    def flux_at(self, t: float) -> np.ndarray:
        """Total applied flux density B(t) in tesla, shape (3,)."""
        b = np.array(self.bias, dtype=float)
        for tone in self.tones:
            b += tone.amplitude * math.sin(
                2.0 * math.pi * tone.frequency * t + tone.phase
            ) * np.asarray(tone.axis)
        return b

    def max_frequency(self) -> float:
        """Highest tone frequency, 0.0 if there are no tones."""
        return max((t.frequency for t in self.tones), default=0.0)


def _check_shapes(s: SpinField, mat: MaterialMap) -> None:
    if mat.shape != (s.nx, s.ny):
        raise ContractViolationError(
            f"material shape {mat.shape} does not match grid {(s.nx, s.ny)}"
        )


def _laplacian(m: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """5-point stencil with Neumann (mirror) boundaries: missing neighbors
    duplicate the boundary cell, so their difference terms vanish."""
    lap = np.zeros_like(m)
    inv_dx2 = 1.0 / (dx * dx)
    inv_dy2 = 1.0 / (dy * dy)
    lap[1:-1, :] += (m[2:, :] - 2.0 * m[1:-1, :] + m[:-2, :]) * inv_dx2
    lap[0, :] += (m[1, :] - m[0, :]) * inv_dx2
    lap[-1, :] += (m[-2, :] - m[-1, :]) * inv_dx2
    lap[:, 1:-1] += (m[:, 2:] - 2.0 * m[:, 1:-1] + m[:, :-2]) * inv_dy2
    lap[:, 0] += (m[:, 1] - m[:, 0]) * inv_dy2
    lap[:, -1] += (m[:, -2] - m[:, -1]) * inv_dy2
    return lap


def exchange_field(s: SpinField, mat: MaterialMap) -> np.ndarray:
    """Exchange field H_ex = (2*Aex/(mu0*Ms)) * laplacian(m), A/m."""
    _check_shapes(s, mat)
    lap = _laplacian(s.m, s.dx, s.dy)
    factor = 2.0 * mat.Aex / (MU0 * mat.Ms)
    return factor[:, :, None] * lap


def anisotropy_field(s: SpinField, mat: MaterialMap) -> np.ndarray:
    """Uniaxial anisotropy field H_k = (2*Ku/(mu0*Ms)) * (m.u) u, A/m."""
    _check_shapes(s, mat)
    proj = np.einsum("ijk,ijk->ij", s.m, mat.easy_axis)
    factor = 2.0 * mat.Ku / (MU0 * mat.Ms) * proj
    return factor[:, :, None] * mat.easy_axis


def demag_field(s: SpinField, mat: MaterialMap, mode: str = "thin-film-local") -> np.ndarray:
    """Demagnetizing field.

    ``thin-film-local`` applies the local thin-film tensor diag(0, 0, 1):
    H_d = -Ms * m_z * z_hat.  ``none`` returns zero.
    """
    _check_shapes(s, mat)
    if mode == "none":
        return np.zeros_like(s.m)
    if mode != "thin-film-local":
        raise ConfigurationError(
            f"unknown demag mode {mode!r}; expected one of {DEMAG_MODES}"
        )
    h = np.zeros_like(s.m)
    h[:, :, 2] = -mat.Ms * s.m[:, :, 2]
    return h


def zeeman_field(drive: DriveSpec, t: float, s: SpinField) -> np.ndarray:
    """Uniform applied field H(t) = B(t)/mu0 broadcast over the grid, A/m."""
    if t < 0:
        raise ContractViolationError("t must be >= 0")
    h = drive.flux_at(t) / MU0
    return np.broadcast_to(h, (s.nx, s.ny, 3)).copy()


def effective_field(
    s: SpinField,
    mat: MaterialMap,
    drive: DriveSpec,
    t: float = 0.0,
    demag_mode: str = "thin-film-local",
) -> np.ndarray:
    """Sum of exchange, anisotropy, demag and Zeeman fields, A/m."""
    h = exchange_field(s, mat)
    h += anisotropy_field(s, mat)
    h += demag_field(s, mat, demag_mode)
    h += drive.flux_at(t) / MU0
    return h


def total_energy(
    s: SpinField,
    mat: MaterialMap,
    drive: DriveSpec,
    t: float = 0.0,
    demag_mode: str = "thin-film-local",
) -> float:
    """Total energy in joules of the exchange + anisotropy + demag + Zeeman
    functional whose negative gradient is ``mu0 * Ms * effective_field``.

    The exchange term sums forward-difference pairs (mirror boundaries add
    nothing), which keeps it variationally consistent with the 5-point
    stencil of :func:`exchange_field`.
    """
    _check_shapes(s, mat)
    if demag_mode not in DEMAG_MODES:
        raise ConfigurationError(
            f"unknown demag mode {demag_mode!r}; expected one of {DEMAG_MODES}"
        )
    m = s.m
    vcell = s.cell_volume

    ax_pair = 0.5 * (mat.Aex[1:, :] + mat.Aex[:-1, :])
    dmx = m[1:, :] - m[:-1, :]
    e_ex = np.sum(ax_pair * np.sum(dmx * dmx, axis=-1)) / (s.dx * s.dx)
    ay_pair = 0.5 * (mat.Aex[:, 1:] + mat.Aex[:, :-1])
    dmy = m[:, 1:] - m[:, :-1]
    e_ex += np.sum(ay_pair * np.sum(dmy * dmy, axis=-1)) / (s.dy * s.dy)
    e_ex *= vcell

    proj = np.einsum("ijk,ijk->ij", m, mat.easy_axis)
    e_anis = -np.sum(mat.Ku * proj * proj) * vcell

    b = drive.flux_at(t)
    e_zee = -np.sum(mat.Ms * (m @ b)) * vcell

    e_demag = 0.0
    if demag_mode == "thin-film-local":
        mz = m[:, :, 2]
        e_demag = 0.5 * MU0 * np.sum(mat.Ms * mat.Ms * mz * mz) * vcell

    return float(e_ex + e_anis + e_zee + e_demag)


def kittel_frequency(bias_t: float, Ms: float) -> float:
    """In-plane uniform-mode resonance of a thin film with the local demag
    tensor: f = (gamma/2pi) * sqrt(B * (B + mu0*Ms)), Hz."""
    return GAMMA_LL / (2.0 * math.pi) * math.sqrt(bias_t * (bias_t + MU0 * Ms))
