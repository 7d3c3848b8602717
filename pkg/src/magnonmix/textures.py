"""Stripe-domain construction and domain-wall measurement.

Textures are built as alternating +/-x stripes separated by equally spaced
in-plane walls.  Each wall is seeded with a smooth tanh rotation through the
film plane (successive walls continue the rotation sense), because a
cell-sharp +x|-x step is a torque-free saddle of the discrete equations that
relaxation can never leave.  Far from the seeded cores the stripes are
exactly +/-x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .core import MaterialMap, SpinField
from .errors import ConfigurationError, ContractViolationError

TEXTURE_KINDS = ("uniform", "one-step", "two-step", "multi-step")
STABILIZATIONS = ("anisotropy-stripes", "init-only")

#: cells on each side of a crossing used for the tanh width fit
_FIT_HALF_SPAN = 10


@dataclass(frozen=True)
class TextureSpec:
    """Requested domain configuration.

    ``n_walls`` is only free for ``multi-step``; ``one-step`` and
    ``two-step`` fix it to 1 and 2.  Walls are normal to x.

    ``anisotropy-stripes`` stabilization keeps the easy axis along x
    everywhere but carves a shallow anisotropy notch (magnitude reduced by
    ``ku_contrast``) one wall width wide at each stripe boundary.  A wall
    parks in its notch, which gives it a restoring force; without pinning a
    free wall is swept out of the grid by any longitudinal field component.
    ``init-only`` leaves the material untouched.
    """

    kind: str
    n_walls: int = 1
    orientation: str = "x"
    stabilization: str = "anisotropy-stripes"
    ku_contrast: float = 0.3

    def __post_init__(self):
        if self.kind not in TEXTURE_KINDS:
            raise ConfigurationError(
                f"unknown texture kind {self.kind!r}; expected one of {TEXTURE_KINDS}"
            )
        if self.orientation != "x":
            raise ConfigurationError("only x-normal walls are supported")
        if self.stabilization not in STABILIZATIONS:
            raise ConfigurationError(
                f"unknown stabilization {self.stabilization!r}; "
                f"expected one of {STABILIZATIONS}"
            )
        if self.kind == "multi-step" and self.n_walls < 1:
            raise ConfigurationError("multi-step needs n_walls >= 1")
        if not 0.0 <= self.ku_contrast < 1.0:
            raise ConfigurationError("ku_contrast must lie in [0, 1)")

    @property
    def wall_count(self) -> int:
        return {"uniform": 0, "one-step": 1, "two-step": 2,
                "multi-step": self.n_walls}[self.kind]


@dataclass(frozen=True)
class WallMetrics:
    wall_count: int
    total_length: float  # m
    mean_width: float    # m


def build_texture(spec: TextureSpec, template: SpinField,
                  mat: MaterialMap) -> tuple[SpinField, MaterialMap]:
    """Initial (pre-relaxation) stripe state on the template's grid.

    With ``anisotropy-stripes`` stabilization the returned material has its
    easy axis along x everywhere plus the pinning notches described on
    :class:`TextureSpec`, which make the relaxed walls metastable.
    ``init-only`` leaves the material untouched.
    """
    if mat.shape != (template.nx, template.ny):
        raise ContractViolationError("material grid does not match template")
    nx, ny = template.nx, template.ny
    n_walls = spec.wall_count

    out_mat = mat.copy()
    if spec.stabilization == "anisotropy-stripes":
        out_mat.easy_axis[:] = np.array([1.0, 0.0, 0.0])

    if n_walls == 0:
        return template.with_m(np.tile([1.0, 0.0, 0.0], (nx, ny, 1))), out_mat

    centers = [(k + 1) * nx / (n_walls + 1) for k in range(n_walls)]
    gaps = [centers[0]] + [b - a for a, b in zip(centers, centers[1:])] + [nx - centers[-1]]
    if min(gaps) < 4.0:
        raise ConfigurationError(
            f"stripes too narrow: {n_walls} walls on {nx} columns leaves a "
            f"{min(gaps):.1f}-cell stripe (need >= 4)"
        )

    ku = float(np.max(mat.Ku))
    if ku > 0:
        wall_cells = math.sqrt(float(np.min(mat.Aex)) / ku) / template.dx
    else:
        wall_cells = 4.0
    xc = np.arange(nx) + 0.5

    if spec.stabilization == "anisotropy-stripes" and spec.ku_contrast > 0.0:
        half = max(2.0, wall_cells)
        notch = np.zeros(nx, dtype=bool)
        for c in centers:
            notch |= np.abs(xc - c) <= half
        out_mat.Ku[notch, :] *= 1.0 - spec.ku_contrast

    seed_cells = min(max(wall_cells, 0.75), min(gaps) / 4.0)
    theta = np.zeros(nx)
    for c in centers:
        theta += 0.5 * math.pi * (1.0 + np.tanh((xc - c) / seed_cells))
    m = np.zeros((nx, ny, 3))
    m[:, :, 0] = np.cos(theta)[:, None]
    m[:, :, 1] = np.sin(theta)[:, None]
    return template.with_m(m), out_mat


def _row_crossings(vals: np.ndarray, threshold: float) -> list[int]:
    """Column indices i of confirmed sign changes between columns i and i+1.

    A crossing counts only when the profile actually reaches +/-threshold on
    both sides, which rejects small-amplitude ripple around zero.
    """
    crossings = []
    state = 0
    prev_i = 0
    for i, v in enumerate(vals):
        if v > threshold:
            s_new = 1
        elif v < -threshold:
            s_new = -1
        else:
            continue
        if state != 0 and s_new != state:
            site = None
            for ii in range(prev_i, i):
                a, b = vals[ii], vals[ii + 1]
                if a * b <= 0.0 and (a != 0.0 or b != 0.0):
                    site = ii
                    break
            crossings.append(site if site is not None else (prev_i + i) // 2)
        state = s_new
        prev_i = i
    return crossings


def _group_walls(sites: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Connect crossing sites (col, row) into walls: sites in adjacent rows
    within one column, or adjacent columns in one row, belong together."""
    parent = list(range(len(sites)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    index = {site: k for k, site in enumerate(sites)}
    for k, (i, j) in enumerate(sites):
        for di, dj in ((-1, 1), (0, 1), (1, 1), (1, 0)):
            other = index.get((i + di, j + dj))
            if other is not None:
                union(k, other)

    groups: dict[int, list[tuple[int, int]]] = {}
    for k, site in enumerate(sites):
        groups.setdefault(find(k), []).append(site)
    return list(groups.values())


def _fit_width(xs: np.ndarray, ys: np.ndarray, x_cross: float,
               width0: float) -> float | None:
    sign = 1.0 if ys[-1] >= ys[0] else -1.0

    def profile(x, x0, width):
        return sign * np.tanh((x - x0) / width)

    try:
        popt, _ = curve_fit(profile, xs, ys, p0=(x_cross, width0), maxfev=2000)
    except (RuntimeError, ValueError):
        return None
    width = abs(float(popt[1]))
    return width if np.isfinite(width) else None


def wall_metrics(s: SpinField, threshold: float = 0.5) -> WallMetrics:
    """Count walls, total up their cell-edge length and fit their width.

    Walls are connected interfaces of m_x zero crossings.  Length counts one
    dy per crossing site plus dx per column jog between rows.  Width is the
    tanh profile scale fitted over +/-10 cells around each crossing (clipped
    at neighbouring walls) and averaged along each wall, then over walls.
    """
    mx = s.m[:, :, 0]
    per_row: list[list[int]] = [
        _row_crossings(mx[:, j], threshold) for j in range(s.ny)
    ]
    sites = [(i, j) for j, cols in enumerate(per_row) for i in cols]
    if not sites:
        return WallMetrics(0, 0.0, 0.0)

    walls = _group_walls(sites)

    total_length = 0.0
    for wall in walls:
        total_length += len(wall) * s.dy
        by_row: dict[int, list[int]] = {}
        for i, j in wall:
            by_row.setdefault(j, []).append(i)
        rows = sorted(by_row)
        for j0, j1 in zip(rows, rows[1:]):
            if j1 == j0 + 1:
                c0 = float(np.mean(by_row[j0]))
                c1 = float(np.mean(by_row[j1]))
                total_length += abs(c1 - c0) * s.dx

    widths = []
    for wall in walls:
        wall_widths = []
        for i, j in wall:
            neighbours = sorted(per_row[j])
            pos = neighbours.index(i) if i in neighbours else None
            lo = 0
            hi = s.nx
            if pos is not None and pos > 0:
                lo = (neighbours[pos - 1] + i) // 2 + 1
            if pos is not None and pos < len(neighbours) - 1:
                hi = (i + neighbours[pos + 1]) // 2 + 1
            lo = max(lo, i - _FIT_HALF_SPAN + 1)
            hi = min(hi, i + _FIT_HALF_SPAN + 1)
            if hi - lo < 4:
                continue
            xs = (np.arange(lo, hi) + 0.5) * s.dx
            ys = mx[lo:hi, j]
            w = _fit_width(xs, ys, (i + 1.0) * s.dx, 2.0 * s.dx)
            if w is not None:
                wall_widths.append(w)
        if wall_widths:
            widths.append(float(np.mean(wall_widths)))

    mean_width = float(np.mean(widths)) if widths else 0.0
    return WallMetrics(len(walls), float(total_length), mean_width)
