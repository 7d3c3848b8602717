"""Integer mixing-condition solver and conversion-protocol planning.

A pump/target tone pair converts into a resonance when |a*f1 + b*f2| equals
an ESR frequency for integers a, b.  Solutions are reported in the
normalized form a > 0 (pure pass-through plans use a = 0, b > 0); the sign
of the matched right-hand side is implicit in the absolute-value identity.
Frequencies are treated as integer hertz so identity checks are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ContractViolationError
from .nv import ESRPair

MAX_SUPPORTED_ORDER = 8


@dataclass(frozen=True)
class ProtocolSolution:
    """One conversion plan: integers (a, b), pump f1, target f2 and the ESR
    frequency they hit.  ``f1 = 0`` marks a pass-through plan (a = 0), where
    the identity holds for any pump."""

    a: int
    b: int
    f1: float
    f2: float
    esr: float
    branch: str = ""

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ContractViolationError("a and b cannot both be zero")
        if self.f2 <= 0 or self.esr <= 0:
            raise ContractViolationError("f2 and esr must be > 0")
        if self.a != 0 and self.f1 <= 0:
            raise ContractViolationError("f1 must be > 0 for a != 0")
        err = self.identity_error()
        if err > 1.0:
            raise ContractViolationError(
                f"|{self.a}*f1 + {self.b}*f2| misses the ESR frequency by {err:.3g} Hz"
            )

    @property
    def order(self) -> int:
        return abs(self.a) + abs(self.b)

    def identity_error(self) -> float:
        return abs(abs(self.a * self.f1 + self.b * self.f2) - self.esr)


@dataclass(frozen=True)
class MixLine:
    """A mixing identity drawn in the (f1, f2) plane, clipped to bounds."""

    a: int
    b: int
    esr: float
    branch: str
    p0: tuple[float, float]
    p1: tuple[float, float]

    @property
    def order(self) -> int:
        return abs(self.a) + abs(self.b)


def _check_order(max_order: int) -> None:
    if not 1 <= max_order <= MAX_SUPPORTED_ORDER:
        raise ContractViolationError(
            f"max_order must lie in [1, {MAX_SUPPORTED_ORDER}], got {max_order}"
        )


def _enumerate_one(f2: float, esr: float, max_order: int,
                   lo: float, hi: float, branch: str) -> list[ProtocolSolution]:
    out = []
    for a in range(1, max_order + 1):
        for b in range(-(max_order - a), max_order - a + 1):
            for sign in (1.0, -1.0):
                f1 = (sign * esr - b * f2) / a
                if f1 > 0 and lo <= f1 <= hi:
                    out.append(ProtocolSolution(a=a, b=b, f1=f1, f2=f2,
                                                esr=esr, branch=branch))
    return out


def _dedup_sort(solutions: list[ProtocolSolution]) -> list[ProtocolSolution]:
    seen = set()
    unique = []
    for sol in solutions:
        key = (sol.a, sol.b, round(sol.f1 * 1e6), round(sol.esr * 1e6), sol.branch)
        if key not in seen:
            seen.add(key)
            unique.append(sol)
    unique.sort(key=lambda s: (s.order, s.f1, s.a, s.b, s.branch))
    return unique


def enumerate_protocols(f2: float, esr_set: Sequence[float], max_order: int = 6,
                        f1_band: tuple[float, float] = (1e8, 1.2e10),
                        ) -> list[ProtocolSolution]:
    """All (a, b) plans with |a| >= 1 and |a|+|b| <= max_order whose pump
    frequency falls inside ``f1_band``, sorted by order then f1."""
    _check_order(max_order)
    lo, hi = f1_band
    if not lo < hi:
        raise ContractViolationError("f1_band must satisfy lo < hi")
    if f2 <= 0:
        raise ContractViolationError("f2 must be > 0")
    sols = []
    for esr in esr_set:
        sols.extend(_enumerate_one(f2, float(esr), max_order, lo, hi, ""))
    return _dedup_sort(sols)


def _clip_line(a: int, b: int, c: float,
               bounds: tuple[float, float, float, float],
               ) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Clip a*x + b*y = c to the rectangle (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = bounds
    if a == 0:
        y = c / b
        return ((x0, y), (x1, y)) if y0 <= y <= y1 else None
    if b == 0:
        x = c / a
        return ((x, y0), (x, y1)) if x0 <= x <= x1 else None
    pts = []
    for x in (x0, x1):
        y = (c - a * x) / b
        if y0 <= y <= y1:
            pts.append((x, y))
    for y in (y0, y1):
        x = (c - b * y) / a
        if x0 <= x <= x1:
            pts.append((x, y))
    uniq: list[tuple[float, float]] = []
    for p in pts:
        if all(abs(p[0] - q[0]) > 1e-9 or abs(p[1] - q[1]) > 1e-9 for q in uniq):
            uniq.append(p)
    if len(uniq) < 2:
        return None
    uniq.sort()
    return uniq[0], uniq[-1]


def theoretical_mixing_lines(esr_set: Sequence[float], max_order: int = 6,
                             bounds: tuple[float, float, float, float] = (1e8, 1.2e10, 1e8, 1.2e10),
                             branch_labels: Sequence[str] | None = None,
                             ) -> list[MixLine]:
    """Every mixing identity of order <= max_order as a line segment in the
    (f1, f2) plane, including the pure-harmonic lines (b = 0 and a = 0).

    Pairs are normalized so the leading non-zero coefficient is positive;
    both right-hand-side signs are covered (negative ones simply clip away
    when out of range).
    """
    _check_order(max_order)
    x0, x1, y0, y1 = bounds
    if not (x0 < x1 and y0 < y1):
        raise ContractViolationError("bounds must satisfy lo < hi on both axes")
    labels = list(branch_labels) if branch_labels is not None else ["" for _ in esr_set]
    if len(labels) != len(esr_set):
        raise ContractViolationError("branch_labels must match esr_set")
    lines = []
    seen = set()
    for esr, label in zip(esr_set, labels):
        for a in range(0, max_order + 1):
            for b in range(-max_order + abs(a), max_order - abs(a) + 1):
                if a == 0 and b <= 0:
                    continue
                if a == 0 and b == 0:
                    continue
                for sign in (1.0, -1.0):
                    seg = _clip_line(a, b, sign * esr, bounds)
                    if seg is None:
                        continue
                    key = (a, b, round(sign * esr), label)
                    if key in seen:
                        continue
                    seen.add(key)
                    lines.append(MixLine(a=a, b=b, esr=float(esr), branch=label,
                                         p0=seg[0], p1=seg[1]))
    lines.sort(key=lambda ln: (ln.order, ln.a, ln.b, ln.p0))
    return lines


def plan_up_conversion(f2: float, esr: float, branch: str = "plus") -> ProtocolSolution:
    """Sum-frequency plan (1, 1): pump at f1 = esr - f2."""
    if f2 <= 0 or esr <= 0:
        raise ContractViolationError("f2 and esr must be > 0")
    if f2 >= esr:
        raise ContractViolationError(
            f"f2 = {f2:.6g} Hz is not below the ESR frequency; use down-conversion"
        )
    return ProtocolSolution(a=1, b=1, f1=esr - f2, f2=f2, esr=esr, branch=branch)


def plan_down_conversion(f2: float, esr: float, pump_order: int = 1,
                         branch: str = "plus") -> ProtocolSolution:
    """Difference-frequency plan (k, -1): pump at f1 = (f2 - esr)/k."""
    if f2 <= 0 or esr <= 0:
        raise ContractViolationError("f2 and esr must be > 0")
    if pump_order < 1:
        raise ContractViolationError("pump_order must be >= 1")
    if f2 <= esr:
        raise ContractViolationError(
            f"f2 = {f2:.6g} Hz is not above the ESR frequency; use up-conversion"
        )
    f1 = (f2 - esr) / pump_order
    if f1 <= 0:
        raise ContractViolationError("down-conversion pump frequency is not positive")
    return ProtocolSolution(a=pump_order, b=-1, f1=f1, f2=f2, esr=esr, branch=branch)


def fingerprint(f2: float, esr_pairs: Sequence[ESRPair], max_order: int = 6,
                f1_band: tuple[float, float] = (1e8, 1.2e10),
                ) -> list[ProtocolSolution]:
    """Expected pump-sweep peak set for a target f2: the union of plans over
    every ESR branch of every axis, branch-annotated and deduplicated."""
    _check_order(max_order)
    lo, hi = f1_band
    if not lo < hi:
        raise ContractViolationError("f1_band must satisfy lo < hi")
    sols = []
    for pair in esr_pairs:
        for branch, esr in (("plus", pair.f_plus), ("minus", pair.f_minus)):
            sols.extend(_enumerate_one(f2, esr, max_order, lo, hi, branch))
    # pass-through plans: some multiple of f2 already sits on a branch
    for pair in esr_pairs:
        for branch, esr in (("plus", pair.f_plus), ("minus", pair.f_minus)):
            for b in range(1, max_order + 1):
                if abs(b * f2 - esr) <= 1.0:
                    sols.append(ProtocolSolution(a=0, b=b, f1=0.0, f2=f2,
                                                 esr=esr, branch=branch))
    return _dedup_sort(sols)
