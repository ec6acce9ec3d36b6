"""Joint law of the two envelope amounts and its conditional quantities.

The smaller amount ``X`` has a given prior, the larger is ``2X``, and a fair
coin independent of ``X`` decides which one you hold.  ``A`` is your amount,
``B`` the other one, and ``delta = 1`` when ``A`` is the larger (``A = 2X``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable

from .dist import (
    DiscreteDist,
    Dist,
    DistributionError,
    StepDensityDist,
    as_fraction,
    double,
    expectation,
    mixture,
)

__all__ = [
    "Cell",
    "Classification",
    "ConditionalReport",
    "TepJoint",
    "build",
    "conditional_law_of_A",
    "conditional_report",
    "conditional_table",
    "e_b_given_a",
    "e_b_unconditional",
    "philosopher_decomposition",
    "p_delta_given_a",
]

HALF = Fraction(1, 2)


class Classification(str, enum.Enum):
    INTERIOR = "interior"
    FORCED_SMALLER = "forced-smaller"
    FORCED_LARGER = "forced-larger"


@dataclass(frozen=True)
class Cell:
    """A piece of the range of ``A`` on which ``P(delta=1 | A)`` is constant.

    For atoms ``lo == hi`` is the atom.  For densities the cell is
    ``[lo, hi)`` and ``A`` is uniform on it under either coin outcome.
    ``smaller`` is ``P(A in cell, delta=0)``; ``larger`` is ``P(A in cell, delta=1)``.
    """

    lo: Fraction
    hi: Fraction
    smaller: Fraction
    larger: Fraction

    @property
    def is_atom(self) -> bool:
        return self.lo == self.hi

    @property
    def mass(self) -> Fraction:
        return self.smaller + self.larger

    @property
    def p_delta1(self) -> Fraction:
        return self.larger / self.mass

    @property
    def mean(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def split(self, t: Fraction) -> tuple[Cell | None, Cell | None]:
        """Parts of the cell below ``t`` and at-or-above ``t``."""
        if self.is_atom:
            return (self, None) if self.lo < t else (None, self)
        if t <= self.lo:
            return None, self
        if t >= self.hi:
            return self, None
        f = (t - self.lo) / (self.hi - self.lo)
        below = Cell(self.lo, t, self.smaller * f, self.larger * f)
        above = Cell(t, self.hi, self.smaller * (1 - f), self.larger * (1 - f))
        return below, above


@dataclass(frozen=True)
class TepJoint:
    prior: Dist

    @property
    def kind(self) -> str:
        return "discrete" if isinstance(self.prior, DiscreteDist) else "step"

    @cached_property
    def doubled(self) -> Dist:
        return double(self.prior)

    @cached_property
    def law_of_A(self) -> Dist:
        return mixture(self.prior, HALF, self.doubled, HALF)

    @cached_property
    def cells(self) -> tuple[Cell, ...]:
        if isinstance(self.prior, DiscreteDist):
            return tuple(
                Cell(a, a, self.prior.mass_at(a) / 2, self.doubled.mass_at(a) / 2)
                for a in self.law_of_A.values
            )
        prior, doubled = self.prior, self.doubled
        pts = sorted(set(prior.breakpoints) | set(doubled.breakpoints))
        out = []
        for lo, hi in zip(pts, pts[1:]):
            f0, f1 = prior.density_on(lo, hi), doubled.density_on(lo, hi)
            if f0 or f1:
                out.append(Cell(lo, hi, f0 * (hi - lo) / 2, f1 * (hi - lo) / 2))
        return tuple(out)

    def _weights(self, a: Fraction) -> tuple[Fraction, Fraction]:
        """Unnormalized ``(delta=0, delta=1)`` weights of ``A`` at ``a``."""
        if isinstance(self.prior, DiscreteDist):
            w0, w1 = self.prior.mass_at(a), self.prior.mass_at(a / 2)
        else:
            w0, w1 = self.prior.density_at(a), self.prior.density_at(a / 2) / 2
            if not (w0 or w1):
                # top of the support of A: nothing to the right, use left limits
                w0 = self.prior.density_at(a, "left")
                w1 = self.prior.density_at(a / 2, "left") / 2
        if not (w0 or w1):
            raise DistributionError(f"a = {a} is outside the support of A")
        return w0, w1


def build(prior: Dist) -> TepJoint:
    if not isinstance(prior, (DiscreteDist, StepDensityDist)):
        raise TypeError(f"expected a distribution, got {type(prior).__name__}")
    if isinstance(prior, StepDensityDist) and prior.support_lo <= 0:
        raise DistributionError("the prior of the smaller amount must stay away from 0")
    return TepJoint(prior)


def p_delta_given_a(j: TepJoint, a: Any) -> Fraction:
    """``P(delta = 1 | A = a)``: the chance that the amount in hand is the larger."""
    w0, w1 = j._weights(as_fraction(a))
    return w1 / (w0 + w1)


def e_b_given_a(j: TepJoint, a: Any) -> Fraction:
    a = as_fraction(a)
    p = p_delta_given_a(j, a)
    return 2 * a * (1 - p) + a / 2 * p


def e_b_unconditional(j: TepJoint) -> Fraction:
    return Fraction(3, 2) * expectation(j.prior)


def philosopher_decomposition(j: TepJoint) -> tuple[Fraction, Fraction, Fraction]:
    """``(E(B | B larger), E(B | B smaller), E(B))`` = ``(2E(X), E(X), 3E(X)/2)``."""
    ex = expectation(j.prior)
    larger, smaller = 2 * ex, ex
    return larger, smaller, HALF * larger + HALF * smaller


def conditional_law_of_A(j: TepJoint, which: str) -> Dist:
    """Law of ``A`` given ``delta=0`` ("smaller"), unconditionally, or given ``delta=1`` ("larger")."""
    if which in ("smaller", "delta=0"):
        return j.prior
    if which in ("unconditional", "all"):
        return j.law_of_A
    if which in ("larger", "delta=1"):
        return j.doubled
    raise ValueError(f"unknown conditioning {which!r}")


@dataclass(frozen=True)
class ConditionalReport:
    a: Fraction
    p_delta1: Fraction
    e_b_given_a: Fraction
    classification: Classification

    @property
    def p_a_less_b(self) -> Fraction:
        return 1 - self.p_delta1


def conditional_report(j: TepJoint, a: Any) -> ConditionalReport:
    a = as_fraction(a)
    p = p_delta_given_a(j, a)
    if p == 0:
        cls = Classification.FORCED_SMALLER
    elif p == 1:
        cls = Classification.FORCED_LARGER
    else:
        cls = Classification.INTERIOR
    return ConditionalReport(a, p, e_b_given_a(j, a), cls)


def conditional_table(j: TepJoint, extra_points: Iterable[Any] = ()) -> list[ConditionalReport]:
    """One row per atom of ``A``; for densities, each cell's left end and midpoint."""
    pts = {as_fraction(a) for a in extra_points}
    for c in j.cells:
        pts.add(c.lo)
        if not c.is_atom:
            pts.add(c.mean)
    return [conditional_report(j, a) for a in sorted(pts)]
