"""Order properties of ``A`` versus the event that ``A`` is the larger amount.

Every check here is a certificate for a theorem: a failure means the
implementation is broken, so violations raise :class:`TheoremViolation`
instead of returning a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from .dist import DiscreteDist, as_fraction, tv_distance
from .model import HALF, Cell, TepJoint

__all__ = [
    "MonotoneProbe",
    "OrderingCertificate",
    "TheoremViolation",
    "certify",
    "check_average_ordering",
    "check_nonindependence",
    "check_orthant_dependence",
    "check_stochastic_order",
    "monotone_gap",
    "thresholds",
]


class TheoremViolation(AssertionError):
    """A proven inequality failed on a concrete joint law."""


@dataclass(frozen=True)
class OrderingCertificate:
    stochastic_order_ok: bool | None = None
    strict_witness_a: Fraction | None = None
    orthant_ok: bool | None = None
    orthant_strict_witness: tuple[Fraction, str] | None = None
    avg_ordering_violations: list[Fraction] = field(default_factory=list)


@dataclass(frozen=True)
class MonotoneProbe:
    """A strictly increasing map ``g`` applied to the amount in hand.

    ``identity`` and ``clamp`` (``v / (v + c)``, bounded in ``[0, 1)``) are
    evaluated exactly; ``arctan`` is the float surrogate.
    """

    kind: str = "identity"
    c: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.kind not in ("identity", "clamp", "arctan"):
            raise ValueError(f"unknown probe kind {self.kind!r}")
        object.__setattr__(self, "c", as_fraction(self.c))
        if self.c <= 0:
            raise ValueError("clamp constant must be positive")

    @property
    def exact(self) -> bool:
        return self.kind != "arctan"

    @property
    def description(self) -> str:
        return {
            "identity": "g(v) = v",
            "clamp": f"g(v) = v / (v + {self.c})",
            "arctan": "g(v) = arctan(v)",
        }[self.kind]

    def __call__(self, v: Fraction) -> Fraction | float:
        if self.kind == "identity":
            return v
        if self.kind == "clamp":
            return v / (v + self.c)
        return math.atan(v)

    def cell_mean(self, lo: Fraction, hi: Fraction) -> Fraction | float:
        """Average of ``g`` over ``[lo, hi)``."""
        if self.kind == "identity":
            return (lo + hi) / 2
        if self.kind == "clamp":
            c = float(self.c)
            lo_f, hi_f = float(lo), float(hi)
            return 1 - c * math.log((hi_f + c) / (lo_f + c)) / (hi_f - lo_f)

        def anti(v: float) -> float:
            return v * math.atan(v) - 0.5 * math.log1p(v * v)

        return (anti(float(hi)) - anti(float(lo))) / float(hi - lo)


def thresholds(j: TepJoint) -> list[Fraction]:
    """Support points of ``A`` (atoms) or the cell breakpoints (densities)."""
    pts = set()
    for c in j.cells:
        pts.add(c.lo)
        pts.add(c.hi)
    return sorted(pts)


def _above(cells: tuple[Cell, ...], a: Fraction, inclusive: bool) -> tuple[Fraction, Fraction]:
    """``(P(A > a, delta=0), P(A > a, delta=1))``, or ``>=`` when inclusive.

    Only valid for ``a`` on a cell boundary.
    """
    s0 = s1 = Fraction(0)
    for c in cells:
        if c.is_atom:
            hit = c.lo >= a if inclusive else c.lo > a
        else:
            hit = c.lo >= a
        if hit:
            s0 += c.smaller
            s1 += c.larger
    return s0, s1


def check_nonindependence(j: TepJoint) -> Fraction:
    """TV distance between the laws of ``A`` given either coin outcome; always > 0."""
    gap = tv_distance(j.prior, j.doubled)
    if gap <= 0:
        raise TheoremViolation("A is independent of delta")
    return gap


def check_stochastic_order(j: TepJoint) -> OrderingCertificate:
    witness = None
    for a in thresholds(j):
        s0, s1 = _above(j.cells, a, inclusive=False)
        lo, mid, hi = 2 * s0, s0 + s1, 2 * s1
        if not lo <= mid <= hi:
            raise TheoremViolation(f"stochastic order fails at a = {a}")
        if witness is None and lo < mid < hi:
            witness = a
    if witness is None:
        raise TheoremViolation("stochastic order is never strict")
    return OrderingCertificate(stochastic_order_ok=True, strict_witness_a=witness)


def check_orthant_dependence(j: TepJoint) -> OrderingCertificate:
    """``P(A >= a, delta=1) >= P(A >= a) P(delta=1)`` at every threshold."""
    witness = None
    for a in thresholds(j):
        s0, s1 = _above(j.cells, a, inclusive=True)
        joint, product = s1, (s0 + s1) * HALF
        if joint < product:
            raise TheoremViolation(f"orthant dependence fails at a = {a}")
        if witness is None and joint > product:
            witness = (a, "A>=a,delta=1")
    if witness is None:
        raise TheoremViolation("orthant dependence is never strict")
    return OrderingCertificate(orthant_ok=True, orthant_strict_witness=witness)


def _split_at(j: TepJoint, a0: Fraction) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    below0 = below = above0 = above = Fraction(0)
    for c in j.cells:
        lo, hi = c.split(a0)
        if lo is not None:
            below0 += lo.smaller
            below += lo.mass
        if hi is not None:
            above0 += hi.smaller
            above += hi.mass
    return below0, below, above0, above


def check_average_ordering(j: TepJoint, a0: Any) -> tuple[Fraction, Fraction]:
    """Averages of ``P(A < B | A)`` over ``A < a0`` and over ``A >= a0``.

    The first is at least 1/2, the second at most 1/2.
    """
    a0 = as_fraction(a0)
    below0, below, above0, above = _split_at(j, a0)
    if below == 0 or above == 0:
        raise ValueError(f"a0 = {a0} leaves an empty conditioning event")
    left, right = below0 / below, above0 / above
    if not left >= HALF >= right:
        raise TheoremViolation(f"average ordering fails at a0 = {a0}")
    return left, right


def monotone_gap(
    j: TepJoint, g: MonotoneProbe = MonotoneProbe()
) -> tuple[Fraction | float, Fraction | float, Fraction | float]:
    """``(E g(A) | A smaller, E g(A), E g(A) | A larger)``, strictly increasing."""
    if isinstance(j.prior, DiscreteDist):
        low = sum(m * g(v) for v, m in j.prior.atoms)
        high = sum(m * g(2 * v) for v, m in j.prior.atoms)
    else:
        low = sum(d * (hi - lo) * g.cell_mean(lo, hi) for lo, hi, d in j.prior.pieces if d)
        high = sum(d * (hi - lo) * g.cell_mean(2 * lo, 2 * hi) for lo, hi, d in j.prior.pieces if d)
    mid = (low + high) / 2
    if not low < mid < high:
        raise TheoremViolation(f"monotone gap not strict for {g.description}")
    return low, mid, high


def certify(j: TepJoint) -> OrderingCertificate:
    """Run every order check; average ordering is tested at each threshold."""
    stoch = check_stochastic_order(j)
    orth = check_orthant_dependence(j)
    violations = []
    for a0 in thresholds(j):
        try:
            check_average_ordering(j, a0)
        except ValueError:
            continue
        except TheoremViolation:
            violations.append(a0)
    if violations:
        raise TheoremViolation(f"average ordering fails at {violations}")
    return replace(
        stoch,
        orthant_ok=orth.orthant_ok,
        orthant_strict_witness=orth.orthant_strict_witness,
        avg_ordering_violations=violations,
    )
