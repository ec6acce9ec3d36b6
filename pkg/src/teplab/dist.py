"""Exact one-dimensional distributions on the positive half line.

Two backends: finitely many atoms (:class:`DiscreteDist`) and piecewise
constant densities (:class:`StepDensityDist`).  Every probability, value and
density is a :class:`fractions.Fraction`; nothing in here touches floats
except :func:`fmt_decimal`.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence, Union

__all__ = [
    "DiscreteDist",
    "DistributionError",
    "Log2Decomposition",
    "StepDensityDist",
    "as_fraction",
    "dist_from_json",
    "dist_to_json",
    "double",
    "expectation",
    "floor_log2",
    "fmt_decimal",
    "fmt_exact",
    "log2_decompose",
    "mass_between",
    "mixture",
    "normalize",
    "octave_masses",
    "prob_event",
    "quantile",
    "survival",
    "tv_distance",
]


class DistributionError(ValueError):
    """Invalid distribution data or an operation applied to the wrong backend."""


def as_fraction(x: Any) -> Fraction:
    """Coerce ints, Fractions and numeric strings ("3/5", "0.25") exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise DistributionError(f"not an exact number: {x!r}") from exc
    if isinstance(x, float):
        raise TypeError(f"float {x!r} is not exact; pass a string or Fraction")
    return Fraction(x)


def fmt_exact(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_decimal(x: Fraction | int | float, digits: int = 15) -> str:
    """Round to `digits` significant digits.  Fractions are rounded exactly."""
    if isinstance(x, float):
        return format(x, f".{digits}g")
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d, "g") if d != 0 else "0"


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteDist:
    """Finitely many atoms ``(value, mass)`` with strictly increasing positive values."""

    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        atoms = tuple((as_fraction(v), as_fraction(m)) for v, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise DistributionError("a distribution needs at least one atom")
        prev = None
        for v, m in atoms:
            if v <= 0:
                raise DistributionError(f"atom value {v} is not positive")
            if m <= 0:
                raise DistributionError(f"atom mass {m} at {v} is not positive")
            if prev is not None and v <= prev:
                raise DistributionError("atom values must be strictly increasing")
            prev = v
        total = sum(m for _, m in atoms)
        if total != 1:
            raise DistributionError(f"atom masses sum to {total}, not 1")

    @classmethod
    def point(cls, x: Any) -> DiscreteDist:
        return cls(((as_fraction(x), Fraction(1)),))

    @classmethod
    def uniform(cls, values: Iterable[Any]) -> DiscreteDist:
        vals = sorted({as_fraction(v) for v in values})
        w = Fraction(1, len(vals))
        return cls(tuple((v, w) for v in vals))

    @property
    def values(self) -> list[Fraction]:
        return [v for v, _ in self.atoms]

    @property
    def masses(self) -> list[Fraction]:
        return [m for _, m in self.atoms]

    @cached_property
    def _lookup(self) -> dict[Fraction, Fraction]:
        return dict(self.atoms)

    def mass_at(self, v: Any) -> Fraction:
        return self._lookup.get(as_fraction(v), Fraction(0))

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class StepDensityDist:
    """Piecewise constant density on sorted, non-overlapping ``[lo, hi)`` pieces.

    Pieces may touch.  ``lo`` may be 0 (useful for guessing probes); priors
    for the envelope model must stay away from 0, which ``build`` checks.
    """

    pieces: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        pieces = tuple(
            (as_fraction(lo), as_fraction(hi), as_fraction(d)) for lo, hi, d in self.pieces
        )
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise DistributionError("a density needs at least one piece")
        prev_hi = None
        for lo, hi, d in pieces:
            if lo < 0 or hi <= lo:
                raise DistributionError(f"bad interval [{lo}, {hi})")
            if d < 0:
                raise DistributionError(f"negative density {d} on [{lo}, {hi})")
            if prev_hi is not None and lo < prev_hi:
                raise DistributionError("pieces overlap or are unsorted")
            prev_hi = hi
        total = sum(d * (hi - lo) for lo, hi, d in pieces)
        if total != 1:
            raise DistributionError(f"density integrates to {total}, not 1")

    @classmethod
    def uniform(cls, lo: Any, hi: Any) -> StepDensityDist:
        lo, hi = as_fraction(lo), as_fraction(hi)
        if hi <= lo:
            raise DistributionError(f"empty interval [{lo}, {hi})")
        return cls(((lo, hi, 1 / (hi - lo)),))

    @cached_property
    def _los(self) -> list[Fraction]:
        return [lo for lo, _, _ in self.pieces]

    @property
    def breakpoints(self) -> list[Fraction]:
        pts = set()
        for lo, hi, _ in self.pieces:
            pts.add(lo)
            pts.add(hi)
        return sorted(pts)

    @property
    def support_lo(self) -> Fraction:
        return self.pieces[0][0]

    @property
    def support_hi(self) -> Fraction:
        return self.pieces[-1][1]

    def density_at(self, a: Any, side: str = "right") -> Fraction:
        """Density at ``a`` taken from the piece to its right (``lo <= a < hi``)
        or, with ``side="left"``, from the piece to its left (``lo < a <= hi``)."""
        a = as_fraction(a)
        if side == "right":
            i = bisect.bisect_right(self._los, a) - 1
            if i >= 0 and a < self.pieces[i][1]:
                return self.pieces[i][2]
        elif side == "left":
            i = bisect.bisect_left(self._los, a) - 1
            if i >= 0 and a <= self.pieces[i][1]:
                return self.pieces[i][2]
        else:
            raise ValueError(f"side must be 'right' or 'left', got {side!r}")
        return Fraction(0)

    def density_on(self, lo: Fraction, hi: Fraction) -> Fraction:
        """Density on a cell ``[lo, hi)`` that lies inside one piece or a gap."""
        i = bisect.bisect_right(self._los, lo) - 1
        if i >= 0:
            plo, phi, d = self.pieces[i]
            if hi <= phi:
                return d
        return Fraction(0)


Dist = Union[DiscreteDist, StepDensityDist]


def _same_kind(d1: Dist, d2: Dist) -> None:
    if type(d1) is not type(d2):
        raise DistributionError(
            f"cannot combine {type(d1).__name__} with {type(d2).__name__}"
        )


def _merged_cells(*dists: StepDensityDist) -> list[tuple[Fraction, Fraction, list[Fraction]]]:
    """Cut the line at every breakpoint of every input; densities per cell."""
    pts = sorted({p for d in dists for p in d.breakpoints})
    cells = []
    for lo, hi in zip(pts, pts[1:]):
        cells.append((lo, hi, [d.density_on(lo, hi) for d in dists]))
    return cells


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def normalize(raw: Dist | Sequence[Sequence[Any]]) -> Dist:
    """Turn raw weights into a distribution with total mass exactly 1.

    ``raw`` is either an existing distribution (returned unchanged), a list of
    ``(value, weight)`` pairs, or a list of ``(lo, hi, density_weight)`` triples.
    Repeated atom values are merged; zero weights are dropped.
    """
    if isinstance(raw, (DiscreteDist, StepDensityDist)):
        return raw
    rows = [tuple(r) for r in raw]
    if not rows:
        raise DistributionError("nothing to normalize")
    width = {len(r) for r in rows}
    if width == {2}:
        merged: dict[Fraction, Fraction] = {}
        for v, w in rows:
            v, w = as_fraction(v), as_fraction(w)
            if v <= 0:
                raise DistributionError(f"atom value {v} is not positive")
            if w < 0:
                raise DistributionError(f"negative weight {w} at {v}")
            merged[v] = merged.get(v, Fraction(0)) + w
        total = sum(merged.values())
        if total <= 0:
            raise DistributionError("total weight is zero")
        return DiscreteDist(tuple((v, w / total) for v, w in sorted(merged.items()) if w))
    if width == {3}:
        pieces = []
        for lo, hi, w in rows:
            lo, hi, w = as_fraction(lo), as_fraction(hi), as_fraction(w)
            if lo < 0 or hi <= lo:
                raise DistributionError(f"bad interval [{lo}, {hi})")
            if w < 0:
                raise DistributionError(f"negative density weight on [{lo}, {hi})")
            if w:
                pieces.append((lo, hi, w))
        pieces.sort()
        for (_, h0, _), (l1, _, _) in zip(pieces, pieces[1:]):
            if l1 < h0:
                raise DistributionError("pieces overlap")
        total = sum(w * (hi - lo) for lo, hi, w in pieces)
        if total <= 0:
            raise DistributionError("total weight is zero")
        return StepDensityDist(tuple((lo, hi, w / total) for lo, hi, w in pieces))
    raise DistributionError("rows must all be (value, weight) or all (lo, hi, density)")


def double(d: Dist) -> Dist:
    """Law of ``2X`` given the law of ``X``."""
    if isinstance(d, DiscreteDist):
        return DiscreteDist(tuple((2 * v, m) for v, m in d.atoms))
    return StepDensityDist(tuple((2 * lo, 2 * hi, dens / 2) for lo, hi, dens in d.pieces))


def tv_distance(d1: Dist, d2: Dist) -> Fraction:
    """Total variation distance, half the L1 distance between the two laws."""
    _same_kind(d1, d2)
    if isinstance(d1, DiscreteDist):
        support = set(d1.values) | set(d2.values)
        return sum((abs(d1.mass_at(v) - d2.mass_at(v)) for v in support), Fraction(0)) / 2
    total = Fraction(0)
    for lo, hi, (f, g) in _merged_cells(d1, d2):
        total += abs(f - g) * (hi - lo)
    return total / 2


def expectation(d: Dist) -> Fraction:
    if isinstance(d, DiscreteDist):
        return sum(v * m for v, m in d.atoms)
    return sum(dens * (hi * hi - lo * lo) / 2 for lo, hi, dens in d.pieces)


def mass_between(d: Dist, lo: Any = None, hi: Any = None) -> Fraction:
    """``P(lo <= X < hi)``; ``None`` means unbounded on that side."""
    lo = None if lo is None else as_fraction(lo)
    hi = None if hi is None else as_fraction(hi)
    if isinstance(d, DiscreteDist):
        return sum(
            (m for v, m in d.atoms if (lo is None or v >= lo) and (hi is None or v < hi)),
            Fraction(0),
        )
    total = Fraction(0)
    for plo, phi, dens in d.pieces:
        a = plo if lo is None else max(plo, lo)
        b = phi if hi is None else min(phi, hi)
        if b > a:
            total += dens * (b - a)
    return total


def survival(d: Dist, a: Any) -> Fraction:
    """``P(X > a)``."""
    a = as_fraction(a)
    if isinstance(d, DiscreteDist):
        return sum((m for v, m in d.atoms if v > a), Fraction(0))
    return mass_between(d, a, None)


def prob_event(d: Dist, intervals: Iterable[tuple[Any, Any]]) -> Fraction:
    """Probability of a union of disjoint half-open intervals ``[lo, hi)``."""
    ivs = []
    for lo, hi in intervals:
        lo = None if lo is None else as_fraction(lo)
        hi = None if hi is None else as_fraction(hi)
        if lo is not None and hi is not None and hi < lo:
            raise DistributionError(f"reversed interval [{lo}, {hi})")
        ivs.append((lo, hi))
    key = lambda iv: (iv[0] is not None, iv[0] if iv[0] is not None else 0)  # noqa: E731
    ivs.sort(key=key)
    for (_, h0), (l1, _) in zip(ivs, ivs[1:]):
        if h0 is None or l1 is None or l1 < h0:
            raise DistributionError("intervals overlap")
    return sum((mass_between(d, lo, hi) for lo, hi in ivs), Fraction(0))


def quantile(d: Dist, alpha: Any) -> Fraction:
    """Upper alpha-quantile: ``P(X >= z) >= alpha`` and ``P(X > z) < alpha``.

    For densities the two conditions cannot both hold, so the point with
    ``P(X > z) = alpha`` on the piece holding that mass level is returned.
    """
    alpha = as_fraction(alpha)
    if not 0 < alpha < 1:
        raise DistributionError(f"alpha must lie in (0, 1), got {alpha}")
    above = Fraction(0)
    if isinstance(d, DiscreteDist):
        for v, m in reversed(d.atoms):
            above += m
            if above >= alpha:
                return v
        return d.atoms[0][0]
    for lo, hi, dens in reversed(d.pieces):
        m = dens * (hi - lo)
        if m and above + m >= alpha:
            return hi - (alpha - above) / dens
        above += m
    return d.support_lo


def mixture(d1: Dist, w1: Any, d2: Dist, w2: Any) -> Dist:
    _same_kind(d1, d2)
    w1, w2 = as_fraction(w1), as_fraction(w2)
    if w1 < 0 or w2 < 0 or w1 + w2 != 1:
        raise DistributionError(f"mixture weights {w1}, {w2} must be >= 0 and sum to 1")
    if w2 == 0:
        return d1
    if w1 == 0:
        return d2
    if isinstance(d1, DiscreteDist):
        merged: dict[Fraction, Fraction] = {}
        for d, w in ((d1, w1), (d2, w2)):
            for v, m in d.atoms:
                merged[v] = merged.get(v, Fraction(0)) + w * m
        return DiscreteDist(tuple(sorted(merged.items())))
    pieces = []
    for lo, hi, (f, g) in _merged_cells(d1, d2):
        dens = w1 * f + w2 * g
        if dens:
            pieces.append((lo, hi, dens))
    return StepDensityDist(tuple(pieces))


# ---------------------------------------------------------------------------
# Base-2 logarithmic structure
# ---------------------------------------------------------------------------


def floor_log2(v: Any) -> int:
    """Exact ``floor(log2(v))`` for a positive rational."""
    v = as_fraction(v)
    if v <= 0:
        raise DistributionError(f"log2 of non-positive value {v}")
    k = v.numerator.bit_length() - v.denominator.bit_length()
    if Fraction(2) ** k > v:
        k -= 1
    elif Fraction(2) ** (k + 1) <= v:
        k += 1
    return k


def octave_masses(d: Dist) -> dict[int, Fraction]:
    """``P(floor(log2 X) = k)`` for every occupied octave ``[2^k, 2^(k+1))``."""
    out: dict[int, Fraction] = {}
    if isinstance(d, DiscreteDist):
        for v, m in d.atoms:
            k = floor_log2(v)
            out[k] = out.get(k, Fraction(0)) + m
        return dict(sorted(out.items()))
    for lo, hi, dens in d.pieces:
        if not dens:
            continue
        if lo <= 0:
            raise DistributionError("octaves are undefined for support touching 0")
        k = floor_log2(lo)
        a = lo
        while a < hi:
            b = min(hi, Fraction(2) ** (k + 1))
            out[k] = out.get(k, Fraction(0)) + dens * (b - a)
            a, k = b, k + 1
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class Log2Decomposition:
    """Joint law of the integer and fractional parts of ``log2 X``.

    Each row is ``(k, profile, total)``: ``total = P(floor(log2 X) = k)`` and
    ``profile`` is the conditional law of the within-octave ratio
    ``X / 2^k`` in ``[1, 2)``.  The fractional part of ``log2 X`` is
    ``log2`` of that ratio, so ratio 1 means fractional part 0.
    """

    table: tuple[tuple[int, DiscreteDist, Fraction], ...]

    def integer_marginal(self) -> dict[int, Fraction]:
        return {k: total for k, _, total in self.table}

    def joint(self) -> dict[tuple[int, Fraction], Fraction]:
        return {
            (k, r): total * m for k, prof, total in self.table for r, m in prof.atoms
        }

    def fractional_marginal(self) -> dict[Fraction, Fraction]:
        out: dict[Fraction, Fraction] = {}
        for (_, r), m in self.joint().items():
            out[r] = out.get(r, Fraction(0)) + m
        return out

    def shift_tv(self) -> Fraction:
        """TV distance between the laws of ``log2 X`` and ``1 + log2 X``."""
        joint = self.joint()
        shifted = {(k + 1, r): m for (k, r), m in joint.items()}
        keys = set(joint) | set(shifted)
        zero = Fraction(0)
        return sum(abs(joint.get(c, zero) - shifted.get(c, zero)) for c in keys) / 2


def log2_decompose(d: DiscreteDist) -> Log2Decomposition:
    if not isinstance(d, DiscreteDist):
        raise DistributionError("log2_decompose needs atoms")
    rows: dict[int, list[tuple[Fraction, Fraction]]] = {}
    for v, m in d.atoms:
        k = floor_log2(v)
        rows.setdefault(k, []).append((v / Fraction(2) ** k, m))
    table = []
    for k in sorted(rows):
        total = sum(m for _, m in rows[k])
        profile = DiscreteDist(tuple(sorted((r, m / total) for r, m in rows[k])))
        table.append((k, profile, total))
    return Log2Decomposition(tuple(table))


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


def dist_from_json(obj: Mapping[str, Any]) -> Dist:
    """Parse ``{"kind": "discrete", "atoms": [...]}`` or ``{"kind": "step", "pieces": [...]}``.

    Weights are normalized, so raw counts are accepted as masses.
    """
    if not isinstance(obj, Mapping):
        raise DistributionError("distribution spec must be a JSON object")
    kind = obj.get("kind")
    if kind == "discrete":
        rows = obj.get("atoms")
        if not isinstance(rows, list) or any(
            not isinstance(r, (list, tuple)) or len(r) != 2 for r in rows
        ):
            raise DistributionError("'atoms' must be a list of [value, mass] pairs")
    elif kind == "step":
        rows = obj.get("pieces")
        if not isinstance(rows, list) or any(
            not isinstance(r, (list, tuple)) or len(r) != 3 for r in rows
        ):
            raise DistributionError("'pieces' must be a list of [lo, hi, density] triples")
    else:
        raise DistributionError(f"unknown distribution kind {kind!r}")
    try:
        return normalize([[_parse_number(x) for x in r] for r in rows])
    except TypeError as exc:
        raise DistributionError(str(exc)) from exc


def _parse_number(x: Any) -> Fraction:
    if isinstance(x, float):
        # JSON floats are accepted through their shortest decimal text
        return Fraction(repr(x))
    return as_fraction(x)


def dist_to_json(d: Dist) -> dict[str, Any]:
    if isinstance(d, DiscreteDist):
        return {"kind": "discrete", "atoms": [[fmt_exact(v), fmt_exact(m)] for v, m in d.atoms]}
    return {
        "kind": "step",
        "pieces": [[fmt_exact(lo), fmt_exact(hi), fmt_exact(x)] for lo, hi, x in d.pieces],
    }
