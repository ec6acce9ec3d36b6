"""Prior families approaching scale ignorance, and what happens along them.

A family is a recipe ``index -> prior``.  For each member we measure how far
``A`` and ``delta`` are from independent, the TV distance between ``X`` and
``2X``, and the octave/quantile/mean statistics that must follow when that
distance shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .dist import (
    DiscreteDist,
    Dist,
    DistributionError,
    StepDensityDist,
    as_fraction,
    dist_from_json,
    expectation,
    floor_log2,
    log2_decompose,
    normalize,
    octave_masses,
    prob_event,
    quantile,
    tv_distance,
)
from .model import HALF, TepJoint, build
from .order import TheoremViolation

__all__ = [
    "FAMILY_KINDS",
    "DeviationProfile",
    "PriorFamily",
    "STANDARD_EPS",
    "STANDARD_FAMILIES",
    "SWEEP_COLUMNS",
    "CorollaryStats",
    "SweepRow",
    "conjecture_diagnostics",
    "converse_findings",
    "corollary1_bound",
    "corollary_stats",
    "deviation_profile",
    "family_member",
    "invariant_measure_window",
    "log2_ratio",
    "sweep",
    "sweep_row",
    "theorem3_bound_check",
]

FAMILY_KINDS = (
    "log_grid_uniform",
    "two_sided_log_grid",
    "log_density_grid",
    "uniform_continuous",
    "uniform_integers",
    "broome",
    "custom",
)

STANDARD_EPS = (Fraction(1, 16), Fraction(1, 8), Fraction(1, 4), Fraction(3, 8))


@dataclass(frozen=True)
class PriorFamily:
    """``kind`` plus the parameters that stay fixed while the index varies.

    ========================  =========================================  ==============
    kind                      member at ``index``                        fixed params
    ========================  =========================================  ==============
    ``log_grid_uniform``      uniform on ``2^k, k = 0..index``
    ``two_sided_log_grid``    uniform on ``2^k, k = -M..index``          ``M`` (default index)
    ``log_density_grid``      ``1/x`` on ``[eps, eps 2^index)``          ``eps``, ``m``
    ``uniform_continuous``    uniform density on ``[1, index]``
    ``uniform_integers``      uniform on ``1..index``
    ``broome``                ``P(X=2^n) ∝ p (1-p)^n, n = 0..index``     ``p`` (1/3)
    ``custom``                the fixed ``spec``, index ignored          ``spec``
    ========================  =========================================  ==============
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise DistributionError(f"unknown family {self.kind!r}")

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def member(self, index: int) -> Dist:
        return family_member(self, index)


STANDARD_FAMILIES = (
    PriorFamily("log_grid_uniform"),
    PriorFamily("uniform_continuous"),
    PriorFamily("uniform_integers"),
    PriorFamily("broome", {"p": Fraction(1, 3)}),
)


def _log_density_pieces(eps: Fraction, octaves: int, m: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    # each octave [eps 2^k, eps 2^(k+1)) is cut into m equal pieces, density 1/midpoint;
    # piece masses then repeat from octave to octave, so doubling maps the grid onto itself
    pieces = []
    for k in range(octaves):
        base = eps * 2**k
        for i in range(m):
            lo = base * (1 + Fraction(i, m))
            hi = base * (1 + Fraction(i + 1, m))
            pieces.append((lo, hi, 2 / (lo + hi)))
    return pieces


def family_member(f: PriorFamily, index: int) -> Dist:
    if isinstance(index, bool) or not isinstance(index, int):
        raise DistributionError(f"family index must be an integer, got {index!r}")
    kind = f.kind
    if kind == "log_grid_uniform":
        if index < 1:
            raise DistributionError("log_grid_uniform needs N >= 1")
        return DiscreteDist.uniform(2**k for k in range(index + 1))
    if kind == "two_sided_log_grid":
        m = int(f.param("M", index))
        if index < 0 or m < 0 or m + index < 1:
            raise DistributionError("two_sided_log_grid needs M, N >= 0 and M + N >= 1")
        return DiscreteDist.uniform(Fraction(2) ** k for k in range(-m, index + 1))
    if kind == "log_density_grid":
        eps = as_fraction(f.param("eps", 1))
        m = int(f.param("m", 4))
        if eps <= 0 or m < 1 or index < 1:
            raise DistributionError("log_density_grid needs eps > 0, m >= 1 and eps < M")
        return normalize(_log_density_pieces(eps, index, m))
    if kind == "uniform_continuous":
        if index < 2:
            raise DistributionError("uniform_continuous needs N >= 2")
        return StepDensityDist.uniform(1, index)
    if kind == "uniform_integers":
        if index < 1:
            raise DistributionError("uniform_integers needs N >= 1")
        return DiscreteDist.uniform(range(1, index + 1))
    if kind == "broome":
        p = as_fraction(f.param("p", Fraction(1, 3)))
        if not 0 < p < 1:
            raise DistributionError(f"broome needs p in (0, 1), got {p}")
        if index < 0:
            raise DistributionError("broome needs K >= 0")
        return normalize([(2**n, p * (1 - p) ** n) for n in range(index + 1)])
    spec = f.param("spec")
    if spec is None:
        raise DistributionError("custom family needs a 'spec'")
    return spec if isinstance(spec, (DiscreteDist, StepDensityDist)) else dist_from_json(spec)


# ---------------------------------------------------------------------------
# Deviation from independence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeviationProfile:
    """Law of ``P(delta=1 | A)`` under the law of ``A``, as ``(value, mass)`` pairs."""

    pairs: tuple[tuple[Fraction, Fraction], ...]

    def __call__(self, eps: Any) -> Fraction:
        """``P(|P(delta=1 | A) - 1/2| > eps)``."""
        eps = as_fraction(eps)
        return sum((m for p, m in self.pairs if abs(p - HALF) > eps), Fraction(0))

    @property
    def nonhalf_mass(self) -> Fraction:
        return sum((m for p, m in self.pairs if p != HALF), Fraction(0))

    @property
    def low_edge_mass(self) -> Fraction:
        """Mass where the amount in hand is certainly the smaller one."""
        return sum((m for p, m in self.pairs if p == 0), Fraction(0))

    @property
    def high_edge_mass(self) -> Fraction:
        return sum((m for p, m in self.pairs if p == 1), Fraction(0))


def deviation_profile(j: TepJoint) -> DeviationProfile:
    acc: dict[Fraction, Fraction] = {}
    for c in j.cells:
        p = c.p_delta1
        acc[p] = acc.get(p, Fraction(0)) + c.mass
    return DeviationProfile(tuple(sorted(acc.items())))


def theorem3_bound_check(j: TepJoint, eps: Any) -> tuple[Fraction, Fraction]:
    """``TV(X, 2X) <= 2 delta(eps) + 4 eps / (1 - 2 eps)``; returns ``(lhs, rhs)``."""
    eps = as_fraction(eps)
    if not 0 < eps < HALF:
        raise DistributionError(f"eps must lie in (0, 1/2), got {eps}")
    lhs = tv_distance(j.prior, j.doubled)
    rhs = 2 * deviation_profile(j)(eps) + 4 * eps / (1 - 2 * eps)
    if lhs > rhs:
        raise TheoremViolation(f"TV {lhs} exceeds bound {rhs} at eps = {eps}")
    return lhs, rhs


def converse_findings(j: TepJoint, eps_grid: Iterable[Any] = STANDARD_EPS) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Heuristic screen for the converse direction: ``(eps, tv, delta(eps))``
    wherever ``tv <= eps^2 / 4`` and yet ``delta(eps) > eps``.

    No rate is known for the converse, so the rule is arbitrary and a
    non-empty result is a finding to look at, not an error.
    """
    tv = tv_distance(j.prior, j.doubled)
    prof = deviation_profile(j)
    out = []
    for eps in map(as_fraction, eps_grid):
        dev = prof(eps)
        if tv <= eps * eps / 4 and dev > eps:
            out.append((eps, tv, dev))
    return out


# ---------------------------------------------------------------------------
# Corollaries
# ---------------------------------------------------------------------------


def log2_ratio(hi: Fraction, lo: Fraction) -> Fraction | float:
    """``log2(hi / lo)``; exact when the ratio is a power of two."""
    r = Fraction(hi) / Fraction(lo)
    k = floor_log2(r)
    if Fraction(2) ** k == r:
        return Fraction(k)
    return math.log2(r.numerator) - math.log2(r.denominator)


def corollary1_bound(tv: Fraction, m: int) -> Fraction:
    """Upper bound on the largest octave mass from ``m`` unit shifts.

    The ``m + 1`` octaves ending at the heaviest one hold at most total mass 1,
    and each shift moves octave masses by at most the TV distance in total.
    """
    return Fraction(1, m + 1) + m * tv / 2


@dataclass(frozen=True)
class CorollaryStats:
    sup_octave_mass: Fraction
    quantile_gap_log2: Fraction | float
    below_mean_mass: Fraction
    c1_bounds: tuple[Fraction, ...]

    @property
    def c1_bound_min(self) -> Fraction:
        return min(self.c1_bounds)


def corollary_stats(
    j: TepJoint,
    delta: Any = Fraction(1, 100),
    alpha1: Any = Fraction(1, 2),
    alpha2: Any = Fraction(1, 4),
    m_max: int = 8,
) -> CorollaryStats:
    delta, alpha1, alpha2 = as_fraction(delta), as_fraction(alpha1), as_fraction(alpha2)
    if not alpha1 > alpha2:
        raise DistributionError("need alpha1 > alpha2 so that z(alpha1) <= z(alpha2)")
    if delta <= 0:
        raise DistributionError("delta must be positive")
    if m_max < 1:
        raise DistributionError("m_max must be >= 1")
    prior = j.prior
    sup_mass = max(octave_masses(prior).values())
    gap = log2_ratio(quantile(prior, alpha2), quantile(prior, alpha1))
    below = prob_event(prior, [(None, delta * expectation(prior))])
    tv = tv_distance(prior, j.doubled)
    bounds = tuple(corollary1_bound(tv, m) for m in range(1, m_max + 1))
    for m, b in enumerate(bounds, start=1):
        if sup_mass > b:
            raise TheoremViolation(f"octave mass {sup_mass} exceeds bound {b} at m = {m}")
    return CorollaryStats(sup_mass, gap, below, bounds)


# ---------------------------------------------------------------------------
# Shift-invariant construction and diagnostics
# ---------------------------------------------------------------------------


def invariant_measure_window(fractional: DiscreteDist, M: int, N: int) -> DiscreteDist:
    """Window ``k = -M..N`` of the measure that repeats one octave profile forever.

    ``fractional`` is a law on ratios in ``[1, 2)`` (ratio ``r`` stands for
    fractional part ``log2 r``).  The result puts mass ``q(r) / (M + N + 1)``
    on ``r 2^k``.  Away from the two edge octaves, the chance of holding the
    larger amount is exactly one half.
    """
    if M < 0 or N < 0:
        raise DistributionError("window bounds must be >= 0")
    for r in fractional.values:
        if not 1 <= r < 2:
            raise DistributionError(f"fractional atom {r} is not a ratio in [1, 2)")
    width = M + N + 1
    atoms = [
        (r * Fraction(2) ** k, q / width) for k in range(-M, N + 1) for r, q in fractional.atoms
    ]
    d = DiscreteDist(tuple(sorted(atoms)))
    j = build(d)
    for c in j.cells:
        k = floor_log2(c.lo)
        if -M + 1 <= k <= N and c.p_delta1 != HALF:
            raise TheoremViolation(f"interior conditional at {c.lo} is {c.p_delta1}, not 1/2")
    return d


def _octave_cells(prior: Dist) -> dict[tuple[int, Fraction], Fraction]:
    """Joint masses of (octave, fractional cell).

    Atoms use their exact ratio.  Densities use the merged relative
    breakpoints of all octaves as cells, keyed by the cell's left ratio.
    """
    if isinstance(prior, DiscreteDist):
        return log2_decompose(prior).joint()
    segments = []
    for lo, hi, dens in prior.pieces:
        if not dens:
            continue
        k = floor_log2(lo)
        a = lo
        while a < hi:
            top = Fraction(2) ** (k + 1)
            b = min(hi, top)
            scale = Fraction(2) ** k
            segments.append((k, a / scale, b / scale, dens * scale))
            a, k = b, k + 1
    cuts = sorted({r for _, r0, r1, _ in segments for r in (r0, r1)} | {Fraction(1), Fraction(2)})
    out: dict[tuple[int, Fraction], Fraction] = {}
    for k, r0, r1, dens in segments:
        for c0, c1 in zip(cuts, cuts[1:]):
            lo, hi = max(c0, r0), min(c1, r1)
            if hi > lo:
                out[(k, c0)] = out.get((k, c0), Fraction(0)) + dens * (hi - lo)
    return out


def conjecture_diagnostics(j: TepJoint) -> dict[str, Any]:
    """Numbers for exploring whether the integer and fractional parts of
    ``log2 X`` look independent with a flat integer part.  Reported only."""
    joint = _octave_cells(j.prior)
    ints: dict[int, Fraction] = {}
    fracs: dict[Fraction, Fraction] = {}
    for (k, r), m in joint.items():
        ints[k] = ints.get(k, Fraction(0)) + m
        fracs[r] = fracs.get(r, Fraction(0)) + m
    dependence_gap = max(
        abs(joint.get((k, r), Fraction(0)) - ints[k] * fracs[r]) for k in ints for r in fracs
    )
    lo_k, hi_k = min(ints), max(ints)
    flat = Fraction(1, hi_k - lo_k + 1)
    uniformity_gap = max(abs(ints.get(k, Fraction(0)) - flat) for k in range(lo_k, hi_k + 1))
    prof = deviation_profile(j)
    return {
        "dependence_gap": dependence_gap,
        "uniformity_gap": uniformity_gap,
        "occupied_octaves": (lo_k, hi_k),
        "nonhalf_mass": prof.nonhalf_mass,
        "low_edge_mass": prof.low_edge_mass,
        "high_edge_mass": prof.high_edge_mass,
        "tv": tv_distance(j.prior, j.doubled),
    }


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "family",
    "index",
    "tv",
    "nonhalf_mass",
    "dev_mass_eps",
    "sup_octave_mass",
    "quantile_gap_log2",
    "below_mean_mass",
    "t3_lhs",
    "t3_rhs",
    "c1_bound_min",
)


@dataclass(frozen=True)
class SweepRow:
    family: str
    index: int
    tv: Fraction
    nonhalf_mass: Fraction
    dev_mass_eps: Fraction
    sup_octave_mass: Fraction
    quantile_gap_log2: Fraction | float
    below_mean_mass: Fraction
    t3_lhs: Fraction
    t3_rhs: Fraction
    c1_bound_min: Fraction


def sweep_row(
    f: PriorFamily,
    index: int,
    eps: Any = Fraction(1, 8),
    delta: Any = Fraction(1, 100),
    alpha1: Any = Fraction(1, 2),
    alpha2: Any = Fraction(1, 4),
    m_max: int = 8,
) -> SweepRow:
    j = build(family_member(f, index))
    prof = deviation_profile(j)
    lhs, rhs = theorem3_bound_check(j, eps)
    stats = corollary_stats(j, delta, alpha1, alpha2, m_max)
    return SweepRow(
        family=f.kind,
        index=index,
        tv=lhs,
        nonhalf_mass=prof.nonhalf_mass,
        dev_mass_eps=prof(eps),
        sup_octave_mass=stats.sup_octave_mass,
        quantile_gap_log2=stats.quantile_gap_log2,
        below_mean_mass=stats.below_mean_mass,
        t3_lhs=lhs,
        t3_rhs=rhs,
        c1_bound_min=stats.c1_bound_min,
    )


def sweep(f: PriorFamily, indices: Iterable[int], **kwargs: Any) -> list[SweepRow]:
    """One row per member, in index order."""
    return [sweep_row(f, i, **kwargs) for i in indices]
