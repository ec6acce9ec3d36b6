"""Decision strategies: exact values and seeded Monte Carlo.

Random numbers come from numpy's Philox4x64 counter-based generator.
Rounds are cut into fixed blocks of :data:`BLOCK` draws and block ``b`` of
seed ``s`` always uses the Philox key ``s + 2**64 * b``, so results do not
depend on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator

import numpy as np

from .dist import (
    DiscreteDist,
    Dist,
    as_fraction,
    expectation,
    fmt_exact,
    mass_between,
    prob_event,
)
from .model import HALF, Cell, TepJoint, build
from .asymptotics import PriorFamily, family_member

__all__ = [
    "BLOCK",
    "ProbeStrategy",
    "SeededSampler",
    "SwitchPolicy",
    "broome_truncation_experiment",
    "cover_simulate",
    "cover_win_prob_exact",
    "policy_value_exact",
    "sample",
]

BLOCK = 1 << 16
_SEED_MASK = (1 << 64) - 1


class SeededSampler:
    """Source of independent, reproducible blocks of random numbers."""

    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= _SEED_MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.counter = 0

    def generator(self, block: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed | (block << 64)))

    def take_blocks(self, n: int) -> Iterator[tuple[np.random.Generator, int]]:
        """Consume enough blocks for ``n`` draws, advancing the counter."""
        while n > 0:
            size = min(n, BLOCK)
            yield self.generator(self.counter), size
            self.counter += 1
            n -= size


def _blocks(n: int) -> list[int]:
    return [min(BLOCK, n - start) for start in range(0, n, BLOCK)]


def _run_blocks(
    sampler: SeededSampler, n: int, work: Callable[[np.random.Generator, int], Any], workers: int
) -> list[Any]:
    """Apply ``work`` to each block in order; results are returned in block order."""
    sizes = _blocks(n)
    first = sampler.counter
    sampler.counter += len(sizes)
    jobs = [(sampler.generator(first + b), size) for b, size in enumerate(sizes)]
    if workers <= 1:
        return [work(g, size) for g, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _inverse_cdf(d: Dist) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(d, DiscreteDist):
        values = np.array([float(v) for v in d.values])
        cum, acc = [], Fraction(0)
        for m in d.masses:
            acc += m
            cum.append(float(acc))
        cum_arr = np.array(cum)
        cum_arr[-1] = np.inf

        def draw(u: np.ndarray) -> np.ndarray:
            return values[np.searchsorted(cum_arr, u, side="right")]

        return draw

    pieces = [(lo, hi, dens) for lo, hi, dens in d.pieces if dens]
    lo_arr = np.array([float(lo) for lo, _, _ in pieces])
    width = np.array([float(hi - lo) for lo, hi, _ in pieces])
    start, acc = [], Fraction(0)
    for lo, hi, dens in pieces:
        start.append(float(acc))
        acc += dens * (hi - lo)
    start_arr = np.array(start)
    mass = np.diff(np.append(start_arr, 1.0))

    def draw(u: np.ndarray) -> np.ndarray:
        i = np.searchsorted(start_arr, u, side="right") - 1
        frac = np.clip((u - start_arr[i]) / mass[i], 0.0, 1.0)
        return lo_arr[i] + frac * width[i]

    return draw


def sample(d: Dist, sampler: SeededSampler, n: int) -> np.ndarray:
    """``n`` draws by inverse CDF, as floats."""
    draw = _inverse_cdf(d)
    parts = [draw(g.random(size)) for g, size in sampler.take_blocks(n)]
    return np.concatenate(parts) if parts else np.empty(0)


# ---------------------------------------------------------------------------
# Cover's guessing game
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeStrategy:
    """Guess "mine is larger" iff the number seen exceeds an independent probe.

    A tie with the probe is a guess of "smaller".
    """

    probe_dist: Dist


def cover_win_prob_exact(x: Any, y: Any, s: ProbeStrategy) -> Fraction:
    x, y = as_fraction(x), as_fraction(y)
    if not x < y:
        raise ValueError(f"need x < y, got x = {x}, y = {y}")
    # holding x we win iff probe >= x; holding y we win iff probe < y
    return HALF + HALF * mass_between(s.probe_dist, x, y)


@dataclass(frozen=True)
class CoverResult:
    wins: int
    n: int

    @property
    def win_freq(self) -> float:
        return self.wins / self.n

    @property
    def ci_halfwidth(self) -> float:
        """95% normal-approximation half-width."""
        p = self.win_freq
        return 1.959963984540054 * math.sqrt(p * (1 - p) / self.n)


def cover_simulate(
    x: Any, y: Any, s: ProbeStrategy, n: int, sampler: SeededSampler, workers: int = 1
) -> CoverResult:
    x, y = as_fraction(x), as_fraction(y)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not x < y:
        raise ValueError(f"need x < y, got x = {x}, y = {y}")
    draw = _inverse_cdf(s.probe_dist)
    xf, yf = float(x), float(y)

    def work(g: np.random.Generator, size: int) -> int:
        holds_larger = g.random(size) < 0.5
        probe = draw(g.random(size))
        seen = np.where(holds_larger, yf, xf)
        says_larger = seen > probe
        return int(np.count_nonzero(says_larger == holds_larger))

    wins = sum(_run_blocks(sampler, n, work, workers))
    return CoverResult(wins, n)


# ---------------------------------------------------------------------------
# Switching policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwitchPolicy:
    """``never``, ``always``, ``threshold`` (switch iff ``a < t``) or ``informed``
    (switch iff the conditional expectation of the other envelope beats ``a``)."""

    rule: str
    t: Fraction | None = None

    def __post_init__(self) -> None:
        if self.rule not in ("never", "always", "threshold", "informed"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.rule == "threshold":
            if self.t is None:
                raise ValueError("threshold rule needs t")
            object.__setattr__(self, "t", as_fraction(self.t))


def _cell_value(c: Cell, switch: bool) -> Fraction:
    if not switch:
        return c.mass * c.mean
    # B = 2A when A is the smaller amount, A/2 otherwise; A is uniform on the cell either way
    return (2 * c.smaller + c.larger / 2) * c.mean


def policy_value_exact(j: TepJoint, p: SwitchPolicy) -> Fraction:
    """Expected amount finally kept."""
    total = Fraction(0)
    for c in j.cells:
        if p.rule == "never":
            total += _cell_value(c, False)
        elif p.rule == "always":
            total += _cell_value(c, True)
        elif p.rule == "informed":
            # E(B | A=a) > a  <=>  P(delta=1 | A=a) < 2/3
            total += _cell_value(c, c.p_delta1 < Fraction(2, 3))
        else:
            below, above = c.split(p.t)
            if below is not None:
                total += _cell_value(below, True)
            if above is not None:
                total += _cell_value(above, False)
    return total


# ---------------------------------------------------------------------------
# Truncated heavy tail
# ---------------------------------------------------------------------------


def _f(x: Fraction) -> str:
    return fmt_exact(x)


def _d(x: float) -> float:
    return float(format(x, ".15g"))


def broome_truncation_experiment(
    K: int,
    n: int,
    delta_share: Any = Fraction(1, 100),
    sampler: SeededSampler | None = None,
    p: Any = Fraction(1, 3),
    workers: int = 1,
) -> dict[str, Any]:
    """Average of ``n`` draws from the truncated geometric-power prior versus its mean.

    ``delta_share`` is the multiple of the mean below which we count draws
    (exactly and empirically).
    """
    if K < 10:
        raise ValueError("K must be >= 10")
    if n < 1000:
        raise ValueError("n must be >= 1000")
    delta_share = as_fraction(delta_share)
    sampler = sampler if sampler is not None else SeededSampler(0)
    prior = family_member(PriorFamily("broome", {"p": p}), K)
    j = build(prior)
    ex = expectation(prior)
    top = Fraction(2) ** K
    top_mass = prior.mass_at(top)
    favorable = 1 - top_mass / 2
    # smallest tail {X >= 2^t} carrying at least half of E(X)
    acc, tail_from = Fraction(0), K
    for v, m in reversed(prior.atoms):
        acc += v * m
        tail_from = v
        if acc >= ex / 2:
            break
    tail_prob = mass_between(prior, tail_from, None)
    draw = _inverse_cdf(prior)

    def work(g: np.random.Generator, size: int) -> tuple[float, float, float, float, int]:
        xs = draw(g.random(size))
        sign = np.where(g.random(size) < 0.5, 1.0, -1.0)  # A = X: gain +X; A = 2X: gain -X
        gain = sign * xs
        below = int(np.count_nonzero(xs < float(delta_share * ex)))
        return float(xs.sum()), float(gain.sum()), float((gain * gain).sum()), float(xs.max()), below

    parts = _run_blocks(sampler, n, work, workers)
    sum_x = math.fsum(r[0] for r in parts)
    sum_g = math.fsum(r[1] for r in parts)
    sum_g2 = math.fsum(r[2] for r in parts)
    max_x = max(r[3] for r in parts)
    below = sum(r[4] for r in parts)
    mean_x = sum_x / n
    mean_g = sum_g / n
    sd_g = math.sqrt(max(sum_g2 / n - mean_g * mean_g, 0.0) * n / (n - 1))
    se_g = sd_g / math.sqrt(n)
    return {
        "experiment": "broome_truncation",
        "params": {"K": K, "n": n, "p": _f(as_fraction(p)), "delta_share": _f(delta_share)},
        "seed": sampler.seed,
        "exact": {
            "mean_x": _f(ex),
            "always_switch_value": _f(Fraction(3, 2) * ex),
            "switch_favorable_mass": _f(favorable),
            "top_atom_mass": _f(top_mass),
            "half_mean_tail_threshold": _f(tail_from),
            "half_mean_tail_prob": _f(tail_prob),
            "below_share_mass": _f(prob_event(prior, [(None, delta_share * ex)])),
        },
        "empirical": {
            "sample_mean": _d(mean_x),
            "ratio_to_mean": _d(mean_x / float(ex)),
            "max_draw": _d(max_x),
            "below_share_freq": _d(below / n),
            "always_switch_gain_mean": _d(mean_g),
            "always_switch_gain_se": _d(se_g),
            "always_switch_gain_z": _d(mean_g / se_g if se_g > 0 else 0.0),
        },
    }


def cover_experiment(
    x: Any, y: Any, probe: Dist, n: int, sampler: SeededSampler, workers: int = 1
) -> dict[str, Any]:
    x, y = as_fraction(x), as_fraction(y)
    s = ProbeStrategy(probe)
    exact = cover_win_prob_exact(x, y, s)
    res = cover_simulate(x, y, s, n, sampler, workers)
    return {
        "experiment": "cover",
        "params": {"x": _f(x), "y": _f(y), "n": n},
        "seed": sampler.seed,
        "exact": {
            "win_prob": _f(exact),
            "probe_mass_between": _f(mass_between(probe, x, y)),
        },
        "empirical": {
            "wins": res.wins,
            "win_freq": _d(res.win_freq),
            "ci95_halfwidth": _d(res.ci_halfwidth),
            "abs_error": _d(abs(res.win_freq - float(exact))),
        },
    }
