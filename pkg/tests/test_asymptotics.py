import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from teplab.asymptotics import (
    STANDARD_EPS,
    STANDARD_FAMILIES,
    PriorFamily,
    conjecture_diagnostics,
    converse_findings,
    corollary1_bound,
    corollary_stats,
    deviation_profile,
    family_member,
    invariant_measure_window,
    log2_ratio,
    sweep,
    theorem3_bound_check,
)
from teplab.dist import DiscreteDist, DistributionError, StepDensityDist, normalize, tv_distance
from teplab.model import build, p_delta_given_a

from priors import dyadic_priors

LOG_GRID = PriorFamily("log_grid_uniform")
UNIFORM = PriorFamily("uniform_continuous")
INTEGERS = PriorFamily("uniform_integers")
BROOME = PriorFamily("broome", {"p": F(1, 3)})


def member_joint(f, i):
    return build(family_member(f, i))


class TestFamilies:
    def test_log_grid(self):
        assert family_member(LOG_GRID, 4) == DiscreteDist(tuple((2**k, F(1, 5)) for k in range(5)))

    def test_uniform_continuous(self):
        assert family_member(UNIFORM, 10).pieces == ((1, 10, F(1, 9)),)

    def test_broome(self):
        raw = [F(2**n, 3 ** (n + 1)) for n in range(7)]
        z = sum(raw)
        assert family_member(BROOME, 6) == DiscreteDist(tuple((2**n, m / z) for n, m in enumerate(raw)))

    def test_two_sided(self):
        d = family_member(PriorFamily("two_sided_log_grid", {"M": 2}), 3)
        assert d.values == [F(1, 4), F(1, 2), 1, 2, 4, 8]

    def test_uniform_integers(self):
        assert family_member(INTEGERS, 3) == DiscreteDist.uniform([1, 2, 3])

    def test_custom(self):
        spec = {"kind": "discrete", "atoms": [["1", "1"], ["3", "1"]]}
        assert family_member(PriorFamily("custom", {"spec": spec}), 99) == DiscreteDist.uniform([1, 3])

    def test_log_density_grid_constant(self):
        # density * x at piece midpoints approaches 1 / log(M / eps) as pieces per octave grow
        octaves, m = 3, 64
        d = family_member(PriorFamily("log_density_grid", {"eps": F(1, 2), "m": m}), octaves)
        consts = {f * (a + b) / 2 for a, b, f in d.pieces}
        assert len(consts) == 1
        c = float(consts.pop())
        assert c == pytest.approx(1 / math.log(2**octaves), rel=1e-4)

    def test_log_density_interior_half(self):
        j = member_joint(PriorFamily("log_density_grid", {"eps": 3, "m": 5}), 4)
        assert p_delta_given_a(j, 7) == F(1, 2)
        assert p_delta_given_a(j, 4) == 0
        assert p_delta_given_a(j, 60) == 1
        for c in j.cells:
            if 6 <= c.lo and c.hi <= 48:
                assert c.p_delta1 == F(1, 2)

    @pytest.mark.parametrize(
        "fam,index",
        [
            (LOG_GRID, 0),
            (UNIFORM, 1),
            (PriorFamily("broome", {"p": 1}), 5),
            (PriorFamily("broome", {"p": 0}), 5),
            (PriorFamily("log_density_grid", {"eps": 0}), 3),
            (PriorFamily("log_density_grid"), 0),
            (PriorFamily("custom"), 1),
        ],
    )
    def test_invalid(self, fam, index):
        with pytest.raises(DistributionError):
            family_member(fam, index)

    def test_unknown_kind(self):
        with pytest.raises(DistributionError):
            PriorFamily("pareto")


class TestDeviationProfile:
    @pytest.mark.parametrize("N", [2, 9, 33])
    def test_log_grid(self, N):
        prof = deviation_profile(member_joint(LOG_GRID, N))
        for eps in (F(1, 100), F(1, 4), F(49, 100)):
            assert prof(eps) == F(1, N + 1)
        assert prof.nonhalf_mass == F(1, N + 1)
        assert prof.low_edge_mass == prof.high_edge_mass == F(1, 2 * (N + 1))

    @pytest.mark.parametrize("N", [4, 10, 100])
    def test_uniform_never_half(self, N):
        prof = deviation_profile(member_joint(UNIFORM, N))
        assert prof.nonhalf_mass == 1
        for eps in (F(1, 100), F(1, 8), F(16, 100)):
            assert prof(eps) >= F(3, 4)

    def test_uniform_middle_band(self):
        # P(A in [2, N]) is where the deviation is exactly 1/6
        N = 10
        prof = deviation_profile(member_joint(UNIFORM, N))
        assert dict(prof.pairs)[F(1, 3)] == F(3, 4) * F(N - 2, N - 1)
        assert prof(F(1, 6)) == 1 - F(3, 4) * F(N - 2, N - 1)

    def test_point(self):
        prof = deviation_profile(build(DiscreteDist.point(7)))
        assert prof(F(49, 100)) == 1


class TestTvBound:
    def test_log_grid(self):
        lhs, rhs = theorem3_bound_check(member_joint(LOG_GRID, 9), F(1, 10))
        assert lhs == F(1, 10)
        assert rhs == F(2, 10) + F(2, 5) / F(4, 5) == F(7, 10)

    def test_point(self):
        assert theorem3_bound_check(build(DiscreteDist.point(1)), F(1, 4)) == (1, 4)

    def test_broome(self):
        lhs, rhs = theorem3_bound_check(member_joint(BROOME, 8), F(1, 8))
        assert isinstance(lhs, F) and lhs <= rhs

    def test_rejects_eps(self):
        with pytest.raises(DistributionError):
            theorem3_bound_check(member_joint(LOG_GRID, 3), F(1, 2))

    @settings(max_examples=200)
    @given(dyadic_priors())
    def test_random_priors(self, prior):
        j = build(prior)
        for eps in STANDARD_EPS + (F(1, 1000), F(49, 100)):
            theorem3_bound_check(j, eps)

    @pytest.mark.parametrize("fam", [*STANDARD_FAMILIES, PriorFamily("two_sided_log_grid"), PriorFamily("log_density_grid", {"m": 3})], ids=lambda f: f.kind)
    def test_families(self, fam):
        for i in range(2, 25):
            j = member_joint(fam, i)
            for eps in STANDARD_EPS:
                lhs, rhs = theorem3_bound_check(j, eps)
                assert lhs <= rhs


class TestCorollaries:
    def test_log_grid_sup_mass(self):
        for N in (3, 8, 20):
            assert corollary_stats(member_joint(LOG_GRID, N)).sup_octave_mass == F(1, N + 1)

    def test_log_grid_trends(self):
        rows = [corollary_stats(member_joint(LOG_GRID, N)) for N in range(8, 80, 8)]
        below = [r.below_mean_mass for r in rows]
        gaps = [r.quantile_gap_log2 for r in rows]
        assert all(a < b for a, b in zip(below, below[1:]))
        assert all(a < b for a, b in zip(gaps, gaps[1:]))

    def test_quantile_gap_units(self):
        # log grid N=8: upper 1/2-quantile 2^4, upper 1/4-quantile 2^6
        assert corollary_stats(member_joint(LOG_GRID, 8)).quantile_gap_log2 == 2
        assert log2_ratio(F(3), F(1)) == pytest.approx(math.log2(3))

    def test_uniform_continuous_recorded(self):
        stats = [corollary_stats(member_joint(UNIFORM, N)) for N in (4, 16, 64)]
        # octave [2^k, 2^(k+1)) covering the top of [1, N] carries the largest mass
        assert stats[0].sup_octave_mass == F(2, 3)
        assert stats[2].sup_octave_mass == F(32, 63)

    def test_c1_bound(self):
        assert corollary1_bound(F(0), 3) == F(1, 4)
        stats = corollary_stats(member_joint(BROOME, 12), m_max=6)
        assert len(stats.c1_bounds) == 6
        assert stats.sup_octave_mass <= stats.c1_bound_min

    @settings(max_examples=100)
    @given(dyadic_priors())
    def test_c1_bound_random(self, prior):
        corollary_stats(build(prior), m_max=12)

    def test_alpha_order(self):
        with pytest.raises(DistributionError):
            corollary_stats(member_joint(LOG_GRID, 8), alpha1=F(1, 4), alpha2=F(1, 2))


class TestInvariantWindow:
    def test_reduces_to_log_grid(self):
        assert invariant_measure_window(DiscreteDist.point(1), 0, 4) == family_member(LOG_GRID, 4)

    def test_two_ratios(self):
        frac = DiscreteDist(((1, F(1, 2)), (F(3, 2), F(1, 2))))
        d = invariant_measure_window(frac, 1, 1)
        assert len(d) == 6
        j = build(d)
        for a in (1, F(3, 2), 2, 3):
            assert p_delta_given_a(j, a) == F(1, 2)
        assert p_delta_given_a(j, F(1, 2)) == 0 and p_delta_given_a(j, 6) == 1

    def test_three_ratios_tv(self):
        frac = normalize([(1, 1), (F(5, 4), 2), (F(7, 4), 3)])
        M, N = 2, 2
        d = invariant_measure_window(frac, M, N)
        assert tv_distance(d, build(d).doubled) == F(1, M + N + 1)

    def test_rejects_bad_ratio(self):
        with pytest.raises(DistributionError):
            invariant_measure_window(DiscreteDist.point(2), 0, 3)


class TestConjecture:
    def test_log_grid(self):
        diag = conjecture_diagnostics(member_joint(LOG_GRID, 12))
        assert diag["dependence_gap"] == 0 and diag["uniformity_gap"] == 0

    def test_window(self):
        frac = normalize([(1, 1), (F(5, 4), 3)])
        diag = conjecture_diagnostics(build(invariant_measure_window(frac, 1, 3)))
        assert diag["dependence_gap"] == 0

    def test_broome(self):
        diag = conjecture_diagnostics(member_joint(BROOME, 8))
        # all atoms sit on powers of two, so the fractional part is constant
        assert diag["dependence_gap"] == 0
        assert diag["uniformity_gap"] > 0

    def test_dependent_fractional_part(self):
        diag = conjecture_diagnostics(build(normalize([(1, 1), (3, 1), (4, 2)])))
        assert diag["dependence_gap"] > 0

    def test_step_density(self):
        diag = conjecture_diagnostics(member_joint(PriorFamily("log_density_grid", {"m": 3}), 5))
        assert diag["dependence_gap"] == 0 and diag["uniformity_gap"] == 0
        diag = conjecture_diagnostics(member_joint(UNIFORM, 10))
        assert diag["dependence_gap"] > 0


class TestFamilyInvariants:
    def test_log_grid_and_window_limits(self):
        frac = normalize([(1, 1), (F(3, 2), 1), (F(7, 4), 2)])
        for make in (lambda n: family_member(LOG_GRID, n), lambda n: invariant_measure_window(frac, 0, n)):
            prev = None
            for n in range(2, 40, 3):
                j = build(make(n))
                tv = tv_distance(j.prior, j.doubled)
                stats = corollary_stats(j)
                row = (tv, deviation_profile(j)(F(1, 8)), stats.sup_octave_mass, stats.quantile_gap_log2, stats.below_mean_mass)
                if prev is not None:
                    assert row[0] < prev[0] and row[1] < prev[1] and row[2] < prev[2]
                    assert row[3] >= prev[3] and row[4] >= prev[4]
                prev = row

    @pytest.mark.parametrize("fam", [UNIFORM, INTEGERS], ids=lambda f: f.kind)
    def test_negative_example(self, fam):
        for N in range(2, 65):
            prof = deviation_profile(member_joint(fam, N))
            for eps in (F(1, 100), F(1, 16), F(1, 8)):
                assert prof(eps) >= F(1, 2)

    def test_converse_screen(self):
        findings = []
        for fam in STANDARD_FAMILIES:
            for i in range(2, 40):
                findings += converse_findings(member_joint(fam, i))
        assert findings == []


def test_sweep_rows_in_order():
    rows = sweep(LOG_GRID, [5, 3, 4])
    assert [r.index for r in rows] == [5, 3, 4]
    assert [r.tv for r in rows] == [F(1, 6), F(1, 4), F(1, 5)]
    assert sweep(LOG_GRID, []) == []

