"""Run tables, graph thresholds, and the run-path spectra, cross-checked
against the morphological route and the brute-force run counter."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_runs_per_line
from demgranulo.dem import Dem, reflect_rows, scan_lines, volume
from demgranulo.oracle import (chain_graphs, is_unipeak, reflection_family,
                               run_profile_equal, run_table, spectrum_from_runs,
                               unipeak_entropy_equivalence, upper_threshold)
from demgranulo.spectrum import (discrete_volume_derivative, pattern_spectrum)
from demgranulo.synth import (random_dem, random_interval_dem,
                              random_unipeak_dem, run_profile_pair)

DIRECTIONS = ("row", "column", "diag-down", "diag-up")


def dems(max_side=8, levels=6):
    return st.integers(0, 10**6).map(lambda s: random_dem(s, max_side, max_side, levels))


class TestUpperThreshold:
    def test_keeps_whole_graph_at_one(self):
        g = chain_graphs(Dem.from_rows([[1, 2, 1]]), "row")[0]
        gt = upper_threshold(g, 1)
        assert len(gt.nodes) == 3 and len(gt.edges) == 2

    def test_empty_above_max(self):
        g = chain_graphs(Dem.from_rows([[1, 2, 1]]), "row")[0]
        gt = upper_threshold(g, 3)
        assert gt.nodes == () and gt.edges == ()

    def test_isolated_peak(self):
        g = chain_graphs(Dem.from_rows([[1, 2, 1]]), "row")[0]
        gt = upper_threshold(g, 2)
        assert len(gt.nodes) == 1 and gt.edges == ()

    def test_components_split_on_gap(self):
        g = chain_graphs(Dem.from_rows([[2, 1, 2, 2]]), "row")[0]
        comps = upper_threshold(g, 2).components()
        assert sorted(len(c) for c in comps) == [1, 2]

    def test_mask_breaks_edges(self):
        g = chain_graphs(Dem.from_rows([[3, None, 3]]), "row")[0]
        assert len(g.nodes) == 2 and g.edges == ()


class TestRunTable:
    def test_peak_row(self):
        rt = run_table(Dem.from_rows([[1, 2, 1]]), "row")
        assert rt.counts == {(0, 1, 3): 1, (0, 2, 1): 1}

    def test_row_fixture(self):
        rt = run_table(Dem.from_rows([[2, 5, 5, 2, 2]]), "row")
        assert rt.counts == {(0, 1, 5): 1, (0, 2, 5): 1,
                             (0, 3, 2): 1, (0, 4, 2): 1, (0, 5, 2): 1}

    def test_masked_row_two_unit_runs(self):
        rt = run_table(Dem.from_rows([[4, None, 4]]), "row")
        assert rt.counts == {(0, h, 1): 2 for h in range(1, 5)}

    @settings(max_examples=60, deadline=None)
    @given(dems(), st.sampled_from(DIRECTIONS))
    def test_against_brute_threshold_runs(self, dem, direction):
        rt = run_table(dem, direction)
        for line in scan_lines(dem, direction):
            seq = []
            for seg in line.segments:
                seq.extend(seg.values)
                seq.append(None)  # segment boundary
            for h in range(1, dem.zmax + 1):
                expected = {}
                for t in brute_runs_per_line(seq, h):
                    expected[t] = expected.get(t, 0) + 1
                got = {t: c for (i, hh, t), c in rt.counts.items()
                       if i == line.index and hh == h}
                assert got == expected

    @settings(max_examples=60, deadline=None)
    @given(dems(), st.sampled_from(DIRECTIONS))
    def test_marginal_identity(self, dem, direction):
        # summed run lengths equal the per-line cell count at each level
        rt = run_table(dem, direction)
        for line in scan_lines(dem, direction):
            for h in range(1, dem.zmax + 1):
                cells = sum(1 for seg in line.segments for v in seg.values if v >= h)
                assert rt.cells_at_level(line.index, h) == cells

    def test_total_volume(self):
        dem = Dem.from_rows([[2, 5, 5, 2, 2]])
        assert run_table(dem, "row").total_volume() == 16

    def test_csv_export(self):
        text = run_table(Dem.from_rows([[1, 2, 1]]), "row").to_csv()
        assert text.splitlines()[0] == "direction,line,h,t,count"
        assert "row,0,2,1,1" in text


class TestSpectrumFromRuns:
    def test_length_family_fixture(self):
        rt = run_table(Dem.from_rows([[2, 5, 5, 2, 2]]), "row")
        qs = spectrum_from_runs(rt, "length")
        assert qs.probs[1] == Fraction(6, 16)
        assert qs.probs[4] == Fraction(10, 16)

    def test_peak_row(self):
        rt = run_table(Dem.from_rows([[1, 2, 1]]), "row")
        qs = spectrum_from_runs(rt, "length")
        assert qs.probs == (Fraction(1, 4), Fraction(0), Fraction(3, 4))

    def test_direction_mismatch_rejected(self):
        rt = run_table(Dem.from_rows([[1, 2, 1]]), "row")
        with pytest.raises(ValueError):
            spectrum_from_runs(rt, "nse", se="B2")
        assert spectrum_from_runs(rt, "nse", se="B4").se_name == "B4"

    @settings(max_examples=60, deadline=None)
    @given(dems())
    def test_probs_sum_to_one(self, dem):
        rt = run_table(dem, "row")
        for family in ("nse", "length"):
            assert sum(spectrum_from_runs(rt, family).probs, Fraction(0)) == 1

    @settings(max_examples=80, deadline=None)
    @given(dems(), st.sampled_from(DIRECTIONS), st.sampled_from(("nse", "length")))
    def test_equals_morphological_route(self, dem, direction, family):
        from demgranulo.dem import SE_FOR_DIRECTION
        rt = run_table(dem, direction)
        oracle_ps = spectrum_from_runs(rt, family)
        fast_ps = pattern_spectrum(dem, SE_FOR_DIRECTION[direction], family=family)
        assert oracle_ps.probs == fast_ps.probs
        assert oracle_ps.volumes == fast_ps.volumes

    @settings(max_examples=40, deadline=None)
    @given(dems(), st.sampled_from(DIRECTIONS))
    def test_derivative_consistency(self, dem, direction):
        # per-level summed run lengths are direction-independent and
        # match the discrete volume derivative
        rt = run_table(dem, direction)
        derivative = discrete_volume_derivative(dem)
        for h in range(1, dem.zmax + 1):
            total = sum(t * c for (_, hh, t), c in rt.counts.items() if hh == h)
            assert total == derivative[h - 1]


class TestRunProfileEqual:
    def test_reflection_preserves_rows(self):
        dem = random_interval_dem(11, max_rows=4, max_width=7)
        assert run_profile_equal(dem, reflect_rows(dem, {0}), "row")

    def test_constructed_pair(self):
        a, b = run_profile_pair()
        assert a != b
        assert reflect_rows(a, {0}) != b
        assert run_profile_equal(a, b, "row")
        assert pattern_spectrum(a, "B4") == pattern_spectrum(b, "B4")

    def test_scaling_shifts_levels(self):
        from demgranulo.dem import scale_heights
        dem = Dem.from_rows([[1, 2, 1]])
        scaled = scale_heights(dem, 2)
        assert not run_profile_equal(dem, scaled, "row")
        # yet the indices agree: run equality is sufficient, not necessary
        assert pattern_spectrum(dem, "B4").probs == pattern_spectrum(scaled, "B4").probs


class TestReflectionFamily:
    def test_family_size(self):
        dem = Dem.from_rows([[1, 2], [3, 4], [5, 6]])
        members = list(reflection_family(dem))
        assert len(members) == 8
        assert len({m.to_fixture_csv() for m in members}) == 8  # no palindromes

    def test_two_row_membership(self):
        dem = Dem.from_rows([[1, 2], [3, 4]])
        members = list(reflection_family(dem))
        assert len(members) == 4
        assert reflect_rows(dem, {0, 1}) in members

    def test_palindrome_collapses(self):
        dem = Dem.from_rows([[2, 1, 2]])
        members = list(reflection_family(dem))
        assert len(members) == 2
        assert members[0] == members[1]

    def test_cap_enforced(self):
        dem = Dem.from_rows([[1, 2]] * 5)
        with pytest.raises(ValueError):
            list(reflection_family(dem, max_rows=4))

    def test_gap_rows_rejected(self):
        from demgranulo.dem import DemError
        dem = Dem.from_rows([[1, None, 2]])
        with pytest.raises(DemError):
            list(reflection_family(dem))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_members_share_run_profile(self, seed):
        dem = random_interval_dem(seed, max_rows=4, max_width=6)
        for member in reflection_family(dem):
            assert run_profile_equal(dem, member, "row")


class TestUniPeak:
    def test_strict_peak(self):
        assert is_unipeak(Dem.from_rows([[1, 2, 3, 2, 1]]))

    def test_double_peak(self):
        check = is_unipeak(Dem.from_rows([[2, 1, 2]]))
        assert not check and "level 2" in check.reason

    def test_single_cell(self):
        assert is_unipeak(Dem.from_rows([[9]]))

    def test_multi_row_refused_with_reason(self):
        check = is_unipeak(Dem.from_rows([[1], [1]]))
        assert not check and "single row" in check.reason

    def test_gap_refused(self):
        check = is_unipeak(Dem.from_rows([[1, None, 1]]))
        assert not check and "gap" in check.reason

    def test_equivalence_fixture(self):
        dem = Dem.from_rows([[1, 2, 3, 2, 1]])
        derivative = discrete_volume_derivative(dem)
        assert derivative == [5, 3, 1]
        qs = spectrum_from_runs(run_table(dem, "row"), "length")
        v = volume(dem)
        assert sorted(Fraction(d, v) for d in derivative) == sorted(
            p for p in qs.probs if p > 0)
        h_deriv, h_gi = unipeak_entropy_equivalence(dem)
        assert h_deriv == pytest.approx(h_gi, abs=1e-12)

    def test_flat_unit_row_both_zero(self):
        h_deriv, h_gi = unipeak_entropy_equivalence(Dem.from_rows([[1, 1, 1]]))
        assert h_deriv == 0.0 and h_gi == 0.0

    def test_non_unipeak_rejected(self):
        with pytest.raises(ValueError):
            unipeak_entropy_equivalence(Dem.from_rows([[2, 1, 2]]))

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10**6))
    def test_generated_peaks_match_exactly(self, seed):
        dem = random_unipeak_dem(seed)
        assert is_unipeak(dem)
        v = volume(dem)
        deriv = sorted(Fraction(d, v) for d in discrete_volume_derivative(dem))
        qs = spectrum_from_runs(run_table(dem, "row"), "length")
        assert deriv == sorted(p for p in qs.probs if p > 0)
        h_deriv, h_gi = unipeak_entropy_equivalence(dem)
        assert abs(h_deriv - h_gi) < 1e-12
