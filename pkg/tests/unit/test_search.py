"""Unit tests for the hard-instance family and the worst-case ratio search."""

import pytest
import sys
from pathlib import Path

# Add src and tests directories to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))
sys.path.insert(0, str(Path(__file__).parent.parent))

from checker import check_all
from exceptions import GuardExceededError
from instance_io import gap_instance
from itertools import permutations
from models import FamilySpec, TieBreak
from policy import build_greedy_tree, expected_cost
from search import (
    WorstCaseSearch,
    canonical_form,
    family_instance,
    generate_family,
    maximize_over_p,
    ratio_at,
    search_worst,
    sweep,
    worst_greedy,
    worst_tiebreak,
)
from test_data import BAD_PRIORITY, GAP_P, GAP_RATIO_RANGE, greedy_closed_form, ratio_closed_form

GAP_TRIGGERS = ((1, 2), (3, 4), (1, 3))


class TestGenerateFamily:
    """Tests for generate_family and canonical_form."""

    def test_single_variable(self):
        """Test k=1, n=2: one item triggered by X1 plus the dummy."""
        members = generate_family(1, 2)
        assert [m.trigger_sets for m in members] == [((1,),)]

    def test_two_variables_one_item(self):
        """Test k=2, n=2: {1} and {1,2} up to swapping X1 and X2."""
        members = generate_family(2, 2)
        assert sorted(m.trigger_sets for m in members) == [((1,),), ((1, 2),)]

    def test_gap_member_present(self):
        """Test that the gap instance appears in the k=4, n=4 family up to symmetry."""
        target = canonical_form(GAP_TRIGGERS, 4)
        keys = {canonical_form(m.trigger_sets, 4) for m in generate_family(4, 4)}
        assert target in keys

    def test_members_are_distinct_classes(self):
        """Test that no two members are symmetric images of each other."""
        members = generate_family(3, 3)
        keys = [canonical_form(m.trigger_sets, 3) for m in members]
        assert len(keys) == len(set(keys))

    def test_canonical_form_symmetry(self):
        """Test that relabeling ground variables leaves the key unchanged."""
        relabeled = ((3, 4), (1, 2), (2, 4))
        assert canonical_form(GAP_TRIGGERS, 4) == canonical_form(relabeled, 4)
        assert canonical_form(((1, 2),), 3) != canonical_form(((1,),), 3)

    @pytest.mark.parametrize("k,n", [(0, 2), (7, 3), (3, 8), (3, 1)])
    def test_guards(self, k, n):
        """Test that desk-scale guards are enforced."""
        with pytest.raises(GuardExceededError):
            generate_family(k, n)


class TestFamilyInstance:
    """Tests for family_instance."""

    def test_structure(self):
        """Test unit-cost items plus a dummy of cost 1/(1-p)."""
        instance = family_instance(FamilySpec(4, 4, GAP_TRIGGERS), 0.75)
        assert instance.item_ids == ("i1", "i2", "i3", "d")
        assert [instance.cost(e) for e in ("i1", "i2", "i3")] == [1.0, 1.0, 1.0]
        assert instance.cost("d") == pytest.approx(4.0)
        assert instance.validate() is True

    def test_dummy_follows_p(self):
        """Test that re-parameterizing recomputes the dummy cost."""
        instance = family_instance(FamilySpec(1, 2, ((1,),)), 0.5).with_p(0.9)
        assert instance.cost("d") == pytest.approx(10.0)


class TestRatio:
    """Tests for ratio_at, worst_greedy and maximize_over_p."""

    def test_gap_ratio(self):
        """Test the ratio at the gap p under priority c, a, b, d."""
        greedy, opt, rho = ratio_at(gap_instance(), GAP_P, TieBreak(BAD_PRIORITY))
        assert GAP_RATIO_RANGE[0] <= rho <= GAP_RATIO_RANGE[1]
        assert rho >= 1.15
        assert rho == pytest.approx(greedy / opt, abs=1e-12)
        assert rho == pytest.approx(ratio_closed_form(GAP_P), abs=1e-9)

    def test_worst_greedy_matches_priority_enumeration(self):
        """Test the adversarial tie resolution against all 24 priorities."""
        instance = gap_instance(GAP_P)
        worst, tiebreak = worst_greedy(instance)
        by_priority = max(expected_cost(instance, build_greedy_tree(instance, TieBreak(order)))
                          for order in permutations(instance.item_ids))
        assert worst == pytest.approx(by_priority, abs=1e-12)
        assert worst == pytest.approx(greedy_closed_form(GAP_P), abs=1e-12)
        replay = expected_cost(instance, build_greedy_tree(instance, tiebreak))
        assert replay == pytest.approx(worst, abs=1e-12)

    def test_worst_tiebreak_is_permutation(self):
        """Test that the reported priority lists every item once."""
        tiebreak = worst_tiebreak(gap_instance(), 0.5)
        assert sorted(tiebreak.priority) == ["a", "b", "c", "d"]

    def test_adversarial_ratio_at_least_one(self):
        """Test rho >= 1 with the adversarial priority."""
        for p in (0.2, 0.5, 0.8):
            _, _, rho = ratio_at(gap_instance(), p)
            assert rho >= 1 - 1e-12

    def test_maximize_over_p(self):
        """Test that the maximizer lands near the gap p."""
        p_star, rho_star = maximize_over_p(family_instance(FamilySpec(4, 4, GAP_TRIGGERS), 0.5), step=0.01)
        assert rho_star >= ratio_closed_form(GAP_P) - 1e-6
        assert 0.6 < p_star < 0.8


class TestSweep:
    """Tests for sweep."""

    def test_rows(self):
        """Test one row per grid point with consistent columns."""
        rows = sweep(gap_instance(), [0.3, GAP_P], TieBreak(BAD_PRIORITY))
        assert [row["p"] for row in rows] == [0.3, GAP_P]
        for row in rows:
            assert set(row) == {"p", "greedy", "opt", "rho"}
            assert row["rho"] == pytest.approx(row["greedy"] / row["opt"])
        assert rows[1]["rho"] == pytest.approx(ratio_closed_form(GAP_P), abs=1e-9)

    def test_default_priority_is_optimal_here(self):
        """Test that file order makes greedy pick a, b, d and match the optimum."""
        rows = sweep(gap_instance(), [GAP_P])
        assert rows[0]["rho"] == pytest.approx(1.0, abs=1e-9)

    def test_adversarial(self):
        """Test that adversarial ties reproduce the bad greedy."""
        rows = sweep(gap_instance(), [GAP_P], adversarial=True)
        assert rows[0]["greedy"] == pytest.approx(greedy_closed_form(GAP_P), abs=1e-12)


class TestSearchWorst:
    """Tests for the worst-case family search."""

    def test_members_prune_duplicates(self):
        """Test that members with repeated trigger sets are skipped."""
        members = WorstCaseSearch(threads=1).members(2, 3)
        assert members
        assert not any(m.has_duplicates() for m in members)
        assert {m.n for m in members} == {2, 3}

    def test_small_search_is_sorted(self):
        """Test report ordering and invariants on a small family."""
        reports = WorstCaseSearch(threads=1, step=0.05).search_worst(2, 3)
        rhos = [r.rho for r in reports]
        assert rhos == sorted(rhos, reverse=True)
        for report in reports:
            assert report.rho >= 1 - 1e-12
            assert report.rho == pytest.approx(report.greedy_cost / report.opt_cost, abs=1e-12)

    def test_reports_satisfy_axioms_at_p_star(self):
        """Test that every reported member is a valid cover instance at its own p_star."""
        reports = WorstCaseSearch(threads=1, step=0.05).search_worst(3, 3)
        assert reports
        for report in reports:
            assert 0 < report.p_star < 1
            result = check_all(family_instance(report.instance, report.p_star))
            assert result.passed, f"{report.instance.encode()}: {result.to_dict()}"

    def test_serial_and_parallel_agree(self):
        """Test that the worker count does not change the result."""
        serial = WorstCaseSearch(threads=1, step=0.05).search_worst(2, 3)
        parallel = WorstCaseSearch(threads=2, step=0.05).search_worst(2, 3)
        assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]

    def test_threads_from_environment(self, monkeypatch):
        """Test that ASC_THREADS caps the worker count."""
        monkeypatch.setenv("ASC_THREADS", "3")
        assert WorstCaseSearch().threads == 3
        monkeypatch.setenv("ASC_THREADS", "many")
        assert WorstCaseSearch().threads == 1

    def test_search_floor(self, monkeypatch):
        """Test that k=4, n=4 finds rho of at least the gap ratio, the gap member included."""
        monkeypatch.setenv("ASC_THREADS", "1")
        reports = search_worst(4, 4, step=0.05)
        assert reports[0].rho >= 1.1506 - 1e-6
        target = canonical_form(GAP_TRIGGERS, 4)
        gap = [r for r in reports if canonical_form(r.instance.trigger_sets, 4) == target]
        assert len(gap) == 1
        assert gap[0].rho >= 1.1506 - 1e-6
        assert 0.7 < gap[0].p_star < 0.75
