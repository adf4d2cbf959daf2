"""Digit sieve unit tests.

Deep runs and the full ten-prime profile live in the acceptance suite;
here the sieve plumbing is exercised on shallow levels, synthetic
survivor lists, and the inequality filter's arithmetic.
"""

import pytest

from moonsieve import haupt, sieve
from moonsieve.sieve import (
    BOUNDS_DEFAULT,
    CAVEAT_13,
    SUPPORTED_PRIMES,
    SieveNode,
    Survivor,
    attach_labels,
    class_cplus,
    conclude,
    filter_inequalities,
    run,
    run_all,
    true_branch_ok,
)
from moonsieve.series import pow3

C_59A_12 = [1, 1, 2, 2, 3, 3, 4, 5, 6, 7, 10, 10]
SEEDS_17 = (7, 14, 50, 92)


def survivor(p, residues, depth=29):
    return Survivor(p=p, depth=depth, residues=residues)


class TestSieveNode:
    def test_residue_bound(self):
        SieveNode(17, 2, (8, 0, 3, 5))
        with pytest.raises(ValueError):
            SieveNode(17, 2, (9, 0, 0, 0))
        with pytest.raises(ValueError):
            SieveNode(17, 2, (-1, 0, 0, 0))


class TestClassCplus:
    def test_matches_class_coefficients(self):
        t = class_cplus(59, terms=12)
        assert [t[n] for n in range(1, 13)] == C_59A_12


class TestRunValidation:
    def test_unsupported_prime(self):
        with pytest.raises(ValueError, match="unsupported"):
            run(12, 3)

    def test_depth_bounds(self):
        with pytest.raises(ValueError):
            run(71, 0)
        with pytest.raises(ValueError):
            run(71, 33)

    def test_start_levels_must_agree(self):
        start = [SieveNode(71, 1, (1, 1, 1, 2)),
                 SieveNode(71, 2, (1, 1, 1, 2))]
        with pytest.raises(ValueError, match="one level"):
            run(71, 3, start=start)

    def test_start_prime_must_match(self):
        with pytest.raises(ValueError, match="different prime"):
            run(71, 3, start=[SieveNode(59, 1, (1, 1, 2, 0))])

    def test_start_cannot_exceed_depth(self):
        with pytest.raises(ValueError, match="deeper"):
            run(71, 2, start=[SieveNode(71, 3, (1, 1, 1, 2))])


class TestShallowRuns:
    def test_level_one_keeps_everything_at_71(self):
        out = run(71, 1)
        assert len(out) == 81
        assert all(s.depth == 1 for s in out)
        assert (1, 1, 1, 2) in [s.residues for s in out]

    def test_resume_narrows_to_true_branch(self):
        start = [SieveNode(71, 1, (1, 1, 1, 2))]
        out = run(71, 2, start=start)
        assert [s.residues for s in out] == [(1, 1, 1, 2)]

    def test_observer_sees_each_level(self):
        calls = []
        run(71, 1, observer=lambda level, nodes: calls.append((level, nodes)))
        assert [level for level, _ in calls] == [1]
        assert len(calls[0][1]) == 81
        assert all(isinstance(n, SieveNode) for n in calls[0][1])

    def test_true_branches_never_pruned_shallow(self):
        assert true_branch_ok(17, 3)
        assert true_branch_ok(59, 3)


class TestAttachLabels:
    def test_matches_modulo_depth(self):
        s = survivor(17, tuple(v % 9 for v in SEEDS_17), depth=2)
        out = attach_labels([s])
        assert out[0].label == "17A"

    def test_companion_label(self):
        s = survivor(17, (1, 0, 0, 1), depth=1)
        out = attach_labels([s])
        assert out[0].label == "Γ0(34|2)+"

    def test_unmatched_is_none(self):
        s = survivor(17, (5, 5, 5, 5), depth=2)
        with pytest.raises(ValueError):
            SieveNode(17, 1, (5, 5, 5, 5))
        out = attach_labels([s])
        assert out[0].label is None


class TestFilterInequalities:
    def setup_method(self):
        self.row = haupt.seed_by_label("17A")
        self.j = haupt.j_coefficients(5)

    def filt(self, survivors):
        return filter_inequalities(survivors, self.row, self.j)

    def test_true_class_kept(self):
        kept = self.filt([survivor(17, SEEDS_17)])
        assert len(kept) == 1

    def test_depth_floor_enforced(self):
        with pytest.raises(ValueError, match="26"):
            self.filt([survivor(17, SEEDS_17, depth=12)])

    def test_parity_violation_removed(self):
        assert self.filt([survivor(17, (8, 14, 50, 92))]) == []

    def test_small_representative_removed(self):
        # the companion starts below the class coefficients, so the
        # dominance condition fails at n=1
        assert self.filt([survivor(17, (3, 2, 6, 12))]) == []

    def test_huge_representative_removed(self):
        zombie = (7, 14, 50 + pow3(27), 92)
        assert self.filt([survivor(17, zombie)]) == []

    def test_mixed_list(self):
        kept = self.filt([
            survivor(17, (3, 2, 6, 12)),
            survivor(17, SEEDS_17),
            survivor(17, (7, 14, 50 + pow3(27), 92)),
        ])
        assert [s.residues for s in kept] == [SEEDS_17]


class TestConclude:
    def test_depth_floor(self):
        with pytest.raises(ValueError, match="26"):
            conclude(17, depth=12)

    def test_unsupported_prime(self):
        with pytest.raises(ValueError, match="unsupported"):
            conclude(11)

    def test_vanishing_verdict_from_survivors(self):
        survivors = [
            survivor(17, (3, 2, 6, 12)),
            survivor(17, SEEDS_17),
        ]
        v = conclude(17, survivors=survivors)
        assert v.verdict == "H1_vanishes"
        assert v.extension_checked
        assert v.note is None
        assert v.diagnostics == []
        assert [s.label for s in v.filtered] == ["17A"]

    def test_order_13_carries_caveat(self):
        v = conclude(13, survivors=[survivor(13, (12, 28, 132, 258))])
        assert v.verdict == "H1_vanishes"
        assert v.note == CAVEAT_13

    def test_no_survivors_is_inconclusive(self):
        v = conclude(17, survivors=[])
        assert v.verdict == "inconclusive"
        assert not v.extension_checked
        assert "unique" in v.diagnostics[0]

    def test_wrong_unique_survivor_is_inconclusive(self):
        v = conclude(17, survivors=[survivor(17, (9, 14, 50, 92))])
        assert v.verdict == "inconclusive"
        assert "differs from the class seeds" in v.diagnostics[0]

    def test_corrupt_class_table_is_inconclusive(self):
        bad = dict(class_cplus(17))
        bad[44] += 2
        v = conclude(17, survivors=[survivor(17, SEEDS_17)], cplus=bad)
        assert v.verdict == "inconclusive"
        assert v.diagnostics


class TestRunAll:
    def test_shallow_all(self):
        seen = []
        out = run_all(1, primes=(59, 71),
                      observer=lambda p, level, nodes: seen.append((p, level)))
        assert sorted(out) == [59, 71]
        assert seen == [(59, 1), (71, 1)]
        labels59 = {s.label for s in out[59] if s.label}
        assert "59A" in labels59

    def test_supported_primes_are_the_target_orders(self):
        assert SUPPORTED_PRIMES == (13, 17, 19, 23, 29, 31, 41, 47, 59, 71)
        assert BOUNDS_DEFAULT == (4, 16)
