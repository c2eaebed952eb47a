import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_profile, random_strict
from oracles import distance, tuple_score
from rankselect.core import PairwiseDataset, Ranking, dataset_distance, dataset_from_rankings
from rankselect.errors import InvalidArgument
from rankselect.exact import kemeny_brute_force
from rankselect.selection import (
    approval_scores,
    borda,
    copeland_outdegree,
    extended_scores,
    k_approval,
    maximin,
    plurality,
    scored_tuple_value,
    select_borda,
    select_copeland,
    select_maximin,
    select_top_k,
    select_top_tuple,
    topk_family,
)

A, B, C = 0, 1, 2
ABC = Ranking([A, B, C])


def profile_of(*orders):
    return [Ranking(o) for o in orders]


def strict_datasets(max_m=6, max_n=4):
    return st.tuples(st.integers(2, max_m), st.integers(1, max_n), st.integers(0, 2**32 - 1)).map(
        lambda t: random_strict(np.random.default_rng(t[2]), t[0], t[1])
    )


class TestExtendedScoring:
    def test_d3_scores(self, d3):
        assert extended_scores(d3).tolist() == [3, 1, 2]

    def test_zero_dataset(self):
        assert extended_scores(PairwiseDataset.zeros(4)).tolist() == [0, 0, 0, 0]

    def test_unanimous_profile(self):
        D = dataset_from_rankings([ABC, ABC])
        assert extended_scores(D).tolist() == [4, 2, 0] == borda([ABC, ABC]).tolist()

    def test_top_k_d3(self, d3):
        res = select_top_k(d3, 1)
        assert res.chosen == {A} and res.tie_set == (frozenset({A}),) and not res.tie_broken
        assert select_top_k(d3, 2).chosen == {A, C}
        assert select_top_k(d3, 2).score == 5

    def test_total_tie(self):
        res = select_top_k(PairwiseDataset.zeros(3), 2)
        assert set(res.tie_set) == {frozenset(s) for s in itertools.combinations(range(3), 2)}
        assert res.tie_count == 3

    def test_lex_and_random_policies(self):
        D = PairwiseDataset.zeros(5)
        lex = select_top_k(D, 2, "lex")
        assert lex.chosen == {0, 1} and lex.tie_broken
        picks = {select_top_k(D, 2, "random", seed=s).chosen for s in range(40)}
        assert len(picks) > 3
        again = select_top_k(D, 2, "random", seed=7)
        assert again == select_top_k(D, 2, "random", seed=7)
        assert again.seed == 7 and again.chosen in again.tie_set

    @pytest.mark.parametrize("k", [0, 4])
    def test_k_out_of_range(self, d3, k):
        with pytest.raises(InvalidArgument):
            select_top_k(d3, k)

    def test_unknown_policy(self, d3):
        with pytest.raises(InvalidArgument):
            select_top_k(d3, 1, "first")

    @given(strict_datasets())
    def test_score_conservation(self, D):
        assert extended_scores(D).sum() == D.n * math.comb(D.m, 2)

    @given(strict_datasets(), st.data())
    def test_tie_set_members_share_score(self, D, data):
        k = data.draw(st.integers(1, D.m))
        res = select_top_k(D, k)
        sc = extended_scores(D)
        scores = {int(sc[sorted(s)].sum()) for s in res.tie_set}
        assert scores == {res.score}
        assert res.chosen in res.tie_set
        assert res.score == max(int(sc[list(s)].sum()) for s in itertools.combinations(range(D.m), k))

    @given(strict_datasets(), st.data())
    def test_nesting_with_lex_policy(self, D, data):
        for k in range(1, D.m):
            assert select_top_k(D, k, "lex").chosen < select_top_k(D, k + 1, "lex").chosen

    @given(strict_datasets(), st.permutations(range(6)))
    def test_permutation_equivariance(self, D, perm):
        perm = [a for a in perm if a < D.m]
        relabeled = D.relabel(perm)
        sc, sc2 = extended_scores(D), extended_scores(relabeled)
        for a in range(D.m):
            assert sc2[perm[a]] == sc[a]
        for k in range(1, D.m + 1):
            mapped = {frozenset(perm[a] for a in s) for s in select_top_k(D, k).tie_set}
            assert mapped == set(select_top_k(relabeled, k).tie_set)


class TestTopkFamily:
    def test_split(self):
        above, boundary, r = topk_family([5, 3, 3, 3, 1], 2)
        assert (above, boundary, r) == ([0], [1, 2, 3], 1)

    def test_tolerance(self):
        above, boundary, r = topk_family([1.0, 1.0 + 1e-12, 0.5], 1, tol=1e-9)
        assert (above, boundary, r) == ([], [0, 1], 1)


class TestScoredTuples:
    def test_values(self, d3):
        assert scored_tuple_value((A, C), d3) == 4
        assert scored_tuple_value((B, A), d3) == 2
        assert scored_tuple_value((A, B, C), d3) == 4
        assert scored_tuple_value((A,), d3) == 3

    def test_duplicates_rejected(self, d3):
        with pytest.raises(InvalidArgument):
            scored_tuple_value((A, A), d3)

    def test_select_d3(self, d3):
        res = select_top_tuple(d3, 1)
        assert res.chosen == (A,) and res.score == 3
        res = select_top_tuple(d3, 2)
        assert set(res.tie_set) == {(A, C), (C, A), (A, B)} and res.score == 4
        res = select_top_tuple(d3, 3)
        assert set(res.tie_set) == {(A, B, C), (A, C, B), (C, A, B)} and res.score == 4

    @given(strict_datasets(max_m=5))
    def test_full_tuple_is_score_total_minus_distance(self, D):
        total = int(extended_scores(D).sum())
        for o in itertools.permutations(range(D.m)):
            assert scored_tuple_value(o, D) == total - dataset_distance(Ranking(o), D)

    @settings(max_examples=60)
    @given(strict_datasets(max_m=6), st.data())
    def test_algorithms_agree(self, D, data):
        k = data.draw(st.integers(1, D.m))
        results = [select_top_tuple(D, k, algorithm=alg) for alg in ("exhaustive", "dp", "branch_and_bound")]
        ref = results[0]
        brute = {}
        for t in itertools.permutations(range(D.m), k):
            brute[t] = tuple_score(t, D.counts)
        best = max(brute.values())
        assert ref.score == best
        assert set(ref.tie_set) == {t for t, v in brute.items() if v == best}
        for res in results[1:]:
            assert res.score == ref.score
            assert res.tie_set == ref.tie_set
            assert res.tie_count == ref.tie_count

    @pytest.mark.parametrize("algorithm", ["exhaustive", "dp", "branch_and_bound"])
    def test_random_tie_break_is_uniform(self, algorithm):
        D = PairwiseDataset.zeros(4)
        N = 2400
        seen = {}
        for s in range(N):
            t = select_top_tuple(D, 2, "random", seed=s, algorithm=algorithm).chosen
            seen[t] = seen.get(t, 0) + 1
        assert len(seen) == 12
        expected = N / 12
        chi2 = sum((c - expected) ** 2 / expected for c in seen.values())
        assert chi2 < 31.3  # 11 dof, p ~ 0.001

    def test_random_pick_in_tie_set(self, d3):
        for s in range(20):
            res = select_top_tuple(d3, 2, "random", seed=s)
            assert res.chosen in res.tie_set and res.tie_broken and res.seed == s

    def test_lex_pick(self, d3):
        assert select_top_tuple(d3, 2, "lex").chosen == (A, B)

    def test_large_m_uses_search(self):
        D = random_strict(np.random.default_rng(0), 24, 3)
        auto = select_top_tuple(D, 4)
        ref = select_top_tuple(D, 4, algorithm="exhaustive")
        assert (auto.score, auto.tie_set) == (ref.score, ref.tie_set)

    def test_unknown_algorithm(self, d3):
        with pytest.raises(InvalidArgument):
            select_top_tuple(d3, 2, algorithm="greedy")

    @pytest.mark.parametrize("m", range(2, 7))
    def test_bridge_to_kemeny_and_scores(self, m):
        rng = np.random.default_rng(m)
        for _ in range(20):
            D = random_strict(rng, m, int(rng.integers(1, 4)))
            _, optima = kemeny_brute_force(D)
            assert set(select_top_tuple(D, m).tie_set) == {r.order for r in optima}
            sc = extended_scores(D)
            assert set(select_top_tuple(D, 1).tie_set) == {(int(a),) for a in np.flatnonzero(sc == sc.max())}


class TestProfileRules:
    def test_borda_examples(self):
        assert borda([ABC, ABC]).tolist() == [4, 2, 0]
        assert borda(profile_of((A, B, C), (C, B, A))).tolist() == [2, 2, 2]
        assert borda(profile_of((A, B, C), (A, C, B))).tolist() == [4, 1, 1]

    def test_borda_empty(self):
        with pytest.raises(InvalidArgument):
            borda([])

    @settings(max_examples=200)
    @given(st.integers(1, 8), st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_borda_identity(self, m, size, seed):
        prof = random_profile(np.random.default_rng(seed), m, size)
        assert np.array_equal(borda(prof), extended_scores(dataset_from_rankings(prof)))

    def test_select_borda(self):
        assert select_borda(profile_of((A, B, C), (A, C, B)), 1).chosen == {A}

    def test_plurality(self):
        prof = profile_of((A, B, C), (A, B, C), (B, C, A))
        assert plurality(prof, 1).chosen == {A}
        assert plurality(profile_of((A, B, C), (B, A, C), (C, A, B)), 1).tie_count == 3
        for k in (1, 2, 3):
            assert A in plurality([ABC] * 3, k, "random", seed=k).chosen

    def test_k_approval(self):
        prof = profile_of((A, B, C), (A, B, C), (B, C, A))
        assert approval_scores(prof, 2).tolist() == [2, 3, 1]
        assert k_approval(prof, 2).chosen == {A, B}
        full = k_approval(prof, 3)
        assert full.chosen == {A, B, C} and approval_scores(prof, 3).tolist() == [3, 3, 3]
        assert k_approval(profile_of((C, A, B)), 1).chosen == {C}

    def test_maximin(self):
        prof = profile_of((A, B, C), (A, B, C), (B, C, A))
        # no voter puts c above b, so c's minimum support is 0
        assert maximin(prof).tolist() == [2, 1, 0]
        assert maximin([ABC] * 4).tolist() == [4, 0, 0]
        assert maximin(profile_of((A, C, B), (B, C, A))).tolist() == [1, 1, 1]
        assert select_maximin(prof, 1).chosen == {A}

    def test_profile_rules_reject_datasets(self, d3):
        for rule in (borda, maximin):
            with pytest.raises(InvalidArgument):
                rule(d3)
        with pytest.raises(InvalidArgument):
            plurality(d3, 1)


class TestCopeland:
    def test_d3(self, d3):
        assert copeland_outdegree(d3).tolist() == [1, 0, 0]
        assert select_copeland(d3, 1).chosen == {A}

    def test_zero(self):
        assert copeland_outdegree(PairwiseDataset.zeros(4)).tolist() == [0, 0, 0, 0]

    @given(st.integers(2, 7), st.sampled_from([1, 3, 5]), st.integers(0, 2**32 - 1))
    def test_odd_n_has_no_majority_ties(self, m, n, seed):
        D = random_strict(np.random.default_rng(seed), m, n)
        assert copeland_outdegree(D).sum() == math.comb(m, 2)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_top_distance_sum_is_affine_in_score(m):
    # summing d over rankings with a fixed top gives C - (m-1)! sc(a)
    rng = np.random.default_rng(50 + m)
    f = math.factorial(m - 1)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        D = random_strict(rng, m, n)
        const = n * f * math.comb(m, 2) - f * n * math.comb(m - 1, 2) // 2
        sc = extended_scores(D)
        for a in range(m):
            total = sum(distance(o, D.counts) for o in itertools.permutations(range(m)) if o[0] == a)
            assert total == const - f * int(sc[a])
