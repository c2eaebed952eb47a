"""Extended scoring, scored tuples, and the baseline voting rules.

Tie policies
------------
``"all"``     report the full tie family; ``chosen`` is its lexicographically
              smallest member.
``"lex"``     deterministic: boundary ties go to the smaller indices.
``"random"``  uniform over the tie family, drawn from ``seed``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ._subset_dp import MAX_M as DP_MAX_M
from ._subset_dp import SubsetDP, mask_of
from .core import PairwiseDataset, Ranking, _check_tuple, dataset_from_rankings
from .errors import InvalidArgument
from .seeding import as_rng

TIE_POLICIES = ("all", "random", "lex")
TIE_CAP = 10**4
EXHAUSTIVE_TUPLE_LIMIT = 10**5


@dataclass(frozen=True)
class SelectionResult:
    """A selected k-subset (``frozenset``) or ordered k-tuple (``tuple``).

    ``tie_set`` lists every subset/tuple achieving the optimal score, in a
    stable order, truncated at ``TIE_CAP`` entries; ``tie_count`` is the
    untruncated size.
    """

    chosen: frozenset[int] | tuple[int, ...]
    score: float
    tie_set: tuple = ()
    tie_count: int = 1
    tie_broken: bool = False
    seed: int | None = None
    values: tuple | None = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return len(self.chosen)

    @property
    def truncated(self) -> bool:
        return self.tie_count > len(self.tie_set)


def _check_k(k: int, m: int) -> None:
    if not 1 <= k <= m:
        raise InvalidArgument(f"k must lie in 1..{m}, got {k}")


def _check_policy(tie_policy: str) -> None:
    if tie_policy not in TIE_POLICIES:
        raise InvalidArgument(f"tie policy must be one of {TIE_POLICIES}, got {tie_policy!r}")


def _check_profile(profile: Sequence[Ranking]) -> int:
    if isinstance(profile, PairwiseDataset):
        raise InvalidArgument("this rule needs complete rankings, not a pairwise dataset")
    if len(profile) == 0:
        raise InvalidArgument("profile must contain at least one ranking")
    m = profile[0].m
    if any(sigma.m != m for sigma in profile):
        raise InvalidArgument("all rankings in a profile must have the same m")
    return m


# --- the argmax^k family -----------------------------------------------------


def topk_family(values, k: int, tol: float = 0.0) -> tuple[list[int], list[int], int]:
    """Split alternatives around the k-th largest value.

    Returns ``(above, boundary, r)``: every set in the arg-max-k family is
    ``above`` plus ``r`` members of ``boundary``. Values within ``tol`` of the
    k-th value count as tied with it.
    """
    values = np.asarray(values, dtype=np.float64 if tol else None)
    order = np.argsort(-values, kind="stable")
    kth = values[order[k - 1]]
    above = sorted(int(a) for a in np.flatnonzero(values > kth + tol))
    boundary = sorted(int(a) for a in np.flatnonzero(np.abs(values - kth) <= tol))
    return above, boundary, k - len(above)


def select_by_values(
    values,
    k: int,
    tie_policy: str = "all",
    seed: int | None = None,
    tol: float = 0.0,
) -> SelectionResult:
    """Top-k selection on arbitrary per-alternative values."""
    values = np.asarray(values)
    m = values.size
    _check_k(k, m)
    _check_policy(tie_policy)
    above, boundary, r = topk_family(values, k, tol)
    tie_count = math.comb(len(boundary), r)
    ties = []
    for fill in itertools.islice(itertools.combinations(boundary, r), TIE_CAP):
        ties.append(frozenset(above) | frozenset(fill))
    ties.sort(key=sorted)
    if tie_policy == "random" and tie_count > 1:
        rng = as_rng(seed)
        fill = rng.choice(boundary, size=r, replace=False)
        chosen = frozenset(above) | frozenset(int(a) for a in fill)
    else:
        chosen = frozenset(above) | frozenset(boundary[:r])
    score = values[sorted(chosen)].sum()
    return SelectionResult(
        chosen=chosen,
        score=score.item() if hasattr(score, "item") else score,
        tie_set=tuple(ties),
        tie_count=tie_count,
        tie_broken=tie_policy != "all" and tie_count > 1,
        seed=seed if tie_policy == "random" and tie_count > 1 else None,
        values=tuple(values.tolist()),
    )


def order_by_scores(scores, rng) -> np.ndarray:
    """All alternatives sorted by score, ties broken by a random permutation.

    Taking the first k entries gives a uniform member of the arg-max-k family
    for every k at once, and the selections are nested in k.
    """
    scores = np.asarray(scores)
    priority = rng.permutation(scores.size)
    return np.lexsort((priority, -scores))


# --- extended scoring --------------------------------------------------------


def extended_scores(D: PairwiseDataset) -> np.ndarray:
    """``sc(a) = sum_b n_ab``: Borda on profiles, weighted outdegree on comparisons."""
    return D.counts.sum(axis=1)


def select_top_k(
    D: PairwiseDataset, k: int, tie_policy: str = "all", seed: int | None = None
) -> SelectionResult:
    """The extended scoring method: the k alternatives with the largest ``sc``."""
    _check_k(k, D.m)
    return select_by_values(extended_scores(D), k, tie_policy, seed)


# --- scored tuples -----------------------------------------------------------


def scored_tuple_value(tup: Sequence[int], D: PairwiseDataset) -> int:
    """``sum_i sc(a_i) - sum_{i<j} n_{a_j a_i}``."""
    tup = _check_tuple(tup, D.m)
    idx = np.asarray(tup)
    sc = extended_scores(D)
    return int(sc[idx].sum() - np.tril(D.counts[np.ix_(idx, idx)], -1).sum())


def _tuples_exhaustive(D: PairwiseDataset, k: int) -> tuple[int, list[tuple[int, ...]]]:
    m = D.m
    sc = extended_scores(D)
    tuples = np.array(list(itertools.permutations(range(m), k)), dtype=np.int64).reshape(-1, k)
    vals = sc[tuples].sum(axis=1)
    for i in range(k - 1):
        for j in range(i + 1, k):
            vals -= D.counts[tuples[:, j], tuples[:, i]]
    best = int(vals.max())
    return best, [tuple(map(int, t)) for t in tuples[vals == best]]


def _tuples_branch_and_bound(D: PairwiseDataset, k: int, cap: int = TIE_CAP, rng=None):
    """Depth-first search over ordered prefixes, best-score-first.

    The optimistic completion adds the largest remaining scores with no
    further within-tuple distance; that never underestimates because the
    distance term is non-negative. Prunes only when the bound is strictly
    below the incumbent so every co-optimal tuple is reached. With ``rng``,
    one co-optimal tuple is also drawn uniformly by reservoir sampling.
    """
    m = D.m
    sc = [int(x) for x in extended_scores(D)]
    n = D.counts.tolist()
    by_score = sorted(range(m), key=lambda a: (-sc[a], a))
    best = -(1 << 62)
    found: list[tuple[int, ...]] = []
    total = 0
    pick: tuple[int, ...] | None = None
    prefix: list[int] = []
    used = [False] * m

    def bound(value: int, need: int) -> int:
        got = 0
        for a in by_score:
            if need == 0:
                break
            if not used[a]:
                got += sc[a]
                need -= 1
        return value + got

    def rec(value: int):
        nonlocal best, total, found, pick
        if len(prefix) == k:
            if value > best:
                best, total, found = value, 0, []
            if value == best:
                total += 1
                if len(found) < cap:
                    found.append(tuple(prefix))
                if rng is not None and rng.random() * total < 1.0:
                    pick = tuple(prefix)
            return
        if bound(value, k - len(prefix)) < best:
            return
        for a in by_score:
            if used[a]:
                continue
            gain = sc[a] - sum(n[a][b] for b in prefix)
            used[a] = True
            prefix.append(a)
            rec(value + gain)
            prefix.pop()
            used[a] = False

    rec(0)
    found.sort()
    return best, found, total, pick


def tuple_dp(D: PairwiseDataset, depth: int) -> SubsetDP:
    """Subset DP whose layer-``c`` values are the best ``c``-tuple scores per set."""
    return SubsetDP(extended_scores(D), D.counts, depth)


def _tuples_dp(D: PairwiseDataset, k: int, cap: int = TIE_CAP):
    dp = tuple_dp(D, k)
    best, masks = dp.best_masks(k)
    found: list[tuple[int, ...]] = []
    for mask in masks:
        found.extend(dp.enumerate(int(mask), cap - len(found)))
        if len(found) >= cap:
            break
    found.sort()
    return best, found, int(dp.count[masks].sum()), dp, masks


def select_top_tuple(
    D: PairwiseDataset,
    k: int,
    tie_policy: str = "all",
    seed: int | None = None,
    algorithm: str = "auto",
) -> SelectionResult:
    """The scored tuples method: a k-tuple maximizing :func:`scored_tuple_value`.

    ``algorithm`` is one of ``"exhaustive"``, ``"dp"`` (subset dynamic
    programme, ``m <= 20``), ``"branch_and_bound"`` or ``"auto"``, which picks
    exhaustive search for small tuple counts, then the DP, then branch and
    bound. All three return the same tie set.
    """
    m = D.m
    _check_k(k, m)
    _check_policy(tie_policy)
    if algorithm == "auto":
        if math.perm(m, k) <= EXHAUSTIVE_TUPLE_LIMIT:
            algorithm = "exhaustive"
        elif m <= DP_MAX_M:
            algorithm = "dp"
        else:
            algorithm = "branch_and_bound"
    rng = as_rng(seed) if tie_policy == "random" else None
    if algorithm == "exhaustive":
        best, found = _tuples_exhaustive(D, k)
        total = len(found)
        pick = found[int(rng.integers(total))] if rng is not None else None
        found = found[:TIE_CAP]
    elif algorithm == "dp":
        best, found, total, dp, masks = _tuples_dp(D, k)
        pick = dp.sample(masks, rng) if rng is not None else None
    elif algorithm == "branch_and_bound":
        best, found, total, pick = _tuples_branch_and_bound(D, k, rng=rng)
    else:
        raise InvalidArgument(f"unknown tuple algorithm {algorithm!r}")

    broke = tie_policy != "all" and total > 1
    chosen = pick if pick is not None and total > 1 else found[0]
    return SelectionResult(
        chosen=tuple(chosen),
        score=best,
        tie_set=tuple(found),
        tie_count=total,
        tie_broken=broke,
        seed=seed if tie_policy == "random" and total > 1 else None,
    )


# --- baselines on profiles ---------------------------------------------------


def _positions(profile: Sequence[Ranking]) -> np.ndarray:
    return np.array([sigma.positions for sigma in profile], dtype=np.int64)


def borda(profile: Sequence[Ranking]) -> np.ndarray:
    """Per-alternative ``sum_i (m - sigma_i(a))``."""
    m = _check_profile(profile)
    return (m - _positions(profile)).sum(axis=0)


def plurality_scores(profile: Sequence[Ranking]) -> np.ndarray:
    m = _check_profile(profile)
    return np.bincount([sigma.order[0] for sigma in profile], minlength=m)


def approval_scores(profile: Sequence[Ranking], k: int) -> np.ndarray:
    m = _check_profile(profile)
    _check_k(k, m)
    return (_positions(profile) <= k).sum(axis=0)


def maximin(profile: Sequence[Ranking]) -> np.ndarray:
    """``min over b != a`` of the number of voters ranking ``a`` above ``b``."""
    m = _check_profile(profile)
    if m == 1:
        return np.zeros(1, dtype=np.int64)
    counts = dataset_from_rankings(profile).counts.copy()
    np.fill_diagonal(counts, np.iinfo(np.int64).max)
    return counts.min(axis=1)


def copeland_outdegree(D: PairwiseDataset) -> np.ndarray:
    """Majority-tournament outdegree ``|{b : n_ab > n_ba}|``."""
    return (D.counts > D.counts.T).sum(axis=1)


def plurality(profile, k: int, tie_policy: str = "all", seed: int | None = None) -> SelectionResult:
    return select_by_values(plurality_scores(profile), k, tie_policy, seed)


def k_approval(profile, k: int, tie_policy: str = "all", seed: int | None = None) -> SelectionResult:
    """Each voter approves their top k; selects the k most approved."""
    return select_by_values(approval_scores(profile, k), k, tie_policy, seed)


def select_maximin(profile, k: int, tie_policy: str = "all", seed: int | None = None) -> SelectionResult:
    return select_by_values(maximin(profile), k, tie_policy, seed)


def select_copeland(D: PairwiseDataset, k: int, tie_policy: str = "all", seed: int | None = None) -> SelectionResult:
    return select_by_values(copeland_outdegree(D), k, tie_policy, seed)


def select_borda(profile, k: int, tie_policy: str = "all", seed: int | None = None) -> SelectionResult:
    return select_by_values(borda(profile), k, tie_policy, seed)


__all__ = [
    "SelectionResult",
    "TIE_POLICIES",
    "approval_scores",
    "borda",
    "copeland_outdegree",
    "extended_scores",
    "k_approval",
    "mask_of",
    "maximin",
    "order_by_scores",
    "plurality",
    "plurality_scores",
    "scored_tuple_value",
    "select_borda",
    "select_by_values",
    "select_copeland",
    "select_maximin",
    "select_top_k",
    "select_top_tuple",
    "topk_family",
    "tuple_dp",
]
