"""Exact oracles: the full posterior over rankings and Kemeny by subset DP.

Under a uniform prior the posterior of the true ranking is proportional to
``gamma ** d(sigma, D)``. Everything here works with log weights over exact
integer distances; posterior ties are detected with an absolute
log-probability tolerance of ``LOG_TIE_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from ._subset_dp import SubsetDP
from .core import PairwiseDataset, Ranking, _perm_table, distances_of_orders
from .errors import CapacityError, InvalidArgument
from .selection import (
    TIE_CAP,
    SelectionResult,
    _check_k,
    _check_policy,
    select_by_values,
)
from .seeding import as_rng

POSTERIOR_MAX_M = 8
KEMENY_MAX_M = 20
LOG_TIE_TOL = 1e-9


def _logsumexp(x: np.ndarray) -> float:
    top = float(np.max(x))
    return top + math.log(float(np.sum(np.exp(x - top))))


def _group_logsumexp(keys: np.ndarray, logw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inv = np.unique(keys, return_inverse=True)
    top = np.full(uniq.size, -np.inf)
    np.maximum.at(top, inv, logw)
    acc = np.zeros(uniq.size)
    np.add.at(acc, inv, np.exp(logw - top[inv]))
    return uniq, top + np.log(acc)


@dataclass(frozen=True, eq=False)
class PosteriorTable:
    """``Pr[true ranking = sigma | D]`` for every ranking (lexicographic rows)."""

    gamma: float
    m: int
    orders: np.ndarray
    distances: np.ndarray
    log_weights: np.ndarray
    log_normalizer: float

    @property
    def normalizer(self) -> float:
        return math.exp(self.log_normalizer)

    @property
    def log_probabilities(self) -> np.ndarray:
        return self.log_weights - self.log_normalizer

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_probabilities)

    def probability(self, sigma: Ranking) -> float:
        idx = _lex_index(sigma.order)
        return float(np.exp(self.log_weights[idx] - self.log_normalizer))


def _lex_index(order) -> int:
    # rank of a permutation among itertools.permutations(range(m))
    remaining = sorted(order)
    idx = 0
    for i, a in enumerate(order):
        r = remaining.index(a)
        idx += r * math.factorial(len(order) - 1 - i)
        remaining.pop(r)
    return idx


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise InvalidArgument(f"gamma must lie in (0, 1), got {gamma}")
    return gamma


def posterior_over_rankings(D: PairwiseDataset, gamma: float) -> PosteriorTable:
    gamma = _check_gamma(gamma)
    if D.m > POSTERIOR_MAX_M:
        raise CapacityError(
            f"posterior enumeration is capped at m <= {POSTERIOR_MAX_M} (got m={D.m}); "
            "use rankselect.mcmc.estimate_top_marginals instead"
        )
    orders = _perm_table(D.m)
    d = distances_of_orders(orders, D)
    logw = d * math.log(gamma)
    return PosteriorTable(gamma, D.m, orders, d, logw, _logsumexp(logw))


def top_alternative_log_marginals(table: PosteriorTable) -> np.ndarray:
    keys, logm = _group_logsumexp(table.orders[:, 0].astype(np.int64), table.log_weights)
    out = np.full(table.m, -np.inf)
    out[keys] = logm - table.log_normalizer
    return out


def top_alternative_marginals(table: PosteriorTable) -> np.ndarray:
    """``Pr[top of the true ranking = a | D]`` per alternative."""
    return np.exp(top_alternative_log_marginals(table))


def optimal_objective1(
    D: PairwiseDataset, gamma: float, k: int, tie_policy: str = "all", seed=None
) -> SelectionResult:
    """k-subsets maximizing the probability of containing the true top alternative."""
    _check_k(k, D.m)
    logm = top_alternative_log_marginals(posterior_over_rankings(D, gamma))
    res = select_by_values(logm, k, tie_policy, seed, tol=LOG_TIE_TOL)
    marg = np.exp(logm)
    return replace(res, score=float(marg[sorted(res.chosen)].sum()), values=tuple(marg.tolist()))


def _best_groups(keys: np.ndarray, logw: np.ndarray, log_norm: float):
    uniq, logmass = _group_logsumexp(keys, logw)
    top = logmass.max()
    winners = uniq[logmass >= top - LOG_TIE_TOL]
    mass = {int(u): float(np.exp(lm - log_norm)) for u, lm in zip(uniq, logmass)}
    return winners, mass


def _pick(members: list, tie_policy: str, seed):
    if tie_policy == "random" and len(members) > 1:
        return members[int(as_rng(seed).integers(len(members)))], True
    return members[0], tie_policy != "all" and len(members) > 1


def optimal_objective2(
    D: PairwiseDataset, gamma: float, k: int, tie_policy: str = "all", seed=None
) -> SelectionResult:
    """The k-subset most likely to equal the true top-k set."""
    _check_k(k, D.m)
    _check_policy(tie_policy)
    table = posterior_over_rankings(D, gamma)
    top = table.orders[:, :k].astype(np.int64)
    keys = np.bitwise_or.reduce(np.left_shift(1, top), axis=1)
    winners, mass = _best_groups(keys, table.log_weights, table.log_normalizer)
    members = sorted(
        (frozenset(a for a in range(D.m) if int(w) >> a & 1) for w in winners), key=sorted
    )
    chosen, broke = _pick(members, tie_policy, seed)
    return SelectionResult(
        chosen=chosen,
        score=mass[sum(1 << a for a in chosen)],
        tie_set=tuple(members[:TIE_CAP]),
        tie_count=len(members),
        tie_broken=broke,
        seed=seed if broke and tie_policy == "random" else None,
    )


def optimal_objective3(
    D: PairwiseDataset, gamma: float, k: int, tie_policy: str = "all", seed=None
) -> SelectionResult:
    """The ordered k-tuple most likely to equal the true k-prefix."""
    _check_k(k, D.m)
    _check_policy(tie_policy)
    table = posterior_over_rankings(D, gamma)
    m = D.m
    radix = m ** np.arange(k - 1, -1, -1, dtype=np.int64)
    keys = table.orders[:, :k].astype(np.int64) @ radix
    winners, mass = _best_groups(keys, table.log_weights, table.log_normalizer)

    def decode(key: int) -> tuple[int, ...]:
        return tuple(int(key // int(r)) % m for r in radix)

    members = sorted(decode(int(w)) for w in winners)
    chosen, broke = _pick(members, tie_policy, seed)
    return SelectionResult(
        chosen=chosen,
        score=mass[int(np.dot(chosen, radix))],
        tie_set=tuple(members[:TIE_CAP]),
        tie_count=len(members),
        tie_broken=broke,
        seed=seed if broke and tie_policy == "random" else None,
    )


# --- Kemeny / minimum feedback ranking ---------------------------------------


@dataclass(frozen=True)
class KemenyResult:
    distance: int
    rankings: tuple[Ranking, ...]
    count: int

    @property
    def truncated(self) -> bool:
        return self.count > len(self.rankings)


def kemeny_table(D: PairwiseDataset) -> SubsetDP:
    """Subset DP over top-sets; ``-value[S]`` is the least cost of ordering ``S`` first.

    Appending ``a`` below the set ``S`` charges ``n_ba`` for every ``b``
    outside ``S`` and ``a``, since ``a`` is ranked above all of them.
    """
    if D.m > KEMENY_MAX_M:
        raise CapacityError(f"Kemeny DP is capped at m <= {KEMENY_MAX_M}, got m={D.m}")
    colsum = D.counts.sum(axis=0)
    return SubsetDP(-colsum, -D.counts.T, D.m)


def kemeny_dp(D: PairwiseDataset, cap: int = TIE_CAP) -> KemenyResult:
    """All rankings minimizing ``dataset_distance`` (at most ``cap`` listed)."""
    dp = kemeny_table(D)
    full = (1 << D.m) - 1
    orders = dp.enumerate(full, cap)
    return KemenyResult(
        distance=int(-dp.value[full]),
        rankings=tuple(Ranking(o) for o in orders),
        count=int(dp.count[full]),
    )


def sample_kemeny(D: PairwiseDataset, rng=None) -> Ranking:
    """A Kemeny ranking drawn uniformly among all co-optimal ones."""
    dp = kemeny_table(D)
    return Ranking(dp.sample(np.array([(1 << D.m) - 1]), as_rng(rng)))


def kemeny_brute_force(D: PairwiseDataset) -> tuple[int, list[Ranking]]:
    """Reference: minimum of ``dataset_distance`` over all ``m!`` rankings."""
    if D.m > POSTERIOR_MAX_M:
        raise CapacityError(f"brute force is capped at m <= {POSTERIOR_MAX_M}")
    orders = _perm_table(D.m)
    d = distances_of_orders(orders, D)
    best = int(d.min())
    return best, [Ranking(o) for o in orders[d == best]]


class HighNoiseThreshold(NamedTuple):
    """``gamma' = 1 - 2**-exponent``; ``exponent = n * C(m, 2)``."""

    gamma_prime: float
    exponent: int

    def above(self, extra_halvings: int = 1) -> float:
        """A noise level strictly above the threshold: ``1 - 2**-(exponent + extra)``.

        With ``extra_halvings=1`` this is ``(1 + gamma') / 2``.
        """
        return 1.0 - math.ldexp(1.0, -(self.exponent + extra_halvings))


def high_noise_threshold(n: int, m: int) -> HighNoiseThreshold:
    """Noise level above which extended scoring and scored tuples are optimal.

    For large exponents ``2**-exponent`` underflows and ``gamma_prime`` rounds
    to 1.0; the exact threshold is then carried by ``exponent``.
    """
    if n < 1 or m < 2:
        raise InvalidArgument(f"need n >= 1 and m >= 2, got n={n}, m={m}")
    e = n * math.comb(m, 2)
    return HighNoiseThreshold(1.0 - math.ldexp(1.0, -e), e)
