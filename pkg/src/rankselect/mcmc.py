"""Metropolis-Hastings over rankings for top-alternative marginals.

The target is ``pi(sigma) ~ gamma ** d(sigma, D)``. Proposals swap a
uniformly chosen pair of adjacent positions; for ``x`` directly above ``y``
the swap changes the distance by ``n_xy - n_yx``, so each step is O(1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import PairwiseDataset, Ranking
from .errors import InvalidArgument
from .selection import SelectionResult, _check_k, select_by_values
from .seeding import as_rng, derive_rng

DEFAULT_BATCHES = 50


@dataclass(frozen=True)
class ChainConfig:
    steps: int
    burn_in: int
    thin: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.steps > self.burn_in >= 0:
            raise InvalidArgument(f"need steps > burn_in >= 0, got steps={self.steps}, burn_in={self.burn_in}")
        if self.thin < 1:
            raise InvalidArgument(f"thin must be >= 1, got {self.thin}")

    @classmethod
    def default(cls, steps: int, seed: int = 0, thin: int = 10) -> ChainConfig:
        """5% burn-in, keep every 10th state."""
        return cls(steps, steps // 20, thin, seed)


@dataclass(frozen=True)
class MarginalEstimate:
    estimates: np.ndarray
    stderr: np.ndarray
    samples: int


def _acceptance_table(D: PairwiseDataset, gamma: float):
    counts = D.counts
    delta = (counts - counts.T).tolist()
    span = max(1, int(np.abs(counts - counts.T).max()))
    # accept[dd] = gamma**dd for dd >= 1; dd <= 0 always accepted
    accept = [1.0] + [gamma**dd for dd in range(1, span + 1)]
    return delta, accept


def acceptance_probability(sigma: Ranking, i: int, D: PairwiseDataset, gamma: float) -> float:
    """Probability of accepting the swap of positions ``i`` and ``i + 1`` (0-based)."""
    x, y = sigma.order[i], sigma.order[i + 1]
    dd = int(D.counts[x, y] - D.counts[y, x])
    return 1.0 if dd <= 0 else gamma**dd


def mh_step(sigma: Ranking, D: PairwiseDataset, gamma: float, rng=None, position: int | None = None) -> Ranking:
    """One Metropolis-Hastings step from ``sigma``.

    ``position`` (0-based upper index of the swapped pair) overrides the
    uniform proposal, which is useful for checking the acceptance rule.
    """
    if sigma.m != D.m:
        raise InvalidArgument(f"size mismatch: {sigma.m} vs {D.m} alternatives")
    if sigma.m < 2:
        return sigma
    rng = as_rng(rng)
    i = int(rng.integers(sigma.m - 1)) if position is None else int(position)
    if rng.random() < acceptance_probability(sigma, i, D, gamma):
        order = list(sigma.order)
        order[i], order[i + 1] = order[i + 1], order[i]
        return Ranking(order)
    return sigma


def run_chain(
    D: PairwiseDataset,
    gamma: float,
    steps: int,
    rng,
    start: list[int] | None = None,
    burn_in: int = 0,
    thin: int = 1,
    record: str = "top",
):
    """Advance a chain ``steps`` times and return the recorded states.

    ``record="top"`` keeps the top alternative of each retained state;
    ``record="order"`` keeps the whole order as a tuple.
    """
    if not 0.0 < gamma <= 1.0:
        raise InvalidArgument(f"gamma must lie in (0, 1], got {gamma}")
    m = D.m
    rng = as_rng(rng)
    order = list(rng.permutation(m)) if start is None else list(start)
    order = [int(a) for a in order]
    if m < 2:
        kept = max(0, (steps - burn_in + thin - 1) // thin)
        return [order[0] if record == "top" else tuple(order)] * kept
    delta, accept = _acceptance_table(D, gamma)
    props = rng.integers(0, m - 1, size=steps).tolist()
    us = rng.random(steps).tolist()
    out = []
    keep_top = record == "top"
    next_keep = burn_in
    for t in range(steps):
        i = props[t]
        x = order[i]
        y = order[i + 1]
        dd = delta[x][y]
        if dd <= 0 or us[t] < accept[dd]:
            order[i] = y
            order[i + 1] = x
        if t == next_keep:
            out.append(order[0] if keep_top else tuple(order))
            next_keep += thin
    return out


def estimate_top_marginals(
    D: PairwiseDataset,
    gamma: float,
    config: ChainConfig,
    chains: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> MarginalEstimate:
    """Empirical frequency of each alternative in first place.

    With several chains, each gets the generator derived from
    ``(config.seed, "chain", index)`` and samples are pooled in chain order.
    Standard errors come from batch means (``batches`` per chain).
    """
    if chains < 1:
        raise InvalidArgument(f"chains must be >= 1, got {chains}")
    m = D.m
    pooled = []
    batch_means = []
    for c in range(chains):
        rng = derive_rng(config.seed, "chain", c) if chains > 1 else as_rng(config.seed)
        tops = np.asarray(
            run_chain(D, gamma, config.steps, rng, burn_in=config.burn_in, thin=config.thin),
            dtype=np.int64,
        )
        pooled.append(tops)
        b = min(batches, tops.size)
        if b >= 1:
            batch_means.extend(np.bincount(ch, minlength=m) / ch.size for ch in np.array_split(tops, b))
    tops = np.concatenate(pooled)
    est = np.bincount(tops, minlength=m) / tops.size
    if len(batch_means) >= 2:
        means = np.array(batch_means)
        se = means.std(axis=0, ddof=1) / np.sqrt(len(batch_means))
    else:
        se = np.full(m, np.nan)
    return MarginalEstimate(est, se, int(tops.size))


def estimate_objective1(
    D: PairwiseDataset,
    gamma: float,
    k: int,
    config: ChainConfig,
    chains: int = 1,
    tie_policy: str = "all",
) -> tuple[SelectionResult, tuple[int, ...]]:
    """Top-k by estimated top-marginal, plus the alternatives in near-ties.

    A chosen/unchosen pair is a near-tie when its estimated gap is below two
    combined standard errors; every alternative in such a pair is flagged.
    """
    _check_k(k, D.m)
    est = estimate_top_marginals(D, gamma, config, chains)
    res = select_by_values(est.estimates, k, tie_policy, config.seed)
    chosen = sorted(res.chosen)
    rest = [a for a in range(D.m) if a not in res.chosen]
    se = np.nan_to_num(est.stderr, nan=np.inf)
    flagged = set()
    for s in chosen:
        for u in rest:
            if est.estimates[s] - est.estimates[u] < 2.0 * np.hypot(se[s], se[u]):
                flagged.update((s, u))
    res = replace(res, score=float(est.estimates[chosen].sum()))
    return res, tuple(sorted(flagged))
