"""Generative noise models and the exact Mallows probability mass.

``gamma = (1 - p) / p`` is the canonical noise parameter; ``p`` is a view
kept on :class:`~rankselect.core.NoiseParams`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NoiseParams, PairwiseDataset, Ranking, _perm_table
from .errors import CapacityError, InvalidArgument, SamplingFailure
from .seeding import as_rng

REJECTION_MAX_M = 10
REJECTION_MAX_ATTEMPTS = 10**6
ENUMERATION_MAX_M = 10


@dataclass(frozen=True)
class MallowsSpec:
    reference: Ranking
    params: NoiseParams

    @property
    def m(self) -> int:
        return self.reference.m

    @property
    def gamma(self) -> float:
        return self.params.gamma


def sample_noisy_comparisons(
    truth: Ranking, params: NoiseParams, n: int, rng=None
) -> PairwiseDataset:
    """Each pair is shown ``n`` times; each vote agrees with ``truth`` w.p. ``p``."""
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    rng = as_rng(rng)
    m = truth.m
    upper, lower = np.triu_indices(m, 1)
    agree = rng.binomial(n, params.p, size=upper.size)
    order = np.asarray(truth.order)
    better, worse = order[upper], order[lower]
    counts = np.zeros((m, m), dtype=np.int64)
    counts[better, worse] = agree
    counts[worse, better] = n - agree
    return PairwiseDataset(counts, n, True)


def _rejection_orders(m: int, p: float, size: int, rng, max_attempts: int) -> np.ndarray:
    """Accepted draws as rows of truth-relative ranks (0 = truth's best)."""
    upper, lower = np.triu_indices(m, 1)
    out = np.empty((size, m), dtype=np.int64)
    filled = attempts = 0
    budget = max_attempts * size
    expected = np.arange(m - 1, -1, -1)
    while filled < size:
        if attempts >= budget:
            raise SamplingFailure(
                f"rejection sampler exhausted {max_attempts} attempts per draw (m={m}, p={p})"
            )
        batch = min(max(64, 4 * (size - filled)), budget - attempts)
        attempts += batch
        # True: the truth-better element of the pair wins this comparison
        bits = rng.random((batch, upper.size)) < p
        beats = np.zeros((batch, m, m), dtype=np.int8)
        beats[:, upper, lower] = bits
        beats[:, lower, upper] = ~bits
        outdeg = beats.sum(axis=2)
        # topological sort of a tournament: it is acyclic iff sorting by
        # outdegree yields exactly m-1, m-2, ..., 0
        topo = np.argsort(-outdeg, axis=1, kind="stable")
        ok = (np.take_along_axis(outdeg, topo, axis=1) == expected).all(axis=1)
        accepted = topo[ok][: size - filled]
        out[filled : filled + len(accepted)] = accepted
        filled += len(accepted)
    return out


def sample_mallows_rejection(
    spec: MallowsSpec,
    rng=None,
    size: int | None = None,
    max_attempts: int = REJECTION_MAX_ATTEMPTS,
    max_m: int = REJECTION_MAX_M,
):
    """Draw from the Mallows model by the restart process.

    All ``C(m, 2)`` pairwise preferences are drawn independently, each
    agreeing with the reference with probability ``p``; the draw is
    restarted until the resulting tournament is acyclic. Returns one
    :class:`Ranking`, or a list of them when ``size`` is given.
    """
    m = spec.m
    if m > max_m:
        raise CapacityError(f"rejection sampling capped at m <= {max_m}, got m={m}")
    rng = as_rng(rng)
    count = 1 if size is None else int(size)
    rel = _rejection_orders(m, spec.params.p, count, rng, max_attempts)
    ref = np.asarray(spec.reference.order)
    draws = [Ranking(ref[row]) for row in rel]
    return draws[0] if size is None else draws


def _insertion_cdfs(m: int, gamma: float) -> list[np.ndarray]:
    cdfs = []
    for i in range(m):
        w = gamma ** np.arange(i + 1)
        c = np.cumsum(w)
        cdfs.append(c / c[-1])
    return cdfs


def _rim_orders(ref: np.ndarray, gamma: float, size: int, rng) -> np.ndarray:
    m = ref.size
    cdfs = _insertion_cdfs(m, gamma)
    u = rng.random((size, m))
    # jumps[:, i] = how many earlier (truth-better) items end up below item i
    jumps = np.empty((size, m), dtype=np.int64)
    for i in range(m):
        jumps[:, i] = np.minimum(np.searchsorted(cdfs[i], u[:, i], side="right"), i)
    out = np.empty((size, m), dtype=np.int64)
    for r in range(size):
        cur: list[int] = []
        for i in range(m):
            cur.insert(i - jumps[r, i], ref[i])
        out[r] = cur
    return out


def sample_mallows_rim(truth: Ranking, gamma: float, rng=None, size: int | None = None):
    """Repeated-insertion Mallows sampler.

    The reference alternatives are inserted best first. The ``i``-th one
    (0-based) lands with ``j`` of the ``i`` already-placed alternatives below
    it, creating exactly ``j`` disagreements, with probability proportional
    to ``gamma**j``. The result has the same law as
    :func:`sample_mallows_rejection`.
    """
    if not 0.0 <= gamma < 1.0 + 1e-15:
        raise InvalidArgument(f"gamma must lie in [0, 1], got {gamma}")
    rng = as_rng(rng)
    count = 1 if size is None else int(size)
    orders = _rim_orders(np.asarray(truth.order), float(gamma), count, rng)
    draws = [Ranking(row) for row in orders]
    return draws[0] if size is None else draws


def sample_profile(truth: Ranking, params: NoiseParams, n: int, rng=None) -> np.ndarray:
    """``n`` Mallows draws as an ``(n, m)`` array of orders (RIM)."""
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    return _rim_orders(np.asarray(truth.order), params.gamma, n, as_rng(rng))


def sample_partial_orders(
    truth: Ranking, params: NoiseParams, l: int, n: int, rng=None
) -> PairwiseDataset:
    """Each of ``n`` voters ranks a uniformly random ``l``-subset.

    The voter's ranking is a Mallows draw whose reference is ``truth``
    restricted to the subset. Pairs never shown together stay at 0, so the
    result is a relaxed dataset.
    """
    m = truth.m
    if not 2 <= l <= m:
        raise InvalidArgument(f"partial-order length l must lie in 2..{m}, got {l}")
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    rng = as_rng(rng)
    pos = np.asarray(truth.positions)
    cdfs = _insertion_cdfs(l, params.gamma)
    counts = np.zeros((m, m), dtype=np.int64)
    for _ in range(n):
        subset = rng.choice(m, size=l, replace=False)
        ref = subset[np.argsort(pos[subset])]
        u = rng.random(l)
        cur: list[int] = []
        for i in range(l):
            j = min(int(np.searchsorted(cdfs[i], u[i], side="right")), i)
            cur.insert(i - j, int(ref[i]))
        idx = np.asarray(cur)
        iu, ju = np.triu_indices(l, 1)
        counts[idx[iu], idx[ju]] += 1
    return PairwiseDataset(counts, n, False)


def mallows_normalizer(m: int, gamma: float, method: str = "closed", reference: Ranking | None = None) -> float:
    """``Z = sum over all rankings of gamma**d_K(sigma, reference)``.

    ``method="closed"`` uses ``prod_{i=1..m} (1 + gamma + ... + gamma**(i-1))``;
    ``method="enumerate"`` sums over all ``m!`` rankings (``m <= 10``).
    """
    if method == "closed":
        return math.prod(sum(gamma**j for j in range(i)) for i in range(1, m + 1))
    if method != "enumerate":
        raise InvalidArgument(f"unknown normalizer method {method!r}")
    if m > ENUMERATION_MAX_M:
        raise CapacityError(f"enumeration normalizer capped at m <= {ENUMERATION_MAX_M}")
    reference = reference or Ranking.identity(m)
    d = kendall_distances_to(reference)
    return float(np.sum(np.power(gamma, d.astype(np.float64))))


def kendall_distances_to(reference: Ranking) -> np.ndarray:
    """Kendall tau from ``reference`` to every ranking, in lexicographic order."""
    orders = _perm_table(reference.m)
    rel = np.asarray(reference.positions)[orders.astype(np.int64)]
    d = np.zeros(orders.shape[0], dtype=np.int64)
    for i in range(reference.m - 1):
        d += (rel[:, i : i + 1] > rel[:, i + 1 :]).sum(axis=1)
    return d


def mallows_pmf(sigma: Ranking, spec: MallowsSpec, normalizer: str = "closed") -> float:
    """Exact Mallows probability of ``sigma``."""
    from .core import kendall_tau

    if sigma.m != spec.m:
        raise InvalidArgument(f"size mismatch: {sigma.m} vs {spec.m} alternatives")
    d = kendall_tau(sigma, spec.reference)
    z = mallows_normalizer(spec.m, spec.gamma, normalizer, spec.reference)
    return spec.gamma**d / z
