"""Rankings, pairwise-count datasets and the distances between them.

Alternatives are dense 0-based integer indices. A ranking is stored both as
its order (alternative at each position, best first) and as the 1-based
position of each alternative.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, InvalidDataset


@dataclass(frozen=True)
class Ranking:
    """A strict linear order over alternatives ``0..m-1``.

    ``order[i]`` is the alternative in position ``i + 1`` and
    ``positions[a]`` is the 1-based position of alternative ``a``.
    """

    order: tuple[int, ...]
    positions: tuple[int, ...]

    def __init__(self, order: Iterable[int]):
        order = tuple(int(a) for a in order)
        m = len(order)
        if m == 0:
            raise InvalidArgument("a ranking needs at least one alternative")
        positions = [0] * m
        for pos, a in enumerate(order):
            if not 0 <= a < m or positions[a]:
                raise InvalidArgument(f"{order!r} is not a permutation of 0..{m - 1}")
            positions[a] = pos + 1
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "positions", tuple(positions))

    @classmethod
    def from_positions(cls, positions: Sequence[int]) -> Ranking:
        """Build a ranking from 1-based positions indexed by alternative."""
        m = len(positions)
        order = [-1] * m
        for a, pos in enumerate(positions):
            pos = int(pos)
            if not 1 <= pos <= m or order[pos - 1] != -1:
                raise InvalidArgument(f"{tuple(positions)!r} is not a bijection onto 1..{m}")
            order[pos - 1] = a
        return cls(order)

    @classmethod
    def identity(cls, m: int) -> Ranking:
        return cls(range(m))

    @property
    def m(self) -> int:
        return len(self.order)

    @property
    def inverse(self) -> tuple[int, ...]:
        return self.order

    @property
    def top(self) -> int:
        return self.order[0]

    def prefix(self, k: int) -> tuple[int, ...]:
        """The ordered k-prefix: the alternatives in positions 1..k."""
        if not 0 <= k <= self.m:
            raise InvalidArgument(f"prefix length {k} outside 0..{self.m}")
        return self.order[:k]

    def reverse(self) -> Ranking:
        return Ranking(self.order[::-1])

    def relabel(self, mapping: Sequence[int]) -> Ranking:
        """Apply ``a -> mapping[a]`` to every alternative."""
        return Ranking(mapping[a] for a in self.order)

    def __len__(self) -> int:
        return self.m

    def __iter__(self):
        return iter(self.order)

    def __repr__(self) -> str:
        return f"Ranking({list(self.order)})"


@dataclass(frozen=True, eq=False)
class PairwiseDataset:
    """The count matrix ``counts[a, b]``: votes preferring ``a`` to ``b``.

    In strict mode every pair was compared exactly ``n`` times
    (``counts[a, b] + counts[b, a] == n``). Relaxed mode only requires
    ``<= n``, which is what partial-order data produces; the optimality
    guarantees of the scoring methods are only established for strict data.
    """

    counts: np.ndarray
    n: int
    strict: bool = True

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] == 0:
            raise InvalidDataset(f"counts must be a non-empty square matrix, got shape {counts.shape}")
        if self.n < 0:
            raise InvalidDataset(f"n must be non-negative, got {self.n}")
        if (counts < 0).any():
            a, b = map(int, np.argwhere(counts < 0)[0])
            raise InvalidDataset(f"negative count n[{a},{b}]", pair=(a, b))
        if np.diagonal(counts).any():
            a = int(np.flatnonzero(np.diagonal(counts))[0])
            raise InvalidDataset(f"diagonal count n[{a},{a}] must be 0", pair=(a, a))
        totals = counts + counts.T
        np.fill_diagonal(totals, self.n)
        bad = totals != self.n if self.strict else totals > self.n
        if bad.any():
            a, b = sorted(map(int, np.argwhere(bad)[0]))
            rel = "=" if self.strict else "<="
            raise InvalidDataset(
                f"pair ({a},{b}): n_ab + n_ba = {int(totals[a, b])}, expected {rel} {self.n}",
                pair=(a, b),
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def zeros(cls, m: int) -> PairwiseDataset:
        return cls(np.zeros((m, m), dtype=np.int64), 0, True)

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    def relabel(self, mapping: Sequence[int]) -> PairwiseDataset:
        """Rename alternative ``a`` to ``mapping[a]``."""
        inv = np.argsort(np.asarray(mapping))
        return PairwiseDataset(self.counts[np.ix_(inv, inv)], self.n, self.strict)

    def __eq__(self, other):
        if not isinstance(other, PairwiseDataset):
            return NotImplemented
        return (
            self.n == other.n
            and self.strict == other.strict
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self):
        return hash((self.n, self.strict, self.counts.tobytes()))

    def __repr__(self) -> str:
        mode = "strict" if self.strict else "relaxed"
        return f"PairwiseDataset(m={self.m}, n={self.n}, {mode}, counts={self.counts.tolist()})"


@dataclass(frozen=True)
class NoiseParams:
    """Accuracy ``p`` in (1/2, 1) and the noise level ``gamma = (1 - p) / p``."""

    p: float
    gamma: float

    def __init__(self, p: float):
        p = float(p)
        if not 0.5 < p < 1.0:
            raise InvalidArgument(f"accuracy p must lie in (1/2, 1), got {p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "gamma", (1.0 - p) / p)

    @classmethod
    def from_gamma(cls, gamma: float) -> NoiseParams:
        gamma = float(gamma)
        if not 0.0 < gamma < 1.0:
            raise InvalidArgument(f"noise level gamma must lie in (0, 1), got {gamma}")
        params = cls.__new__(cls)
        object.__setattr__(params, "p", 1.0 / (1.0 + gamma))
        object.__setattr__(params, "gamma", gamma)
        return params


def _check_same_m(m1: int, m2: int) -> None:
    if m1 != m2:
        raise InvalidArgument(f"size mismatch: {m1} vs {m2} alternatives")


def _merge_count(seq: list[int]) -> tuple[list[int], int]:
    if len(seq) <= 1:
        return seq, 0
    mid = len(seq) // 2
    left, inv_left = _merge_count(seq[:mid])
    right, inv_right = _merge_count(seq[mid:])
    merged = []
    count = inv_left + inv_right
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def kendall_tau(sigma1: Ranking, sigma2: Ranking) -> int:
    """Number of pairs ordered differently by the two rankings, O(m log m)."""
    _check_same_m(sigma1.m, sigma2.m)
    # positions under sigma2, listed in sigma1's order: inversions = disagreements
    seq = [sigma2.positions[a] for a in sigma1.order]
    return _merge_count(seq)[1]


def kendall_tau_naive(sigma1: Ranking, sigma2: Ranking) -> int:
    """Quadratic reference implementation of :func:`kendall_tau`."""
    _check_same_m(sigma1.m, sigma2.m)
    p1, p2 = sigma1.positions, sigma2.positions
    m = sigma1.m
    return sum(
        1
        for a in range(m)
        for b in range(a + 1, m)
        if (p1[a] < p1[b]) != (p2[a] < p2[b])
    )


def dataset_from_rankings(profile: Sequence[Ranking]) -> PairwiseDataset:
    """Tabulate a profile of complete rankings into a strict dataset."""
    if len(profile) == 0:
        raise InvalidArgument("profile must contain at least one ranking")
    m = profile[0].m
    for sigma in profile:
        _check_same_m(m, sigma.m)
    pos = np.array([sigma.positions for sigma in profile], dtype=np.int64)
    counts = (pos[:, :, None] < pos[:, None, :]).sum(axis=0)
    return PairwiseDataset(counts, len(profile), True)


def dataset_from_comparisons(
    wins: Mapping[tuple[int, int], int] | Iterable[tuple[int, int]],
    n: int,
    strict: bool = True,
    m: int | None = None,
) -> PairwiseDataset:
    """Build a dataset from ``(winner, loser)`` outcomes.

    ``wins`` is either a mapping ``(winner, loser) -> multiplicity`` or an
    iterable of ``(winner, loser)`` pairs, each counted once. ``m`` defaults
    to one more than the largest index seen.
    """
    if isinstance(wins, Mapping):
        items = [(tuple(pair), int(mult)) for pair, mult in wins.items()]
    else:
        items = [(tuple(pair), 1) for pair in wins]
    for (a, b), mult in items:
        if mult < 0:
            raise InvalidArgument(f"negative multiplicity {mult} for ({a},{b})")
        if a == b:
            raise InvalidArgument(f"self-comparison ({a},{b})")
    if m is None:
        m = 1 + max((max(a, b) for (a, b), _ in items), default=-1)
        m = max(m, 1)
    counts = np.zeros((m, m), dtype=np.int64)
    for (a, b), mult in items:
        if not (0 <= a < m and 0 <= b < m):
            raise InvalidArgument(f"alternative index out of range in ({a},{b}) for m={m}")
        counts[a, b] += mult
    return PairwiseDataset(counts, n, strict)


def dataset_distance(sigma: Ranking, D: PairwiseDataset) -> int:
    """Total disagreement: sum of ``n_ba`` over pairs with ``a`` above ``b``."""
    _check_same_m(sigma.m, D.m)
    order = np.asarray(sigma.order)
    sub = D.counts[np.ix_(order, order)]
    # sub[i, j] = n_{order[i] order[j]}; below-diagonal entries are n_{lower, upper}
    return int(np.tril(sub, -1).sum())


def _check_tuple(tup: Sequence[int], m: int) -> tuple[int, ...]:
    tup = tuple(int(a) for a in tup)
    if not 1 <= len(tup) <= m:
        raise InvalidArgument(f"tuple length {len(tup)} outside 1..{m}")
    if len(set(tup)) != len(tup):
        raise InvalidArgument(f"tuple {tup} has duplicate entries")
    if any(not 0 <= a < m for a in tup):
        raise InvalidArgument(f"tuple {tup} has entries outside 0..{m - 1}")
    return tup


def tuple_distance(tup: Sequence[int], D: PairwiseDataset) -> int:
    """Within-tuple disagreement ``sum_{i<j} n_{a_j a_i}``."""
    tup = _check_tuple(tup, D.m)
    idx = np.asarray(tup)
    return int(np.tril(D.counts[np.ix_(idx, idx)], -1).sum())


def all_rankings(m: int) -> np.ndarray:
    """All ``m!`` orders as rows (lexicographic), shape ``(m!, m)``."""
    return _perm_table(m).copy()


_PERM_CACHE: dict[int, np.ndarray] = {}


def _perm_table(m: int) -> np.ndarray:
    table = _PERM_CACHE.get(m)
    if table is None:
        import itertools

        table = np.array(list(itertools.permutations(range(m))), dtype=np.int8).reshape(
            math.factorial(m), m
        )
        table.setflags(write=False)
        _PERM_CACHE[m] = table
    return table


def distances_of_orders(orders: np.ndarray, D: PairwiseDataset) -> np.ndarray:
    """Vectorised :func:`dataset_distance` for many orders (rows of ``orders``)."""
    orders = np.asarray(orders)
    m = D.m
    total = np.zeros(orders.shape[0], dtype=np.int64)
    counts = D.counts
    for i in range(m - 1):
        upper = orders[:, i]
        for j in range(i + 1, m):
            total += counts[orders[:, j], upper]
    return total


# --- plain-text formats -----------------------------------------------------


def format_dataset(D: PairwiseDataset) -> str:
    mode = "strict" if D.strict else "relaxed"
    lines = [f"{D.m} {D.n} {mode}"]
    for a, b in zip(*np.nonzero(D.counts)):
        lines.append(f"{a} {b} {D.counts[a, b]}")
    return "\n".join(lines) + "\n"


def parse_dataset(text: str) -> PairwiseDataset:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 3 or lines[0][2] not in ("strict", "relaxed"):
        raise InvalidDataset("dataset header must be 'm n strict|relaxed'")
    m, n, mode = int(lines[0][0]), int(lines[0][1]), lines[0][2]
    counts = np.zeros((m, m), dtype=np.int64)
    for row in lines[1:]:
        if len(row) != 3:
            raise InvalidDataset(f"bad dataset line {' '.join(row)!r}")
        a, b, c = map(int, row)
        if not (0 <= a < m and 0 <= b < m):
            raise InvalidDataset(f"index out of range in line {' '.join(row)!r}", pair=(a, b))
        counts[a, b] = c
    return PairwiseDataset(counts, n, mode == "strict")


def format_profile(profile: Sequence[Ranking]) -> str:
    return "".join(" ".join(map(str, sigma.order)) + "\n" for sigma in profile)


def parse_profile(text: str) -> list[Ranking]:
    profile = [Ranking(map(int, ln.split())) for ln in text.splitlines() if ln.strip()]
    if not profile:
        raise InvalidArgument("profile file contains no rankings")
    m = profile[0].m
    for sigma in profile:
        _check_same_m(m, sigma.m)
    return profile


def write_dataset(D: PairwiseDataset, path: str | Path) -> None:
    Path(path).write_text(format_dataset(D))


def read_dataset(path: str | Path) -> PairwiseDataset:
    return parse_dataset(Path(path).read_text())


def write_profile(profile: Sequence[Ranking], path: str | Path) -> None:
    Path(path).write_text(format_profile(profile))


def read_profile(path: str | Path) -> list[Ranking]:
    return parse_profile(Path(path).read_text())


def read_input(path: str | Path) -> tuple[PairwiseDataset, list[Ranking] | None]:
    """Read either file format; returns the dataset and, for profiles, the rankings."""
    text = Path(path).read_text()
    first = next((ln.split() for ln in text.splitlines() if ln.strip()), None)
    if first is not None and len(first) == 3 and first[2] in ("strict", "relaxed"):
        return parse_dataset(text), None
    profile = parse_profile(text)
    return dataset_from_rankings(profile), profile
