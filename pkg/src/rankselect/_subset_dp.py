"""Layered dynamic programme over subsets, shared by tuple search and Kemeny.

For an ordered sequence built one element at a time, the gain of appending
``a`` after the set ``S`` already placed is

    base[a] - sum_{b in S} pair[a, b]

``value[T]`` is the best total over all orderings of ``T``; ``count[T]`` is
the number of orderings achieving it. Values are exact integers.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError

MAX_M = 20
_NEG = np.iinfo(np.int64).min // 4


class SubsetDP:
    def __init__(self, base: np.ndarray, pair: np.ndarray, depth: int):
        base = np.asarray(base, dtype=np.int64)
        pair = np.asarray(pair, dtype=np.int64)
        m = base.size
        if m > MAX_M:
            raise CapacityError(f"subset DP is capped at m <= {MAX_M}, got m={m}")
        self.m, self.depth = m, depth
        self.base, self.pair = base, pair
        size = 1 << m
        self.value = np.full(size, _NEG, dtype=np.int64)
        self.count = np.zeros(size, dtype=np.int64)
        self.value[0], self.count[0] = 0, 1
        self.layers = [np.zeros(1, dtype=np.int64)]

        all_masks = np.arange(size, dtype=np.int64)
        pop = np.zeros(size, dtype=np.int64)
        for b in range(m):
            pop += (all_masks >> b) & 1
        shifts = np.arange(m, dtype=np.int64)
        for c in range(1, depth + 1):
            masks = all_masks[pop == c]
            bits = ((masks[:, None] >> shifts) & 1).astype(bool)
            best = np.full(masks.size, _NEG, dtype=np.int64)
            cnt = np.zeros(masks.size, dtype=np.int64)
            for a in range(m):
                has = bits[:, a]
                prev = masks[has] ^ (1 << a)
                prev_bits = bits[has].copy()
                prev_bits[:, a] = False
                gain = base[a] - prev_bits.astype(np.int64) @ pair[a]
                cand = self.value[prev] + gain
                cur = best[has]
                cur_cnt = cnt[has]
                better = cand > cur
                equal = cand == cur
                cur_cnt = np.where(better, self.count[prev], np.where(equal, cur_cnt + self.count[prev], cur_cnt))
                best[has] = np.maximum(cur, cand)
                cnt[has] = cur_cnt
            self.value[masks] = best
            self.count[masks] = cnt
            self.layers.append(masks)

    def gain(self, prev_mask: int, a: int) -> int:
        s = int(self.base[a])
        for b in range(self.m):
            if prev_mask >> b & 1:
                s -= int(self.pair[a, b])
        return s

    def best_masks(self, c: int) -> tuple[int, np.ndarray]:
        masks = self.layers[c]
        vals = self.value[masks]
        top = int(vals.max())
        return top, masks[vals == top]

    def _last_choices(self, mask: int) -> list[int]:
        out = []
        for a in range(self.m):
            if mask >> a & 1:
                prev = mask ^ (1 << a)
                if self.value[prev] + self.gain(prev, a) == self.value[mask]:
                    out.append(a)
        return out

    def enumerate(self, mask: int, cap: int) -> list[tuple[int, ...]]:
        """Optimal orderings of ``mask`` (at most ``cap``), lexicographic."""
        results: list[tuple[int, ...]] = []

        def rec(mask: int, suffix: tuple[int, ...]):
            if len(results) >= cap:
                return
            if mask == 0:
                results.append(suffix)
                return
            for a in self._last_choices(mask):
                rec(mask ^ (1 << a), (a,) + suffix)

        rec(int(mask), ())
        results.sort()
        return results

    def sample(self, masks: np.ndarray, rng) -> tuple[int, ...]:
        """Uniform draw among optimal orderings of any of ``masks``."""
        weights = self.count[masks].astype(np.float64)
        mask = int(masks[rng.choice(masks.size, p=weights / weights.sum())])
        out: list[int] = []
        while mask:
            choices = self._last_choices(mask)
            w = np.array([self.count[mask ^ (1 << a)] for a in choices], dtype=np.float64)
            a = choices[rng.choice(len(choices), p=w / w.sum())]
            out.append(a)
            mask ^= 1 << a
        return tuple(reversed(out))


def mask_of(items) -> int:
    mask = 0
    for a in items:
        mask |= 1 << int(a)
    return mask
