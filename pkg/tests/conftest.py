import numpy as np
import pytest

from rankselect.core import PairwiseDataset, Ranking, dataset_from_comparisons

A, B, C = 0, 1, 2


@pytest.fixture
def d3():
    # n_ab=2, n_ac=n_ca=1, n_bc=n_cb=1, n=2
    return dataset_from_comparisons({(A, B): 2, (A, C): 1, (C, A): 1, (B, C): 1, (C, B): 1}, n=2)


def random_strict(rng, m, n):
    counts = np.zeros((m, m), dtype=np.int64)
    for a in range(m):
        for b in range(a + 1, m):
            x = int(rng.integers(0, n + 1))
            counts[a, b], counts[b, a] = x, n - x
    return PairwiseDataset(counts, n, True)


def random_profile(rng, m, size):
    return [Ranking(rng.permutation(m)) for _ in range(size)]


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion and assert on it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def _report(label, ok, detail, elapsed=None, limit=None):
        timing = ""
        if elapsed is not None:
            timing = f" [{elapsed:.1f}s" + (f", limit {limit}s" if limit else "") + "]"
            if limit is not None and elapsed >= limit:
                ok = False
                detail += " (over time limit)"
        line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}{timing}"
        lines.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
