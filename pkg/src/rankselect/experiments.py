"""Simulation harness: how often does each method hit each objective?

Every trial draws a uniformly random true ranking, samples noisy data from
it, lets each method pick a k-subset / k-tuple for every requested k, and
records success for

1. the true top alternative is in the selected set,
2. the selected set equals the true top-k set,
3. the selected tuple equals the true k-prefix.

All randomness comes from generators derived from ``(seed, label, trial)``,
so trials are independent of each other and of how they are scheduled.
"""

from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .core import NoiseParams, PairwiseDataset, Ranking, dataset_from_rankings
from .errors import ConfigurationError
from .exact import (
    LOG_TIE_TOL,
    POSTERIOR_MAX_M,
    _group_logsumexp,
    kemeny_table,
    posterior_over_rankings,
    top_alternative_log_marginals,
)
from .mcmc import ChainConfig, estimate_top_marginals
from .noise_models import sample_noisy_comparisons, sample_partial_orders, sample_profile
from .selection import copeland_outdegree, extended_scores, topk_family, tuple_dp
from .seeding import derive_rng

MODELS = ("orders", "comparisons", "partial")
PROFILE_METHODS = ("borda", "plurality", "approval", "maximin")
DATASET_METHODS = ("extended", "tuples", "kemeny", "copeland", "optimal", "mcmc")
METHODS = DATASET_METHODS[:4] + PROFILE_METHODS + DATASET_METHODS[4:]
DEFAULT_METHODS = {
    "orders": ("extended", "tuples", "kemeny", "plurality", "approval", "maximin", "copeland"),
    "comparisons": ("extended", "tuples", "kemeny", "copeland"),
    "partial": ("extended", "tuples", "kemeny", "copeland"),
}
Z95 = 1.959963984540054
CSV_HEADER = ("objective", "method", "k", "mean", "ci_low", "ci_high", "iters")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "orders"
    m: int = 10
    n: int = 10
    p: float = 0.55
    l: int | None = None
    k_values: tuple[int, ...] = ()
    objectives: tuple[int, ...] = (1, 2, 3)
    methods: tuple[str, ...] = ()
    iterations: int = 2000
    seed: int = 0
    mcmc: ChainConfig | None = None

    def __post_init__(self):
        if not self.k_values:
            object.__setattr__(self, "k_values", tuple(range(1, self.m)) or (1,))
        if not self.methods:
            object.__setattr__(self, "methods", DEFAULT_METHODS.get(self.model, ()))
        object.__setattr__(self, "k_values", tuple(sorted(set(int(k) for k in self.k_values))))
        object.__setattr__(self, "objectives", tuple(sorted(set(int(o) for o in self.objectives))))
        object.__setattr__(self, "methods", tuple(dict.fromkeys(self.methods)))
        if self.mcmc is not None and "mcmc" not in self.methods:
            object.__setattr__(self, "methods", self.methods + ("mcmc",))

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigurationError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.m < 2 or self.n < 1:
            raise ConfigurationError(f"need m >= 2 and n >= 1, got m={self.m}, n={self.n}")
        if not 0.5 < self.p < 1.0:
            raise ConfigurationError(f"p must lie in (1/2, 1), got {self.p}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        bad_k = [k for k in self.k_values if not 1 <= k <= self.m]
        if bad_k:
            raise ConfigurationError(f"k values {bad_k} outside 1..{self.m}")
        bad_obj = [o for o in self.objectives if o not in (1, 2, 3)]
        if bad_obj or not self.objectives:
            raise ConfigurationError(f"objectives must be a non-empty subset of {{1,2,3}}, got {self.objectives}")
        unknown = [x for x in self.methods if x not in METHODS]
        if unknown:
            raise ConfigurationError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.model != "orders":
            profile_only = [x for x in self.methods if x in PROFILE_METHODS]
            if profile_only:
                raise ConfigurationError(
                    f"methods {profile_only} need complete rankings and cannot run under the {self.model} model"
                )
        if self.model == "partial" and (self.l is None or not 2 <= self.l <= self.m):
            raise ConfigurationError(f"partial model needs 2 <= l <= m, got l={self.l}")
        if "optimal" in self.methods and self.m > POSTERIOR_MAX_M:
            raise ConfigurationError(f"the exact 'optimal' method needs m <= {POSTERIOR_MAX_M}")
        if "mcmc" in self.methods and self.mcmc is None:
            raise ConfigurationError("the 'mcmc' method needs a chain configuration")


class ResultRow(NamedTuple):
    objective: int
    method: str
    k: int
    mean: float
    ci_low: float
    ci_high: float
    iterations: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.mean * (1.0 - self.mean) / self.iterations)


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ResultRow, ...] = ()
    config: ExperimentConfig | None = field(default=None, compare=False)

    def row(self, objective: int, method: str, k: int) -> ResultRow:
        for r in self.rows:
            if (r.objective, r.method, r.k) == (objective, method, k):
                return r
        raise KeyError((objective, method, k))


# --- one trial ---------------------------------------------------------------


def _sample_data(config: ExperimentConfig, truth: Ranking, rng):
    params = NoiseParams(config.p)
    if config.model == "orders":
        profile = sample_profile(truth, params, config.n, rng)
        rankings = [Ranking(o) for o in profile]
        return dataset_from_rankings(rankings), profile
    if config.model == "comparisons":
        return sample_noisy_comparisons(truth, params, config.n, rng), None
    return sample_partial_orders(truth, params, config.l, config.n, rng), None


def _score_order(scores: np.ndarray, priority: np.ndarray) -> np.ndarray:
    return np.lexsort((priority, -np.asarray(scores)))


def _profile_scores(method: str, profile: np.ndarray, m: int, k: int) -> np.ndarray:
    pos = np.empty_like(profile)
    rows = np.arange(profile.shape[0])[:, None]
    pos[rows, profile] = np.arange(m)
    if method == "borda":
        return (m - 1 - pos).sum(axis=0)
    if method == "plurality":
        return np.bincount(profile[:, 0], minlength=m)
    if method == "approval":
        return (pos < k).sum(axis=0)
    # maximin: min over b of the number of voters with a above b
    above = (pos[:, :, None] < pos[:, None, :]).sum(axis=0)
    np.fill_diagonal(above, np.iinfo(np.int64).max)
    return above.min(axis=1)


def _method_selections(
    method: str,
    config: ExperimentConfig,
    D: PairwiseDataset,
    profile: np.ndarray | None,
    trial: int,
) -> dict[tuple[int, int], tuple[int, ...]]:
    """``(objective, k) -> ordered selection`` for one method in one trial."""
    m = D.m
    ks = config.k_values
    objs = config.objectives
    rng = derive_rng(config.seed, f"ties/{method}", trial)
    out: dict[tuple[int, int], tuple[int, ...]] = {}

    def same_for_all(k: int, sel) -> None:
        for o in objs:
            out[(o, k)] = tuple(int(a) for a in sel)

    if method in ("extended", "copeland", "borda", "plurality", "maximin"):
        if method == "extended":
            scores = extended_scores(D)
        elif method == "copeland":
            scores = copeland_outdegree(D)
        else:
            scores = _profile_scores(method, profile, m, 0)
        order = _score_order(scores, rng.permutation(m))
        for k in ks:
            same_for_all(k, order[:k])
    elif method == "approval":
        priority = rng.permutation(m)
        for k in ks:
            same_for_all(k, _score_order(_profile_scores(method, profile, m, k), priority)[:k])
    elif method == "tuples":
        dp = tuple_dp(D, max(ks))
        for k in ks:
            _, masks = dp.best_masks(k)
            same_for_all(k, dp.sample(masks, rng))
    elif method == "kemeny":
        full = np.array([(1 << m) - 1])
        ranking = kemeny_table(D).sample(full, rng)
        for k in ks:
            same_for_all(k, ranking[:k])
    elif method == "optimal":
        out.update(_optimal_selections(config, D, rng))
    elif method == "mcmc":
        chain = ChainConfig(
            config.mcmc.steps, config.mcmc.burn_in, config.mcmc.thin,
            int(derive_rng(config.seed, "mcmc", trial).integers(2**63)),
        )
        est = estimate_top_marginals(D, NoiseParams(config.p).gamma, chain).estimates
        order = _score_order(est, rng.permutation(m))
        for k in ks:
            if 1 in objs:
                out[(1, k)] = tuple(int(a) for a in order[:k])
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    return out


def _optimal_selections(config: ExperimentConfig, D: PairwiseDataset, rng):
    table = posterior_over_rankings(D, NoiseParams(config.p).gamma)
    m = D.m
    out = {}
    if 1 in config.objectives:
        logm = top_alternative_log_marginals(table)
        for k in config.k_values:
            above, boundary, r = topk_family(logm, k, LOG_TIE_TOL)
            fill = rng.choice(boundary, size=r, replace=False)
            out[(1, k)] = tuple(above) + tuple(int(a) for a in fill)
    orders = table.orders.astype(np.int64)
    for k in config.k_values:
        if 2 in config.objectives:
            keys = np.bitwise_or.reduce(np.left_shift(1, orders[:, :k]), axis=1)
            uniq, logmass = _group_logsumexp(keys, table.log_weights)
            winners = uniq[logmass >= logmass.max() - LOG_TIE_TOL]
            w = int(winners[rng.integers(winners.size)])
            out[(2, k)] = tuple(a for a in range(m) if w >> a & 1)
        if 3 in config.objectives:
            radix = m ** np.arange(k - 1, -1, -1, dtype=np.int64)
            keys = orders[:, :k] @ radix
            uniq, logmass = _group_logsumexp(keys, table.log_weights)
            winners = uniq[logmass >= logmass.max() - LOG_TIE_TOL]
            w = int(winners[rng.integers(winners.size)])
            out[(3, k)] = tuple(int(w // int(r)) % m for r in radix)
    return out


def run_trial(config: ExperimentConfig, trial_index: int) -> dict[tuple[str, int, int], bool]:
    """Success indicators keyed by ``(method, objective, k)`` for one trial."""
    truth = Ranking(derive_rng(config.seed, "truth", trial_index).permutation(config.m))
    D, profile = _sample_data(config, truth, derive_rng(config.seed, "data", trial_index))
    result = {}
    for method in config.methods:
        for (obj, k), sel in _method_selections(method, config, D, profile, trial_index).items():
            if obj == 1:
                ok = truth.top in sel
            elif obj == 2:
                ok = set(sel) == set(truth.prefix(k))
            else:
                ok = tuple(sel) == truth.prefix(k)
            result[(method, obj, k)] = bool(ok)
    return result


# --- aggregation ---------------------------------------------------------------


def _keys(config: ExperimentConfig) -> list[tuple[str, int, int]]:
    keys = []
    for method in config.methods:
        objs = (1,) if method == "mcmc" else config.objectives
        for obj in objs:
            if obj not in config.objectives:
                continue
            for k in config.k_values:
                keys.append((method, obj, k))
    return keys


def _run_block(args) -> np.ndarray:
    config, start, stop = args
    keys = _keys(config)
    index = {key: i for i, key in enumerate(keys)}
    totals = np.zeros(len(keys), dtype=np.int64)
    for t in range(start, stop):
        for key, ok in run_trial(config, t).items():
            totals[index[key]] += ok
    return totals


def confidence_interval(successes: int, trials: int) -> tuple[float, float, float]:
    """Mean and normal-approximation 95% interval, clamped to [0, 1]."""
    mean = successes / trials
    half = Z95 * math.sqrt(mean * (1.0 - mean) / trials)
    return mean, max(0.0, mean - half), min(1.0, mean + half)


def run_experiment(config: ExperimentConfig, workers: int = 1, block: int = 50) -> ExperimentResult:
    """Run all trials and aggregate; the output does not depend on ``workers``."""
    config.validate()
    N = config.iterations
    blocks = [(config, s, min(s + block, N)) for s in range(0, N, block)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, blocks))
    else:
        parts = [_run_block(b) for b in blocks]
    totals = np.sum(parts, axis=0)
    rows = []
    for (method, obj, k), s in zip(_keys(config), totals):
        mean, lo, hi = confidence_interval(int(s), N)
        rows.append(ResultRow(obj, method, k, mean, lo, hi, N))
    rows.sort(key=lambda r: (r.objective, r.method, r.k))
    return ExperimentResult(tuple(rows), config)


def format_csv_rows(result: ExperimentResult) -> list[list[str]]:
    rows = sorted(result.rows, key=lambda r: (r.objective, r.method, r.k))
    return [
        [str(r.objective), r.method, str(r.k), f"{r.mean:.6f}", f"{r.ci_low:.6f}", f"{r.ci_high:.6f}", str(r.iterations)]
        for r in rows
    ]


def emit_csv(result: ExperimentResult, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            writer.writerows(format_csv_rows(result))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_csv(path) -> ExperimentResult:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [
            ResultRow(int(r["objective"]), r["method"], int(r["k"]), float(r["mean"]),
                      float(r["ci_low"]), float(r["ci_high"]), int(r["iters"]))
            for r in reader
        ]
    return ExperimentResult(tuple(rows))


# --- config files ----------------------------------------------------------------


def parse_k_range(text: str) -> tuple[int, ...]:
    """``"1..9"``, ``"1,3,5"`` or a mix like ``"1..3,7"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        match = re.fullmatch(r"(\d+)\.\.(\d+)", part)
        if match:
            lo, hi = int(match.group(1)), int(match.group(2))
            if lo > hi:
                raise ConfigurationError(f"empty k range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part.isdigit():
            out.append(int(part))
        else:
            raise ConfigurationError(f"bad k specification {part!r}")
    return tuple(out)


def read_config_file(path) -> dict[str, str]:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def config_from_mapping(values: dict) -> ExperimentConfig:
    """Build a config from string-valued settings (file or CLI)."""
    known = {f.name for f in fields(ExperimentConfig)} | {
        "k", "objective", "iters", "mcmc_steps", "mcmc_burn_in", "mcmc_thin",
    }
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
    kw = {}
    for key in ("model",):
        if key in values:
            kw[key] = str(values[key])
    for key in ("m", "n", "seed"):
        if key in values:
            kw[key] = int(values[key])
    if values.get("l") not in (None, ""):
        kw["l"] = int(values["l"])
    if "p" in values:
        kw["p"] = float(values["p"])
    iters = values.get("iters", values.get("iterations"))
    if iters is not None:
        kw["iterations"] = int(iters)
    k = values.get("k", values.get("k_values"))
    if k:
        kw["k_values"] = parse_k_range(k) if isinstance(k, str) else tuple(k)
    obj = values.get("objective", values.get("objectives"))
    if obj:
        kw["objectives"] = tuple(int(x) for x in str(obj).replace(" ", "").split(",") if x) if isinstance(obj, str) else tuple(obj)
    methods = values.get("methods")
    if methods:
        kw["methods"] = tuple(x.strip() for x in methods.split(",") if x.strip()) if isinstance(methods, str) else tuple(methods)
    steps = values.get("mcmc_steps")
    if steps not in (None, "", 0, "0"):
        steps = int(steps)
        burn = int(values.get("mcmc_burn_in") or steps // 20)
        thin = int(values.get("mcmc_thin") or 10)
        kw["mcmc"] = ChainConfig(steps, burn, thin, 0)
    return ExperimentConfig(**kw)
