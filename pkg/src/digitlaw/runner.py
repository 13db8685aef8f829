"""Sequential evidence trajectories and the violated-null simulation study."""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .bayes import N_DIGITS, DigitCounts, DirichletPrior, MixturePrior, Prior, log_bf01, max_log_bf01
from .constants import DigitStream
from .freq import band_log_bf, chisq_stat, critical_value

__all__ = [
    "default_priors",
    "default_mixture",
    "label_priors",
    "AnalysisConfig",
    "TrajectoryPoint",
    "Trajectory",
    "run_trajectory",
    "run_trajectories",
    "evaluate_counts",
    "detect_lindley_windows",
    "DEFAULT_BIAS",
    "SimulationConfig",
    "SimulationResult",
    "replication_rng",
    "run_simulation",
]


def default_priors() -> dict[str, Prior]:
    return {"a1": DirichletPrior.symmetric(1.0), "a50": DirichletPrior.symmetric(50.0)}


def default_mixture() -> MixturePrior:
    """0.5 D(5) + 0.5 D(1/5): one component near the centre of the simplex, one at its corners."""
    return MixturePrior(DirichletPrior.symmetric(5.0), DirichletPrior.symmetric(0.2), 0.5)


def label_priors(priors) -> dict[str, Prior]:
    """Normalize a list or mapping of priors into an ordered label -> prior dict."""
    if isinstance(priors, Mapping):
        out = dict(priors)
    else:
        out = {}
        for p in priors:
            label = p.label
            if label in out and out[label] != p:
                i = 2
                while f"{label}_{i}" in out:
                    i += 1
                label = f"{label}_{i}"
            out[label] = p
    if not out:
        raise ValueError("at least one prior must be configured")
    return out


@dataclass
class AnalysisConfig:
    priors: dict[str, Prior] = field(default_factory=default_priors)
    block_size: int = 1000
    alpha: float = 0.05
    max_digits: Optional[int] = None
    # label whose bounds fill the unsuffixed max/threshold columns
    reference: Optional[str] = None

    def __post_init__(self):
        self.priors = label_priors(self.priors)
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_digits is not None and self.max_digits < 1:
            raise ValueError("max_digits must be positive")
        if self.reference is None:
            self.reference = "a1" if "a1" in self.priors else next(iter(self.priors))
        elif self.reference not in self.priors:
            raise ValueError(f"reference prior {self.reference!r} is not configured")


@dataclass(frozen=True)
class TrajectoryPoint:
    n: int
    log_bf: dict[str, float]
    log_bf_max: dict[str, float]
    log_bf_threshold: dict[str, float]
    chisq: float
    partial: bool = False

    @property
    def log_bf_a1(self) -> Optional[float]:
        return self.log_bf.get("a1")

    @property
    def log_bf_a50(self) -> Optional[float]:
        return self.log_bf.get("a50")

    @property
    def log_bf_mixture(self) -> Optional[float]:
        return self.log_bf.get("mix")


@dataclass(eq=False)
class Trajectory(Sequence):
    """Column-oriented trajectory; indexing yields :class:`TrajectoryPoint`.

    ``n`` holds the digit count at each point (a multiple of the block size,
    except a flagged partial final point).  Dict columns are keyed by prior
    label.  Threshold values are NaN where no threshold dataset exists.
    """

    n: np.ndarray
    log_bf: dict[str, np.ndarray]
    log_bf_max: dict[str, np.ndarray]
    log_bf_threshold: dict[str, np.ndarray]
    chisq: np.ndarray
    final_counts: DigitCounts
    partial_last: bool = False
    reference: str = "a1"
    source: str = ""

    def __len__(self) -> int:
        return int(self.n.size)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return TrajectoryPoint(
            n=int(self.n[i]),
            log_bf={k: float(v[i]) for k, v in self.log_bf.items()},
            log_bf_max={k: float(v[i]) for k, v in self.log_bf_max.items()},
            log_bf_threshold={k: float(v[i]) for k, v in self.log_bf_threshold.items()},
            chisq=float(self.chisq[i]),
            partial=self.partial_last and i == len(self) - 1,
        )

    @property
    def labels(self) -> list[str]:
        return list(self.log_bf)

    def final(self) -> dict[str, float]:
        return {k: float(v[-1]) for k, v in self.log_bf.items()}


def _block_count_rows(stream: DigitStream, block_size: int, max_digits: Optional[int]):
    """Yield (matrix of per-block counts, is_partial) for consecutive blocks."""
    carry = np.empty(0, dtype=np.uint8)
    seen = 0
    for chunk in stream.chunks():
        if max_digits is not None:
            chunk = chunk[: max(0, max_digits - seen)]
        seen += chunk.size
        if carry.size:
            chunk = np.concatenate([carry, chunk])
        m = chunk.size // block_size
        if m:
            body = chunk[: m * block_size].astype(np.int64)
            idx = np.repeat(np.arange(m, dtype=np.int64) * N_DIGITS, block_size) + body
            yield np.bincount(idx, minlength=m * N_DIGITS).reshape(m, N_DIGITS), False
        carry = chunk[m * block_size :]
        if max_digits is not None and seen >= max_digits:
            break
    if carry.size:
        yield np.bincount(carry, minlength=N_DIGITS).reshape(1, N_DIGITS), True


def _evaluate(
    ns: np.ndarray,
    rows: np.ndarray,
    priors: Mapping[str, Prior],
    alpha: float,
) -> tuple[dict, dict, dict, np.ndarray]:
    log_bf, bound_max, bound_thr = {}, {}, {}
    for label, prior in priors.items():
        log_bf[label] = np.asarray(log_bf01(rows, prior), dtype=np.float64)
        bound_max[label] = np.asarray(max_log_bf01(ns, prior), dtype=np.float64)
        bound_thr[label] = band_log_bf(ns, prior, alpha)
    return log_bf, bound_max, bound_thr, chisq_stat(rows)


def trajectory_from_counts(
    cumulative: np.ndarray,
    config: AnalysisConfig,
    *,
    partial_last: bool = False,
    source: str = "",
) -> Trajectory:
    """Evaluate every bound on a matrix of cumulative count rows."""
    cumulative = np.asarray(cumulative, dtype=np.int64)
    ns = cumulative.sum(axis=1)
    log_bf, bound_max, bound_thr, chisq = _evaluate(ns, cumulative, config.priors, config.alpha)
    return Trajectory(
        n=ns,
        log_bf=log_bf,
        log_bf_max=bound_max,
        log_bf_threshold=bound_thr,
        chisq=chisq,
        final_counts=DigitCounts(tuple(cumulative[-1].tolist())),
        partial_last=partial_last,
        reference=config.reference,
        source=source,
    )


def run_trajectory(stream: DigitStream, config: Optional[AnalysisConfig] = None) -> Trajectory:
    """Sequential Bayes factors after every completed block of the stream.

    Counts accumulate block by block; each point is one closed-form
    evaluation on the running counts, so the cost is O(1) special-function
    calls per prior per point regardless of N.  A trailing short block gives
    a final point flagged as partial.  Without a config the stream's own
    block size is used.
    """
    config = config or AnalysisConfig(block_size=stream.block_size)
    running = np.zeros(N_DIGITS, dtype=np.int64)
    parts = []
    partial = False
    for block_counts, is_partial in _block_count_rows(stream, config.block_size, config.max_digits):
        cum = np.cumsum(block_counts, axis=0) + running
        running = cum[-1].copy()
        parts.append(cum)
        partial = is_partial
    if not parts:
        raise ValueError(f"digit stream {stream.source!r} is empty")
    return trajectory_from_counts(np.concatenate(parts), config, partial_last=partial, source=stream.source)


def run_trajectories(
    streams: Mapping[str, DigitStream], config: Optional[AnalysisConfig] = None, jobs: int = 1
) -> dict[str, Trajectory]:
    """Independent trajectories for several streams; result order follows ``streams``."""
    config = config or AnalysisConfig()
    keys = list(streams)
    if jobs <= 1 or len(keys) <= 1:
        return {k: run_trajectory(streams[k], config) for k in keys}
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(lambda k: run_trajectory(streams[k], config), keys))
    return dict(zip(keys, results))


def evaluate_counts(counts: DigitCounts, priors=None) -> dict[str, float]:
    """log BF01 per prior for a single tally, e.g. published counts of 10^12 digits."""
    priors = label_priors(priors if priors is not None else default_priors())
    return {label: float(log_bf01(counts, p)) for label, p in priors.items()}


def detect_lindley_windows(
    trajectory: Trajectory, label: Optional[str] = None, *, merge_gap: int = 0
) -> list[tuple[int, int]]:
    """Runs of consecutive points whose log BF falls below the threshold bound.

    At those N the fixed-alpha chi-squared test rejects equal frequencies even
    though the Bayes factor may still favour them.  Returns inclusive
    (first N, last N) pairs.  Runs separated by at most ``merge_gap`` digits
    (distance from the end of one run to the start of the next) are joined;
    the default 0 reports every strict run.
    """
    if merge_gap < 0:
        raise ValueError("merge_gap must be nonnegative")
    label = label or trajectory.reference
    below = np.asarray(trajectory.log_bf[label] < trajectory.log_bf_threshold[label])
    below &= ~np.isnan(trajectory.log_bf_threshold[label])
    if not below.any():
        return []
    edges = np.diff(np.concatenate([[0], below.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    runs = [(int(trajectory.n[s]), int(trajectory.n[e])) for s, e in zip(starts, ends)]
    merged = [runs[0]]
    for lo, hi in runs[1:]:
        if lo - merged[-1][1] <= merge_gap:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


# ---------------------------------------------------------------------------
# simulation

DEFAULT_BIAS = (0.11,) + (0.89 / 9,) * 9


@dataclass
class SimulationConfig:
    replications: int = 1000
    digits_per_replication: int = 10**6
    bias: tuple[float, ...] = DEFAULT_BIAS
    seed: int = 0
    priors: dict[str, Prior] = field(default_factory=default_priors)
    block_size: int = 1000
    alpha: float = 0.05
    keep_trajectories: int = 10

    def __post_init__(self):
        self.priors = label_priors(self.priors)
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.digits_per_replication < 1:
            raise ValueError("digits_per_replication must be >= 1")
        p = np.asarray(self.bias, dtype=np.float64)
        if p.shape != (N_DIGITS,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("bias must be 10 nonnegative probabilities summing to 1")
        self.bias = tuple(float(v) for v in p)


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for replication ``index``: depends only on (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _replicate(seed: int, index: int, length: int, block_size: int, bias) -> np.ndarray:
    """Cumulative block counts of one replication.

    Digits enter the Bayes factors only through their counts, so each
    block's tally is drawn directly from Multinomial(block_size, bias)
    instead of drawing the digits one by one.
    """
    rng = replication_rng(seed, index)
    full, rem = divmod(length, block_size)
    blocks = rng.multinomial(block_size, bias, size=full) if full else np.empty((0, N_DIGITS), np.int64)
    if rem:
        blocks = np.vstack([blocks, rng.multinomial(rem, bias)[None, :]])
    return np.cumsum(blocks, axis=0)


def _replicate_range(args) -> list[np.ndarray]:
    seed, lo, hi, length, block_size, bias, keep = args
    out = []
    for i in range(lo, hi):
        cum = _replicate(seed, i, length, block_size, bias)
        out.append(cum if i < keep else cum[-1:])
    return out


@dataclass(eq=False)
class SimulationResult:
    config: SimulationConfig
    final_counts: np.ndarray
    final_log_bf10: dict[str, np.ndarray]
    final_chisq: np.ndarray
    trajectories: list[Trajectory]

    def summary(self) -> dict[str, dict[str, float]]:
        """Per-prior summary of the final log BF10 values.

        ``mean_log_bf10`` averages on the log scale (the headline number);
        ``log_mean_bf10`` is the log of the arithmetic mean of BF10 itself.
        """
        out = {}
        crit = critical_value(self.config.alpha)
        reps = self.final_chisq.size
        for label, vals in self.final_log_bf10.items():
            q = np.quantile(vals, [0.025, 0.25, 0.5, 0.75, 0.975])
            mean = float(np.mean(vals))
            lmax = float(np.max(vals))
            out[label] = {
                "mean_log_bf10": mean,
                "log10_bf10_of_mean": mean / math.log(10),
                "log_mean_bf10": float(lmax + math.log(np.mean(np.exp(vals - lmax)))),
                "sd_log_bf10": float(np.std(vals, ddof=1)) if reps > 1 else 0.0,
                "min_log_bf10": float(np.min(vals)),
                "max_log_bf10": lmax,
                "q025": float(q[0]),
                "q25": float(q[1]),
                "median": float(q[2]),
                "q75": float(q[3]),
                "q975": float(q[4]),
                "fraction_positive": float(np.mean(vals > 0)),
            }
        out["chisq"] = {
            "mean": float(np.mean(self.final_chisq)),
            "fraction_rejected": float(np.mean(self.final_chisq > crit)),
            "critical": crit,
        }
        return out


def run_simulation(config: Optional[SimulationConfig] = None, jobs: int = 1) -> SimulationResult:
    """Replicated streams from a (possibly biased) digit distribution.

    Replication i draws from :func:`replication_rng` (seed, i), so results are
    identical for any ``jobs`` and any execution order.  The first
    ``keep_trajectories`` replications keep their full trajectories.
    """
    config = config or SimulationConfig()
    reps = config.replications
    keep = min(config.keep_trajectories, reps)
    bias = np.asarray(config.bias)
    jobs = max(1, min(jobs, reps))
    step = -(-reps // jobs)
    tasks = [
        (config.seed, lo, min(lo + step, reps), config.digits_per_replication, config.block_size, bias, keep)
        for lo in range(0, reps, step)
    ]
    if jobs == 1:
        chunks = [_replicate_range(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_replicate_range, tasks))
    per_rep = [c for chunk in chunks for c in chunk]

    finals = np.stack([c[-1] for c in per_rep])
    analysis = AnalysisConfig(priors=config.priors, block_size=config.block_size, alpha=config.alpha)
    log_bf10 = {label: -np.asarray(log_bf01(finals, p), dtype=np.float64) for label, p in config.priors.items()}
    trajectories = [
        trajectory_from_counts(
            per_rep[i],
            analysis,
            partial_last=config.digits_per_replication % config.block_size != 0,
            source=f"simulated:seed={config.seed}:rep={i}",
        )
        for i in range(keep)
    ]
    return SimulationResult(
        config=config,
        final_counts=finals,
        final_log_bf10=log_bf10,
        final_chisq=np.asarray(chisq_stat(finals)),
        trajectories=trajectories,
    )
