"""Seeded Monte Carlo on the cube X = (-1/2, 1/2)^N with product uniform measure.

Two experiments: Cesaro means of i.i.d. uniform coordinates concentrate at
0 like 1/sqrt(12 n), and the event "the first M block averages all fall below
1/4" decays geometrically in M.  Together they are the numerical shadow of
S_0 having full measure while the almost convergent sequences are null.

Every trial draws from its own Philox stream: key = seed, with the trial
index in the top 64-bit word of the 256-bit counter.  A trial therefore
sees the same numbers whichever worker runs it, and results are reduced in
trial order, so reports do not depend on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats

THRESHOLD = 0.25
SAMPLERS = ("uniform", "zero")
SYMMETRY_NOTE = (
    "the mirrored event (block averages in (-1/4, 1/2]) has the same law by "
    "symmetry of the uniform distribution and is not simulated separately"
)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` under ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))


def uniform_coordinates(gen: np.random.Generator, n: int) -> np.ndarray:
    # u in [0, 1) with 53 random bits; the closed endpoint at -1/2 is ignored
    return gen.random(n) - 0.5


def _run_trials(trials: int, threads: int, work: Callable[[int, int], np.ndarray]) -> np.ndarray:
    """Calls work(lo, hi) on contiguous trial ranges and stacks rows in trial order."""
    if threads <= 1 or trials < 2:
        return work(0, trials)
    step = math.ceil(trials / threads)
    ranges = [(lo, min(lo + step, trials)) for lo in range(0, trials, step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda r: work(*r), ranges))
    return np.concatenate(parts, axis=0)


@dataclass
class McReport:
    experiment: str
    seed: int
    trials: int
    params: dict
    statistics: dict
    notes: list[str] = field(default_factory=list)
    traces: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "trials": self.trials,
            "params": self.params,
            "statistics": self.statistics,
            "notes": self.notes,
        }

    def traces_csv(self) -> str:
        if self.traces is None:
            raise ValueError("report was built without per-trial traces")
        cols = self.params.get("points") or list(range(1, self.traces.shape[1] + 1))
        lines = ["trial," + ",".join(f"n{c}" for c in cols)]
        lines += [f"{t}," + ",".join(repr(float(v)) for v in row) for t, row in enumerate(self.traces)]
        return "\n".join(lines) + "\n"


# -- law of large numbers ------------------------------------------------------------


def lln_points(N: int) -> list[int]:
    return [1 << k for k in range(N.bit_length()) if (1 << k) <= N]


def mc_lln(
    seed: int,
    N: int,
    trials: int,
    sampler: str = "uniform",
    threads: int = 1,
    keep_traces: bool = False,
) -> McReport:
    """Spread of Cesaro means s_n across trials at n = 1, 2, 4, ..., <= N."""
    if N < 1 or trials < 1:
        raise ValueError("N and trials must be positive")
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")
    points = lln_points(N)
    idx = np.array(points) - 1
    pts = np.array(points, dtype=np.float64)

    def work(lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, len(points)))
        for row, t in enumerate(range(lo, hi)):
            if sampler == "zero":
                x = np.zeros(N)
            else:
                x = uniform_coordinates(substream(seed, t), N)
            out[row] = np.cumsum(x)[idx] / pts
        return out

    s = _run_trials(trials, threads, work)
    mean = s.mean(axis=0)
    std = s.std(axis=0, ddof=1) if trials > 1 else np.zeros(len(points))
    ref = np.sqrt(1.0 / (12.0 * pts))
    rows = []
    for k, n in enumerate(points):
        rows.append(
            {
                "n": n,
                "mean": float(mean[k]),
                "std": float(std[k]),
                "reference_std": float(ref[k]),
                "std_ratio": float(std[k] / ref[k]),
                "symmetric": bool(abs(mean[k]) <= 4 * ref[k] / math.sqrt(trials)),
            }
        )
    return McReport(
        "lln",
        seed,
        trials,
        {"N": N, "sampler": sampler, "points": points},
        {"cesaro": rows},
        traces=s if keep_traces else None,
    )


# -- block events ------------------------------------------------------------------------


def block_event_probability(block_size: int) -> Fraction:
    """P(mean of block_size uniforms on (-1/2,1/2) < 1/4), exactly (Irwin-Hall CDF)."""
    n = int(block_size)
    if n < 1:
        raise ValueError("block size must be positive")
    x = Fraction(3 * n, 4)
    total = sum((-1) ** k * math.comb(n, k) * (x - k) ** n for k in range(math.floor(x) + 1))
    return total / math.factorial(n)


def mc_block_decay(
    seed: int,
    block_size: int,
    m_max: int,
    trials: int,
    threads: int = 1,
) -> McReport:
    """Frequency that the first M block averages all stay below 1/4, M = 1..m_max."""
    if block_size < 1 or m_max < 1 or trials < 1:
        raise ValueError("block_size, m_max and trials must be positive")

    def work(lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, m_max), dtype=bool)
        for row, t in enumerate(range(lo, hi)):
            x = uniform_coordinates(substream(seed, t), m_max * block_size)
            out[row] = x.reshape(m_max, block_size).mean(axis=1) < THRESHOLD
        return out

    below = _run_trials(trials, threads, work)
    events = int(below.sum())
    draws = below.size
    p_hat = events / draws
    p_se = math.sqrt(p_hat * (1 - p_hat) / draws)
    # all-of-first-M is a running AND, so counts cannot increase with M
    all_first = np.logical_and.accumulate(below, axis=1).sum(axis=0)
    freqs = []
    fit_m, fit_log = [], []
    for M in range(1, m_max + 1):
        count = int(all_first[M - 1])
        entry = {"M": M, "count": count}
        if count == 0:
            entry["frequency"] = [0.0, 3.0 / trials]
        else:
            entry["frequency"] = count / trials
            fit_m.append(M)
            fit_log.append(math.log(count / trials))
        freqs.append(entry)

    fit: dict = {"points": len(fit_m)}
    if len(fit_m) >= 3:
        reg = stats.linregress(fit_m, fit_log)
        fit.update(slope=float(reg.slope), slope_se=float(reg.stderr), intercept=float(reg.intercept))
    elif len(fit_m) == 2:
        slope = fit_log[1] - fit_log[0]
        fit.update(slope=slope, slope_se=float("nan"), intercept=fit_log[0] - slope)
    exact = block_event_probability(block_size)
    return McReport(
        "block-decay",
        seed,
        trials,
        {"block_size": block_size, "m_max": m_max, "threshold": THRESHOLD},
        {
            "p_hat": p_hat,
            "p_hat_se": p_se,
            "blocks_observed": draws,
            "p_exact": float(exact),
            "log_p_hat": math.log(p_hat) if p_hat > 0 else float("-inf"),
            "all_first_M": freqs,
            "fit": fit,
        },
        notes=[SYMMETRY_NOTE],
    )
