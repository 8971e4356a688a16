"""Cesaro means and sliding-window average extremes over truncations.

The profile of a truncation is, for each window length n, the largest and
smallest average of n consecutive terms (p_hat, q_hat), plus Cesaro means at
sampled indices.  Both come from one prefix-sum array, kept as a
double-double pair (hi, lo) so that a window sum is accurate to about one
ulp of the window itself rather than one ulp of the running total.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .seqgen import Truncation, block_boundaries

WINDOW_CHUNK = 1 << 21


@dataclass(frozen=True)
class PrefixSums:
    """P_i = x_1 + ... + x_i as hi + lo, with P_0 = 0."""

    hi: np.ndarray
    lo: np.ndarray

    @property
    def N(self) -> int:
        return self.hi.size - 1

    def total(self) -> np.ndarray:
        return self.hi + self.lo


def _values(t: Truncation | np.ndarray | Sequence[float]) -> np.ndarray:
    if isinstance(t, Truncation):
        return t.values
    x = np.asarray(t, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-d sequence")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise ValueError(f"non-finite value at index {int(bad[0]) + 1}")
    return x


def compensated_prefix(t: Truncation | np.ndarray | Sequence[float]) -> PrefixSums:
    x = _values(t)
    hi = np.empty(x.size + 1)
    hi[0] = 0.0
    np.cumsum(x, out=hi[1:])
    # TwoSum: hi[i-1] + x[i] = hi[i] + err[i] exactly (cumsum rounds step by step)
    a, s = hi[:-1], hi[1:]
    bv = s - a
    av = s - bv
    err = (a - av) + (x - bv)
    lo = np.empty_like(hi)
    lo[0] = 0.0
    np.cumsum(err, out=lo[1:])
    return PrefixSums(hi, lo)


def prefix_sums(t: Truncation | np.ndarray | Sequence[float]) -> np.ndarray:
    """(P_0, ..., P_N) with P_0 = 0, compensated."""
    return compensated_prefix(t).total()


def _as_prefix(t) -> PrefixSums:
    return t if isinstance(t, PrefixSums) else compensated_prefix(t)


def window_sum_extremes(t, n: int) -> tuple[float, float]:
    """(max, min) over j of x_j + ... + x_{j+n-1}, windows inside the truncation."""
    ps = _as_prefix(t)
    N = ps.N
    n = int(n)
    if n < 1 or n > N:
        raise ValueError(f"window length {n} outside 1..{N}")
    count = N - n + 1
    best_hi, best_lo = -np.inf, np.inf
    for j0 in range(0, count, WINDOW_CHUNK):
        j1 = min(j0 + WINDOW_CHUNK, count)
        w = ps.hi[j0 + n : j1 + n] - ps.hi[j0:j1]
        w += ps.lo[j0 + n : j1 + n] - ps.lo[j0:j1]
        best_hi = max(best_hi, float(w.max()))
        best_lo = min(best_lo, float(w.min()))
    return best_hi, best_lo


def window_extremes(t, n: int) -> tuple[float, float]:
    """(p_hat_n, q_hat_n): extreme averages of n consecutive terms."""
    hi, lo = window_sum_extremes(t, n)
    return hi / n, lo / n


def cesaro_profile(t, sample_points: Sequence[int]) -> np.ndarray:
    """s_i = (x_1 + ... + x_i) / i at each sample point."""
    ps = _as_prefix(t)
    pts = np.asarray(sample_points, dtype=np.int64)
    if pts.size and (pts.min() < 1 or pts.max() > ps.N):
        raise ValueError(f"sample points must lie in 1..{ps.N}")
    return (ps.hi[pts] + ps.lo[pts]) / pts


def default_schedule(N: int, densify: int = 0) -> np.ndarray:
    """Powers of two up to N/4; ``densify`` extra evenly spaced lengths in the top octave."""
    top = max(N // 4, 1)
    sched = [1 << k for k in range(top.bit_length()) if (1 << k) <= top]
    if densify and sched[-1] >= 4:
        lo_n = sched[-1] // 2
        extra = np.linspace(lo_n, sched[-1], densify + 2)[1:-1]
        sched.extend(int(round(v)) for v in extra)
    return np.array(sorted(set(sched)), dtype=np.int64)


PER_OCTAVE = 8


def default_cesaro_points(N: int, spec=None) -> np.ndarray:
    """Powers of two, a geometric grid N * 2**(-k/8), and block boundaries of ``spec`` if given.

    Without ``spec`` the points depend on N alone, so a truncation and the
    same values re-read from disk get identical profiles.
    """
    pts = {1 << k for k in range(N.bit_length()) if (1 << k) <= N}
    octaves = N.bit_length() * PER_OCTAVE
    grid = np.floor(N * np.exp2(-np.arange(octaves + 1) / PER_OCTAVE)).astype(np.int64)
    pts.update(int(v) for v in grid if v >= 1)
    if spec is not None:
        pts.update(block_boundaries(spec, N))
    return np.array(sorted(pts), dtype=np.int64)


@dataclass(frozen=True)
class WindowProfile:
    schedule: np.ndarray
    p_hat: np.ndarray
    q_hat: np.ndarray
    cesaro_points: np.ndarray
    cesaro: np.ndarray
    N: int
    # source data, kept for statistics that need more than the profile
    truncation: Truncation | None = None
    values: np.ndarray | None = None

    def gap_trace(self) -> np.ndarray:
        return self.p_hat - self.q_hat

    def rows(self) -> list[tuple[int, float, float]]:
        return [(int(n), float(p), float(q)) for n, p, q in zip(self.schedule, self.p_hat, self.q_hat)]

    def to_csv(self) -> str:
        lines = ["n,p_hat,q_hat"]
        lines += [f"{n},{p!r},{q!r}" for n, p, q in self.rows()]
        return "\n".join(lines) + "\n"

    def cesaro_csv(self) -> str:
        lines = ["i,cesaro"]
        lines += [f"{int(i)},{float(s)!r}" for i, s in zip(self.cesaro_points, self.cesaro)]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "schedule": [int(n) for n in self.schedule],
            "p_hat": [float(v) for v in self.p_hat],
            "q_hat": [float(v) for v in self.q_hat],
            "cesaro_points": [int(i) for i in self.cesaro_points],
            "cesaro": [float(v) for v in self.cesaro],
        }


def lorentz_profile(
    t: Truncation | np.ndarray,
    schedule: Sequence[int] | None = None,
    cesaro_points: Sequence[int] | None = None,
    threads: int = 1,
    block_points: bool = False,
) -> WindowProfile:
    """Window extremes at every scheduled length plus a Cesaro trace.

    Window lengths are independent given the shared prefix sums; with
    ``threads > 1`` they run concurrently and are merged in schedule order.
    ``block_points`` adds the spec's block boundaries to the Cesaro samples;
    it is off by default so that the profile depends on the values alone.
    """
    trunc = t if isinstance(t, Truncation) else None
    ps = compensated_prefix(t)
    N = ps.N
    sched = default_schedule(N) if schedule is None else np.asarray(schedule, dtype=np.int64)
    if sched.size == 0:
        raise ValueError("empty window schedule")
    if np.any(np.diff(sched) <= 0):
        raise ValueError("window schedule must be strictly increasing")
    if sched[0] < 1 or sched[-1] > N:
        raise ValueError(f"window lengths must lie in 1..{N}")
    if cesaro_points is None:
        spec = trunc.spec if (block_points and trunc is not None) else None
        cesaro_points = default_cesaro_points(N, spec)
    pts = np.asarray(cesaro_points, dtype=np.int64)

    def one(n):
        return window_extremes(ps, int(n))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ext = list(pool.map(one, sched))
    else:
        ext = [one(n) for n in sched]
    p_hat = np.array([e[0] for e in ext])
    q_hat = np.array([e[1] for e in ext])
    return WindowProfile(
        schedule=sched,
        p_hat=p_hat,
        q_hat=q_hat,
        cesaro_points=pts,
        cesaro=cesaro_profile(ps, pts),
        N=N,
        truncation=trunc,
        values=_values(t),
    )


class StreamingCesaro:
    """Compensated running sum fed chunk by chunk; records s_i at requested indices.

    Lets Cesaro traces of very long truncations be computed without holding
    the whole sequence in memory.
    """

    def __init__(self, sample_points: Sequence[int]):
        self._points = np.unique(np.asarray(sample_points, dtype=np.int64))
        self._hi = 0.0
        self._lo = 0.0
        self._seen = 0
        self._out: dict[int, float] = {}

    def feed(self, chunk: np.ndarray) -> None:
        chunk = _values(chunk)
        ps = compensated_prefix(chunk)
        start = self._seen
        stop = start + chunk.size
        pts = self._points[(self._points > start) & (self._points <= stop)]
        for i in pts:
            k = int(i) - start
            total = (self._hi + ps.hi[k]) + (self._lo + ps.lo[k])
            self._out[int(i)] = total / int(i)
        # fold the chunk total into the running pair (TwoSum on the hi parts)
        s = self._hi + ps.hi[-1]
        bv = s - self._hi
        err = (self._hi - (s - bv)) + (ps.hi[-1] - bv)
        self._hi = s
        self._lo += ps.lo[-1] + err
        self._seen = stop

    @property
    def count(self) -> int:
        return self._seen

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        pts = np.array(sorted(self._out), dtype=np.int64)
        return pts, np.array([self._out[int(i)] for i in pts])
