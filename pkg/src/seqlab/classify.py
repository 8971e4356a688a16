"""Membership verdicts for c0, c, chat, chat0, S, S0 from a window profile.

Finite data never decides membership; every verdict is an evidence
statement.  The sliding-window criterion brackets all Banach limits of x
between lim q_hat and lim p_hat; on a truncation both limits are read off
the tail of the window schedule.

A truncation only sees windows starting at j <= N - n + 1, so a sequence
whose extreme windows keep appearing later and later (runs that lengthen
with N) looks almost convergent at the largest window lengths.  The
extrapolation policy therefore compares nested prefixes N, N/2, ..., N/2**K:
if the longest run of terms at least ``tol`` away from the Cesaro limit
keeps growing, convergence is not uniform in the start index, and the
bracket is read at window lengths the runs still cover.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .windowstats import WindowProfile

DEFAULT_TOL = 1e-2
DEFAULT_TAIL = 0.25
MIN_LEN = 16
PREFIX_OCTAVES = 4
CLAMP_EPS = 1e-12

SPACES = ("c0", "c", "chat", "chat0", "S", "S0")

DISCLAIMER = (
    "Verdicts are evidence from a finite truncation, not proofs; the interval "
    "[banach_lo, banach_hi] brackets all Banach limits and is not claimed exact."
)


class Verdict(str, Enum):
    MEMBER = "ConsistentWithMember"
    NON_MEMBER = "ConsistentWithNonMember"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class BanachBracket:
    lo: float
    hi: float
    tail: tuple[int, ...]
    window_cap: int | None
    clamped: bool


@dataclass(frozen=True)
class RunGrowth:
    """Longest one-signed run at distance >= delta from ``level``, per nested prefix."""

    level: float
    delta: float
    prefixes: tuple[int, ...]
    above: tuple[int, ...]
    below: tuple[int, ...]

    @property
    def growing(self) -> bool:
        return self.above[0] > self.above[-1] or self.below[0] > self.below[-1]

    @property
    def longest(self) -> int:
        return max(self.above[0], self.below[0])


@dataclass
class ClassificationReport:
    banach_lo: float
    banach_hi: float
    cesaro_limit: float | None
    gap_trace: np.ndarray
    verdicts: dict[str, Verdict]
    tol: float
    N: int
    tail_fraction: float = DEFAULT_TAIL
    limit_estimate: float | None = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "banach_lo": self.banach_lo,
            "banach_hi": self.banach_hi,
            "cesaro_limit": self.cesaro_limit,
            "limit_estimate": self.limit_estimate,
            "verdicts": {k: v.value for k, v in self.verdicts.items()},
            "tol": self.tol,
            "tail_fraction": self.tail_fraction,
            "N": self.N,
            "gap_trace": [float(g) for g in self.gap_trace],
            "evidence": self.evidence,
            "note": DISCLAIMER,
        }


def _tail_count(size: int, tail_fraction: float) -> int:
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    return max(1, math.ceil(tail_fraction * size))


def _longest_run(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    edges = np.diff(np.concatenate(([0], mask.view(np.int8), [0])))
    return int((np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)).max())


def run_growth(
    values: np.ndarray, level: float, delta: float, octaves: int = PREFIX_OCTAVES
) -> RunGrowth | None:
    """Run lengths on prefixes N, N/2, ..., N/2**octaves (fewer if N is short)."""
    N = values.size
    k = octaves
    while k > 0 and (N >> k) < MIN_LEN:
        k -= 1
    if k < 2:
        return None
    prefixes = tuple(N >> i for i in range(k + 1))
    above = values - level >= delta
    below = level - values >= delta
    return RunGrowth(
        level=float(level),
        delta=float(delta),
        prefixes=prefixes,
        above=tuple(_longest_run(above[:p]) for p in prefixes),
        below=tuple(_longest_run(below[:p]) for p in prefixes),
    )


def _profile_growth(profile: WindowProfile, tol: float) -> RunGrowth | None:
    if profile.values is None or profile.N < MIN_LEN:
        return None
    return run_growth(profile.values, float(profile.cesaro[-1]), tol)


def banach_bracket(
    profile: WindowProfile,
    tail_fraction: float = DEFAULT_TAIL,
    tol: float = DEFAULT_TOL,
    growth: RunGrowth | None = None,
) -> BanachBracket:
    sched = profile.schedule
    if sched.size == 0:
        raise ValueError("empty profile")
    if growth is None:
        growth = _profile_growth(profile, tol)
    cap = None
    usable = np.arange(sched.size)
    if growth is not None and growth.growing:
        cap = growth.longest
        capped = np.flatnonzero(sched <= cap)
        if capped.size:
            usable = capped
    k = _tail_count(usable.size, tail_fraction)
    idx = usable[-k:]
    if idx.size == 0:
        raise ValueError("empty schedule tail")
    lo = float(profile.q_hat[idx].max())
    hi = float(profile.p_hat[idx].min())
    clamped = False
    if lo > hi:
        if lo - hi >= CLAMP_EPS * max(1.0, abs(lo), abs(hi)):
            # finite-window artefact rather than rounding: report the hull of the tail
            lo, hi = float(profile.q_hat[idx].min()), float(profile.p_hat[idx].max())
        else:
            lo = hi = 0.5 * (lo + hi)
        clamped = True
    return BanachBracket(lo, hi, tuple(int(n) for n in sched[idx]), cap, clamped)


def banach_interval(
    profile: WindowProfile, tail_fraction: float = DEFAULT_TAIL, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """(lo, hi) bracketing every Banach limit: max q_hat and min p_hat over the schedule tail."""
    b = banach_bracket(profile, tail_fraction, tol)
    return b.lo, b.hi


def _monotone(trace: np.ndarray, slack: float) -> bool:
    d = np.diff(trace)
    return bool(np.all(d >= -slack) or np.all(d <= slack))


def _octave_slope(points: np.ndarray, trace: np.ndarray) -> float:
    x = np.log2(points.astype(np.float64))
    if trace.size < 2 or np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, trace, 1)[0])


def _trace_verdict(points, trace, tol) -> tuple[Verdict, dict]:
    osc = float(np.ptp(trace))
    info = {"oscillation": osc, "slope_per_octave": _octave_slope(points, trace)}
    if osc <= tol:
        return Verdict.MEMBER, info
    # a one-directional tail may still settle; an oscillating one will not
    if _monotone(trace, tol / 10):
        return Verdict.INCONCLUSIVE, info
    return Verdict.NON_MEMBER, info


def _zero_verdict(base: Verdict, limit: float | None, tol: float) -> Verdict:
    if base is not Verdict.MEMBER:
        return base
    return Verdict.MEMBER if limit is not None and abs(limit) <= tol else Verdict.NON_MEMBER


def _reconcile(chain: list[Verdict], names: list[str], conflicts: list[str]) -> list[Verdict]:
    """Enforce nesting along smallest-to-largest spaces.

    Non-membership of a larger space is positive evidence and overrides a
    smaller space's member verdict (a flat tail is only absence of evidence).
    A member verdict next to an inconclusive larger space is withdrawn.
    """
    out = list(chain)
    for j in range(len(out) - 1, 0, -1):
        if out[j] is Verdict.NON_MEMBER:
            for i in range(j):
                if out[i] is Verdict.MEMBER:
                    conflicts.append(f"{names[i]} member overridden by {names[j]} non-member")
                out[i] = Verdict.NON_MEMBER
    for i in range(len(out)):
        if out[i] is Verdict.MEMBER and any(v is not Verdict.MEMBER for v in out[i + 1 :]):
            conflicts.append(f"{names[i]} member withdrawn: a larger space is inconclusive")
            out[i] = Verdict.INCONCLUSIVE
    return out


def classify(
    profile: WindowProfile, tol: float = DEFAULT_TOL, tail_fraction: float = DEFAULT_TAIL
) -> ClassificationReport:
    if not tol > 0:
        raise ValueError("tol must be positive")
    N = profile.N
    gap = profile.gap_trace()
    if N < MIN_LEN:
        return ClassificationReport(
            banach_lo=float(profile.q_hat.min()),
            banach_hi=float(profile.p_hat.max()),
            cesaro_limit=None,
            gap_trace=gap,
            verdicts={s: Verdict.INCONCLUSIVE for s in SPACES},
            tol=tol,
            N=N,
            tail_fraction=tail_fraction,
            evidence={"reason": f"truncation shorter than {MIN_LEN}"},
        )

    evidence: dict = {}

    # S: Cesaro trace over the last part of the sample points
    k = max(2, _tail_count(profile.cesaro_points.size, tail_fraction))
    pts, ces = profile.cesaro_points[-k:], profile.cesaro[-k:]
    v_S, evidence["S"] = _trace_verdict(pts, ces, tol)
    cesaro_limit = float(profile.cesaro[-1])

    # c: raw values over the tail of the truncation
    v_c, c_limit = Verdict.INCONCLUSIVE, None
    if profile.values is not None:
        vals = profile.values
        tail = vals[N - _tail_count(N, tail_fraction) :]
        idx = np.arange(N - tail.size + 1, N + 1)
        v_c, evidence["c"] = _trace_verdict(idx, tail, tol)
        c_limit = 0.5 * (float(tail.max()) + float(tail.min()))
    else:
        evidence["c"] = {"reason": "profile carries no values"}

    # chat: bracket width, after the run-growth check
    growth = _profile_growth(profile, tol)
    bracket = banach_bracket(profile, tail_fraction, tol, growth)
    width = bracket.hi - bracket.lo
    chat_info = {
        "width": width,
        "tail_windows": list(bracket.tail),
        "window_cap": bracket.window_cap,
        "clamped": bracket.clamped,
    }
    if growth is not None:
        chat_info["run_growth"] = {
            "level": growth.level,
            "delta": growth.delta,
            "prefixes": list(growth.prefixes),
            "runs_above": list(growth.above),
            "runs_below": list(growth.below),
        }
    if growth is not None and growth.growing:
        v_chat = Verdict.NON_MEMBER
        chat_info["reason"] = "deviating runs lengthen with N: convergence not uniform in start"
    elif width <= tol:
        v_chat = Verdict.MEMBER
    else:
        tail_gap = gap[np.isin(profile.schedule, bracket.tail)]
        decreasing = tail_gap.size >= 2 and bool(np.all(np.diff(tail_gap) <= tol / 10))
        v_chat = Verdict.INCONCLUSIVE if decreasing and tail_gap[-1] < tail_gap[0] else Verdict.NON_MEMBER
    evidence["chat"] = chat_info

    conflicts: list[str] = []
    v_c, v_chat, v_S = _reconcile([v_c, v_chat, v_S], ["c", "chat", "S"], conflicts)
    limit = 0.5 * (bracket.lo + bracket.hi) if v_chat is Verdict.MEMBER else None
    v_c0 = _zero_verdict(v_c, c_limit, tol)
    v_chat0 = _zero_verdict(v_chat, limit, tol)
    v_S0 = _zero_verdict(v_S, cesaro_limit, tol)
    v_c0, v_chat0, v_S0 = _reconcile([v_c0, v_chat0, v_S0], ["c0", "chat0", "S0"], conflicts)
    if conflicts:
        evidence["conflicts"] = conflicts

    return ClassificationReport(
        banach_lo=bracket.lo,
        banach_hi=bracket.hi,
        cesaro_limit=cesaro_limit if v_S is Verdict.MEMBER else None,
        gap_trace=gap,
        verdicts={
            "c0": v_c0,
            "c": v_c,
            "chat": v_chat,
            "chat0": v_chat0,
            "S": v_S,
            "S0": v_S0,
        },
        tol=tol,
        N=N,
        tail_fraction=tail_fraction,
        limit_estimate=limit,
        evidence=evidence,
    )
