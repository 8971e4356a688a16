"""Witness balls for strong lower porosity of c in chat, chat in S and S in l_inf.

Given a center x of the smaller space E and a radius r, the certificate
moves to y = x + (r/2) w along a +-1 pattern w that lies in the larger
space but is far from E.  Every z with ||z - y|| < alpha r / 2 then keeps
a pair-specific oscillation of at least r (1 - alpha), which rules out
membership in E.  On a truncation that oscillation is a single number,
the exclusion statistic, which is checked on seeded random points of the
ball.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import seqgen as sg
from .classify import Verdict, classify
from .randmeasure import substream
from .seqgen import SequenceSpec
from .windowstats import lorentz_profile, window_extremes

PAIRS = ("c_in_chat", "chat_in_S", "S_in_linf")
SMALLER = {"c_in_chat": "c", "chat_in_S": "chat", "S_in_linf": "S"}
ZERO_SPACE = {"c": "c0", "chat": "chat0", "S": "S0"}
CHECK_LEN = 1 << 16
DEFAULT_SAMPLES = 1000


def default_pattern(pair: str, zero_limit: bool = False) -> SequenceSpec:
    if pair == "c_in_chat":
        return sg.alt_sign()
    if pair == "chat_in_S":
        # 2x - 1 has Cesaro limit 1, so y would leave S_0; balanced runs keep it at 0
        return sg.balanced_runs() if zero_limit else sg.affine(sg.example_s_not_chat(), 2.0, -1.0)
    if pair == "S_in_linf":
        return sg.sign_blocks()
    raise ValueError(f"unknown pair {pair!r}; choose from {PAIRS}")


def default_length(pair: str, pattern: SequenceSpec) -> int:
    if pair == "c_in_chat":
        return 10_000
    if pair == "chat_in_S":
        return sg.boundary(pattern, 12 if pattern.variant == "affine" else 11)
    return sg.boundary(pattern, 6)


def required_length(pair: str, pattern: SequenceSpec) -> int:
    """Shortest truncation holding one full period of the pattern's structure."""
    # pattern is the pair's declared one; a tampered direction must not move the goalposts
    if pair == "c_in_chat":
        return 4
    return sg.boundary(pattern, 3)


@dataclass(frozen=True)
class PorosityCertificate:
    pair: str
    base: SequenceSpec
    r: float
    alpha: float
    pattern: SequenceSpec
    oscillation_bound: float
    zero_limit: bool = False

    def __post_init__(self) -> None:
        if self.pair not in PAIRS:
            raise ValueError(f"unknown pair {self.pair!r}")
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.oscillation_bound > 0:
            raise ValueError("oscillation bound must be positive")

    def center(self) -> SequenceSpec:
        """y = x + (r/2) w."""
        return sg.sum_of(self.base, sg.affine(self.pattern, self.r / 2, 0.0))

    @property
    def gamma(self) -> float:
        """Radius of the excluded ball inside B(x, r)."""
        return self.alpha * self.r / 2

    def to_dict(self) -> dict:
        return {
            "pair": self.pair,
            "zero_limit": self.zero_limit,
            "base": sg.spec_to_text(self.base),
            "pattern": sg.spec_to_text(self.pattern),
            "r": self.r,
            "alpha": self.alpha,
            "oscillation_bound": self.oscillation_bound,
            "gamma": self.gamma,
            "gamma_ratio": 2 * self.gamma / self.r,
        }


def tamper(cert: PorosityCertificate, pattern: SequenceSpec) -> PorosityCertificate:
    """Same certificate with a different direction; used for negative controls."""
    return dataclasses.replace(cert, pattern=pattern)


class CertificateRefused(ValueError):
    def __init__(self, message: str, evidence: dict):
        super().__init__(message)
        self.evidence = evidence


# -- exclusion statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class RunWindows:
    """Window length n plus 0-based starts of a length-n window inside a +1 run and a -1 run."""

    n: int
    plus: int
    minus: int


def _longest_run(w: np.ndarray, sign: float) -> tuple[int, int]:
    """(length, start) of the last longest run of ``sign`` in w."""
    mask = np.concatenate(([False], w == sign, [False]))
    edges = np.flatnonzero(np.diff(mask.astype(np.int8)))
    if not edges.size:
        return 0, -1
    lengths = edges[1::2] - edges[::2]
    k = int(np.flatnonzero(lengths == lengths.max())[-1])
    return int(lengths[k]), int(edges[2 * k])


def run_windows(w: np.ndarray) -> RunWindows:
    """Largest power of two n with a +1 run and a -1 run of length >= n in w."""
    lp, sp = _longest_run(w, 1.0)
    lm, sm = _longest_run(w, -1.0)
    m = min(lp, lm)
    if m == 0:
        raise ValueError("pattern has no run of one of the two signs")
    return RunWindows(1 << (m.bit_length() - 1), sp, sm)


def _alt_statistic(z: np.ndarray) -> float:
    # 1-based even indices sit at 0-based odd positions
    half = z.size // 2
    tail_start = z.size - half
    idx = np.arange(tail_start, z.size)
    even = z[idx[(idx + 1) % 2 == 0]]
    odd = z[idx[(idx + 1) % 2 == 1]]
    return float(even.min() - odd.max())


def _gap_statistic(z: np.ndarray, n: int) -> float:
    p, q = window_extremes(z, n)
    return p - q


def _anchored_statistic(z: np.ndarray, rw: RunWindows) -> float:
    # a lower bound for p_hat_n - q_hat_n, read off where the pattern puts its runs
    up = z[rw.plus : rw.plus + rw.n].sum() / rw.n
    down = z[rw.minus : rw.minus + rw.n].sum() / rw.n
    return float(up - down)


def _cesaro_statistic(z: np.ndarray, points: np.ndarray) -> float:
    # only a couple of points are read, so pairwise sums of the prefixes beat a full prefix scan
    s = np.array([z[:p].sum() for p in points]) / points
    return float(s.max() - s.min())


def _tail_points(pattern: SequenceSpec, N: int) -> np.ndarray:
    b = sg.block_boundaries(pattern, N)
    if len(b) < 2:
        return np.array([N // 2, N], dtype=np.int64)
    return np.array(b[-2:], dtype=np.int64)


def _statistic(pair: str, z: np.ndarray, aux) -> float:
    if pair == "c_in_chat":
        return _alt_statistic(z)
    if pair == "chat_in_S":
        return _anchored_statistic(z, aux)
    return _cesaro_statistic(z, aux)


def base_oscillation(pair: str, x: np.ndarray, aux) -> float:
    """How far the base itself is from its limit behaviour on the truncation."""
    if pair == "c_in_chat":
        tail = x[x.size - x.size // 2 :]
        return float(tail.max() - tail.min())
    if pair == "chat_in_S":
        return _gap_statistic(x, aux.n)
    return _cesaro_statistic(x, aux)


# -- construction -------------------------------------------------------------------------


def porosity_witness(
    pair: str,
    xspec: SequenceSpec,
    r: float,
    alpha: float,
    zero_limit: bool = False,
    check_len: int = CHECK_LEN,
) -> PorosityCertificate:
    """Certificate for the pair at center xspec; refuses centers outside the smaller space."""
    if not r > 0:
        raise ValueError("r must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    pattern = default_pattern(pair, zero_limit)
    bound = r * (1 - alpha)
    x = sg.generate(xspec, check_len)
    report = classify(lorentz_profile(x))
    space = SMALLER[pair]
    if zero_limit:
        space = ZERO_SPACE[space]
    verdict = report.verdicts[space]
    if verdict is Verdict.NON_MEMBER:
        raise CertificateRefused(
            f"{xspec.describe()} does not look like a member of {space}", report.to_dict()
        )
    aux = _aux(pair, pattern, check_len)
    osc = base_oscillation(pair, x.values, aux)
    if osc >= bound / 2:
        raise CertificateRefused(
            f"base oscillation {osc:.3g} is at least half the bound {bound:.3g}",
            {"oscillation": osc, "bound": bound, "verdict": verdict.value},
        )
    return PorosityCertificate(pair, xspec, float(r), float(alpha), pattern, bound, zero_limit)


def _aux(pair: str, pattern: SequenceSpec, N: int):
    if pair == "chat_in_S":
        return run_windows(sg.generate(pattern, N).values)
    if pair == "S_in_linf":
        return _tail_points(pattern, N)
    return None


# -- verification ---------------------------------------------------------------------------


@dataclass
class Verification:
    certificate: PorosityCertificate
    N: int
    samples: int
    seed: int
    norm: float
    norm_ok: bool
    threshold: float
    slack: float
    base_oscillation: float
    statistics: np.ndarray
    center_statistic: float
    certified_threshold: float | None = None
    window: int | None = None
    gaps: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return self.norm_ok and bool(np.all(self.statistics >= self.threshold))

    @property
    def vacuous(self) -> bool:
        return self.threshold <= 0

    def to_dict(self) -> dict:
        out = {
            "certificate": self.certificate.to_dict(),
            "N": self.N,
            "samples": self.samples,
            "seed": self.seed,
            "norm": self.norm,
            "norm_ok": self.norm_ok,
            "bound": self.certificate.oscillation_bound,
            "threshold": self.threshold,
            "slack": self.slack,
            "base_oscillation": self.base_oscillation,
            "center_statistic": self.center_statistic,
            "min_statistic": float(self.statistics.min()),
            "max_statistic": float(self.statistics.max()),
            "failures": int(np.sum(self.statistics < self.threshold)),
            "vacuous": self.vacuous,
            "passed": self.passed,
        }
        if self.window is not None:
            out["window"] = self.window
        if self.gaps is not None:
            out["min_gap"] = float(self.gaps.min())
        if self.certified_threshold is not None:
            out["certified_threshold"] = self.certified_threshold
        return out


def sample_ball(cert: PorosityCertificate, y: np.ndarray, seed: int, index: int) -> np.ndarray:
    """z = y + delta, delta_n i.i.d. uniform on the ball of radius alpha r / 2."""
    gen = substream(seed, index)
    return y + (gen.random(y.size) - 0.5) * (cert.alpha * cert.r)


def verify_certificate(
    cert: PorosityCertificate,
    N: int | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    threads: int = 1,
) -> Verification:
    if samples < 1:
        raise ValueError("samples must be positive")
    declared = default_pattern(cert.pair, cert.zero_limit)
    N = default_length(cert.pair, declared) if N is None else int(N)
    need = required_length(cert.pair, declared)
    if N < need:
        raise ValueError(f"N = {N} is too short for {cert.pair}; need N >= {need}")
    x = sg.generate(cert.base, N).values
    w = sg.generate(cert.pattern, N).values
    y = sg.generate(cert.center(), N).values
    norm = float(np.abs(y - x).max())
    ulp = 2 * np.finfo(np.float64).eps * (float(np.abs(x).max()) + cert.r)
    norm_ok = abs(norm - cert.r / 2) <= ulp

    # window length / evaluation points come from the declared pattern
    aux = _aux(cert.pair, declared, N)
    osc = base_oscillation(cert.pair, x, aux)
    bound = cert.oscillation_bound
    certified = None
    if cert.pair == "S_in_linf":
        m_prev, m_last = (int(v) for v in aux)
        slack = 2 * float(np.abs(x).max()) * m_prev / m_last
        # what every z in the ball is guaranteed: pattern range on the truncation, less
        # the worst-case perturbation and the base's own drift
        certified = cert.r / 2 * _cesaro_statistic(w, aux) - cert.alpha * cert.r - osc
    else:
        slack = osc
    threshold = bound - slack

    def one(i: int) -> tuple[float, float]:
        z = sample_ball(cert, y, seed, i)
        gap = _gap_statistic(z, aux.n) if cert.pair == "chat_in_S" else np.nan
        return _statistic(cert.pair, z, aux), gap

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(one, range(samples)))
    else:
        vals = [one(i) for i in range(samples)]
    return Verification(
        certificate=cert,
        N=N,
        samples=samples,
        seed=seed,
        norm=norm,
        norm_ok=bool(norm_ok),
        threshold=float(threshold),
        slack=float(slack),
        base_oscillation=float(osc),
        statistics=np.array([v[0] for v in vals]),
        center_statistic=_statistic(cert.pair, y, aux),
        certified_threshold=certified,
        window=aux.n if cert.pair == "chat_in_S" else None,
        gaps=np.array([v[1] for v in vals]) if cert.pair == "chat_in_S" else None,
    )
