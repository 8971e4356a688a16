"""Exponential-like functions and the numerical algebrability witness.

An exponential-like function of rank m is f(x) = sum_i alpha_i exp(beta_i x)
with nonzero alphas and distinct nonzero betas.  Applied term by term to a
suitable sequence z, every such f lands in the same difference of spaces;
products of generators exp(beta_i z) are again exponential-like, which is
what makes the generated algebra free.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .classify import DEFAULT_TOL, Verdict, classify
from .seqgen import SequenceSpec, Truncation, explike_image, generate, iter_chunks
from .windowstats import lorentz_profile

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ExpLike:
    terms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        terms = tuple((float(a), float(b)) for a, b in self.terms)
        if not terms:
            raise ValueError("an exponential-like function needs at least one term")
        betas = [b for _, b in terms]
        if any(a == 0 for a, _ in terms):
            raise ValueError("all alpha_i must be nonzero")
        if any(b == 0 for b in betas):
            raise ValueError("all beta_i must be nonzero")
        if len(set(betas)) != len(betas):
            raise ValueError("beta_i must be pairwise distinct")
        object.__setattr__(self, "terms", terms)

    @property
    def rank(self) -> int:
        return len(self.terms)

    def __call__(self, x):
        return explike_eval(self, x)

    def __mul__(self, other: "ExpLike") -> "ExpLike":
        acc: dict[float, float] = {}
        for a1, b1 in self.terms:
            for a2, b2 in other.terms:
                acc[b1 + b2] = acc.get(b1 + b2, 0.0) + a1 * a2
        if 0.0 in acc:
            raise ValueError("product has a constant term; not exponential-like")
        return ExpLike(tuple((a, b) for b, a in sorted(acc.items()) if a != 0))

    def describe(self) -> str:
        return " + ".join(f"{a:g}*exp({b:g}x)" for a, b in self.terms)


def explike_eval(f: ExpLike, x):
    """sum alpha_i exp(beta_i x), summed in order of increasing |beta_i|."""
    order = sorted(f.terms, key=lambda t: (abs(t[1]), t[1]))
    scalar = np.ndim(x) == 0
    xv = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(xv)
    with np.errstate(over="ignore", invalid="ignore"):
        for a, b in order:
            term = a * np.exp(b * xv)
            if not np.all(np.isfinite(term)):
                raise OverflowError(f"term {a:g}*exp({b:g}x) overflows")
            total = total + term
    if not np.all(np.isfinite(total)):
        raise OverflowError(f"sum of {f.describe()} overflows")
    return float(total) if scalar else total


def explike_apply(f: ExpLike, t: Truncation) -> Truncation:
    """Elementwise image (f(x_1), ..., f(x_N)); f is recorded in the spec."""
    return Truncation(
        explike_eval(f, t.values),
        explike_image(t.spec, f.terms),
        t.provenance + (f"apply {f.describe()}",),
    )


# -- preimages -------------------------------------------------------------------


@dataclass(frozen=True)
class PreimageResult:
    count: int
    brackets: tuple[tuple[float, float], ...]
    rank: int

    @property
    def violation(self) -> bool:
        # more roots than the rank can only come from grid resolution
        return self.count > self.rank


def preimage_count(f: ExpLike, c: float, lo: float, hi: float, grid: int = 10_000) -> PreimageResult:
    """Count solutions of f(x) = c on [lo, hi] via grid sign changes plus bisection."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    if grid < 2:
        raise ValueError("grid needs at least 2 points")
    xs = np.linspace(lo, hi, grid)
    g = explike_eval(f, xs) - c
    if np.all(g == 0):
        raise ValueError("f - c vanishes on the whole grid (degenerate level)")
    width = (hi - lo) / 1e9
    brackets = [(float(x), float(x)) for x in xs[g == 0]]
    for i in np.flatnonzero(g[:-1] * g[1:] < 0):
        brackets.append(_bisect(f, c, float(xs[i]), float(xs[i + 1]), width))
    brackets.sort()
    return PreimageResult(len(brackets), tuple(brackets), f.rank)


def _bisect(f: ExpLike, c: float, a: float, b: float, width: float) -> tuple[float, float]:
    ga = explike_eval(f, a) - c
    while b - a > width:
        mid = 0.5 * (a + b)
        gm = explike_eval(f, mid) - c
        if gm == 0:
            return mid, mid
        if (gm < 0) == (ga < 0):
            a, ga = mid, gm
        else:
            b = mid
    return a, b


# -- extrema on [1, 2] ----------------------------------------------------------


def _golden(fun, a: float, b: float, tol: float) -> float:
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def extrema(f: ExpLike, lo: float = 1.0, hi: float = 2.0, grid: int = 10_000, tol: float = 1e-10) -> tuple[float, float]:
    """(L, M): minimum and maximum of f on [lo, hi], grid search then golden section."""
    xs = np.linspace(lo, hi, grid)
    ys = explike_eval(f, xs)
    out = []
    for sign in (1.0, -1.0):
        i = int(np.argmin(sign * ys))
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
        x = _golden(lambda v: sign * explike_eval(f, v), float(a), float(b), tol)
        out.append(sign * min(sign * explike_eval(f, x), sign * ys[i]))
    return out[0], out[1]


# -- squeeze envelopes -------------------------------------------------------------


def triangular_block(n: int) -> int:
    """j with j(j+1)/2 <= n < (j+1)(j+2)/2."""
    return (math.isqrt(8 * n + 1) - 1) // 2


def chat_envelopes(f0: float, M: float, L: float, j: int) -> tuple[float, float]:
    """(upper, lower) bounds on window averages of f(z) for window lengths in block j.

    The branch used depends on the sign of f(0), following the four displayed
    bounds for the z-chat-minus-c construction.
    """
    if f0 <= 0:
        upper = (2 * M + f0 * j - f0) / (j + 1)
    else:
        upper = 2 * M / (j + 1) + f0
    if f0 >= 0:
        lower = (2 * L + f0 * j - f0) / (j + 3 + 2 / j)
    else:
        lower = 2 * L * j / (j * j + 3 * j + 2) + f0 * j / (j + 2)
    return upper, lower


# -- algebrability witness ------------------------------------------------------------


TARGETS = {
    "z-chat-minus-c": "chat_minus_c",
    "z-s-minus-chat": "S_minus_chat",
    "z-linf-minus-s": "linf_minus_S",
}


def monomials(n_generators: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent vectors k with 1 <= |k| <= degree, graded then lexicographic."""
    out = []
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_generators), d):
            k = [0] * n_generators
            for i in combo:
                k[i] += 1
            out.append(tuple(k))
    return out


def exponent_sums(betas: Sequence, exps: Sequence[tuple[int, ...]]) -> list:
    """<k, beta> for each exponent vector; exact when every beta is rational."""
    exact = all(isinstance(b, Rational) for b in betas)
    vals = [Fraction(b) for b in betas] if exact else [float(b) for b in betas]
    return [sum(ki * bi for ki, bi in zip(k, vals)) for k in exps]


def check_exponent_sums(betas: Sequence, degree: int, atol: float = 1e-12) -> list:
    if len(set(float(b) for b in betas)) != len(betas):
        raise ValueError("betas must be pairwise distinct")
    if any(b == 0 for b in betas):
        raise ValueError("betas must be nonzero")
    exps = monomials(len(betas), degree)
    sums = exponent_sums(betas, exps)
    exact = all(isinstance(b, Rational) for b in betas)
    clashes = []
    for (i, si), (j, sj) in itertools.combinations(enumerate(sums), 2):
        if (si == sj) if exact else abs(float(si) - float(sj)) <= atol:
            clashes.append(f"{exps[i]} and {exps[j]} both give {float(si):g}")
    for i, s in enumerate(sums):
        if (s == 0) if exact else abs(float(s)) <= atol:
            clashes.append(f"{exps[i]} gives exponent sum 0")
    if clashes:
        raise ValueError("coincident exponent sums: " + "; ".join(clashes))
    return sums


@dataclass
class WitnessReport:
    generators: list[float]
    degree: int
    N: int
    exponents: list[tuple[int, ...]]
    exponent_sums: list[float]
    sigma_min: float
    tol: float
    target: str
    monomial_checks: list[dict]
    combination_checks: list[dict]
    seed: int
    evidence: dict = field(default_factory=dict)

    @property
    def independent(self) -> bool:
        return self.sigma_min > self.tol

    @property
    def memberships_ok(self) -> bool:
        return all(c["ok"] for c in self.monomial_checks + self.combination_checks)

    @property
    def passed(self) -> bool:
        return self.independent and self.memberships_ok

    def to_dict(self) -> dict:
        return {
            "generators": self.generators,
            "degree": self.degree,
            "N": self.N,
            "target": self.target,
            "sigma_min": self.sigma_min,
            "tol": self.tol,
            "seed": self.seed,
            "independent": self.independent,
            "passed": self.passed,
            "monomials": self.monomial_checks,
            "combinations": self.combination_checks,
        }

    def exponents_csv(self) -> str:
        lines = ["monomial,exponent_sum"]
        lines += [
            f"{'*'.join(str(k) for k in e)},{float(s)!r}"
            for e, s in zip(self.exponents, self.exponent_sums)
        ]
        return "\n".join(lines) + "\n"


def _target_ok(target: str, verdicts: dict[str, Verdict]) -> bool:
    M, X = Verdict.MEMBER, Verdict.NON_MEMBER
    if target == "chat_minus_c":
        return verdicts["chat"] is M and verdicts["c"] is X
    if target == "S_minus_chat":
        return verdicts["S"] is M and verdicts["chat"] is X
    if target == "linf_minus_S":
        return verdicts["S"] is X
    raise ValueError(f"unknown target {target}")


def membership_check(f: ExpLike, z: Truncation, target: str, tol: float) -> dict:
    """Classify f(z), rescaled to sup-norm 1 so that ``tol`` is relative."""
    image = explike_apply(f, z)
    scale = float(np.abs(image.values).max())
    scaled = Truncation(image.values / scale, image.spec, image.provenance)
    report = classify(lorentz_profile(scaled), tol)
    verdicts = report.verdicts
    return {
        "function": [list(t) for t in f.terms],
        "scale": scale,
        "verdicts": {k: v.value for k, v in verdicts.items()},
        "banach": [report.banach_lo * scale, report.banach_hi * scale],
        "ok": _target_ok(target, verdicts),
    }


def gram_sigma_min(z_spec: SequenceSpec, N: int, sums: Sequence[float]) -> tuple[float, np.ndarray]:
    """Smallest singular value of the row-normalised Gram matrix of exp(s_k z).

    Rows only depend on the value z_n, so the N columns are collapsed to the
    distinct values weighted by sqrt(multiplicity).  sigma_min(G) is taken as
    sigma_min(V)**2 from an SVD of V itself; forming G first would bury
    anything below ~1e-16 relative in rounding noise.
    """
    s = np.array([float(v) for v in sums])
    counts: dict[float, int] = {}
    for chunk in iter_chunks(z_spec, N):
        u, w = np.unique(chunk, return_counts=True)
        for ui, wi in zip(u.tolist(), w.tolist()):
            counts[ui] = counts.get(ui, 0) + wi
    u = np.array(sorted(counts))
    w = np.array([counts[v] for v in u], dtype=np.float64)
    with np.errstate(over="ignore"):
        V = np.exp(np.outer(s, u)) * np.sqrt(w)
    if not np.all(np.isfinite(V)):
        raise OverflowError("monomial truncation overflows")
    V /= np.linalg.norm(V, axis=1)[:, None]
    sv = np.linalg.svd(V, compute_uv=False)
    G = V @ V.T
    smallest = float(sv[-1]) ** 2 if sv.size == s.size else 0.0
    return smallest, G


def algebrability_witness(
    z_spec: SequenceSpec,
    betas: Sequence,
    degree: int,
    N: int,
    tol: float = 1e-8,
    combinations: int = 20,
    seed: int = 0,
    classify_tol: float = DEFAULT_TOL,
    target: str | None = None,
    threads: int = 1,
) -> WitnessReport:
    """Check that the algebra generated by exp(beta_i z) is free and inside the target set."""
    if degree < 1:
        raise ValueError("degree must be positive")
    sums = check_exponent_sums(betas, degree)
    exps = monomials(len(betas), degree)
    target = target or TARGETS.get(z_spec.variant, "chat_minus_c")
    sigma_min, _ = gram_sigma_min(z_spec, N, sums)
    z = generate(z_spec, N)

    funcs = [ExpLike(((1.0, float(sk)),)) for sk in sums]
    for idx in range(combinations):
        rng = np.random.default_rng([seed, idx])
        coef = rng.standard_normal(len(sums))
        while np.any(coef == 0):
            coef = rng.standard_normal(len(sums))
        funcs.append(ExpLike(tuple((float(a), float(sk)) for a, sk in zip(coef, sums))))

    def check(f):
        return membership_check(f, z, target, classify_tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            checks = list(pool.map(check, funcs))
    else:
        checks = [check(f) for f in funcs]
    for e, chk in zip(exps, checks):
        chk["monomial"] = list(e)
    return WitnessReport(
        generators=[float(b) for b in betas],
        degree=degree,
        N=N,
        exponents=exps,
        exponent_sums=[float(v) for v in sums],
        sigma_min=sigma_min,
        tol=tol,
        target=target,
        monomial_checks=checks[: len(exps)],
        combination_checks=checks[len(exps) :],
        seed=seed,
    )
