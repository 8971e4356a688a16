"""Generators for the bounded sequences studied in this package.

Every sequence is described by a :class:`SequenceSpec`; :func:`generate`
turns a spec into a :class:`Truncation` (the first ``N`` terms).  Terms are
indexed from 1 as in the mathematical literature, arrays from 0.

Block-structured sequences keep their block boundaries ``m_j`` as Python
integers, so boundary arithmetic never overflows; generation works chunk by
chunk and only ever holds the boundary list in memory besides the chunk.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

# index arithmetic goes through float64 in a few vectorised spots
MAX_LEN = 2**52
# 13**13 is the last j**j block that fits the supported index range
ZLINF_MAX_BLOCK = 13
ZLINF_MAX_LEN = ZLINF_MAX_BLOCK**ZLINF_MAX_BLOCK

DEFAULT_CHUNK = 1 << 20

VARIANTS = (
    "constant",
    "alt-sign",
    "dyadic-a",
    "diagonal-b",
    "example-s-not-chat",
    "z-chat-minus-c",
    "z-s-minus-chat",
    "z-linf-minus-s",
    "sign-blocks",
    "balanced-runs",
    "shifted",
    "affine",
    "sum",
    "explike-image",
    "custom",
)

BLOCK_VARIANTS = (
    "example-s-not-chat",
    "z-chat-minus-c",
    "z-s-minus-chat",
    "z-linf-minus-s",
    "sign-blocks",
    "balanced-runs",
)


@dataclass(frozen=True)
class SequenceSpec:
    """Declarative description of an infinite real sequence.

    ``params`` is a tuple of ``(name, value)`` pairs so specs stay hashable;
    nested specs (``shifted``, ``affine``, ...) appear as values.
    """

    variant: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown sequence variant {self.variant!r}")

    def get(self, name: str, default: Any = None) -> Any:
        for key, value in self.params:
            if key == name:
                return value
        return default

    def describe(self) -> str:
        if not self.params:
            return self.variant
        inner = ", ".join(
            f"{k}={v.describe() if isinstance(v, SequenceSpec) else _short(v)}"
            for k, v in self.params
        )
        return f"{self.variant}({inner})"


def _short(value: Any) -> str:
    if isinstance(value, tuple) and len(value) > 6:
        return f"<{len(value)} values>"
    return repr(value)


# -- constructors -----------------------------------------------------------


def constant(v: float) -> SequenceSpec:
    return SequenceSpec("constant", (("value", float(v)),))


def alt_sign() -> SequenceSpec:
    """x_n = (-1)**n."""
    return SequenceSpec("alt-sign")


def dyadic_a() -> SequenceSpec:
    return SequenceSpec("dyadic-a")


def diagonal_b() -> SequenceSpec:
    return SequenceSpec("diagonal-b")


def example_s_not_chat() -> SequenceSpec:
    """Blocks of j zeros followed by 2**j ones (Cesaro limit 1, not almost convergent)."""
    return SequenceSpec("example-s-not-chat")


def z_chat_minus_c() -> SequenceSpec:
    return SequenceSpec("z-chat-minus-c")


def z_s_minus_chat() -> SequenceSpec:
    return SequenceSpec("z-s-minus-chat")


def z_linf_minus_s() -> SequenceSpec:
    return SequenceSpec("z-linf-minus-s")


def sign_blocks() -> SequenceSpec:
    """+1/-1 alternating on the blocks (m_{j-1}, m_j], m_j = j**j, starting with +1."""
    return SequenceSpec("sign-blocks")


def balanced_runs() -> SequenceSpec:
    """Block j: j times +1, j times -1, then 2**j terms alternating +1, -1.

    Every block sums to zero, so Cesaro means tend to 0, while runs of both
    signs grow without bound.
    """
    return SequenceSpec("balanced-runs")


def shifted(inner: SequenceSpec, k: int) -> SequenceSpec:
    k = int(k)
    if k < 0:
        raise ValueError("shift must be non-negative")
    return SequenceSpec("shifted", (("inner", inner), ("k", k)))


def affine(inner: SequenceSpec, scale: float, offset: float = 0.0) -> SequenceSpec:
    return SequenceSpec(
        "affine", (("inner", inner), ("scale", float(scale)), ("offset", float(offset)))
    )


def sum_of(left: SequenceSpec, right: SequenceSpec) -> SequenceSpec:
    return SequenceSpec("sum", (("left", left), ("right", right)))


def explike_image(inner: SequenceSpec, terms: Sequence[tuple[float, float]]) -> SequenceSpec:
    terms = tuple((float(a), float(b)) for a, b in terms)
    return SequenceSpec("explike-image", (("inner", inner), ("terms", terms)))


def custom(values: Sequence[float]) -> SequenceSpec:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError("custom sequence needs at least one value")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("custom values must be finite")
    return SequenceSpec("custom", (("values", vals),))


_NAMED = {
    "alt-sign": alt_sign,
    "dyadic-a": dyadic_a,
    "diagonal-b": diagonal_b,
    "example-s-not-chat": example_s_not_chat,
    "z-chat-minus-c": z_chat_minus_c,
    "z-s-minus-chat": z_s_minus_chat,
    "z-linf-minus-s": z_linf_minus_s,
    "sign-blocks": sign_blocks,
    "balanced-runs": balanced_runs,
}


def named(name: str, value: float | None = None) -> SequenceSpec:
    """Parameter-free variants by name; ``constant`` takes ``value``."""
    if name == "constant":
        return constant(0.0 if value is None else value)
    try:
        return _NAMED[name]()
    except KeyError:
        raise ValueError(f"no parameter-free sequence named {name!r}") from None


# -- Truncation -------------------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    """The first ``N`` terms of a sequence together with the spec that made them."""

    values: np.ndarray
    spec: SequenceSpec
    provenance: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("a truncation holds a non-empty 1-d array")
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise ValueError(f"non-finite value at index {int(bad[0]) + 1}")
        if vals is self.values and vals.flags.writeable:
            vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.N


# -- scalar terms -------------------------------------------------------------


def a_term(n: int) -> float:
    """n-th term of the dense dyadic enumeration 1, 2, 3/2, 5/4, 7/4, 9/8, ...

    Level k >= 1 lists (2**k + 2i - 1) / 2**k for i = 1..2**(k-1).
    """
    n = _check_index(n)
    if n <= 2:
        return float(n)
    t = n - 2
    k = t.bit_length()
    i = t - (1 << (k - 1)) + 1
    return math.ldexp((1 << k) + 2 * i - 1, -k)


def b_term(n: int) -> float:
    """Diagonal enumeration a_1; a_1, a_2; a_1, a_2, a_3; ..."""
    n = _check_index(n)
    r = _triangular_row(n)
    return a_term(n - r * (r - 1) // 2)


def _check_index(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"index must be a positive integer, got {n!r}")
    return int(n)


def _triangular_row(n: int) -> int:
    """Smallest r with r(r+1)/2 >= n, exact."""
    r = (math.isqrt(8 * n + 1) - 1) // 2
    if r * (r + 1) // 2 < n:
        r += 1
    return r


# -- block boundaries ---------------------------------------------------------


def _boundary_iter(variant: str) -> Iterator[int]:
    """Yields m_1, m_2, ... exactly."""
    if variant == "example-s-not-chat":
        m, j = 0, 1
        while True:
            m += j + (1 << j)
            yield m
            j += 1
    elif variant == "z-chat-minus-c":
        j = 1
        while True:
            yield j * (j + 1) // 2
            j += 1
    elif variant == "z-s-minus-chat":
        m, j = 1, 1
        while True:
            yield m
            j += 1
            m += j - 1 + (1 << (j - 1))
    elif variant in ("z-linf-minus-s", "sign-blocks"):
        j = 1
        while True:
            yield j**j
            j += 1
    elif variant == "balanced-runs":
        m, j = 0, 1
        while True:
            m += 2 * j + (1 << j)
            yield m
            j += 1
    else:
        raise ValueError(f"{variant} has no block structure")


def boundary(spec: SequenceSpec, j: int) -> int:
    """The block boundary m_j of a block-structured spec (m_0 = 0)."""
    j = int(j)
    if j < 0:
        raise ValueError("block index must be non-negative")
    if j == 0:
        return 0
    base = _block_source(spec)
    if base is None:
        raise ValueError(f"{spec.variant} has no block structure")
    source, shift = base
    for idx, m in enumerate(_boundary_iter(source.variant), start=1):
        if idx == j:
            return m - shift
    raise AssertionError("unreachable")


def block_boundaries(spec: SequenceSpec, upto: int) -> list[int]:
    """All boundaries m_j with 1 <= m_j <= upto; empty for unstructured specs."""
    base = _block_source(spec)
    if base is None:
        return []
    source, shift = base
    out = []
    for m in _boundary_iter(source.variant):
        if m - shift > upto:
            break
        if m - shift >= 1:
            out.append(m - shift)
    return out


def _block_source(spec: SequenceSpec) -> tuple[SequenceSpec, int] | None:
    shift = 0
    while True:
        if spec.variant in BLOCK_VARIANTS:
            return spec, shift
        if spec.variant == "shifted":
            shift += spec.get("k")
            spec = spec.get("inner")
        elif spec.variant in ("affine", "explike-image"):
            spec = spec.get("inner")
        else:
            return None


def _boundaries_covering(variant: str, stop: int) -> np.ndarray:
    """m_1..m_J with m_J >= stop (and m_0 = 0 prepended)."""
    out = [0]
    for m in _boundary_iter(variant):
        out.append(m)
        if m >= stop:
            break
    return np.array(out, dtype=np.int64)


# -- generation ---------------------------------------------------------------


def _terms(spec: SequenceSpec, start: int, stop: int) -> np.ndarray:
    """x_n for n in [start, stop), 1-indexed."""
    v = spec.variant
    n = np.arange(start, stop, dtype=np.int64)
    if v == "constant":
        return np.full(n.size, spec.get("value"), dtype=np.float64)
    if v == "alt-sign":
        return np.where(n % 2 == 0, 1.0, -1.0)
    if v == "dyadic-a":
        return _dyadic_a(n)
    if v == "diagonal-b":
        return _diagonal_b(n)
    if v == "custom":
        vals = spec.get("values")
        if stop - 1 > len(vals):
            raise ValueError(f"custom sequence has only {len(vals)} values")
        return np.array(vals[start - 1 : stop - 1], dtype=np.float64)
    if v == "shifted":
        k = spec.get("k")
        return _terms(spec.get("inner"), start + k, stop + k)
    if v == "affine":
        x = _terms(spec.get("inner"), start, stop)
        return spec.get("scale") * x + spec.get("offset")
    if v == "sum":
        return _terms(spec.get("left"), start, stop) + _terms(spec.get("right"), start, stop)
    if v == "explike-image":
        from .algebra import ExpLike, explike_eval

        f = ExpLike(spec.get("terms"))
        return explike_eval(f, _terms(spec.get("inner"), start, stop))
    return _block_terms(v, n)


def _block_terms(variant: str, n: np.ndarray) -> np.ndarray:
    m = _boundaries_covering(variant, int(n[-1]))
    if variant == "z-chat-minus-c":
        # z_{m_j} = b_j at triangular indices m_j = j(j+1)/2
        r = _isqrt_floor(8 * n + 1)
        r = (r - 1) // 2
        hit = r * (r + 1) // 2 == n
        out = np.zeros(n.size)
        if hit.any():
            out[hit] = _diagonal_b(r[hit])
        return out
    if variant == "z-s-minus-chat":
        # m starts at m_1 = 1: block j is [m_j, m_{j+1}), j values of b_j then zeros
        mm = m[1:]
        j = np.searchsorted(mm, n, side="right")  # m_j <= n < m_{j+1}
        start = mm[j - 1]
        out = np.zeros(n.size)
        hit = n - start < j
        if hit.any():
            out[hit] = _diagonal_b(j[hit])
        return out
    # remaining variants: block j is (m_{j-1}, m_j]
    j = np.searchsorted(m, n, side="left")
    offset = n - m[j - 1]
    if variant == "example-s-not-chat":
        return np.where(offset <= j, 0.0, 1.0)
    if variant == "z-linf-minus-s":
        if int(n[-1]) > ZLINF_MAX_LEN:
            raise OverflowError(
                f"z-linf-minus-s supports at most {ZLINF_MAX_BLOCK} blocks; "
                f"largest supported N is {ZLINF_MAX_LEN}"
            )
        return _diagonal_b(j)
    if variant == "sign-blocks":
        return np.where(j % 2 == 1, 1.0, -1.0)
    if variant == "balanced-runs":
        tail = offset - 2 * j
        return np.where(
            offset <= j, 1.0, np.where(offset <= 2 * j, -1.0, np.where(tail % 2 == 1, 1.0, -1.0))
        )
    raise ValueError(f"unknown block variant {variant}")


def _isqrt_floor(v: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    r -= (r * r > v).astype(np.int64)
    r += ((r + 1) * (r + 1) <= v).astype(np.int64)
    return r


def _dyadic_a(n: np.ndarray) -> np.ndarray:
    out = n.astype(np.float64)  # a_1 = 1, a_2 = 2
    big = n >= 3
    if big.any():
        t = n[big] - 2
        _, k = np.frexp(t.astype(np.float64))  # exact bit length for t < 2**53
        k = k.astype(np.int64)
        i = t - (np.int64(1) << (k - 1)) + 1
        num = (np.int64(1) << k) + 2 * i - 1
        out[big] = np.ldexp(num.astype(np.float64), -k)
    return out


def _diagonal_b(n: np.ndarray) -> np.ndarray:
    r = (_isqrt_floor(8 * n + 1) - 1) // 2
    r += (r * (r + 1) // 2 < n).astype(np.int64)
    return _dyadic_a(n - r * (r - 1) // 2)


def _check_len(spec: SequenceSpec, N: int) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"truncation length must be a positive integer, got {N!r}")
    N = int(N)
    if N > MAX_LEN:
        raise OverflowError(f"largest supported N is {MAX_LEN}")
    base = _block_source(spec)
    if base is not None and base[0].variant in ("z-linf-minus-s",):
        if N + base[1] > ZLINF_MAX_LEN:
            raise OverflowError(
                f"z-linf-minus-s supports at most {ZLINF_MAX_BLOCK} blocks; "
                f"largest supported N is {ZLINF_MAX_LEN - base[1]}"
            )
    return N


def iter_chunks(spec: SequenceSpec, N: int, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    """Yield the first N terms in consecutive chunks of at most ``chunk`` values."""
    N = _check_len(spec, N)
    for start in range(1, N + 1, chunk):
        yield _terms(spec, start, min(start + chunk, N + 1))


def generate(spec: SequenceSpec, N: int) -> Truncation:
    N = _check_len(spec, N)
    if N <= DEFAULT_CHUNK:
        values = _terms(spec, 1, N + 1)
    else:
        values = np.empty(N)
        pos = 0
        for part in iter_chunks(spec, N):
            values[pos : pos + part.size] = part
            pos += part.size
    return Truncation(values, spec)


def shift(t: Truncation, k: int) -> Truncation:
    """Drop the first k terms: (x_{k+1}, ..., x_N)."""
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ValueError(f"shift must be a non-negative integer, got {k!r}")
    if k >= t.N:
        raise ValueError(f"shift {k} leaves nothing of a length-{t.N} truncation")
    return Truncation(t.values[int(k):], shifted(t.spec, int(k)), t.provenance)


# -- serialisation --------------------------------------------------------------


def spec_to_text(spec: SequenceSpec) -> str:
    """Flat ``key = value`` block; nested specs use dotted keys."""
    return "\n".join(_spec_lines(spec, "")) + "\n"


def _spec_lines(spec: SequenceSpec, prefix: str) -> list[str]:
    lines = [f"{prefix}variant = {spec.variant}"]
    for key, value in spec.params:
        if isinstance(value, SequenceSpec):
            lines.extend(_spec_lines(value, f"{prefix}{key}."))
        elif key == "values":
            lines.append(f"{prefix}values = " + ",".join(repr(float(v)) for v in value))
        elif key == "terms":
            lines.append(f"{prefix}terms = " + ";".join(f"{a!r}:{b!r}" for a, b in value))
        else:
            lines.append(f"{prefix}{key} = {value!r}")
    return lines


def spec_from_text(text: str) -> SequenceSpec:
    items: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected key = value, got {raw!r}")
        items[key.strip()] = value.strip()
    return _spec_from_items(items, "")


def _spec_from_items(items: dict[str, str], prefix: str) -> SequenceSpec:
    try:
        variant = items[f"{prefix}variant"]
    except KeyError:
        raise ValueError(f"missing {prefix}variant") from None
    get = lambda k: items[f"{prefix}{k}"]  # noqa: E731
    if variant == "constant":
        return constant(float(get("value")))
    if variant == "shifted":
        return shifted(_spec_from_items(items, f"{prefix}inner."), int(get("k")))
    if variant == "affine":
        return affine(
            _spec_from_items(items, f"{prefix}inner."), float(get("scale")), float(get("offset"))
        )
    if variant == "sum":
        return sum_of(
            _spec_from_items(items, f"{prefix}left."), _spec_from_items(items, f"{prefix}right.")
        )
    if variant == "explike-image":
        terms = [tuple(float(p) for p in part.split(":")) for part in get("terms").split(";")]
        return explike_image(_spec_from_items(items, f"{prefix}inner."), terms)
    if variant == "custom":
        return custom([float(v) for v in get("values").split(",")])
    return named(variant)


def to_lines(t: Truncation) -> str:
    """One value per line, ``repr`` precision (round-trips exactly)."""
    return "".join(f"{float(v)!r}\n" for v in t.values)


def to_csv(t: Truncation) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "value"])
    for i, v in enumerate(t.values, start=1):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()


def parse_values(text: str) -> list[float]:
    """Read values written by :func:`to_lines` or :func:`to_csv`."""
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or line == "n,value":
            continue
        out.append(float(line.split(",")[-1]))
    return out
