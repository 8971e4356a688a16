from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqlab import seqgen as sg


def vals(spec, N):
    return sg.generate(spec, N).values.tolist()


# -- listed prefixes ----------------------------------------------------------------------


def test_example_prefix():
    assert vals(sg.example_s_not_chat(), 10) == [0, 1, 1, 0, 0, 1, 1, 1, 1, 0]


def test_zchat_prefix():
    expected = [1, 0, 1, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 1.5]
    assert vals(sg.z_chat_minus_c(), 21) == expected


def test_zs_prefix():
    assert vals(sg.z_s_minus_chat(), 12) == [1, 0, 0, 1, 1, 0, 0, 0, 0, 2, 2, 2]


def test_constant():
    assert vals(sg.constant(2.5), 3) == [2.5, 2.5, 2.5]


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 2), (3, 1.5), (9, 15 / 8)])
def test_a_term(n, expected):
    assert sg.a_term(n) == expected


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 1), (3, 2), (6, 1.5)])
def test_b_term(n, expected):
    assert sg.b_term(n) == expected


def test_a_term_rejects_zero():
    with pytest.raises(ValueError):
        sg.a_term(0)


# -- structure -------------------------------------------------------------------------------


def test_example_blocks():
    N = sg.boundary(sg.example_s_not_chat(), 14)
    x = sg.generate(sg.example_s_not_chat(), N).values
    pos = 0
    for j in range(1, 15):
        assert np.all(x[pos : pos + j] == 0)
        assert np.all(x[pos + j : pos + j + 2**j] == 1)
        pos += j + 2**j
    assert pos == N


def test_zchat_nonzero_count():
    spec = sg.z_chat_minus_c()
    x = sg.generate(spec, sg.boundary(spec, 300)).values
    for j in (1, 2, 10, 77, 300):
        m = sg.boundary(spec, j)
        nz = np.flatnonzero(x[:m]) + 1
        assert nz.size == j
        assert nz.tolist() == [sg.boundary(spec, i) for i in range(1, j + 1)]


def test_zlinf_constant_on_blocks():
    spec = sg.z_linf_minus_s()
    x = sg.generate(spec, sg.boundary(spec, 6)).values
    for j in range(2, 7):
        lo, hi = sg.boundary(spec, j - 1), sg.boundary(spec, j)
        assert np.unique(x[lo:hi]).size == 1


def test_nonzero_values_in_unit_interval():
    for spec in (sg.z_chat_minus_c(), sg.z_s_minus_chat(), sg.z_linf_minus_s(), sg.dyadic_a(), sg.diagonal_b()):
        x = sg.generate(spec, 50_000).values
        nz = x[x != 0]
        assert nz.min() >= 1 and nz.max() <= 2


def test_dyadic_enumeration_is_exhaustive():
    # levels 1..10: every odd dyadic (2i+1)/2^k in (1,2) exactly once
    n_terms = 2 + sum(2 ** (k - 1) for k in range(1, 11))
    seen = [Fraction(sg.a_term(n)) for n in range(1, n_terms + 1)]
    expected = [Fraction(1), Fraction(2)] + [
        Fraction(2**k + 2 * i - 1, 2**k) for k in range(1, 11) for i in range(1, 2 ** (k - 1) + 1)
    ]
    assert sorted(seen) == sorted(expected)
    assert len(set(seen)) == len(seen)


def test_vectorised_dyadic_matches_scalar():
    x = sg.generate(sg.dyadic_a(), 3000).values
    assert x.tolist() == [sg.a_term(n) for n in range(1, 3001)]
    y = sg.generate(sg.diagonal_b(), 3000).values
    assert y.tolist() == [sg.b_term(n) for n in range(1, 3001)]


def test_boundaries():
    assert sg.boundary(sg.example_s_not_chat(), 20) == 2_097_360
    assert sg.boundary(sg.z_chat_minus_c(), 2000) == 2_001_000
    assert sg.boundary(sg.z_s_minus_chat(), 22) == 4_194_534
    assert sg.boundary(sg.z_linf_minus_s(), 8) == 16_777_216


def test_zlinf_overflow_names_limit():
    with pytest.raises(OverflowError, match=str(sg.ZLINF_MAX_LEN)):
        sg.generate(sg.z_linf_minus_s(), sg.ZLINF_MAX_LEN + 1)


# -- shift ------------------------------------------------------------------------------------


def test_shift_basic():
    t = sg.generate(sg.custom([1, 2, 3]), 3)
    assert sg.shift(t, 1).values.tolist() == [2, 3]
    c = sg.generate(sg.constant(4), 4)
    assert sg.shift(c, 3).values.tolist() == [4]


def test_shift_alt_sign_period_two():
    t = sg.generate(sg.alt_sign(), 20)
    assert sg.shift(t, 2).values.tolist() == vals(sg.alt_sign(), 18)


def test_shift_too_far():
    t = sg.generate(sg.constant(1), 3)
    with pytest.raises(ValueError):
        sg.shift(t, 3)


def test_shifted_spec_regenerates():
    t = sg.shift(sg.generate(sg.example_s_not_chat(), 500), 17)
    assert np.array_equal(sg.generate(t.spec, t.N).values, t.values)


# -- truncation and regeneration ---------------------------------------------------------------


SPECS = [
    sg.constant(-0.75),
    sg.alt_sign(),
    sg.dyadic_a(),
    sg.diagonal_b(),
    sg.example_s_not_chat(),
    sg.z_chat_minus_c(),
    sg.z_s_minus_chat(),
    sg.z_linf_minus_s(),
    sg.sign_blocks(),
    sg.balanced_runs(),
    sg.affine(sg.example_s_not_chat(), 2, -1),
    sg.shifted(sg.z_chat_minus_c(), 5),
    sg.sum_of(sg.alt_sign(), sg.dyadic_a()),
    sg.explike_image(sg.z_chat_minus_c(), [(1.0, 1.0), (-0.5, 2.0)]),
]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SPECS), st.integers(1, 5000), st.integers(1, 5000))
def test_prefix_consistency(spec, a, b):
    short, long_ = sorted((a, b))
    assert np.array_equal(sg.generate(spec, long_).values[:short], sg.generate(spec, short).values)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.variant)
def test_chunked_equals_oneshot(spec):
    whole = sg.generate(spec, 10_000).values
    pieces = np.concatenate(list(sg.iter_chunks(spec, 10_000, chunk=777)))
    assert np.array_equal(whole, pieces)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.variant)
def test_spec_text_roundtrip(spec):
    back = sg.spec_from_text(sg.spec_to_text(spec))
    assert back == spec


def test_truncation_is_read_only():
    t = sg.generate(sg.alt_sign(), 4)
    with pytest.raises(ValueError):
        t.values[0] = 3.0


def test_truncation_rejects_nan():
    with pytest.raises(ValueError, match="index 2"):
        sg.Truncation(np.array([1.0, np.nan]), sg.custom([0.0]))


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50))
def test_lines_and_csv_roundtrip(values):
    t = sg.generate(sg.custom(values), len(values))
    assert sg.parse_values(sg.to_lines(t)) == t.values.tolist()
    assert sg.parse_values(sg.to_csv(t)) == t.values.tolist()


def test_custom_too_short():
    with pytest.raises(ValueError):
        sg.generate(sg.custom([1.0, 2.0]), 3)


def test_unknown_variant():
    with pytest.raises(ValueError):
        sg.SequenceSpec("nope")
