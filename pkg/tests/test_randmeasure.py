import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from seqlab.randmeasure import (
    block_event_probability,
    mc_block_decay,
    mc_lln,
    substream,
    uniform_coordinates,
)


def density_of_sum(n, grid=20001):
    """Density of a sum of n uniforms on (-1/2, 1/2) by repeated numeric convolution."""
    xs = np.linspace(-n / 2, n / 2, grid)
    h = xs[1] - xs[0]
    base = np.ones(int(round(1 / h)) + 1)
    base /= base.sum() * h
    dens = base.copy()
    for _ in range(n - 1):
        dens = np.convolve(dens, base) * h
    grid_x = np.linspace(-n / 2, n / 2, dens.size)
    return grid_x, dens


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_block_probability_matches_convolution(n):
    x, d = density_of_sum(n, grid=4001)
    mask = x < 0.25 * n
    numeric = integrate.trapezoid(d[mask], x[mask]) / integrate.trapezoid(d, x)
    assert float(block_event_probability(n)) == pytest.approx(numeric, abs=2e-3)


def test_block_probability_small_cases():
    assert block_event_probability(1) == Fraction(3, 4)
    assert block_event_probability(2) == Fraction(7, 8)
    # triangular density on (-1, 1): tail above 1/2 has mass (1/2)(1/2)^2
    assert float(block_event_probability(2)) == 1 - 0.5 * 0.25
    with pytest.raises(ValueError):
        block_event_probability(0)


def test_block_probability_increases_with_size():
    ps = [block_event_probability(n) for n in (1, 2, 4, 8, 16)]
    assert all(a < b for a, b in zip(ps, ps[1:])) and ps[-1] < 1


def test_substreams_are_reproducible_and_distinct():
    a = uniform_coordinates(substream(5, 3), 10)
    b = uniform_coordinates(substream(5, 3), 10)
    c = uniform_coordinates(substream(5, 4), 10)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all(np.abs(a) < 0.5)


def test_lln_single_coordinate_std():
    rep = mc_lln(seed=0, N=1, trials=20_000)
    row = rep.statistics["cesaro"][0]
    assert row["std"] == pytest.approx(math.sqrt(1 / 12), rel=0.05)


def test_lln_std_decays_like_root_n():
    rep = mc_lln(seed=1, N=4096, trials=2000)
    for row in rep.statistics["cesaro"]:
        assert row["std"] == pytest.approx(math.sqrt(1 / (12 * row["n"])), rel=0.10)
        assert row["symmetric"]


def test_lln_zero_sampler():
    rep = mc_lln(seed=1, N=64, trials=10, sampler="zero", keep_traces=True)
    assert np.all(rep.traces == 0)
    assert all(r["std"] == 0 and r["mean"] == 0 for r in rep.statistics["cesaro"])


def test_lln_bad_arguments():
    with pytest.raises(ValueError):
        mc_lln(seed=1, N=0, trials=3)
    with pytest.raises(ValueError):
        mc_lln(seed=1, N=8, trials=3, sampler="gauss")


def test_lln_threads_identical():
    a = mc_lln(seed=3, N=512, trials=101, keep_traces=True)
    b = mc_lln(seed=3, N=512, trials=101, threads=4, keep_traces=True)
    assert a.to_dict() == b.to_dict()
    assert np.array_equal(a.traces, b.traces)


@pytest.mark.parametrize("block_size,p", [(1, 0.75), (2, 0.875)])
def test_block_frequency_within_three_sigma(block_size, p):
    rep = mc_block_decay(seed=7, block_size=block_size, m_max=10, trials=20_000)
    st = rep.statistics
    sigma = math.sqrt(p * (1 - p) / st["blocks_observed"])
    assert abs(st["p_hat"] - p) <= 3 * sigma
    assert st["p_exact"] == p


def test_block_decay_slope():
    rep = mc_block_decay(seed=7, block_size=1, m_max=12, trials=100_000)
    assert rep.statistics["fit"]["slope"] == pytest.approx(math.log(0.75), rel=0.10)


def test_all_first_counts_monotone():
    rep = mc_block_decay(seed=2, block_size=1, m_max=40, trials=500)
    counts = [e["count"] for e in rep.statistics["all_first_M"]]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    # 0.75^40 * 500 is far below one: the tail is reported as an interval
    assert rep.statistics["all_first_M"][-1]["frequency"] == [0.0, 3 / 500]


def test_block_frequency_rises_with_block_size():
    p = [mc_block_decay(seed=11, block_size=b, m_max=2, trials=100_000).statistics["p_hat"] for b in (1, 2, 4, 8)]
    assert all(a < b for a, b in zip(p, p[1:]))


def test_mirrored_event_same_frequency():
    # the law of a coordinate is symmetric, so the mirrored threshold event has the same rate
    below, above = 0, 0
    for t in range(5000):
        x = uniform_coordinates(substream(13, t), 2).mean()
        below += x < 0.25
        above += x > -0.25
    assert abs(below - above) / 5000 <= 3 * math.sqrt(0.875 * 0.125 / 5000) * 2


def test_block_threads_identical():
    a = mc_block_decay(seed=5, block_size=3, m_max=6, trials=999)
    b = mc_block_decay(seed=5, block_size=3, m_max=6, trials=999, threads=3)
    assert a.to_dict() == b.to_dict()


def test_block_bad_arguments():
    with pytest.raises(ValueError):
        mc_block_decay(seed=1, block_size=0, m_max=3, trials=5)
