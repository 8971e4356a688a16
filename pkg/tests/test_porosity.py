import numpy as np
import pytest

from seqlab import seqgen as sg
from seqlab import windowstats as ws
from seqlab.classify import Verdict, classify
from seqlab.porosity import (
    PAIRS,
    SMALLER,
    CertificateRefused,
    PorosityCertificate,
    porosity_witness,
    sample_ball,
    tamper,
    verify_certificate,
)

ZERO = sg.constant(0)


def test_c_in_chat_center():
    cert = porosity_witness("c_in_chat", ZERO, 1.0, 0.5)
    assert cert.oscillation_bound == 0.5
    y = sg.generate(cert.center(), 8).values
    assert y.tolist() == [(-1) ** n / 2 for n in range(1, 9)]


def test_chat_in_S_center_gap():
    cert = porosity_witness("chat_in_S", ZERO, 2.0, 0.25)
    assert cert.oscillation_bound == 1.5
    spec = sg.example_s_not_chat()
    y = sg.generate(cert.center(), sg.boundary(spec, 20))
    assert set(np.unique(y.values)) == {-1.0, 1.0}
    p, q = ws.window_extremes(y, 16)
    assert p - q >= 2


def test_S_in_linf_center_cesaro_alternates():
    cert = porosity_witness("S_in_linf", ZERO, 1.0, 0.5)
    spec = sg.sign_blocks()
    N = sg.boundary(spec, 8)
    stream = ws.StreamingCesaro([sg.boundary(spec, j) for j in range(6, 9)])
    for chunk in sg.iter_chunks(cert.center(), N):
        stream.feed(chunk)
    _, s = stream.result()
    for j, v in zip(range(6, 9), s):
        target = 0.5 if j % 2 else -0.5
        assert abs(v - target) <= 0.1


@pytest.mark.parametrize("pair", PAIRS)
@pytest.mark.parametrize("zero_limit", [False, True])
def test_norm_is_exactly_half_r(pair, zero_limit):
    for r in (1.0, 0.1, 0.37):
        cert = porosity_witness(pair, ZERO, r, 0.5, zero_limit=zero_limit)
        N = 5000
        y = sg.generate(cert.center(), N).values
        assert np.abs(y).max() == r / 2
        assert 2 * cert.gamma / cert.r == cert.alpha


@pytest.mark.parametrize("pair", PAIRS)
def test_verify_passes_and_controls_fail(pair):
    cert = porosity_witness(pair, ZERO, 1.0, 0.5)
    v = verify_certificate(cert, samples=200, seed=4)
    assert v.passed and v.norm_ok
    bad = verify_certificate(tamper(cert, sg.constant(1)), samples=200, seed=4)
    assert not bad.passed


def test_c_in_chat_example_length():
    cert = porosity_witness("c_in_chat", ZERO, 1.0, 0.5)
    assert verify_certificate(cert, N=10_000, samples=1000, seed=0).passed


def test_alpha_near_one_is_vacuous_but_passes():
    cert = porosity_witness("c_in_chat", ZERO, 1.0, 1 - 1e-6)
    v = verify_certificate(cert, samples=50)
    assert v.passed and v.threshold == pytest.approx(1e-6)


def test_nonconstant_base():
    # x = 1/n style drift is in c; its tail oscillation is subtracted from the bound
    base = sg.affine(sg.example_s_not_chat(), 0.0, 0.25)
    cert = porosity_witness("c_in_chat", base, 1.0, 0.5)
    assert verify_certificate(cert, samples=100).passed


def test_refuses_non_member_base():
    with pytest.raises(CertificateRefused) as info:
        porosity_witness("c_in_chat", sg.alt_sign(), 1.0, 0.5)
    assert "verdicts" in info.value.evidence


def test_refuses_large_base_oscillation():
    # dyadic enumeration sits in S (and in fact chat is unclear) but oscillates by 1
    with pytest.raises(CertificateRefused):
        porosity_witness("S_in_linf", sg.affine(sg.sign_blocks(), 0.1, 0), 0.4, 0.5)


def test_too_short():
    cert = porosity_witness("S_in_linf", ZERO, 1.0, 0.5)
    with pytest.raises(ValueError, match="need N >= 27"):
        verify_certificate(cert, N=20, samples=1)


def test_invalid_certificate_fields():
    with pytest.raises(ValueError):
        PorosityCertificate("c_in_chat", ZERO, 1.0, 1.0, sg.alt_sign(), 0.0)
    with pytest.raises(ValueError):
        porosity_witness("c_in_chat", ZERO, -1.0, 0.5)
    with pytest.raises(ValueError):
        porosity_witness("nope", ZERO, 1.0, 0.5)


def test_threads_do_not_change_statistics():
    cert = porosity_witness("chat_in_S", ZERO, 1.0, 0.9)
    a = verify_certificate(cert, samples=64, seed=2)
    b = verify_certificate(cert, samples=64, seed=2, threads=4)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("pair", PAIRS)
def test_ball_points_leave_smaller_space(pair):
    cert = porosity_witness(pair, ZERO, 1.0, 0.5)
    N = {"c_in_chat": 1 << 14, "chat_in_S": sg.boundary(sg.example_s_not_chat(), 16), "S_in_linf": 10**6}[pair]
    y = sg.generate(cert.center(), N).values
    for i in range(3):
        z = sample_ball(cert, y, 1, i)
        assert np.abs(z - y).max() < cert.gamma
        rep = classify(ws.lorentz_profile(z), cert.oscillation_bound / 4)
        assert rep.verdicts[SMALLER[pair]] is not Verdict.MEMBER


def test_report_schema():
    cert = porosity_witness("S_in_linf", ZERO, 0.1, 0.9)
    d = verify_certificate(cert, samples=20, seed=1).to_dict()
    for key in ("certificate", "N", "samples", "seed", "bound", "threshold", "min_statistic", "passed", "certified_threshold"):
        assert key in d
