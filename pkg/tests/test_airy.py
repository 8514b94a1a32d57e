import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracle import airy_reference, bisect_reference
from starkwell.airy import (
    X_ASYM,
    AiryDomainError,
    _airy_frame_np,
    _asym_neg,
    _asym_pos,
    _series,
    airy_array,
    airy_eval,
    airy_frame,
    airy_frame_scalar,
    airy_second,
)

ORACLE_X = np.concatenate([np.linspace(-30, 15, 181), [-8.5, -8.49, 8.5, 8.51, -2.33810741045977]])


def close(got, want, tol):
    return abs(got - want) <= tol * max(1.0, abs(want))


@pytest.mark.parametrize("x", ORACLE_X)
def test_against_series_oracle(x):
    e = airy_eval(x)
    ref = airy_reference(x)
    for got, want in zip((e.ai, e.aip, e.bi, e.bip), ref):
        assert close(got, want, 1e-12), (x, got, want)


def test_closed_forms_at_zero():
    g13, g23 = math.gamma(1 / 3), math.gamma(2 / 3)
    e = airy_eval(0.0)
    assert abs(e.ai - 3 ** (-2 / 3) / g23) <= 1e-15
    assert abs(e.bi - 3 ** (-1 / 6) / g23) <= 1e-15
    assert abs(e.aip + 3 ** (-1 / 3) / g13) <= 1e-15
    assert abs(e.bip - 3 ** (1 / 6) / g13) <= 1e-15
    assert abs(e.ai - 0.355028053887817) <= 1e-12
    assert abs(e.bi - 0.614926627446001) <= 1e-12
    assert abs(e.aip + 0.258819403792807) <= 1e-12
    assert abs(e.bip - 0.448288357353826) <= 1e-12


def test_first_zero_of_ai():
    oracle = bisect_reference(lambda x: airy_reference(x)[0], -2.5, -2.2)
    assert abs(oracle - float(mp.airyaizero(1))) <= 1e-12
    assert abs(airy_eval(-2.33810741045977).ai) <= 1e-10
    ours = bisect_reference(lambda x: airy_eval(x).ai, -2.5, -2.2)
    assert abs(ours - oracle) <= 1e-12


def test_wronskian_dense():
    x = np.linspace(-30, 15, 10_000)
    ai, aip, bi, bip = airy_array(x)
    w = ai * bip - aip * bi
    assert np.max(np.abs(w * math.pi - 1)) <= 1e-10


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-80, max_value=80, allow_nan=False))
def test_wronskian_full_range(x):
    e = airy_eval(x)
    assert abs(e.wronskian * math.pi - 1) <= 1e-12


@pytest.mark.parametrize("x", [0.0, 1.0, -5.0])
def test_airy_second(x):
    e = airy_eval(x)
    assert airy_second(x, e) == (x * e.ai, x * e.bi)


def test_airy_second_zero():
    assert airy_second(0.0, airy_eval(0.0)) == (0.0, 0.0)


def test_ode_residual_by_finite_difference():
    h = 1e-5
    for x in np.linspace(-30, 15, 91):
        fd = (airy_eval(x + h).aip - airy_eval(x - h).aip) / (2 * h)
        assert abs(fd - x * airy_eval(x).ai) <= 1e-5 * max(1.0, abs(x * airy_eval(x).ai))


@pytest.mark.parametrize("x", np.linspace(8.0, 9.0, 11))
def test_branches_agree_in_crossover_band(x):
    s = _series(x)
    a = _asym_pos(x, 2 / 3 * x ** 1.5)
    for u, v in zip(s, a):
        assert abs(u / v - 1) <= 1e-11
    z = x
    s = _series(-x)
    n = _asym_neg(z, 2 / 3 * z ** 1.5 - math.pi / 4)
    scale = math.hypot(s[0], s[2])
    dscale = math.hypot(s[1], s[3])
    for k, (u, v) in enumerate(zip(s, n)):
        assert abs(u - v) <= 1e-11 * (scale if k % 2 == 0 else dscale)


def test_sign_structure_positive_axis():
    ai, aip, bi, bip = airy_array(np.linspace(1e-3, 30, 500))
    assert np.all(ai > 0) and np.all(aip < 0) and np.all(bi > 0) and np.all(bip > 0)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf, 80.5, -81.0])
def test_domain_errors(bad):
    with pytest.raises(AiryDomainError):
        airy_eval(bad)


def test_phase_frame_preserves_determinants():
    # rotating both functions leaves Ai(x1)Bi(x2) - Ai(x2)Bi(x1) unchanged
    for ref, o1, o2 in [(-12.0, -0.5, 0.7), (-40.0, -2.0, 1.5), (-9.0, -1.0, 0.3)]:
        f1, f2 = airy_frame(ref, o1), airy_frame(ref, o2)
        p1, p2 = airy_eval(ref + o1), airy_eval(ref + o2)
        plain = p1.ai * p2.bi - p2.ai * p1.bi
        framed = f1[0] * f2[2] - f2[0] * f1[2]
        assert abs(plain - framed) <= 1e-13


@pytest.mark.parametrize("ref,off", [(-1e4, 3.0), (-2e3, -1.5), (-500.0, 0.25)])
def test_phase_frame_far_negative(ref, off):
    # values against mpmath with the rotation applied in high precision
    with mp.workdps(50):
        x = mp.mpf(ref) + mp.mpf(off)
        zr = -mp.mpf(ref)
        psi = mp.mpf(2) / 3 * zr ** mp.mpf(1.5) - mp.pi / 4
        c, s = mp.cos(psi), mp.sin(psi)
        ai, bi = mp.airyai(x), mp.airybi(x)
        want = (c * ai - s * bi, s * ai + c * bi)
    got = airy_frame_scalar(ref, off)
    amp = float(abs(zr) ** -0.25)
    assert abs(got[0] - float(want[0])) <= 1e-11 * amp
    assert abs(got[2] - float(want[1])) <= 1e-11 * amp


@pytest.mark.parametrize("ref,off", [(9.0, 0.3), (20.0, -5.0), (300.0, -1.0), (1e4, -3.0)])
def test_scaled_frame_far_positive(ref, off):
    with mp.workdps(40):
        x = mp.mpf(ref) + mp.mpf(off)
        zr = mp.mpf(2) / 3 * mp.mpf(ref) ** mp.mpf(1.5)
        want = [
            mp.airyai(x) * mp.exp(zr),
            mp.airyai(x, 1) * mp.exp(zr),
            mp.airybi(x) * mp.exp(-zr),
            mp.airybi(x, 1) * mp.exp(-zr),
        ]
    got = airy_frame_scalar(ref, off)
    for g, w in zip(got, want):
        assert abs(g / float(w) - 1) <= 1e-13


def test_numpy_and_scalar_frames_agree():
    rng = np.random.default_rng(7)
    ref = rng.uniform(-200, 200, 400)
    off = rng.uniform(-3, 3, 400)
    ref[:40] = rng.uniform(-X_ASYM - 1, X_ASYM + 1, 40)
    a = np.array([airy_frame_scalar(r, o) for r, o in zip(ref, off)]).T
    b = _airy_frame_np(ref, off)
    assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_airy_eval_dataclass_fields():
    e = airy_eval(1.5)
    assert e.x == 1.5
    assert abs(e.wronskian - 1 / math.pi) <= 1e-16
