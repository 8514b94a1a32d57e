"""Airy functions Ai, Bi and their derivatives on the real line.

Three evaluation branches:

* ``|x| <= X_ASYM``: Maclaurin series of the standard basis f, g of
  ``y'' = x y``, summed in double-double arithmetic. The extra precision is
  what makes the cancellation in ``Ai = c1 f - c2 g`` harmless up to the
  crossover (at x = 8.5 the terms reach ~1e7 while Ai ~ 1e-8).
* ``x > X_ASYM``: exponential asymptotic expansions.
* ``x < -X_ASYM``: trigonometric (modulus/phase) asymptotic expansions.

The crossover sits where the truncated asymptotic series reach ~5e-15
relative accuracy (error ~ exp(-2 zeta), zeta = 2/3 |x|^{3/2}).

Besides plain evaluation the module offers a *frame* anchored at a
reference argument ``ref``. For ``ref <= -X_ASYM`` it is the pair (Ai, Bi)
rotated by the asymptotic phase at ``ref``; for ``ref > X_ASYM`` it is
(Ai exp(zeta_ref), Bi exp(-zeta_ref)). Either transformation has
determinant one, so every 2x2 boundary determinant is unchanged, but the
phase (or exponent) difference between two nearby large arguments is formed
without subtracting two huge numbers, and nothing overflows. This keeps the
Stark problem well conditioned at very weak fields, where the scaled
endpoints sit near -E/F^{2/3}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import USE_JIT, njit

__all__ = [
    "AiryEval",
    "AiryDomainError",
    "X_ASYM",
    "X_MAX",
    "airy_eval",
    "airy_second",
    "airy_array",
    "airy_frame",
]

X_ASYM = 8.5
X_MAX = 80.0

_SQRT_PI = math.sqrt(math.pi)
_QUARTER_PI = 0.25 * math.pi

# Ai(0) and -Ai'(0) as double-double pairs (hi, lo).
_C1_HI = 0.3550280538878172
_C1_LO = 2.05233632436212e-17
_C2_HI = 0.2588194037928068
_C2_LO = -2.522243111610832e-17
_SQRT3_HI = 1.7320508075688772
_SQRT3_LO = 1.0035084221806903e-16

_SPLITTER = 134217729.0  # 2**27 + 1


class AiryDomainError(ValueError):
    """Argument outside the range where Ai/Bi are representable."""


@dataclass(frozen=True)
class AiryEval:
    """Ai, Ai', Bi, Bi' at a single real argument ``x``."""

    x: float
    ai: float
    aip: float
    bi: float
    bip: float

    @property
    def wronskian(self) -> float:
        return self.ai * self.bip - self.aip * self.bi


# ---------------------------------------------------------------------------
# double-double primitives (elementwise: valid on floats and numpy arrays)
# ---------------------------------------------------------------------------


@njit
def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@njit
def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit
def _two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@njit
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    return _quick_two_sum(s, e)


@njit
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _quick_two_sum(p, e)


@njit
def _dd_div_d(ah, al, b):
    q1 = ah / b
    p1, p2 = _two_prod(q1, b)
    s, e = _two_sum(ah, -p1)
    e -= p2
    e += al
    q2 = (s + e) / b
    return _quick_two_sum(q1, q2)


@njit
def _combine(fh, fl, gh, gl):
    """(c1 f - c2 g, sqrt3 (c1 f + c2 g)) rounded to double."""
    ph, pl = _dd_mul(_C1_HI, _C1_LO, fh, fl)
    qh, ql = _dd_mul(_C2_HI, _C2_LO, gh, gl)
    ah, al = _dd_add(ph, pl, -qh, -ql)
    bh, bl = _dd_add(ph, pl, qh, ql)
    bh, bl = _dd_mul(_SQRT3_HI, _SQRT3_LO, bh, bl)
    return ah + al, bh + bl


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------


@njit
def _series(x):
    x2h, x2l = _two_prod(x, x)
    x3h, x3l = _dd_mul(x2h, x2l, x, 0.0)
    # f, g and their derivatives; term_k -> term_{k+1} by x^3 / (integer)
    fh, fl = 1.0, 0.0
    tfh, tfl = 1.0, 0.0
    gh, gl = x, 0.0
    tgh, tgl = x, 0.0
    tdfh, tdfl = _dd_mul(x2h, x2l, 0.5, 0.0)
    dfh, dfl = tdfh, tdfl
    dgh, dgl = 1.0, 0.0
    tdgh, tdgl = 1.0, 0.0
    peak = 1.0
    for k in range(1, 200):
        tfh, tfl = _dd_mul(tfh, tfl, x3h, x3l)
        tfh, tfl = _dd_div_d(tfh, tfl, float((3 * k - 1) * (3 * k)))
        fh, fl = _dd_add(fh, fl, tfh, tfl)
        tgh, tgl = _dd_mul(tgh, tgl, x3h, x3l)
        tgh, tgl = _dd_div_d(tgh, tgl, float((3 * k) * (3 * k + 1)))
        gh, gl = _dd_add(gh, gl, tgh, tgl)
        tdgh, tdgl = _dd_mul(tdgh, tdgl, x3h, x3l)
        tdgh, tdgl = _dd_div_d(tdgh, tdgl, float((3 * k - 2) * (3 * k)))
        dgh, dgl = _dd_add(dgh, dgl, tdgh, tdgl)
        # f' starts at k = 1 with x^2/2; its k-th update builds term k + 1
        tdfh, tdfl = _dd_mul(tdfh, tdfl, x3h, x3l)
        tdfh, tdfl = _dd_div_d(tdfh, tdfl, float((3 * k) * (3 * k + 2)))
        dfh, dfl = _dd_add(dfh, dfl, tdfh, tdfl)
        big = max(abs(tfh), abs(tgh), abs(tdfh), abs(tdgh))
        if big > peak:
            peak = big
        if big <= 1e-34 * peak:
            break
    ai, bi = _combine(fh, fl, gh, gl)
    aip, bip = _combine(dfh, dfl, dgh, dgl)
    return ai, aip, bi, bip


@njit
def _asym_pos(x, shift):
    """Exponential branch with exp(-+zeta) replaced by exp(-+shift)."""
    zeta = 2.0 / 3.0 * x * math.sqrt(x)
    su = 1.0  # sum u_k zeta^-k
    sua = 1.0  # alternating
    sv = 1.0
    sva = 1.0
    u = 1.0
    last = 1.0
    inv = 1.0 / zeta
    p = 1.0
    for k in range(1, 200):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        p *= inv
        tu = u * p
        tv = v * p
        mag = max(abs(tu), abs(tv))
        if mag >= last:
            break
        last = mag
        sgn = -1.0 if k % 2 else 1.0
        su += tu
        sua += sgn * tu
        sv += tv
        sva += sgn * tv
        if mag < 1e-17:
            break
    q = x ** 0.25
    em = math.exp(-shift)
    ep = math.exp(shift)
    ai = em / (2.0 * _SQRT_PI * q) * sua
    aip = -q * em / (2.0 * _SQRT_PI) * sva
    bi = ep / (_SQRT_PI * q) * su
    bip = q * ep / _SQRT_PI * sv
    return ai, aip, bi, bip


@njit
def _asym_neg(z, delta):
    """Rotated-frame values at x = -z; ``delta`` is the phase relative to the frame."""
    zeta = 2.0 / 3.0 * z * math.sqrt(z)
    P = 1.0
    Q = 0.0
    R = 1.0
    S = 0.0
    u = 1.0
    last = 1.0
    inv = 1.0 / zeta
    p = 1.0
    for k in range(1, 200):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        p *= inv
        tu = u * p
        tv = v * p
        mag = max(abs(tu), abs(tv))
        if mag >= last:
            break
        last = mag
        # (-1)^j on u_{2j} and u_{2j+1}
        sgn = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            P += sgn * tu
            R += sgn * tv
        else:
            Q += sgn * tu
            S += sgn * tv
        if mag < 1e-17:
            break
    c = math.cos(delta)
    s = math.sin(delta)
    q = z ** 0.25
    amp = 1.0 / (_SQRT_PI * q)
    damp = q / _SQRT_PI
    ai = amp * (c * P + s * Q)
    bi = amp * (-s * P + c * Q)
    aip = damp * (s * R - c * S)
    bip = damp * (c * R + s * S)
    return ai, aip, bi, bip


@njit
def _airy_plain(x):
    if not (abs(x) <= X_MAX):
        nan = math.nan
        return nan, nan, nan, nan
    if x > X_ASYM:
        return _asym_pos(x, 2.0 / 3.0 * x * math.sqrt(x))
    if x < -X_ASYM:
        z = -x
        return _asym_neg(z, 2.0 / 3.0 * z * math.sqrt(z) - _QUARTER_PI)
    return _series(x)


@njit
def _zeta_step(x, r, d):
    # 2/3 (x^{3/2} - r^{3/2}) without cancellation; x = r + d, both positive
    return 2.0 / 3.0 * d * (x + math.sqrt(x * r) + r) / (math.sqrt(x) + math.sqrt(r))


@njit
def _airy_frame(ref, off):
    x = ref + off
    if ref > X_ASYM:
        # scaled frame: (Ai exp(zeta_ref), Bi exp(-zeta_ref))
        if x > X_ASYM:
            return _asym_pos(x, _zeta_step(x, ref, off))
        zr = 2.0 / 3.0 * ref * math.sqrt(ref)
        ai, aip, bi, bip = _airy_plain(x)
        up = math.exp(zr)
        down = math.exp(-zr)
        return ai * up, aip * up, bi * down, bip * down
    if ref > -X_ASYM:
        return _airy_plain(x)
    zr = -ref
    if x < -X_ASYM:
        z = -x
        # zeta(z) - zeta(zr) without subtracting the two large phases
        num = (-off) * (z * z + z * zr + zr * zr)
        den = z * math.sqrt(z) + zr * math.sqrt(zr)
        return _asym_neg(z, 2.0 / 3.0 * num / den)
    ai, aip, bi, bip = _airy_plain(x)
    psi = 2.0 / 3.0 * zr * math.sqrt(zr) - _QUARTER_PI
    c = math.cos(psi)
    s = math.sin(psi)
    return c * ai - s * bi, c * aip - s * bip, s * ai + c * bi, s * aip + c * bip


@njit
def _airy_frame_loop(ref, off, out):
    for i in range(ref.shape[0]):
        a, ap, b, bp = _airy_frame(ref[i], off[i])
        out[0, i] = a
        out[1, i] = ap
        out[2, i] = b
        out[3, i] = bp


# ---------------------------------------------------------------------------
# vectorized numpy path (used when the JIT backend is disabled)
# ---------------------------------------------------------------------------


def _series_np(x):
    x = np.asarray(x, dtype=float)
    x2h, x2l = _two_prod(x, x)
    x3h, x3l = _dd_mul(x2h, x2l, x, np.zeros_like(x))
    zero = np.zeros_like(x)
    fh, fl = np.ones_like(x), zero.copy()
    tfh, tfl = np.ones_like(x), zero.copy()
    gh, gl = x.copy(), zero.copy()
    tgh, tgl = x.copy(), zero.copy()
    tdfh, tdfl = _dd_mul(x2h, x2l, np.full_like(x, 0.5), zero)
    dfh, dfl = tdfh.copy(), tdfl.copy()
    dgh, dgl = np.ones_like(x), zero.copy()
    tdgh, tdgl = np.ones_like(x), zero.copy()
    peak = np.ones_like(x)
    for k in range(1, 200):
        tfh, tfl = _dd_div_d(*_dd_mul(tfh, tfl, x3h, x3l), float((3 * k - 1) * (3 * k)))
        fh, fl = _dd_add(fh, fl, tfh, tfl)
        tgh, tgl = _dd_div_d(*_dd_mul(tgh, tgl, x3h, x3l), float((3 * k) * (3 * k + 1)))
        gh, gl = _dd_add(gh, gl, tgh, tgl)
        tdgh, tdgl = _dd_div_d(*_dd_mul(tdgh, tdgl, x3h, x3l), float((3 * k - 2) * (3 * k)))
        dgh, dgl = _dd_add(dgh, dgl, tdgh, tdgl)
        tdfh, tdfl = _dd_div_d(*_dd_mul(tdfh, tdfl, x3h, x3l), float((3 * k) * (3 * k + 2)))
        dfh, dfl = _dd_add(dfh, dfl, tdfh, tdfl)
        big = np.maximum.reduce([np.abs(tfh), np.abs(tgh), np.abs(tdfh), np.abs(tdgh)])
        peak = np.maximum(peak, big)
        if np.all(big <= 1e-34 * peak):
            break
    ai, bi = _combine(fh, fl, gh, gl)
    aip, bip = _combine(dfh, dfl, dgh, dgl)
    return ai, aip, bi, bip


def _asym_sums_np(zeta):
    """Truncated sums for the asymptotic branches.

    Returns (su, sua, sv, sva, P, Q, R, S): plain and alternating sums of
    u_k zeta^-k and v_k zeta^-k, and the even/odd split used on the
    negative axis.
    """
    one = np.ones_like(zeta)
    su, sua, sv, sva = one.copy(), one.copy(), one.copy(), one.copy()
    P, Q, R, S = one.copy(), np.zeros_like(zeta), one.copy(), np.zeros_like(zeta)
    u = 1.0
    last = one.copy()
    active = np.ones(zeta.shape, dtype=bool)
    p = one.copy()
    for k in range(1, 200):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        p = p / zeta
        tu = u * p
        tv = v * p
        mag = np.maximum(np.abs(tu), np.abs(tv))
        active &= mag < last
        if not active.any():
            break
        tu = np.where(active, tu, 0.0)
        tv = np.where(active, tv, 0.0)
        last = np.where(active, mag, last)
        alt = -1.0 if k % 2 else 1.0
        su += tu
        sua += alt * tu
        sv += tv
        sva += alt * tv
        sgn = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            P += sgn * tu
            R += sgn * tv
        else:
            Q += sgn * tu
            S += sgn * tv
        active &= mag >= 1e-17
    return su, sua, sv, sva, P, Q, R, S


def _asym_pos_np(x, shift=None):
    zeta = 2.0 / 3.0 * x * np.sqrt(x)
    shift = zeta if shift is None else shift
    su, sua, sv, sva, *_ = _asym_sums_np(zeta)
    q = x ** 0.25
    em = np.exp(-shift)
    ep = np.exp(shift)
    return (
        em / (2.0 * _SQRT_PI * q) * sua,
        -q * em / (2.0 * _SQRT_PI) * sva,
        ep / (_SQRT_PI * q) * su,
        q * ep / _SQRT_PI * sv,
    )


def _asym_neg_np(z, delta):
    zeta = 2.0 / 3.0 * z * np.sqrt(z)
    *_, P, Q, R, S = _asym_sums_np(zeta)
    c = np.cos(delta)
    s = np.sin(delta)
    q = z ** 0.25
    amp = 1.0 / (_SQRT_PI * q)
    damp = q / _SQRT_PI
    return amp * (c * P + s * Q), damp * (s * R - c * S), amp * (-s * P + c * Q), damp * (c * R + s * S)


def _airy_plain_np(x):
    x = np.asarray(x, dtype=float)
    out = np.full((4,) + x.shape, np.nan)
    ok = np.abs(x) <= X_MAX
    pos = ok & (x > X_ASYM)
    neg = ok & (x < -X_ASYM)
    mid = ok & ~pos & ~neg
    if mid.any():
        out[:, mid] = _series_np(x[mid])
    if pos.any():
        out[:, pos] = _asym_pos_np(x[pos])
    if neg.any():
        z = -x[neg]
        out[:, neg] = _asym_neg_np(z, 2.0 / 3.0 * z * np.sqrt(z) - _QUARTER_PI)
    return out


def _airy_frame_np(ref, off):
    x = ref + off
    out = _airy_plain_np(x)
    scaled = ref > X_ASYM
    if scaled.any():
        far = scaled & (x > X_ASYM)
        if far.any():
            xs, rs = x[far], ref[far]
            step = 2.0 / 3.0 * off[far] * (xs + np.sqrt(xs * rs) + rs) / (np.sqrt(xs) + np.sqrt(rs))
            out[:, far] = _asym_pos_np(xs, step)
        near = scaled & ~far
        if near.any():
            zr = 2.0 / 3.0 * ref[near] * np.sqrt(ref[near])
            up, down = np.exp(zr), np.exp(-zr)
            out[:, near] = out[:, near] * np.array([up, up, down, down])
    framed = ref <= -X_ASYM
    if not framed.any():
        return out
    far = framed & (x < -X_ASYM)
    if far.any():
        z = -x[far]
        zr = -ref[far]
        num = (-off[far]) * (z * z + z * zr + zr * zr)
        den = z * np.sqrt(z) + zr * np.sqrt(zr)
        out[:, far] = _asym_neg_np(z, 2.0 / 3.0 * num / den)
    near = framed & ~far
    if near.any():
        zr = -ref[near]
        psi = 2.0 / 3.0 * zr * np.sqrt(zr) - _QUARTER_PI
        c, s = np.cos(psi), np.sin(psi)
        ai, aip, bi, bip = out[:, near]
        out[:, near] = [c * ai - s * bi, c * aip - s * bip, s * ai + c * bi, s * aip + c * bip]
    return out


# ---------------------------------------------------------------------------
# public interface
# ---------------------------------------------------------------------------


def airy_eval(x: float) -> AiryEval:
    """Evaluate Ai, Ai', Bi, Bi' at a finite real ``x`` with ``|x| <= 80``."""
    x = float(x)
    if not math.isfinite(x) or abs(x) > X_MAX:
        raise AiryDomainError(f"Airy argument {x!r} outside [-{X_MAX}, {X_MAX}]")
    ai, aip, bi, bip = _airy_plain(x)
    return AiryEval(x, ai, aip, bi, bip)


def airy_second(x: float, e: AiryEval) -> tuple[float, float]:
    """Second derivatives (Ai'', Bi'') from Airy's equation y'' = x y."""
    return x * e.ai, x * e.bi


def airy_array(x) -> np.ndarray:
    """Vectorized evaluation; returns an array ``(4, n)`` of Ai, Ai', Bi, Bi'."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > X_MAX):
        raise AiryDomainError(f"Airy arguments outside [-{X_MAX}, {X_MAX}]")
    return airy_frame(np.zeros_like(x), x)


def airy_frame(ref, off) -> np.ndarray:
    """Airy pair at ``ref + off`` in the phase frame anchored at ``ref``.

    Plain (Ai, Ai', Bi, Bi') for ``-X_ASYM < ref <= X_ASYM``. Below that
    both functions are rotated by the asymptotic phase at ``ref``; above
    it Ai is multiplied by exp(zeta_ref) and Bi by exp(-zeta_ref). ``off``
    should be supplied exactly (not as a difference of large numbers) so
    the increment stays accurate. Results that are not representable raise
    :class:`AiryDomainError`.
    """
    ref, off = np.broadcast_arrays(np.asarray(ref, dtype=float), np.asarray(off, dtype=float))
    shape = ref.shape
    ref = np.ascontiguousarray(ref.ravel())
    off = np.ascontiguousarray(off.ravel())
    if USE_JIT:
        out = np.empty((4, ref.shape[0]))
        _airy_frame_loop(ref, off, out)
    else:
        out = _airy_frame_np(ref, off)
    if not np.all(np.isfinite(out)):
        bad = (ref + off)[~np.all(np.isfinite(out), axis=0)]
        raise AiryDomainError(f"Airy argument {bad[0]!r} outside the representable range")
    return out.reshape((4,) + shape)


def airy_frame_scalar(ref: float, off: float) -> tuple[float, float, float, float]:
    """Scalar form of :func:`airy_frame` (no array overhead)."""
    vals = _airy_frame(float(ref), float(off))
    if not all(math.isfinite(v) for v in vals):
        raise AiryDomainError(f"Airy argument {ref + off!r} outside the representable range")
    return vals
