"""Double-double arithmetic on float64 pairs.

A value is the unevaluated sum ``hi + lo`` of two float64 with
``|lo| <= ulp(hi)/2``, giving roughly 31 significant decimal digits.  The
core routines are elementwise: they accept scalars or numpy arrays of the
same shape, so a whole batch of parameter candidates can be refined in one
sweep.  Conversion to and from decimal strings goes through exact
``fractions.Fraction`` arithmetic, so printed digits round-trip.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

try:  # allow the same scalar code to run inside numba kernels
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover
    def register_jitable(f=None, **kwargs):
        return f if f is not None else (lambda g: g)

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


@register_jitable
def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@register_jitable
def fast_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


@register_jitable
def two_prod(a, b):
    p = a * b
    aa = _SPLITTER * a
    ahi = aa - (aa - a)
    alo = a - ahi
    bb = _SPLITTER * b
    bhi = bb - (bb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


@register_jitable
def dd_add(xh, xl, yh, yl):
    sh, sl = two_sum(xh, yh)
    th, tl = two_sum(xl, yl)
    sl = sl + th
    sh, sl = fast_two_sum(sh, sl)
    sl = sl + tl
    return fast_two_sum(sh, sl)


@register_jitable
def dd_add_d(xh, xl, y):
    sh, sl = two_sum(xh, y)
    sl = sl + xl
    return fast_two_sum(sh, sl)


@register_jitable
def dd_neg(xh, xl):
    return -xh, -xl


@register_jitable
def dd_sub(xh, xl, yh, yl):
    return dd_add(xh, xl, -yh, -yl)


@register_jitable
def dd_mul(xh, xl, yh, yl):
    ph, pl = two_prod(xh, yh)
    pl = pl + (xh * yl + xl * yh)
    return fast_two_sum(ph, pl)


@register_jitable
def dd_mul_d(xh, xl, y):
    ph, pl = two_prod(xh, y)
    pl = pl + xl * y
    return fast_two_sum(ph, pl)


@register_jitable
def dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    rh, rl = dd_mul_d(yh, yl, q1)
    rh, rl = dd_sub(xh, xl, rh, rl)
    q2 = (rh + rl) / yh
    return fast_two_sum(q1, q2)


@register_jitable
def dd_sqrt(xh, xl):
    # one Newton step on the float64 estimate; exact for xh == 0
    if xh == 0.0 and xl == 0.0:
        return 0.0, 0.0
    s = np.sqrt(xh)
    ph, pl = two_prod(s, s)
    rh, rl = dd_sub(xh, xl, ph, pl)
    corr = (rh + rl) / (2.0 * s)
    return fast_two_sum(s, corr)


@register_jitable
def dd_sqr(xh, xl):
    ph, pl = two_prod(xh, xh)
    pl = pl + 2.0 * xh * xl
    return fast_two_sum(ph, pl)


def dd_abs(xh, xl):
    neg = xh < 0
    return np.where(neg, -xh, xh), np.where(neg, -xl, xl)


def dd_array(values) -> tuple[np.ndarray, np.ndarray]:
    """Promote float64 array-likes to (hi, lo) with lo = 0."""
    hi = np.asarray(values, dtype=np.float64)
    return hi, np.zeros_like(hi)


class DD:
    """Scalar double-double with operator sugar; thin wrapper over the pair ops."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    @staticmethod
    def from_fraction(fr: Fraction) -> "DD":
        hi = float(fr)
        lo = float(fr - Fraction(hi))
        return DD(hi, lo)

    @staticmethod
    def from_str(s: str) -> "DD":
        s = s.strip()
        mant, _, exp = s.partition("e")
        expo = int(exp) if exp else 0
        sign = -1 if mant.startswith("-") else 1
        mant = mant.lstrip("+-")
        intpart, _, fracpart = mant.partition(".")
        digits = (intpart + fracpart) or "0"
        expo -= len(fracpart)
        return DD.from_fraction(sign * Fraction(int(digits)) * Fraction(10) ** expo)

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def to_str(self, digits: int = 32) -> str:
        """Round to `digits` significant decimal digits, exactly."""
        fr = self.to_fraction()
        if fr == 0:
            return "0." + "0" * (digits - 1)
        sign = "-" if fr < 0 else ""
        fr = abs(fr)
        # find decimal exponent e with 10^e <= fr < 10^(e+1)
        e = 0
        while fr >= 10:
            fr /= 10
            e += 1
        while fr < 1:
            fr *= 10
            e -= 1
        scaled = fr * Fraction(10) ** (digits - 1)
        n = int(scaled)
        if scaled - n >= Fraction(1, 2):
            n += 1
        d = str(n)
        if len(d) > digits:  # rounding carried over, e.g. 999..9 -> 1000..0
            d = d[:digits]
            e += 1
        return f"{sign}{d[0]}.{d[1:]}e{e:+03d}"

    def __float__(self):
        return self.hi + self.lo

    def _coerce(self, other):
        if isinstance(other, DD):
            return other
        return DD(float(other))

    def __add__(self, other):
        o = self._coerce(other)
        return DD(*dd_add(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return DD(*dd_sub(self.hi, self.lo, o.hi, o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return DD(*dd_mul(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return DD(*dd_div(self.hi, self.lo, o.hi, o.lo))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __abs__(self):
        return -self if self.hi < 0 or (self.hi == 0 and self.lo < 0) else self

    def sqrt(self) -> "DD":
        if self.hi < 0:
            raise ValueError("sqrt of negative double-double")
        return DD(*dd_sqrt(self.hi, self.lo))

    def _cmp(self, other):
        o = self._coerce(other)
        if self.hi != o.hi:
            return -1 if self.hi < o.hi else 1
        if self.lo != o.lo:
            return -1 if self.lo < o.lo else 1
        return 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.hi, self.lo))

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"
