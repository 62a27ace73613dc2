"""Exact coefficients in Q(i)[sqrt 2] and sparse truncated polynomial series.

Storage layout
--------------
A :class:`PolySeries` keeps its terms in a plain ``dict`` mapping a packed
integer key to a single :class:`gmpy2.mpq`.  The key packs, from the low bits
up:

* 2 bits: power of ``i`` (0 or 1 after reduction),
* 2 bits: power of ``sqrt(2)`` (0 or 1 after reduction),
* 8 bits per phase-space variable, coordinates first (``q_1..q_d`` or
  ``zeta_1..zeta_d``) then momenta (``p_1..p_d`` or ``eta_1..eta_d``),
* 8 bits for the power of ``eps``,
* 8 bits for the power of the ancillary variable ``z``.

Folding the two algebraic units into the key turns every coefficient
product into one rational product plus a table lookup, and multiplying two
monomials into one integer addition.  An :class:`ExtScalar` coefficient of a
monomial is the sum of up to four stored rationals.

Term order
----------
Public iteration (:meth:`PolySeries.terms`, printing) sorts monomials by
``(eps_pow, z_pow, total degree, exps)`` ascending.  The order is fixed and
does not depend on the history of the series.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping

import gmpy2
from gmpy2 import mpq

__all__ = [
    "ExtScalar",
    "Monomial",
    "PolySeries",
    "ParseError",
    "ext_arith",
    "poly_arith",
    "coeff_of_z",
    "parse_poly",
    "NO_CAP",
]

#: Cap value meaning "no truncation" (largest exponent a field can hold safely).
NO_CAP = 127

_ZERO = mpq(0)
_ONE = mpq(1)

_UNIT_BITS = 4
_FIELD = 8
_MASK = 0xFF

# key & 15 after adding two reduced keys -> (amount to subtract, factor)
# i*i = -1, r2*r2 = 2
_FIX: list = [None] * 16
for _i in range(3):
    for _s in range(3):
        _d, _f = 0, 1
        if _i == 2:
            _d, _f = _d + 2, -_f
        if _s == 2:
            _d, _f = _d + 8, 2 * _f
        if _d:
            _FIX[_i + 4 * _s] = (_d, _f)
del _i, _s, _d, _f


def _q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x))
    return mpq(x)


class ParseError(ValueError):
    """Malformed textual scalar or polynomial.

    ``line`` and ``column`` are 1-based; ``line`` is None when parsing a bare
    string.
    """

    def __init__(self, msg: str, column: int, text: str = "", line: int | None = None):
        self.msg = msg
        self.column = column
        self.line = line
        self.text = text
        where = f"column {column}" if line is None else f"line {line}, column {column}"
        super().__init__(f"{msg} at {where}")


# ---------------------------------------------------------------------------
# ExtScalar


class ExtScalar:
    """Exact element ``(re_r + re_s*sqrt2) + i*(im_r + im_s*sqrt2)``.

    Immutable; the four parts are :class:`gmpy2.mpq`, hence always in lowest
    terms with a positive denominator.
    """

    __slots__ = ("re_r", "re_s", "im_r", "im_s")

    def __init__(self, re_r=0, re_s=0, im_r=0, im_s=0):
        object.__setattr__(self, "re_r", _q(re_r))
        object.__setattr__(self, "re_s", _q(re_s))
        object.__setattr__(self, "im_r", _q(im_r))
        object.__setattr__(self, "im_s", _q(im_s))

    def __setattr__(self, name, value):
        raise AttributeError("ExtScalar is immutable")

    # constructors -----------------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "ExtScalar":
        if isinstance(x, ExtScalar):
            return x
        if isinstance(x, str):
            return cls.parse(x)
        if isinstance(x, complex):
            raise TypeError("floating complex numbers are not exact")
        if isinstance(x, float):
            raise TypeError("floats are not exact; pass a Fraction or string")
        return cls(x)

    @classmethod
    def i(cls) -> "ExtScalar":
        return cls(0, 0, 1, 0)

    @classmethod
    def sqrt2(cls) -> "ExtScalar":
        return cls(0, 1, 0, 0)

    @classmethod
    def parse(cls, text: str) -> "ExtScalar":
        """Parse ``"a/b"``, ``"a/b*r2"``, ``"i*a/b"`` and signed sums thereof."""
        f = parse_poly(text, 0, "pq")
        if f.eps_degree() > 0 or f.z_degree() > 0:
            raise ParseError("scalar expected", 1, text)
        return f.constant_term()

    # structure ----------------------------------------------------------------
    def parts(self) -> tuple[mpq, mpq, mpq, mpq]:
        return (self.re_r, self.re_s, self.im_r, self.im_s)

    def _unit_items(self):
        # (low key bits, rational) for the non-zero parts
        for low, v in ((0, self.re_r), (4, self.re_s), (1, self.im_r), (5, self.im_s)):
            if v:
                yield low, v

    def __bool__(self) -> bool:
        return bool(self.re_r or self.re_s or self.im_r or self.im_s)

    def is_rational(self) -> bool:
        return not (self.re_s or self.im_r or self.im_s)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(int(self.re_r.numerator), int(self.re_r.denominator))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtScalar):
            try:
                other = ExtScalar.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.parts() == other.parts()

    def __hash__(self) -> int:
        return hash(self.parts())

    # arithmetic ---------------------------------------------------------------
    def __neg__(self) -> "ExtScalar":
        return ExtScalar(-self.re_r, -self.re_s, -self.im_r, -self.im_s)

    def __add__(self, other) -> "ExtScalar":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return ExtScalar(self.re_r + o.re_r, self.re_s + o.re_s,
                         self.im_r + o.im_r, self.im_s + o.im_s)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtScalar":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "ExtScalar":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "ExtScalar":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.parts()
        e, f, g, h = o.parts()
        # (x1 + i y1)(x2 + i y2), x = r + s*sqrt2
        xr, xs = _mul_r2(a, b, e, f)
        yr, ys = _mul_r2(c, d, g, h)
        ur, us = _mul_r2(a, b, g, h)
        vr, vs = _mul_r2(c, d, e, f)
        return ExtScalar(xr - yr, xs - ys, ur + vr, us + vs)

    __rmul__ = __mul__

    def conjugate(self) -> "ExtScalar":
        """Complex conjugate (``sqrt2`` is real)."""
        return ExtScalar(self.re_r, self.re_s, -self.im_r, -self.im_s)

    def inverse(self) -> "ExtScalar":
        if not self:
            raise ZeroDivisionError("ExtScalar inverse of zero")
        a, b, c, d = self.parts()
        # |x|^2 = x*conj(x) lies in Q(sqrt2)
        nr, ns = _mul_r2(a, b, a, b)
        mr, ms = _mul_r2(c, d, c, d)
        nr, ns = nr + mr, ns + ms
        den = nr * nr - 2 * ns * ns
        ir, is_ = nr / den, -ns / den
        conj = self.conjugate()
        return conj * ExtScalar(ir, is_, 0, 0)

    def __truediv__(self, other) -> "ExtScalar":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other) -> "ExtScalar":
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int) -> "ExtScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = ExtScalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # text -------------------------------------------------------------------
    def __str__(self) -> str:
        pieces = []
        for v, pre, post in ((self.re_r, "", ""), (self.re_s, "", "*r2"),
                             (self.im_r, "i*", ""), (self.im_s, "i*", "*r2")):
            if not v:
                continue
            sign = "-" if v < 0 else "+"
            pieces.append((sign, f"{pre}{_fmt_q(abs(v))}{post}"))
        if not pieces:
            return "0"
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += sign + body
        return out

    def __repr__(self) -> str:
        return f"ExtScalar({str(self)!r})"


def _mul_r2(a, b, c, d):
    # (a + b r2)(c + d r2)
    return a * c + 2 * b * d, a * d + b * c


def _fmt_q(v: mpq) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _coerce_or_none(x):
    try:
        return ExtScalar.coerce(x)
    except (TypeError, ValueError):
        return None


def ext_arith(a: ExtScalar, b: ExtScalar | None, kind: str) -> ExtScalar:
    """Field operation ``kind`` in {"add", "mul", "neg", "inv"} on exact scalars."""
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    if kind == "neg":
        return -a
    if kind == "inv":
        return a.inverse()
    raise ValueError(f"unknown operation {kind!r}")


# ---------------------------------------------------------------------------
# Monomials and key layout


@dataclass(frozen=True, order=True)
class Monomial:
    """Exponents over ``(x_1..x_d, y_1..y_d)`` plus powers of ``eps`` and ``z``.

    ``x`` are the coordinates (``q`` or ``zeta``), ``y`` the momenta (``p`` or
    ``eta``).
    """

    exps: tuple[int, ...]
    eps_pow: int = 0
    z_pow: int = 0

    def __post_init__(self):
        if any(e < 0 for e in self.exps) or self.eps_pow < 0 or self.z_pow < 0:
            raise ValueError("exponents must be non-negative")
        if len(self.exps) % 2:
            raise ValueError("exponent vector must have even length 2d")
        if max(self.exps + (self.eps_pow, self.z_pow), default=0) > NO_CAP:
            raise ValueError(f"exponent above {NO_CAP}")

    @property
    def degree(self) -> int:
        return sum(self.exps)

    def sort_key(self):
        return (self.eps_pow, self.z_pow, sum(self.exps), self.exps)


class _Layout:
    """Bit positions for one phase-space dimension."""

    def __init__(self, dim: int):
        self.dim = dim
        self.nvar = 2 * dim
        self.var_shift = [_UNIT_BITS + _FIELD * j for j in range(self.nvar)]
        self.var_unit = [1 << s for s in self.var_shift]
        self.eps_shift = _UNIT_BITS + _FIELD * self.nvar
        self.z_shift = self.eps_shift + _FIELD
        self.eps_unit = 1 << self.eps_shift
        self.z_unit = 1 << self.z_shift
        # subtracting pair_unit[j] lowers x_j and y_j by one
        self.pair_unit = [self.var_unit[j] + self.var_unit[dim + j] for j in range(dim)]
        self.phase_mask = (1 << self.eps_shift) - 1 - 15

    def exps(self, key: int) -> tuple[int, ...]:
        return tuple((key >> s) & _MASK for s in self.var_shift)

    def eps(self, key: int) -> int:
        return (key >> self.eps_shift) & _MASK

    def zpow(self, key: int) -> int:
        return key >> self.z_shift

    def key(self, mono: Monomial) -> int:
        if len(mono.exps) != self.nvar:
            raise ValueError(f"monomial has {len(mono.exps)} exponents, expected {self.nvar}")
        k = 0
        for e, s in zip(mono.exps, self.var_shift):
            k |= e << s
        return k | (mono.eps_pow << self.eps_shift) | (mono.z_pow << self.z_shift)

    def monomial(self, key: int) -> Monomial:
        return Monomial(self.exps(key), self.eps(key), self.zpow(key))


@lru_cache(maxsize=None)
def _layout(dim: int) -> _Layout:
    return _Layout(dim)


_VAR_NAMES = {"pq": ("q", "p"), "birkhoff": ("zeta", "eta")}


# ---------------------------------------------------------------------------
# PolySeries


class PolySeries:
    """Sparse polynomial in ``2*dim`` canonical variables, ``eps`` and ``z``.

    Coefficients are exact elements of Q(i)[sqrt2].  Terms with ``eps`` power
    above ``eps_cap`` or ``z`` power above ``z_cap`` are never stored, and
    products drop them before they are formed.  ``kind`` is ``"pq"`` or
    ``"birkhoff"``; arithmetic between kinds or dimensions raises
    ``ValueError``.

    Instances are treated as immutable.  Equality compares ``dim``, ``kind``
    and terms; the caps are truncation metadata and do not take part.
    """

    __slots__ = ("dim", "kind", "eps_cap", "z_cap", "_raw")

    def __init__(self, dim: int, kind: str = "pq",
                 terms: Mapping[Monomial | tuple, object] | None = None,
                 eps_cap: int = NO_CAP, z_cap: int = NO_CAP):
        if kind not in _VAR_NAMES:
            raise ValueError(f"unknown variable kind {kind!r}")
        if dim < 0:
            raise ValueError("dim must be non-negative")
        self.dim = dim
        self.kind = kind
        self.eps_cap = min(eps_cap, NO_CAP)
        self.z_cap = min(z_cap, NO_CAP)
        raw: dict[int, mpq] = {}
        if terms:
            lay = _layout(dim)
            for mono, c in terms.items():
                if not isinstance(mono, Monomial):
                    mono = Monomial(tuple(mono))
                if mono.eps_pow > self.eps_cap or mono.z_pow > self.z_cap:
                    continue
                base = lay.key(mono)
                for low, v in ExtScalar.coerce(c)._unit_items():
                    k = base | low
                    raw[k] = raw.get(k, _ZERO) + v
            raw = {k: v for k, v in raw.items() if v}
        self._raw = raw

    # internal constructor ----------------------------------------------------
    @classmethod
    def _make(cls, dim, kind, raw, eps_cap=NO_CAP, z_cap=NO_CAP) -> "PolySeries":
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.kind = kind
        obj.eps_cap = eps_cap
        obj.z_cap = z_cap
        obj._raw = raw
        return obj

    @property
    def layout(self) -> _Layout:
        return _layout(self.dim)

    def _like(self, raw, eps_cap=None, z_cap=None) -> "PolySeries":
        return PolySeries._make(self.dim, self.kind, raw,
                                self.eps_cap if eps_cap is None else eps_cap,
                                self.z_cap if z_cap is None else z_cap)

    # factories ----------------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, kind: str = "pq", eps_cap: int = NO_CAP,
             z_cap: int = NO_CAP) -> "PolySeries":
        return cls._make(dim, kind, {}, eps_cap, z_cap)

    @classmethod
    def constant(cls, c, dim: int, kind: str = "pq", eps_cap: int = NO_CAP,
                 z_cap: int = NO_CAP) -> "PolySeries":
        return cls(dim, kind, {Monomial((0,) * 2 * dim): c}, eps_cap, z_cap)

    @classmethod
    def monomial(cls, mono: Monomial | tuple, c=1, dim: int | None = None,
                 kind: str = "pq", eps_cap: int = NO_CAP,
                 z_cap: int = NO_CAP) -> "PolySeries":
        if not isinstance(mono, Monomial):
            mono = Monomial(tuple(mono))
        if dim is None:
            dim = len(mono.exps) // 2
        return cls(dim, kind, {mono: c}, eps_cap, z_cap)

    @classmethod
    def var(cls, name: str, dim: int, kind: str = "pq") -> "PolySeries":
        """Single variable by name: ``"q1"``, ``"p2"``, ``"zeta1"``, ``"eta2"``, ``"eps"``, ``"z"``."""
        lay = _layout(dim)
        key = _var_key(name, dim, kind, lay)
        if key is None:
            raise ValueError(f"unknown variable {name!r} for kind={kind}, dim={dim}")
        return cls._make(dim, kind, {key: _ONE})

    def copy_with_caps(self, eps_cap: int | None = None, z_cap: int | None = None) -> "PolySeries":
        """Same terms with new caps; terms beyond the new caps are dropped."""
        ec = self.eps_cap if eps_cap is None else min(eps_cap, NO_CAP)
        zc = self.z_cap if z_cap is None else min(z_cap, NO_CAP)
        return self._like(_truncate_raw(self._raw, self.layout, ec, zc), ec, zc)

    truncate = copy_with_caps

    # inspection ---------------------------------------------------------------
    def __len__(self) -> int:
        """Number of distinct monomials."""
        return len({k >> _UNIT_BITS for k in self._raw})

    @property
    def stored_terms(self) -> int:
        """Number of stored rational entries (up to four per monomial)."""
        return len(self._raw)

    def __bool__(self) -> bool:
        return bool(self._raw)

    def is_zero(self) -> bool:
        return not self._raw

    def terms(self) -> dict[Monomial, ExtScalar]:
        """Monomial -> coefficient in the documented term order."""
        lay = self.layout
        grouped: dict[int, list] = {}
        for k, v in self._raw.items():
            parts = grouped.setdefault(k >> _UNIT_BITS, [_ZERO] * 4)
            low = k & 15
            parts[{0: 0, 4: 1, 1: 2, 5: 3}[low]] = v
        items = []
        for base, parts in grouped.items():
            mono = lay.monomial(base << _UNIT_BITS)
            items.append((mono, ExtScalar(*parts)))
        items.sort(key=lambda mc: mc[0].sort_key())
        return dict(items)

    def __iter__(self) -> Iterator[tuple[Monomial, ExtScalar]]:
        return iter(self.terms().items())

    def coeff(self, mono: Monomial | tuple) -> ExtScalar:
        if not isinstance(mono, Monomial):
            mono = Monomial(tuple(mono))
        base = self.layout.key(mono)
        r = self._raw
        return ExtScalar(r.get(base, 0), r.get(base | 4, 0), r.get(base | 1, 0), r.get(base | 5, 0))

    def constant_term(self) -> ExtScalar:
        return self.coeff(Monomial((0,) * 2 * self.dim))

    def eps_degree(self) -> int:
        """Highest stored power of eps (-1 for zero)."""
        lay = self.layout
        return max((lay.eps(k) for k in self._raw), default=-1)

    def z_degree(self) -> int:
        lay = self.layout
        return max((lay.zpow(k) for k in self._raw), default=-1)

    def max_degree(self) -> int:
        lay = self.layout
        return max((sum(lay.exps(k)) for k in self._raw), default=-1)

    def is_eps_free(self) -> bool:
        es = self.layout.eps_shift
        return all(not (k >> es) for k in self._raw)

    # arithmetic ---------------------------------------------------------------
    def _check(self, other: "PolySeries"):
        if not isinstance(other, PolySeries):
            raise TypeError(f"expected PolySeries, got {type(other).__name__}")
        if other.kind != self.kind:
            raise ValueError(f"cannot combine {self.kind} and {other.kind} series")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other) -> "PolySeries":
        if not isinstance(other, PolySeries):
            return self + PolySeries.constant(other, self.dim, self.kind)
        self._check(other)
        ec = min(self.eps_cap, other.eps_cap)
        zc = min(self.z_cap, other.z_cap)
        raw = _truncate_raw(self._raw, self.layout, ec, zc)
        if raw is self._raw:
            raw = dict(raw)
        _acc(raw, _truncate_raw(other._raw, self.layout, ec, zc), _ONE)
        return self._like(raw, ec, zc)

    __radd__ = __add__

    def __neg__(self) -> "PolySeries":
        return self._like({k: -v for k, v in self._raw.items()})

    def __sub__(self, other) -> "PolySeries":
        if not isinstance(other, PolySeries):
            return self + (-ExtScalar.coerce(other))
        return self + (-other)

    def __rsub__(self, other) -> "PolySeries":
        return (-self) + other

    def __mul__(self, other) -> "PolySeries":
        if isinstance(other, PolySeries):
            self._check(other)
            ec = min(self.eps_cap, other.eps_cap)
            zc = min(self.z_cap, other.z_cap)
            raw = _mul_raw(self._raw, other._raw, self.layout, ec, zc)
            return self._like(raw, ec, zc)
        return self.scale(other)

    def __rmul__(self, other) -> "PolySeries":
        return self.scale(other)

    def __pow__(self, n: int) -> "PolySeries":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = PolySeries.constant(1, self.dim, self.kind, self.eps_cap, self.z_cap)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def scale(self, c) -> "PolySeries":
        """Multiply every coefficient by the exact scalar ``c``."""
        if isinstance(c, (int, Fraction)) or type(c) is type(_ONE):
            q = _q(c)
            if not q:
                return self._like({})
            return self._like({k: v * q for k, v in self._raw.items()})
        s = ExtScalar.coerce(c)
        raw: dict[int, mpq] = {}
        for low, v in s._unit_items():
            _acc(raw, _mul_raw(self._raw, {low: v}, self.layout, NO_CAP, NO_CAP), _ONE)
        return self._like(raw)

    def __truediv__(self, c) -> "PolySeries":
        return self.scale(ExtScalar.coerce(c).inverse())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolySeries):
            if isinstance(other, (int, Fraction, ExtScalar, str)):
                return self == PolySeries.constant(other, self.dim, self.kind)
            return NotImplemented
        return (self.dim == other.dim and self.kind == other.kind
                and self._raw == other._raw)

    def __hash__(self):
        raise TypeError("PolySeries is unhashable")

    # grading helpers ------------------------------------------------------------
    def eps_coeff(self, n: int) -> "PolySeries":
        """Coefficient of ``eps**n`` as an eps-free series (eps_cap kept)."""
        lay = self.layout
        es, eu = lay.eps_shift, lay.eps_unit
        sh = n * eu
        raw = {k - sh: v for k, v in self._raw.items() if ((k >> es) & _MASK) == n}
        return self._like(raw)

    def eps_part(self, n: int) -> "PolySeries":
        """Terms with exactly ``eps**n`` (eps kept)."""
        es = self.layout.eps_shift
        return self._like({k: v for k, v in self._raw.items() if ((k >> es) & _MASK) == n})

    def eps_slices(self) -> list["PolySeries"]:
        """``[coefficient of eps**0, eps**1, ...]`` up to the eps degree."""
        lay = self.layout
        es, eu = lay.eps_shift, lay.eps_unit
        out: list[dict] = [{} for _ in range(self.eps_degree() + 1)]
        for k, v in self._raw.items():
            e = (k >> es) & _MASK
            out[e][k - e * eu] = v
        return [self._like(r) for r in out]

    def times_eps(self, n: int = 1) -> "PolySeries":
        """Multiply by ``eps**n``; negative ``n`` divides and must be exact.

        A finite eps_cap moves with the series.
        """
        lay = self.layout
        es, sh = lay.eps_shift, n * lay.eps_unit
        raw = {}
        for k, v in self._raw.items():
            if ((k >> es) & _MASK) + n < 0:
                raise ValueError("series is not divisible by that power of eps")
            raw[k + sh] = v
        cap = NO_CAP if self.eps_cap >= NO_CAP else max(0, min(NO_CAP, self.eps_cap + n))
        return self._like(raw, cap)

    def times_z(self, n: int = 1) -> "PolySeries":
        zu = self.layout.z_unit
        raw = {k + n * zu: v for k, v in self._raw.items()}
        return self._like(_truncate_raw(raw, self.layout, self.eps_cap, self.z_cap))

    def coeff_of_z(self, n: int) -> "PolySeries":
        return coeff_of_z(self, n)

    def map_keys(self, fn) -> "PolySeries":
        """Rebuild from ``fn(key, value) -> iterable of (key, value)``; internal use."""
        raw: dict[int, mpq] = {}
        for k, v in self._raw.items():
            for k2, v2 in fn(k, v):
                raw[k2] = raw.get(k2, _ZERO) + v2
        return self._like({k: v for k, v in raw.items() if v})

    # differentiation ------------------------------------------------------------
    def diff(self, var: int) -> "PolySeries":
        """Partial derivative with respect to phase-space variable index ``var``."""
        lay = self.layout
        s, u = lay.var_shift[var], lay.var_unit[var]
        raw = {}
        for k, v in self._raw.items():
            e = (k >> s) & _MASK
            if e:
                raw[k - u] = v * e
        return self._like(raw)

    # text -----------------------------------------------------------------------
    def var_names(self) -> list[str]:
        x, y = _VAR_NAMES[self.kind]
        d = self.dim
        return [f"{x}{j + 1}" for j in range(d)] + [f"{y}{j + 1}" for j in range(d)]

    def to_text(self) -> str:
        """Deterministic text form; :func:`parse_poly` reads it back."""
        names = self.var_names()
        out = []
        for mono, c in self.terms().items():
            factors = []
            for name, e in zip(names, mono.exps):
                if e:
                    factors.append(name if e == 1 else f"{name}^{e}")
            if mono.eps_pow:
                factors.append("eps" if mono.eps_pow == 1 else f"eps^{mono.eps_pow}")
            if mono.z_pow:
                factors.append("z" if mono.z_pow == 1 else f"z^{mono.z_pow}")
            out.append("*".join([f"({c})"] + factors))
        return " + ".join(out) if out else "0"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"PolySeries(dim={self.dim}, kind={self.kind!r}, {self.to_text()!r})"


def _var_key(name: str, dim: int, kind: str, lay: _Layout):
    if name == "eps":
        return lay.eps_unit
    if name == "z":
        return lay.z_unit
    x, y = _VAR_NAMES[kind]
    m = re.fullmatch(r"([a-z]+)(\d+)", name)
    if not m:
        return None
    base, idx = m.group(1), int(m.group(2))
    if not 1 <= idx <= dim:
        return None
    if base == x:
        return lay.var_unit[idx - 1]
    if base == y:
        return lay.var_unit[dim + idx - 1]
    return None


# ---------------------------------------------------------------------------
# raw kernels


def _acc(dst: dict, src: dict, factor) -> None:
    get = dst.get
    for k, v in src.items():
        nv = get(k, _ZERO) + v * factor
        if nv:
            dst[k] = nv
        elif k in dst:
            del dst[k]


def _truncate_raw(raw: dict, lay: _Layout, eps_cap: int, z_cap: int) -> dict:
    if eps_cap >= NO_CAP and z_cap >= NO_CAP:
        return raw
    es, zs = lay.eps_shift, lay.z_shift
    if all(((k >> es) & _MASK) <= eps_cap and (k >> zs) <= z_cap for k in raw):
        return raw
    return {k: v for k, v in raw.items()
            if ((k >> es) & _MASK) <= eps_cap and (k >> zs) <= z_cap}


def _grade_buckets(raw: dict, lay: _Layout):
    """Group items by eps power -> list indexed by eps of [(key, coeff, z)]."""
    es, zs = lay.eps_shift, lay.z_shift
    buckets: dict[int, list] = {}
    for k, v in raw.items():
        buckets.setdefault((k >> es) & _MASK, []).append((k, v, k >> zs))
    top = max(buckets, default=-1)
    return [buckets.get(e, []) for e in range(top + 1)]


def _mul_raw(ra: dict, rb: dict, lay: _Layout, eps_cap: int, z_cap: int) -> dict:
    if not ra or not rb:
        return {}
    if len(ra) < len(rb):
        ra, rb = rb, ra
    es = lay.eps_shift
    fix = _FIX
    b_by_eps = _grade_buckets(rb, lay)
    check_z = z_cap < NO_CAP
    out: dict[int, mpq] = {}
    get = out.get
    for ka, ca in ra.items():
        ea = (ka >> es) & _MASK
        room = eps_cap - ea
        if room < 0:
            continue
        za = ka >> lay.z_shift
        for eb in range(min(room, len(b_by_eps) - 1) + 1):
            for kb, cb, zb in b_by_eps[eb]:
                if check_z and za + zb > z_cap:
                    continue
                k = ka + kb
                fx = fix[k & 15]
                if fx is None:
                    c = ca * cb
                else:
                    k -= fx[0]
                    c = ca * cb * fx[1]
                out[k] = get(k, _ZERO) + c
    return {k: v for k, v in out.items() if v}


def _bracket_raw(ra: dict, rb: dict, lay: _Layout, eps_cap: int, z_cap: int) -> dict:
    """Poisson bracket ``sum_j df/dx_j dg/dy_j - df/dy_j dg/dx_j`` on raw dicts."""
    if not ra or not rb:
        return {}
    d = lay.dim
    es, zs = lay.eps_shift, lay.z_shift
    xs = lay.var_shift[:d]
    ys = lay.var_shift[d:]
    pu = lay.pair_unit
    fix = _FIX
    rng = range(d)
    check_z = z_cap < NO_CAP

    def decode(raw):
        buckets: dict[int, list] = {}
        for k, v in raw.items():
            ex = tuple((k >> s) & _MASK for s in xs)
            ey = tuple((k >> s) & _MASK for s in ys)
            if not any(ex) and not any(ey):
                continue  # constants have zero bracket
            buckets.setdefault((k >> es) & _MASK, []).append((k, v, ex, ey, k >> zs))
        return buckets

    ba = decode(ra)
    bb = decode(rb)
    if not ba or not bb:
        return {}
    top_b = max(bb)
    b_list = [bb.get(e, []) for e in range(top_b + 1)]
    out: dict[int, mpq] = {}
    get = out.get
    for ea, items_a in ba.items():
        room = eps_cap - ea
        if room < 0:
            continue
        for eb in range(min(room, top_b) + 1):
            items_b = b_list[eb]
            if not items_b:
                continue
            for ka, ca, xa, ya, za in items_a:
                for kb, cb, xb, yb, zb in items_b:
                    if check_z and za + zb > z_cap:
                        continue
                    k = ka + kb
                    fx = fix[k & 15]
                    if fx is None:
                        c = ca * cb
                    else:
                        k -= fx[0]
                        c = ca * cb * fx[1]
                    for j in rng:
                        w = xa[j] * yb[j] - ya[j] * xb[j]
                        if w:
                            kk = k - pu[j]
                            out[kk] = get(kk, _ZERO) + c * w
    return {k: v for k, v in out.items() if v}


def poly_arith(f: PolySeries, g, kind: str) -> PolySeries:
    """``kind`` in {"add", "mul", "scale"}; ``g`` is a scalar for "scale"."""
    if kind == "add":
        return f + g
    if kind == "mul":
        if not isinstance(g, PolySeries):
            raise TypeError("mul expects two PolySeries; use kind='scale' for scalars")
        return f * g
    if kind == "scale":
        return f.scale(g)
    raise ValueError(f"unknown operation {kind!r}")


def coeff_of_z(f: PolySeries, n: int) -> PolySeries:
    """Terms of ``f`` carrying ``z**n``, with ``z`` removed."""
    if n < 0 or n > f.z_cap:
        raise ValueError(f"z power {n} outside 0..{f.z_cap}")
    lay = f.layout
    zs, sh = lay.z_shift, n * lay.z_unit
    raw = {k - sh: v for k, v in f._raw.items() if (k >> zs) == n}
    return f._like(raw, z_cap=NO_CAP)


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))")
_BAD_NUM = re.compile(r"\d+/(?!\d)")


def _tokenize(text: str):
    pos = 0
    toks = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        bad = _BAD_NUM.match(text, pos)
        if bad:
            raise ParseError(f"malformed number {bad.group(0)!r}", pos + 1, text)
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1, text)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start + 1))
        pos = m.end()
    toks.append(("end", "", n + 1))
    return toks


class _Parser:
    def __init__(self, text, dim, kind, eps_cap, z_cap):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.dim = dim
        self.kind = kind
        self.lay = _layout(dim)
        self.eps_cap = eps_cap
        self.z_cap = z_cap

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def const(self, value) -> PolySeries:
        return PolySeries.constant(value, self.dim, self.kind, self.eps_cap, self.z_cap)

    def parse(self) -> PolySeries:
        out = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return out

    def expr(self) -> PolySeries:
        sign = 1
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if t[1] == "+" else acc - rhs
            else:
                return acc

    def term(self) -> PolySeries:
        acc = self.power()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "*":
                self.take()
                acc = acc * self.power()
            else:
                return acc

    def power(self) -> PolySeries:
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            e = self.take()
            if e[0] != "num" or "/" in e[1]:
                self.fail("integer exponent expected", e)
            return base ** int(e[1])
        return base

    def atom(self) -> PolySeries:
        t = self.take()
        kind, val, col = t
        if kind == "num":
            return self.const(Fraction(val))
        if kind == "name":
            if val == "i":
                return self.const(ExtScalar.i())
            if val == "r2":
                return self.const(ExtScalar.sqrt2())
            key = _var_key(val, self.dim, self.kind, self.lay)
            if key is None:
                self.fail(f"unknown variable {val!r}", t)
            return PolySeries._make(self.dim, self.kind, {key: _ONE}, self.eps_cap, self.z_cap)
        if kind == "op" and val == "(":
            inner = self.expr()
            close = self.take()
            if close[1] != ")":
                self.fail("')' expected", close)
            return inner
        if kind == "op" and val == "-":
            return -self.power()
        if kind == "end":
            self.fail("unexpected end of input", t)
        self.fail(f"unexpected {val!r}", t)


def parse_poly(text: str, dim: int, kind: str = "pq", eps_cap: int = NO_CAP,
               z_cap: int = NO_CAP) -> PolySeries:
    """Parse a polynomial expression.

    Accepts numbers ``a`` or ``a/b``, the units ``i`` and ``r2`` (sqrt 2),
    variables ``q1..``/``p1..`` (kind ``"pq"``) or ``zeta1..``/``eta1..``
    (kind ``"birkhoff"``), ``eps`` and ``z``, combined with ``+ - * ^`` and
    parentheses.
    """
    return _Parser(text, dim, kind, eps_cap, z_cap).parse()


def as_mpq(x) -> mpq:
    return _q(x)


def gmpy_version() -> str:
    return gmpy2.version()
