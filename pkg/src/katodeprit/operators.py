"""Averaging, integrating and truncated-resolvent operators of the harmonic part.

All operators act diagonally on Birkhoff monomials ``zeta^m eta^n``: the
unperturbed Liouvillian multiplies such a monomial by ``i*(omega, m - n)``.
Only rational frequency vectors are accepted so that resonance is decided
exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from gmpy2 import mpq

from .algebra import Monomial, PolySeries, _MASK, _ZERO

__all__ = ["Frequencies", "is_resonant", "average", "integrate", "rz_apply", "eigenvalue"]


@dataclass(frozen=True)
class Frequencies:
    """Exact rational frequency vector of the harmonic part."""

    omega: tuple[Fraction, ...]

    def __post_init__(self):
        vals = []
        for w in self.omega:
            if isinstance(w, float):
                raise TypeError("frequencies must be exact rationals, not floats")
            vals.append(Fraction(w))
        if not vals:
            raise ValueError("empty frequency vector")
        if not any(vals):
            raise ValueError("frequency vector must have a nonzero entry")
        object.__setattr__(self, "omega", tuple(vals))

    @classmethod
    def of(cls, omega: "Frequencies | Sequence") -> "Frequencies":
        return omega if isinstance(omega, Frequencies) else cls(tuple(omega))

    @property
    def dim(self) -> int:
        return len(self.omega)

    @property
    def scaled(self) -> tuple[tuple[int, ...], int]:
        """Integer vector ``W`` and ``den`` with ``omega = W / den``."""
        den = lcm(*(w.denominator for w in self.omega))
        return tuple(int(w * den) for w in self.omega), den


def _spectrum(f: PolySeries, omega: Frequencies):
    """Per-key integer eigenvalue numerator; eigenvalue is ``i * lam / den``."""
    if f.kind != "birkhoff":
        raise ValueError("spectral operators act in the Birkhoff frame")
    if f.dim != omega.dim:
        raise ValueError(f"frequency vector has {omega.dim} entries, series has dim {f.dim}")
    W, den = omega.scaled
    lay = f.layout
    d = f.dim
    xs, ys = lay.var_shift[:d], lay.var_shift[d:]
    pairs = list(zip(W, xs, ys))

    def lam(k):
        return sum(w * (((k >> sx) & _MASK) - ((k >> sy) & _MASK)) for w, sx, sy in pairs)

    return lam, den


def _times_i_power(k: int, c, p: int):
    """Multiply the stored unit ``(k, c)`` by ``i**p``."""
    p %= 4
    if p == 0:
        return k, c
    if p == 2:
        return k, -c
    if k & 1:
        # i * i = -1
        return k - 1, (-c if p == 1 else c)
    return k + 1, (c if p == 1 else -c)


def eigenvalue(m: Monomial, omega: Frequencies | Sequence) -> Fraction:
    """``(omega, m - n)`` for a Birkhoff monomial; the Liouvillian eigenvalue is ``i`` times it."""
    omega = Frequencies.of(omega)
    d = omega.dim
    if len(m.exps) != 2 * d:
        raise ValueError("monomial dimension does not match the frequencies")
    return sum((w * (m.exps[j] - m.exps[d + j]) for j, w in enumerate(omega.omega)), Fraction(0))


def is_resonant(m: Monomial, omega: Frequencies | Sequence) -> bool:
    return eigenvalue(m, omega) == 0


def average(f: PolySeries, omega: Frequencies | Sequence) -> PolySeries:
    """Keep exactly the resonant (secular) terms."""
    lam, _ = _spectrum(f, Frequencies.of(omega))
    return f._like({k: v for k, v in f._raw.items() if lam(k) == 0})


def integrate(f: PolySeries, omega: Frequencies | Sequence, n: int = 1) -> PolySeries:
    """``S^n``: divide each non-resonant term by ``(i*(omega, m - n))**n``; drop resonant ones."""
    if n < 1:
        raise ValueError("power of the integrating operator must be >= 1")
    lam, den = _spectrum(f, Frequencies.of(omega))
    raw = {}
    for k, v in f._raw.items():
        l = lam(k)
        if l == 0:
            continue
        k2, c = _times_i_power(k, v * (mpq(den, l) ** n), -n)
        raw[k2] = raw.get(k2, _ZERO) + c
    return f._like({k: v for k, v in raw.items() if v})


def rz_apply(f: PolySeries, omega: Frequencies | Sequence, N: int) -> PolySeries:
    """Truncated resolvent surrogate ``R(z) = -P + sum_{n=1..N} z^n S^n``.

    Resonant monomials are negated; a non-resonant monomial with eigenvalue
    ``i*lam`` becomes ``sum_{n=1..N} (z/(i*lam))^n`` times itself.  The
    result carries ``z_cap = N`` and never stores powers of ``z`` above it.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lam, den = _spectrum(f, Frequencies.of(omega))
    lay = f.layout
    zs, zu = lay.z_shift, lay.z_unit
    raw: dict = {}
    get = raw.get
    for k, v in f._raw.items():
        l = lam(k)
        if l == 0:
            raw[k] = get(k, _ZERO) - v
            continue
        zk = k >> zs
        inv = mpq(den, l)
        c = v
        kk = k
        for n in range(1, N - zk + 1):
            c = c * inv
            kk += zu
            k2, c2 = _times_i_power(kk, c, -n)
            raw[k2] = get(k2, _ZERO) + c2
    return f._like({k: v for k, v in raw.items() if v}, z_cap=N)
