"""Kato expansion of the perturbed projector, integrating and nilpotent operators.

The eps^n coefficient of each perturbed operator is a signed sum of words
``Sr(p_{m+1}) L_{k_m} Sr(p_m) ... L_{k_1} Sr(p_1)`` with ``sum k = n`` and
``Sr(0) = -P``, ``Sr(p) = S^p``.  The sign of ``-P`` is folded into the word
sign when the word is generated, so a word only holds ``P``, ``S^p`` and
``L_k`` tokens.

This module is the slow, transparent route: words are enumerated directly
and applied one by one.  It serves as an oracle for the resolvent-based
generator in :mod:`katodeprit.normalize` and for the identities of the
perturbed operators.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .algebra import PolySeries
from .canonical import poisson
from .normalize import GeneratorSeries, HamiltonianModel, dH_deps
from .operators import average, integrate

__all__ = [
    "OperatorWord",
    "kato_words",
    "word_apply",
    "kato_apply",
    "generator_words",
    "generator_from_words",
    "kato_generator",
    "parse_word",
]

Token = tuple  # ("P", 0) | ("S", p) | ("L", k)


@dataclass(frozen=True)
class OperatorWord:
    """Signed product of operator tokens, written left to right."""

    sign: int
    tokens: tuple[Token, ...]

    def __str__(self) -> str:
        body = " ".join(_token_str(t) for t in self.tokens)
        return f"{'+' if self.sign > 0 else '-'} {body}"

    @property
    def lie_indices(self) -> tuple[int, ...]:
        return tuple(t[1] for t in self.tokens if t[0] == "L")

    def s_total(self) -> int:
        """Number of ``S`` factors (``P`` counts as zero)."""
        return sum(t[1] for t in self.tokens if t[0] == "S")


def _token_str(t: Token) -> str:
    kind, v = t
    if kind == "P":
        return "P"
    if kind == "S":
        return "S" if v == 1 else f"S^{v}"
    return f"L{v}"


def parse_word(text: str) -> OperatorWord:
    """Inverse of ``str(word)``: ``"+ S^2 L1 P"``."""
    parts = text.split()
    if not parts or parts[0] not in "+-":
        raise ValueError(f"word must start with a sign: {text!r}")
    toks = []
    for p in parts[1:]:
        if p == "P":
            toks.append(("P", 0))
        elif p == "S":
            toks.append(("S", 1))
        elif p.startswith("S^"):
            toks.append(("S", int(p[2:])))
        elif p.startswith("L") and p[1:].isdigit():
            toks.append(("L", int(p[1:])))
        else:
            raise ValueError(f"bad token {p!r}")
    return OperatorWord(1 if parts[0] == "+" else -1, tuple(toks))


def _compositions(total: int, parts: int, minimum: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` integers >= ``minimum`` summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def _sr(p: int) -> tuple[int, Token]:
    return (-1, ("P", 0)) if p == 0 else (1, ("S", p))


def _assemble(ps: tuple[int, ...], ks: tuple[int, ...]) -> tuple[int, tuple[Token, ...]]:
    # ps = (p_1..p_{m+1}), ks = (k_1..k_m); word reads Sr(p_{m+1}) L_{k_m} ... L_{k_1} Sr(p_1)
    sign = 1
    toks: list[Token] = []
    m = len(ks)
    for idx in range(m, -1, -1):
        s, tok = _sr(ps[idx])
        sign *= s
        toks.append(tok)
        if idx > 0:
            toks.append(("L", ks[idx - 1]))
    return sign, tuple(toks)


_S_OFFSET = {"P": 0, "S": 1, "D": -1}


def kato_words(kind: str, n: int) -> list[OperatorWord]:
    """Signed words of the ``eps^n`` coefficient of ``P_H``, ``S_H`` or ``D_H``.

    The ``m = 0`` summand is empty for ``n >= 1`` (no perturbation slots can
    carry a positive total), so orders ``n >= 1`` start at one Lie token.
    """
    kind = kind.upper()
    if kind not in _S_OFFSET:
        raise ValueError(f"kind must be P, S or D, got {kind!r}")
    if n < 0:
        raise ValueError("order must be non-negative")
    if n == 0:
        if kind == "D":
            raise ValueError("D_H has no eps^0 term; n must be >= 1")
        return [OperatorWord(1, (("P", 0),) if kind == "P" else (("S", 1),))]
    out = []
    off = _S_OFFSET[kind]
    for m in range(1, n + 1):
        base = (-1) ** m if kind == "S" else (-1) ** (m + 1)
        target = m + off
        for ks in _compositions(n, m, 1):
            for ps in _compositions(target, m + 1, 0):
                s, toks = _assemble(ps, ks)
                out.append(OperatorWord(base * s, toks))
    return out


@lru_cache(maxsize=None)
def _cached_words(kind: str, n: int) -> tuple[OperatorWord, ...]:
    return tuple(kato_words(kind, n))


def _apply_token(tok: Token, H: HamiltonianModel, f: PolySeries) -> PolySeries:
    kind, v = tok
    if kind == "P":
        return average(f, H.omega)
    if kind == "S":
        return integrate(f, H.omega, v)
    if v < 1 or v > len(H.terms):
        raise ValueError(f"L{v} needs H_{v}, model stores H_1..H_{len(H.terms)}")
    return poisson(f, H.terms[v - 1])


def word_apply(w: OperatorWord, H: HamiltonianModel, f: PolySeries) -> PolySeries:
    """Apply the tokens right to left, then multiply by the sign."""
    for tok in reversed(w.tokens):
        if not f:
            break
        f = _apply_token(tok, H, f)
    return f if w.sign > 0 else -f


class _SuffixCache:
    """Memoizes word suffixes applied to one fixed input."""

    def __init__(self, H: HamiltonianModel, f: PolySeries):
        self.H = H
        self.memo: dict[tuple, PolySeries] = {(): f}

    def apply(self, tokens: tuple) -> PolySeries:
        hit = self.memo.get(tokens)
        if hit is not None:
            return hit
        inner = self.apply(tokens[1:])
        out = _apply_token(tokens[0], self.H, inner) if inner else inner
        self.memo[tokens] = out
        return out


def _usable(w: OperatorWord, H: HamiltonianModel) -> bool:
    return all(1 <= k <= len(H.terms) for k in w.lie_indices)


def kato_apply(kind: str, H: HamiltonianModel, f: PolySeries, N: int) -> PolySeries:
    """``sum_{n<=N} eps^n (sum of kind's words) f`` truncated at ``eps^N``.

    ``f`` may be eps-graded; words through ``L_k`` with ``H_k`` absent from
    the model are zero and skipped.
    """
    kind = kind.upper()
    slices = f.copy_with_caps(N).eps_slices()
    out = PolySeries.zero(f.dim, f.kind, eps_cap=N)
    for j, fj in enumerate(slices):
        if not fj:
            continue
        cache = _SuffixCache(H, fj.copy_with_caps(127))
        for n in range(0 if kind != "D" else 1, N - j + 1):
            acc = PolySeries.zero(f.dim, f.kind)
            for w in _cached_words(kind, n):
                if not _usable(w, H):
                    continue
                r = cache.apply(w.tokens)
                if r:
                    acc = acc + r if w.sign > 0 else acc - r
            if acc:
                out = out + acc.times_eps(n + j).copy_with_caps(N)
    return out


def generator_words(n: int) -> list[tuple[int, OperatorWord, int]]:
    """Terms ``(k_0, word, k_0)`` of the combinatorial ``eps^n`` generator coefficient.

    Returns ``(weight, word, seed)``: the contribution is
    ``weight * word(H_seed)``, summed over ``m = 0..n``, ``sum p = m + 1``
    over ``m + 1`` slots and ``k_0 + .. + k_m = n + 1``.
    """
    out = []
    for m in range(0, n + 1):
        base = (-1) ** m
        for ks_full in _compositions(n + 1, m + 1, 1):
            k0, ks = ks_full[0], ks_full[1:]
            for ps in _compositions(m + 1, m + 1, 0):
                s, toks = _assemble(ps, ks)
                out.append((k0, OperatorWord(base * s, toks), k0))
    return out


def generator_from_words(H: HamiltonianModel, N: int) -> GeneratorSeries:
    """``G_0..G_{N-1}`` by direct evaluation of the combinatorial word sum.

    Exponential in ``N``; meant as an independent check at low order.
    """
    parts = []
    caches: dict[int, _SuffixCache] = {}
    for n in range(N):
        acc = PolySeries.zero(H.dim, "birkhoff")
        for weight, w, seed in generator_words(n):
            if seed > len(H.terms) or not _usable(w, H):
                continue
            cache = caches.setdefault(seed, _SuffixCache(H, H.terms[seed - 1]))
            r = cache.apply(w.tokens)
            if r:
                acc = acc + r.scale(weight * w.sign)
        parts.append(acc)
    return GeneratorSeries(parts)


def kato_generator(H: HamiltonianModel, N: int) -> GeneratorSeries:
    """``S_H dH/deps`` through the word expansion of ``S_H``, as ``G_0..G_{N-1}``."""
    g = kato_apply("S", H, dH_deps(H, N), N - 1)
    parts = g.eps_slices()
    parts += [PolySeries.zero(H.dim, "birkhoff")] * (N - len(parts))
    return GeneratorSeries([p.copy_with_caps(127, 127) for p in parts])
