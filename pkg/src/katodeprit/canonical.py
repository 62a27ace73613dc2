"""Poisson brackets, Liouvillians and the complex Birkhoff change of variables."""
from __future__ import annotations

from dataclasses import dataclass

from .algebra import ExtScalar, PolySeries, _acc, _bracket_raw

__all__ = [
    "VarFrame",
    "poisson",
    "liouville_apply",
    "to_birkhoff",
    "from_birkhoff",
]


@dataclass(frozen=True)
class VarFrame:
    dim: int
    kind: str = "pq"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.kind not in ("pq", "birkhoff"):
            raise ValueError(f"unknown frame kind {self.kind!r}")

    @classmethod
    def of(cls, f: PolySeries) -> "VarFrame":
        return cls(f.dim, f.kind)


def poisson(f: PolySeries, g: PolySeries) -> PolySeries:
    """Poisson bracket ``[f, g] = sum_k df/dx_k dg/dy_k - df/dy_k dg/dx_k``.

    ``x`` is ``q`` (pq frame) or ``zeta`` (Birkhoff frame), ``y`` is ``p`` or
    ``eta``.  With this convention ``[zeta^m eta^n, i*w*zeta*eta]`` equals
    ``i*w*(m - n) * zeta^m eta^n``.
    """
    f._check(g)
    ec = min(f.eps_cap, g.eps_cap)
    zc = min(f.z_cap, g.z_cap)
    raw = _bracket_raw(f._raw, g._raw, f.layout, ec, zc)
    return f._like(raw, ec, zc)


def liouville_apply(gen: PolySeries, f: PolySeries) -> PolySeries:
    """``L_gen f = [f, gen]``."""
    return poisson(f, gen)


def _linear_images(dim: int, src_kind: str, dst_kind: str):
    half = ExtScalar(0, "1/2", 0, 0)  # 1/sqrt2 = sqrt2/2
    i = ExtScalar.i()
    imgs = []
    x, y = ("zeta", "eta") if dst_kind == "birkhoff" else ("q", "p")
    for var in range(2 * dim):
        j = var % dim + 1
        X = PolySeries.var(f"{x}{j}", dim, dst_kind)
        Y = PolySeries.var(f"{y}{j}", dim, dst_kind)
        if dst_kind == "birkhoff":
            # q = (zeta + i eta)/sqrt2,  p = (i zeta + eta)/sqrt2
            img = (X + Y.scale(i)) if var < dim else (X.scale(i) + Y)
        else:
            # zeta = (q - i p)/sqrt2,  eta = (p - i q)/sqrt2
            img = (X - Y.scale(i)) if var < dim else (Y - X.scale(i))
        imgs.append(img.scale(half))
    return imgs


def _substitute(f: PolySeries, images: list[PolySeries], dst_kind: str) -> PolySeries:
    dim = f.dim
    powers: list[list[PolySeries]] = [[PolySeries.constant(1, dim, dst_kind)] for _ in images]

    def power(var, e):
        cache = powers[var]
        while len(cache) <= e:
            cache.append(cache[-1] * images[var])
        return cache[e]

    acc: dict = {}
    for mono, c in f.terms().items():
        term = PolySeries.constant(c, dim, dst_kind)
        for var, e in enumerate(mono.exps):
            if e:
                term = term * power(var, e)
        if mono.eps_pow:
            term = term.times_eps(mono.eps_pow)
        if mono.z_pow:
            term = term.times_z(mono.z_pow)
        _acc(acc, term._raw, 1)
    return PolySeries._make(dim, dst_kind, acc, f.eps_cap, f.z_cap)


def to_birkhoff(f: PolySeries) -> PolySeries:
    """Substitute ``q = (zeta + i eta)/sqrt2``, ``p = i (zeta - i eta)/sqrt2``."""
    if f.kind != "pq":
        raise ValueError("to_birkhoff expects a pq-frame series")
    return _substitute(f, _linear_images(f.dim, "pq", "birkhoff"), "birkhoff")


def from_birkhoff(f: PolySeries) -> PolySeries:
    """Inverse substitution ``zeta = (q - i p)/sqrt2``, ``eta = (p - i q)/sqrt2``."""
    if f.kind != "birkhoff":
        raise ValueError("from_birkhoff expects a Birkhoff-frame series")
    return _substitute(f, _linear_images(f.dim, "birkhoff", "pq"), "pq")
