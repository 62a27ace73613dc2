"""Normalizing Lie-Deprit transforms.

Conventions: the generator is ``G = sum_n eps^n G_n`` without factorials, the
direct transform obeys ``dU/deps = U L_G`` and ``L_G F = [F, G]``.  Every
algorithm works in the Birkhoff frame; :class:`HamiltonianModel` converts pq
input on construction.

Four algorithms live here:

* :func:`explicit_generator` builds ``G = S_H dH/deps`` from the truncated
  Neumann series of the resolvent, without any order-by-order solving.
* :func:`direct_transform` / :func:`direct_transform_fn` apply ``U_G`` with
  the summation-free triangle; :func:`henrard_inverse` applies ``U_G^{-1}``.
* :func:`deprit_classical` is the order-by-order Deprit triangle with a
  non-secular generator.
* :func:`henrard_normalize` normalizes with an inverse transform built order
  by order, also with a non-secular generator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

from gmpy2 import mpq

from .algebra import PolySeries, _MASK, coeff_of_z
from .canonical import from_birkhoff, poisson, to_birkhoff
from .operators import Frequencies, average, integrate, rz_apply

__all__ = [
    "HamiltonianModel",
    "GeneratorSeries",
    "TermCounter",
    "dH_deps",
    "explicit_generator",
    "direct_transform",
    "direct_transform_fn",
    "henrard_inverse",
    "deprit_classical",
    "henrard_normalize",
]


class TermCounter:
    """Records the largest stored term count seen by an algorithm."""

    def __init__(self):
        self.max_terms = 0

    def see(self, *series: PolySeries) -> None:
        for s in series:
            if s.stored_terms > self.max_terms:
                self.max_terms = s.stored_terms


def _see(stats, *series):
    if stats is not None:
        stats.see(*series)


@dataclass
class HamiltonianModel:
    """``H = H_0 + sum_{k>=1} eps^k H_k`` with harmonic ``H_0``.

    ``terms[k-1]`` is ``H_k`` in the Birkhoff frame, free of ``eps`` and
    ``z``.  ``H_0 = sum_k i*omega_k*zeta_k*eta_k`` is implicit.
    """

    omega: Frequencies
    terms: list[PolySeries]
    name: str = "custom"
    order: int | None = None
    hori_power: int = 1

    def __post_init__(self):
        self.omega = Frequencies.of(self.omega)
        d = self.omega.dim
        for k, h in enumerate(self.terms, start=1):
            if h.kind != "birkhoff":
                raise ValueError(f"H{k} must be in the Birkhoff frame; use from_pq")
            if h.dim != d:
                raise ValueError(f"H{k} has dim {h.dim}, frequencies have {d}")
            if not h.is_eps_free() or h.z_degree() > 0:
                raise ValueError(f"H{k} must not contain eps or z")

    @classmethod
    def from_pq(cls, omega, terms: Sequence[PolySeries], **kw) -> "HamiltonianModel":
        return cls(Frequencies.of(omega), [to_birkhoff(h) for h in terms], **kw)

    @property
    def dim(self) -> int:
        return self.omega.dim

    def h0(self) -> PolySeries:
        d = self.dim
        out = PolySeries.zero(d, "birkhoff")
        for j, w in enumerate(self.omega.omega):
            mono = [0] * (2 * d)
            mono[j] = mono[d + j] = 1
            out = out + PolySeries.monomial(tuple(mono), f"i*{w.numerator}/{w.denominator}",
                                            dim=d, kind="birkhoff")
        return out

    def H(self, k: int) -> PolySeries:
        """``H_k``; zero beyond the stored terms."""
        if k == 0:
            return self.h0()
        if 1 <= k <= len(self.terms):
            return self.terms[k - 1]
        return PolySeries.zero(self.dim, "birkhoff")

    def perturbation(self, top: int, eps_cap: int | None = None) -> PolySeries:
        """``V = sum_{k=1..top} eps^k H_k``."""
        cap = top if eps_cap is None else eps_cap
        out = PolySeries.zero(self.dim, "birkhoff", eps_cap=cap)
        for k in range(1, min(top, cap) + 1):
            out = out + self.H(k).times_eps(k)
        return out.copy_with_caps(cap)

    def full(self, N: int) -> PolySeries:
        """``H_0 + V`` truncated at ``eps^N``."""
        return (self.h0().copy_with_caps(N) + self.perturbation(N)).copy_with_caps(N)

    def terms_pq(self) -> list[PolySeries]:
        return [from_birkhoff(h) for h in self.terms]


@dataclass
class GeneratorSeries:
    """``G_0 .. G_{N-1}``, eps-free Birkhoff polynomials (no factorials)."""

    parts: list[PolySeries] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.parts)

    def __getitem__(self, n: int) -> PolySeries:
        return self.parts[n]

    def __iter__(self):
        return iter(self.parts)

    def as_series(self, eps_cap: int | None = None) -> PolySeries:
        """``sum_n eps^n G_n``."""
        if not self.parts:
            raise ValueError("empty generator")
        cap = len(self.parts) - 1 if eps_cap is None else eps_cap
        out = PolySeries.zero(self.parts[0].dim, self.parts[0].kind, eps_cap=cap)
        for n, g in enumerate(self.parts[: cap + 1]):
            out = out + g.times_eps(n).copy_with_caps(cap)
        return out

    def to_pq(self) -> list[PolySeries]:
        return [from_birkhoff(g) for g in self.parts]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeneratorSeries):
            return NotImplemented
        return len(self) == len(other) and all(a == b for a, b in zip(self.parts, other.parts))

    @classmethod
    def zero(cls, dim: int, n: int) -> "GeneratorSeries":
        return cls([PolySeries.zero(dim, "birkhoff") for _ in range(n)])


def dH_deps(H: HamiltonianModel, N: int | None = None) -> PolySeries:
    """``sum_{k>=1} k eps^{k-1} H_k`` truncated at ``eps^{N-1}``."""
    N = N if N is not None else (H.order or len(H.terms))
    if N < 1:
        raise ValueError("N must be >= 1")
    out = PolySeries.zero(H.dim, "birkhoff", eps_cap=N - 1)
    for k in range(1, N + 1):
        hk = H.H(k)
        if hk:
            out = out + hk.scale(k).times_eps(k - 1).copy_with_caps(N - 1)
    return out


def _prune(F: PolySeries, n: int, N: int) -> PolySeries:
    """Drop terms of ``F_n`` that cannot reach any extracted ``F_m[z^m]``, ``m >= n``.

    Every further step adds at least one power of eps and never lowers the
    power of z, so a term ``eps^e z^j`` survives only if
    ``e + max(j, n) - n <= N - 1``.
    """
    lay = F.layout
    es, zs = lay.eps_shift, lay.z_shift
    lim = N - 1 + n
    raw = {k: v for k, v in F._raw.items()
           if ((k >> es) & _MASK) + max(k >> zs, n) <= lim}
    return F._like(raw)


def explicit_generator(H: HamiltonianModel, N: int, stats: TermCounter | None = None) -> GeneratorSeries:
    """Generator ``G_0..G_{N-1}`` from ``G = S_H dH/deps``.

    Iterates ``F_1 = R dH/deps``, ``F_n = -R L_V F_{n-1}`` with the
    truncated resolvent ``R`` of :func:`rz_apply` and collects
    ``G = sum_{n=1..N} F_n[z^n]``.  Terms beyond ``eps^{N-1}`` or ``z^N``
    are never formed.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    omega = H.omega
    V = H.perturbation(N - 1, eps_cap=N - 1)
    F = _prune(rz_apply(dH_deps(H, N), omega, N), 1, N)
    G = coeff_of_z(F, 1)
    _see(stats, V, F)
    for n in range(2, N + 1):
        F = -rz_apply(poisson(F, V), omega, N)
        F = _prune(F, n, N)
        _see(stats, F)
        G = G + coeff_of_z(F, n)
    parts = G.copy_with_caps(N - 1).eps_slices()
    parts += [PolySeries.zero(H.dim, "birkhoff")] * (N - len(parts))
    return GeneratorSeries([p.copy_with_caps(127, 127) for p in parts])


def _check_generator(G: GeneratorSeries, N: int):
    if len(G) < N:
        raise ValueError(f"generator has {len(G)} orders, order {N} needs {N}")


def direct_transform_fn(G: GeneratorSeries, F: PolySeries, N: int,
                        stats: TermCounter | None = None) -> PolySeries:
    """``U_G F`` to ``O(eps^{N+1})`` for an eps-graded ``F``.

    Seeds ``f_k = eps^k * (F truncated at eps^{N-k})`` and runs
    ``f_k <- f_k + L_{G_{n-k}} f_{n+1} / (n+1)`` for ``n = N-1 .. 0``.
    """
    if N == 0:
        return F.copy_with_caps(0)
    _check_generator(G, N)
    f = [F.copy_with_caps(N - k).times_eps(k).copy_with_caps(N) for k in range(N + 1)]
    for n in range(N - 1, -1, -1):
        top = f[n + 1]
        w = mpq(1, n + 1)
        for k in range(n + 1):
            g = G[n - k]
            if g:
                f[k] = f[k] + poisson(top, g).scale(w)
        _see(stats, *f[: n + 1])
    return f[0]


def direct_transform(G: GeneratorSeries, target: HamiltonianModel, N: int,
                     stats: TermCounter | None = None) -> PolySeries:
    """Normalized Hamiltonian ``U_G H`` to ``O(eps^{N+1})``."""
    return direct_transform_fn(G, target.full(N), N, stats)


def henrard_inverse(G: GeneratorSeries, f0: PolySeries, N: int,
                    stats: TermCounter | None = None) -> PolySeries:
    """``U_G^{-1} f0`` to ``O(eps^{N+1})``.

    For eps-free ``f0`` iterates ``f_n = -(1/n) sum_{k<n} L_{G_{n-k-1}} f_k``;
    an eps-graded ``f0`` is handled slice by slice.
    """
    if f0.z_degree() > 0:
        raise ValueError("henrard_inverse expects a z-free function")
    slices = f0.copy_with_caps(N).eps_slices()
    out = PolySeries.zero(f0.dim, f0.kind, eps_cap=N)
    if not slices:
        return out
    for j, phi in enumerate(slices):
        if not phi:
            continue
        M = N - j
        _check_generator(G, M)
        ft = [phi.copy_with_caps(127)]
        for n in range(1, M + 1):
            acc = PolySeries.zero(f0.dim, f0.kind)
            for k in range(n):
                g = G[n - k - 1]
                if g and ft[k]:
                    acc = acc + poisson(ft[k], g)
            ft.append(acc.scale(mpq(-1, n)))
            _see(stats, acc)
        for n, t in enumerate(ft):
            if t:
                out = out + t.times_eps(n + j).copy_with_caps(N)
    return out.copy_with_caps(N)


def deprit_classical(H: HamiltonianModel, N: int,
                     stats: TermCounter | None = None) -> tuple[GeneratorSeries, PolySeries]:
    """Order-by-order Deprit normalization with ``P_{H0} G_n = 0``.

    Runs the triangle ``F^(i+1)_j = sum_{l<=j} L_{G_l} F^(i)_{j-l}
    + (j+1) F^(i)_{j+1}``, ``F^(0)_j = H_j``, whose apex gives
    ``H~_m = F^(m)_0 / m!``.  At order ``m`` the apex is first computed
    without ``G_{m-1}``; the homological equation then fixes
    ``G_{m-1} = m S K`` and the missing contribution
    ``[H_0, G_{m-1}] (m-1)!/(m-i)!`` is added along the new diagonal.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    omega = H.omega
    H0 = H.h0()
    F: dict[tuple[int, int], PolySeries] = {(0, j): H.H(j) for j in range(N + 1)}
    G: list[PolySeries] = []
    Ht = [H0]
    for m in range(1, N + 1):
        for i in range(1, m + 1):
            j = m - i
            acc = F[(i - 1, j + 1)].scale(j + 1)
            for l in range(j + 1):
                if l < len(G) and G[l]:
                    acc = acc + poisson(F[(i - 1, j - l)], G[l])
            F[(i, j)] = acc
        K = F[(m, 0)].scale(mpq(1, factorial(m)))
        g = integrate(K, omega, 1).scale(m)
        X = poisson(H0, g)
        for i in range(1, m + 1):
            F[(i, m - i)] = F[(i, m - i)] + X.scale(mpq(factorial(m - 1), factorial(m - i)))
        G.append(g)
        Ht.append(F[(m, 0)].scale(mpq(1, factorial(m))))
        _see(stats, K, g, *(F[(i, m - i)] for i in range(1, m + 1)))
    out = PolySeries.zero(H.dim, "birkhoff", eps_cap=N)
    for m, h in enumerate(Ht):
        out = out + h.times_eps(m).copy_with_caps(N)
    return GeneratorSeries(G), out


def henrard_normalize(H: HamiltonianModel, N: int,
                      stats: TermCounter | None = None) -> tuple[GeneratorSeries, PolySeries]:
    """Normalize with an inverse transform: ``H~ = U^{-1}_{Gt} H``.

    Builds the inverse generator ``Gt`` order by order with
    ``P_{H0} Gt_n = 0`` from the closed triangle
    ``b_{n,j} = U^{-1}_n H_j = -(1/n) sum_{k<n} L_{Gt_{n-k-1}} b_{k,j}``.
    The direct transform ``U_{Gt}`` then maps unperturbed centre elements to
    integrals of ``H``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    omega = H.omega
    H0 = H.h0()
    b: dict[tuple[int, int], PolySeries] = {(0, j): H.H(j) for j in range(N + 1)}
    Gt: list[PolySeries] = []
    Ht = [H0]
    for m in range(1, N + 1):
        K = b[(0, m)]
        for n in range(1, m + 1):
            j = m - n
            acc = PolySeries.zero(H.dim, "birkhoff")
            for k in range(n):
                idx = n - k - 1
                if idx < len(Gt) and Gt[idx] and b[(k, j)]:
                    acc = acc + poisson(b[(k, j)], Gt[idx])
            b[(n, j)] = acc.scale(mpq(-1, n))
            K = K + b[(n, j)]
        g = integrate(K, omega, 1).scale(-m)
        b[(m, 0)] = b[(m, 0)] + poisson(H0, g).scale(mpq(-1, m))
        Gt.append(g)
        Ht.append(average(K, omega))
        _see(stats, K, g)
    out = PolySeries.zero(H.dim, "birkhoff", eps_cap=N)
    for m, h in enumerate(Ht):
        out = out + h.times_eps(m).copy_with_caps(N)
    return GeneratorSeries(Gt), out
