"""Formal integrals of the perturbed system.

Centre elements of the resonant algebra of ``H_0`` are carried back to the
perturbed system by the inverse Lie-Deprit transform (Gustavson integrals);
the Hori integral is the rescaled defect ``H - U_G^{-1} H_0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .algebra import PolySeries
from .normalize import GeneratorSeries, HamiltonianModel, TermCounter, henrard_inverse
from .operators import Frequencies, average

__all__ = [
    "IntegrityError",
    "CenterBasis",
    "center_generators",
    "center_elements",
    "gustavson_integral",
    "hori_integral",
]


class IntegrityError(ArithmeticError):
    """A series identity that must hold exactly was violated."""


@dataclass(frozen=True)
class CenterBasis:
    """Resonance vectors ``D_k`` and their orthogonal complement ``beta_m``."""

    resonance_vectors: tuple[tuple[int, ...], ...]
    betas: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.resonance_vectors)


def _nullspace(rows: Sequence[Sequence[Fraction]], d: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of ``{x : rows @ x = 0}``, one vector per free column."""
    A = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for c in range(d):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        lead = A[r][c]
        A[r] = [v / lead for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(d) if c not in pivots):
        x = [Fraction(0)] * d
        x[free] = Fraction(1)
        for row, pc in zip(A, pivots):
            x[pc] = -row[free]
        basis.append(_primitive(x))
    return basis


def _primitive(x: Sequence[Fraction]) -> tuple[int, ...]:
    den = 1
    for v in x:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in x]
    g = 0
    for v in ints:
        g = gcd(g, v)
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v)
    return tuple(-v for v in ints) if lead < 0 else tuple(ints)


def center_generators(omega: Frequencies | Sequence, dim: int | None = None) -> CenterBasis:
    """Resonance lattice of ``omega`` and the ``beta`` vectors orthogonal to it.

    Both bases come from exact elimination over the rationals, scaled to
    primitive integer vectors whose first nonzero entry is positive.
    """
    omega = Frequencies.of(omega)
    d = omega.dim if dim is None else dim
    if d != omega.dim:
        raise ValueError(f"dim {d} does not match {omega.dim} frequencies")
    D = _nullspace([omega.omega], d)
    betas = _nullspace(D, d) if D else [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
    return CenterBasis(tuple(D), tuple(betas))


def center_elements(basis: CenterBasis) -> list[PolySeries]:
    """``I~_m = sum_j beta_mj zeta_j eta_j`` in the Birkhoff frame."""
    out = []
    for beta in basis.betas:
        d = len(beta)
        acc = PolySeries.zero(d, "birkhoff")
        for j, b in enumerate(beta):
            if b:
                mono = [0] * (2 * d)
                mono[j] = mono[d + j] = 1
                acc = acc + PolySeries.monomial(tuple(mono), b, dim=d, kind="birkhoff")
        out.append(acc)
    return out


def gustavson_integral(G: GeneratorSeries, I_tilde: PolySeries, N: int, omega=None,
                       stats: TermCounter | None = None) -> PolySeries:
    """``U_G^{-1} I~`` to ``O(eps^{N+1})``.

    Parameters
    ----------
    G : GeneratorSeries
        Normalizing generator ``G_0 .. G_{N-1}``.
    I_tilde : PolySeries
        Secular seed, usually from :func:`center_elements`.
    N : int
        Truncation order.
    omega : Frequencies, optional
        Used to check that the seed is secular. Without it the check is
        skipped.
    """
    if omega is not None and average(I_tilde, omega) != I_tilde:
        raise ValueError("seed of a Gustavson integral must be secular")
    return henrard_inverse(G, I_tilde, N, stats)


def hori_integral(H: HamiltonianModel, G: GeneratorSeries, N: int, s: int | None = None,
                  inverse_image: PolySeries | None = None) -> PolySeries:
    """``eps^{-s} (H - U_G^{-1} H_0)`` truncated at ``eps^{N-s}``.

    ``inverse_image`` replaces ``U_G^{-1} H_0`` when the transform is
    available in another form (e.g. a direct transform by an inverse
    generator).  Raises :class:`IntegrityError` if an order below ``s``
    does not cancel.
    """
    s = H.hori_power if s is None else s
    if s < 0 or s > N:
        raise ValueError(f"leading power s={s} must lie in 0..{N}")
    img = henrard_inverse(G, H.h0(), N) if inverse_image is None else inverse_image
    diff = (H.full(N) - img.copy_with_caps(N)).copy_with_caps(N)
    for e, part in enumerate(diff.eps_slices()[:s]):
        if part:
            raise IntegrityError(f"H - U^-1 H0 has a nonzero eps^{e} part; wrong leading power s={s}?")
    return diff.times_eps(-s).copy_with_caps(N - s)
