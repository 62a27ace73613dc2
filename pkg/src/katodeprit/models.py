"""Built-in perturbed Hamiltonians (pendulum, Henon-Heiles, Toda lattice)."""
from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from .algebra import Monomial, PolySeries
from .normalize import HamiltonianModel

__all__ = ["pendulum", "henon_heiles", "toda2d", "BUILTIN", "builtin"]


def _q_monomial(dim: int, powers: dict[int, int]) -> Monomial:
    exps = [0] * (2 * dim)
    for j, e in powers.items():
        exps[j] = e
    return Monomial(tuple(exps))


def pendulum(N: int = 6) -> HamiltonianModel:
    """``p^2/2 + (1 - cos Q)`` after ``Q = sqrt(eps) q``, divided by ``eps``.

    ``H_k = (-1)^k q^(2k+2) / (2k+2)!`` for ``k = 1..N``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    terms = []
    for k in range(1, N + 1):
        c = Fraction((-1) ** k, factorial(2 * (k + 1)))
        terms.append(PolySeries(1, "pq", {_q_monomial(1, {0: 2 * (k + 1)}): c}))
    return HamiltonianModel.from_pq([1], terms, name="pendulum", order=N)


def henon_heiles() -> HamiltonianModel:
    """``(p1^2 + q1^2 + p2^2 + q2^2)/2 + eps (q1^2 q2 - q2^3/3)``."""
    h1 = PolySeries(2, "pq", {
        _q_monomial(2, {0: 2, 1: 1}): 1,
        _q_monomial(2, {1: 3}): Fraction(-1, 3),
    })
    return HamiltonianModel.from_pq([1, 1], [h1], name="henon_heiles", order=1)


def toda_term(k: int) -> PolySeries:
    """pq polynomial ``H_k`` of the scaled Toda lattice (degree ``k + 2``).

    The potential ``(e^{a1} + e^{a2} + e^{a3})/24`` has arguments
    ``a1,2 = 2 eps (q2 +- sqrt3 q1)`` and ``a3 = 2 eps (-2 q2)``.  The
    ``eps^n`` part of ``e^{a}`` is ``(2 u)^n / n!`` with ``u`` the linear form;
    the two conjugate forms are summed together so odd powers of ``sqrt3``
    cancel and every coefficient stays rational.
    """
    n = k + 2
    pref = Fraction(2 ** n, 24 * factorial(n))
    terms: dict[Monomial, Fraction] = {}
    # (q2 + s q1)^n + (q2 - s q1)^n = 2 sum_{j even} C(n,j) 3^{j/2} q1^j q2^{n-j}
    for j in range(0, n + 1, 2):
        c = pref * 2 * comb(n, j) * 3 ** (j // 2)
        m = _q_monomial(2, {0: j, 1: n - j})
        terms[m] = terms.get(m, 0) + c
    m = _q_monomial(2, {1: n})
    terms[m] = terms.get(m, 0) + pref * (-2) ** n
    return PolySeries(2, "pq", {m: c for m, c in terms.items() if c})


def toda2d(N: int = 4) -> HamiltonianModel:
    """Toda 2D lattice scaled by ``P = eps p``, ``Q = eps q`` and divided by ``eps^2``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return HamiltonianModel.from_pq([1, 1], [toda_term(k) for k in range(1, N + 1)],
                                    name="toda2d", order=N, hori_power=2)


BUILTIN = {
    "pendulum": pendulum,
    "henon_heiles": lambda N=1: henon_heiles(),
    "toda2d": toda2d,
}


def builtin(name: str, N: int) -> HamiltonianModel:
    try:
        make = BUILTIN[name.replace("-", "_").lower()]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(BUILTIN)}") from None
    return make(N)
