"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line; the lines are printed in the
pytest terminal summary and when this file is run as a script.
"""
import contextlib
import csv
import io
import time
from fractions import Fraction

import pytest

import test_canonical
import test_integrals
import test_kato
import test_normalize
import test_operators
from conftest import ACCEPTANCE_LINES, mixed_d1_model
from word_expansions import NORMALIZED, evaluate
from katodeprit import (average, deprit_classical, direct_transform, explicit_generator,
                        from_birkhoff, henrard_normalize, hori_integral, parse_poly, pendulum,
                        toda2d)
from katodeprit.cli import BENCH_HEADER, RunConfig, render, run


@contextlib.contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    notes = []
    try:
        yield notes
    except BaseException as exc:
        dt = time.perf_counter() - t0
        line = f"FAIL criterion {number}: {title} ({dt:.2f} s) {type(exc).__name__}: {exc}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    dt = time.perf_counter() - t0
    extra = f"; {'; '.join(notes)}" if notes else ""
    line = f"PASS criterion {number}: {title} ({dt:.2f} s{extra})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def within(limit, t0):
    elapsed = time.perf_counter() - t0
    assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"


def test_criterion_1_pendulum_golden_series():
    golden = [Fraction(-1, 64), Fraction(-1, 2048), Fraction(-5, 131072),
              Fraction(-33, 8388608), Fraction(-63, 134217728)]
    with criterion(1, "pendulum normalized coefficients of (p^2+q^2)^k, k=2..6, N=6, exact, < 5 s"):
        t0 = time.perf_counter()
        H = pendulum(6)
        Ht = from_birkhoff(direct_transform(explicit_generator(H, 6), H, 6))
        within(5, t0)
        for k, c in enumerate(golden, start=2):
            expect = parse_poly(f"(p1^2 + q1^2)^{k}", 1).scale(c)
            assert Ht.eps_coeff(k - 1) == expect, f"eps^{k - 1} block differs"


def test_criterion_2_pendulum_generator():
    with criterion(2, "pendulum generator G0, G1 in pq, N=2, exact, < 1 s"):
        t0 = time.perf_counter()
        G = explicit_generator(pendulum(2), 2).to_pq()
        within(1, t0)
        assert G[0] == parse_poly(test_normalize.PENDULUM_G0, 1)
        assert G[1] == parse_poly(test_normalize.PENDULUM_G1, 1)


def test_criterion_3_toda():
    with criterion(3, "Toda N=4 normalized eps^2, eps^4 Birkhoff blocks and Hori (s=2) eps^0, eps^1 pq blocks, exact, < 60 s"):
        t0 = time.perf_counter()
        H = toda2d(4)
        G = explicit_generator(H, 4)
        Ht = direct_transform(G, H, 4)
        I = from_birkhoff(hori_integral(H, G, 4, 2))
        within(60, t0)
        assert Ht.eps_coeff(2) == parse_poly(test_normalize.TODA_E2, 2, "birkhoff")
        assert Ht.eps_coeff(4) == parse_poly(test_normalize.TODA_E4, 2, "birkhoff")
        assert I.eps_coeff(0) == parse_poly(test_integrals.TODA_HORI_E0, 2)
        assert I.eps_coeff(1) == parse_poly(test_integrals.TODA_HORI_E1, 2)


def test_criterion_4_method_comparison():
    with criterion(4, "Toda N=8 explicit vs classical Deprit: equal through eps^7, differ at eps^8, both secular, < 30 min") as notes:
        t0 = time.perf_counter()
        H = toda2d(8)
        He = direct_transform(explicit_generator(H, 8), H, 8)
        _, Hd = deprit_classical(H, 8)
        within(30 * 60, t0)
        for n in range(8):
            assert He.eps_coeff(n) == Hd.eps_coeff(n), f"differ already at eps^{n}"
        assert He.eps_coeff(8) != Hd.eps_coeff(8)
        assert average(He, H.omega) == He
        assert average(Hd, H.omega) == Hd
        _, Hh = henrard_normalize(H, 8)
        notes.append("henrard equals explicit at all orders" if Hh == He
                     else "henrard differs from explicit")


def test_criterion_5_normalized_word_expansion():
    models = {"toda2d": toda2d(4), "pendulum": pendulum(4), "mixed d=1": mixed_d1_model()}
    with criterion(5, "classical Deprit H~ equals the four-order operator expansion through eps^4, exact") as notes:
        for name, H in models.items():
            assert all(H.H(k) for k in range(1, 5)), f"{name}: needs nonzero H1..H4"
            _, Hd = deprit_classical(H, 4)
            for n in range(1, 5):
                assert Hd.eps_coeff(n) == evaluate(H, NORMALIZED[n]), f"{name}: eps^{n}"
        notes.append("models " + ", ".join(models))


def _count(fn):
    """Run a hypothesis test and return how many examples it executed."""
    calls = [0]
    inner = fn.hypothesis.inner_test

    def counting(*args, **kwargs):
        calls[0] += 1
        return inner(*args, **kwargs)

    fn.hypothesis.inner_test = counting
    try:
        fn()
    finally:
        fn.hypothesis.inner_test = inner
    return calls[0]


PROPERTIES = {
    "Jacobi (pq)": test_canonical.test_jacobi,
    "Jacobi (Birkhoff)": test_canonical.test_jacobi_birkhoff,
    "Leibniz/antisymmetry": test_canonical.test_leibniz_and_antisymmetry,
    "P^2=P, SL=LS=1-P, SP=0": test_operators.test_projector_identities,
    "secular H~ (all methods)": test_normalize.test_every_normalized_hamiltonian_is_secular,
    "[I,H]=O(eps^5) HH and Toda": test_integrals.test_gustavson_integrals_commute_with_h,
    "S_H L_H = L_H S_H = 1-P_H": test_kato.test_integrating_operator_inverts_liouvillian,
    "L_H P_H = P_H L_H = D_H, P_H D_H = D_H P_H = D_H": test_kato.test_nilpotent_identities,
    "S_H P_H = 0, P_H^2 = P_H": test_kato.test_projector_annihilated_by_integrator,
    "intertwining N=2": test_kato.test_intertwining,
    "uniqueness P_H G = O(eps^4)": test_kato.test_uniqueness_condition_random_models,
    "Gustavson insensitivity N=4": test_integrals.test_insensitive_to_generator_choice,
}


def test_criterion_6_property_suite():
    with criterion("6 (properties)", "property suite, >= 200 random instances each, zero failures") as notes:
        for name, fn in PROPERTIES.items():
            n = _count(fn)
            assert n >= 200, f"{name}: only {n} instances"
            notes.append(f"{name}: {n}")
        H = toda2d(3)
        assert test_kato.kato_apply("P", H, H.full(3), 3) == H.full(3)


def test_criterion_6_bench_harness():
    with criterion("6 (bench)", "bench harness CSV for explicit, deprit, henrard on Henon-Heiles, orders 2..12"):
        cfg = RunConfig(model="henon_heiles", order=12, method="all", outputs=(), bench=True,
                        format="csv")
        text = render(run(cfg), "csv")
        rows = list(csv.DictReader(io.StringIO(text)))
        assert text.splitlines()[0] == ",".join(BENCH_HEADER)
        got = [(r["method"], int(r["order"])) for r in rows]
        assert got == [(m, n) for m in ("explicit", "deprit", "henrard") for n in range(2, 13)]
        for r in rows:
            assert r["model"] == "henon_heiles"
            assert float(r["seconds"]) >= 0
            assert int(r["max_terms"]) > 0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
