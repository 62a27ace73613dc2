from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mixed_d1_model, resonant_12_model
from word_expansions import HORI, evaluate
from katodeprit import (GeneratorSeries, HamiltonianModel, IntegrityError, PolySeries,
                        average, center_elements, center_generators, deprit_classical,
                        direct_transform_fn, explicit_generator, from_birkhoff, gustavson_integral,
                        henon_heiles, henrard_normalize, hori_integral, kato_apply, parse_poly,
                        pendulum, poisson, toda2d)

TODA_HORI_E0 = ("1/12*q2^4 + 1/6*p2^2*q2^2 + 1/12*p2^4 + 1/6*q1^2*q2^2 + 1/2*q1^2*p2^2"
                " + 1/12*q1^4 - 2/3*p1*q1*p2*q2 + 1/2*p1^2*q2^2 + 1/6*p1^2*p2^2"
                " + 1/6*p1^2*q1^2 + 1/12*p1^4")
TODA_HORI_E1 = ("-1/9*q2^5 - 1/9*p2^2*q2^3 + 2/9*q1^2*q2^3 + 5/3*q1^2*p2^2*q2 + 1/3*q1^4*q2"
                " - 2/3*p1*q1*p2*q2^2 + 4/3*p1*q1*p2^3 - 2/3*p1*q1^3*p2 - 7/9*p1^2*q2^3"
                " - 4/3*p1^2*p2^2*q2 + p1^2*q1^2*q2 - 4/9*p1^3*q1*p2 + 4/9*p1^4*q2")

N = 4
HH = henon_heiles()
TODA = toda2d(N)
GENERATORS = {
    "hh": (HH, explicit_generator(HH, N), deprit_classical(HH, N)[0]),
    "toda": (TODA, explicit_generator(TODA, N), deprit_classical(TODA, N)[0]),
}


def bracket(f, g, cap):
    return poisson(f, g).copy_with_caps(cap)


# centre ----------------------------------------------------------------------

@pytest.mark.parametrize("omega,D,beta", [
    ((1, 1), [(1, -1)], [(1, 1)]),
    ((2, 1), [(1, -2)], [(2, 1)]),
    ((1,), [], [(1,)]),
    ((Fraction(1, 2), Fraction(1, 3)), [(2, -3)], [(3, 2)]),
])
def test_center_examples(omega, D, beta):
    b = center_generators(omega)
    assert list(b.resonance_vectors) == D
    assert list(b.betas) == beta


def test_center_element_one_to_one():
    (I0,) = center_elements(center_generators((1, 1)))
    assert I0 == parse_poly("zeta1*eta1 + zeta2*eta2", 2, "birkhoff")


def test_zero_frequency_rejected():
    with pytest.raises(ValueError):
        center_generators((0, 0))


@settings(max_examples=200)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=5), min_size=1, max_size=4)
       .filter(any))
def test_center_basis_properties(omega):
    b = center_generators(omega)
    d = len(omega)
    assert b.rank + len(b.betas) == d
    for D in b.resonance_vectors:
        assert sum(w * k for w, k in zip(omega, D)) == 0
    for beta in b.betas:
        for D in b.resonance_vectors:
            assert sum(x * y for x, y in zip(beta, D)) == 0
    for v in b.resonance_vectors + b.betas:
        g = 0
        for x in v:
            g = gcd(g, x)
        assert g == 1
        assert next(x for x in v if x) > 0
    for I0 in center_elements(b):
        assert average(I0, omega) == I0


# Gustavson integrals ---------------------------------------------------------

def test_zero_generator_gives_seed():
    (I0,) = center_elements(center_generators(HH.omega))
    assert gustavson_integral(GeneratorSeries.zero(2, N), I0, N) == I0


def test_non_secular_seed_rejected():
    G = GENERATORS["hh"][1]
    with pytest.raises(ValueError):
        gustavson_integral(G, parse_poly("zeta1^2", 2, "birkhoff"), N, HH.omega)


@st.composite
def center_polys(draw):
    """Random polynomial in the 1:1 centre element, degree 1..3."""
    (c,) = center_elements(center_generators((1, 1)))
    out = PolySeries.zero(2, "birkhoff")
    power = c
    for _ in range(draw(st.integers(1, 3))):
        out = out + power.scale(draw(st.fractions(-3, 3, max_denominator=4)))
        power = power * c
    return out if out else c


@settings(max_examples=200)
@given(center_polys(), st.sampled_from(["hh", "toda"]))
def test_gustavson_integrals_commute_with_h(seed, name):
    H, G, _ = GENERATORS[name]
    I = gustavson_integral(G, seed, N, H.omega)
    assert bracket(I, H.full(N), N).is_zero()


@settings(max_examples=200)
@given(center_polys(), center_polys(), st.sampled_from(["hh", "toda"]))
def test_centre_integrals_commute(a, b, name):
    H, G, _ = GENERATORS[name]
    Ia = gustavson_integral(G, a, N)
    Ib = gustavson_integral(G, b, N)
    assert bracket(Ia, Ib, N).is_zero()
    hori = hori_integral(H, G, N)
    assert bracket(Ia, hori, N - H.hori_power).is_zero()


@settings(max_examples=200)
@given(center_polys(), st.sampled_from(["hh", "toda"]))
def test_insensitive_to_generator_choice(seed, name):
    H, Ge, Gd = GENERATORS[name]
    assert gustavson_integral(Ge, seed, N) == gustavson_integral(Gd, seed, N)


@pytest.mark.parametrize("name", ["hh", "toda"])
def test_henrard_integral_agrees(name):
    H, Ge, _ = GENERATORS[name]
    Gt, _ = henrard_normalize(H, N)
    for seed in center_elements(center_generators(H.omega)):
        assert direct_transform_fn(Gt, seed, N) == gustavson_integral(Ge, seed, N)


@pytest.mark.parametrize("name", ["hh", "toda"])
@pytest.mark.parametrize("n", [1, 2])
def test_integrals_fixed_by_perturbed_projector(name, n):
    H = GENERATORS[name][0]
    G = explicit_generator(H, n)
    for seed in center_elements(center_generators(H.omega)) + [H.h0()]:
        I = gustavson_integral(G, seed, n)
        assert kato_apply("P", H, I, n) == I


# Hori integral ---------------------------------------------------------------

def test_toda_hori_blocks():
    I = from_birkhoff(hori_integral(TODA, GENERATORS["toda"][1], N, 2))
    assert I.eps_coeff(0) == parse_poly(TODA_HORI_E0, 2)
    assert I.eps_coeff(1) == parse_poly(TODA_HORI_E1, 2)


@pytest.mark.parametrize("name", ["hh", "toda"])
def test_hori_commutes_with_h(name):
    H, G, _ = GENERATORS[name]
    I = hori_integral(H, G, N)
    assert bracket(I, H.full(N), N - H.hori_power).is_zero()


@pytest.mark.parametrize("model", [HH, toda2d(3)], ids=["hh", "toda"])
def test_generic_hori_expansion(model):
    I = hori_integral(model, explicit_generator(model, 3), 3, 1)
    for n in range(3):
        assert I.eps_coeff(n) == evaluate(model, HORI[n])


@pytest.mark.parametrize("model", [pendulum(3), mixed_d1_model(), resonant_12_model()],
                         ids=["pendulum", "mixed", "res12"])
def test_generic_hori_expansion_with_missing_term(model):
    # the short eps^2 bracket lacks -P L1 S H2, which vanishes for odd-degree H1
    I = hori_integral(model, explicit_generator(model, 3), 3, 1)
    assert I.eps_coeff(0) == evaluate(model, HORI[0])
    assert I.eps_coeff(1) == evaluate(model, HORI[1])
    missing = evaluate(model, [(-1, "P L1 S", 2)])
    assert not missing.is_zero()
    assert I.eps_coeff(2) == evaluate(model, HORI[2]) + missing
    assert bracket(I, model.full(3), 2).is_zero()


def test_hori_leading_power_checks():
    G = GENERATORS["toda"][1]
    with pytest.raises(IntegrityError):
        hori_integral(TODA, G, N, 3)
    with pytest.raises(ValueError):
        hori_integral(TODA, G, N, 5)
    free = HamiltonianModel(HH.omega, [])
    assert hori_integral(free, GeneratorSeries.zero(2, 2), 2, 1).is_zero()
