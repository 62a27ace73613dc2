from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from katodeprit import ExtScalar, HamiltonianModel, Monomial, PolySeries, parse_poly

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

small_q = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 6))


@st.composite
def ext_scalars(draw, allow_zero=True):
    parts = [draw(small_q) for _ in range(4)]
    c = ExtScalar(*parts)
    if not allow_zero and not c:
        c = ExtScalar(1)
    return c


@st.composite
def series(draw, dim=2, kind="pq", max_terms=4, max_deg=3, eps=0, z=0,
           coeff=None):
    """Random sparse polynomial with optional eps/z powers."""
    n = draw(st.integers(0, max_terms))
    terms = {}
    coeff = ext_scalars() if coeff is None else coeff
    for _ in range(n):
        exps = tuple(draw(st.integers(0, max_deg)) for _ in range(2 * dim))
        mono = Monomial(exps, draw(st.integers(0, eps)), draw(st.integers(0, z)))
        terms[mono] = draw(coeff)
    return PolySeries(dim, kind, terms)


rational_coeff = small_q.map(ExtScalar)


def mixed_d1_model() -> HamiltonianModel:
    """d = 1 model with nonzero H1..H4 and a secular part in H1."""
    texts = ["q1^3 + 2*q1*p1^2 - 1/2*p1^3 + q1^4 - q1*p1^3",
             "q1^4 - 3*q1^2*p1^2 + p1*q1^3 + q1^3",
             "1/3*q1^5 + p1^5 - q1*p1^4 + q1^2*p1^4",
             "q1^6 - 2*p1^6 + q1^3*p1^3"]
    return HamiltonianModel.from_pq([1], [parse_poly(t, 1) for t in texts], name="mixed")


def resonant_12_model() -> HamiltonianModel:
    """d = 2, omega = (1, 2) with first-order resonant coupling."""
    texts = ["q1^2*q2 + q1^4 + p2^2*q1^2 - q2^4 + p1*q1*p2*q2",
             "q1^4 - 3*q2^2*p1^2 + p1*q1^3 + q1^2*q2",
             "1/3*q1^5 + p1^5 - q1*p1^4",
             "q1^6 - 2*p1^6 + q1^3*p1^3"]
    return HamiltonianModel.from_pq([1, 2], [parse_poly(t, 2) for t in texts], name="res12")


@st.composite
def small_models(draw):
    dim = draw(st.sampled_from([1, 2]))
    omega = draw(st.sampled_from([(1,), (2,)] if dim == 1 else [(1, 1), (1, 2), (2, 3), (1, -1)]))
    terms = [draw(series(dim=dim, max_terms=3, max_deg=2, coeff=rational_coeff)) for _ in range(2)]
    return HamiltonianModel.from_pq(omega, terms)


@pytest.fixture
def mixed_model():
    return mixed_d1_model()


@pytest.fixture
def res12_model():
    return resonant_12_model()



ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
