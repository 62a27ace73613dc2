import pytest

from katodeprit import ParseError, format_model, henon_heiles, parse_model_file, parse_model_text, toda2d

HH_FILE = """# Henon-Heiles
dim: 2
omega: 1 1      # 1:1 resonance
H1: 1 * q1^2*q2 + -1/3 * q2^3
"""


def test_minimal_pendulum_file(tmp_path):
    path = tmp_path / "pend.ham"
    path.write_text("dim: 1\nomega: 1\nH1: -1/24 * q1^4\n")
    H = parse_model_file(path)
    assert H.name == "pend"
    assert H.dim == 1 and len(H.terms) == 1


def test_henon_heiles_file():
    assert parse_model_text(HH_FILE).terms == henon_heiles().terms


def test_round_trip():
    H = toda2d(4)
    assert parse_model_text(format_model(H)).terms == H.terms


def test_gaps_are_zero():
    H = parse_model_text("dim: 1\nomega: 1/2\nH3: q1^5\n")
    assert [len(h) for h in H.terms_pq()] == [0, 0, 1]
    assert str(H.omega.omega[0]) == "1/2"


@pytest.mark.parametrize("text,line,column", [
    ("dim: 1\nomega: 1\nH1: 1/ * q1^4\n", 3, 5),
    ("dim: 1\nomega: 1.5\n", 2, 8),
    ("dim: 1\nomega: r2\n", 2, 8),
    ("dim: 2\nomega: 1\n", 2, 1),
    ("dim: 1\nomega: 1\nH1: eps*q1^3\n", 3, 4),
    ("dim: 1\n  fudge: 2\n", 2, 3),
    ("dim: 1\nomega: 0\n", 2, 7),
    ("dim: 1\nomega: 1\nH1: q1\nH1: p1\n", 4, 1),
    ("dim: 1\nomega: 1\nH1: q2^3\n", 3, 5),
    ("omega: 1\n", 1, 1),
])
def test_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_model_text(text)
    assert (info.value.line, info.value.column) == (line, column)
