"""Line-oriented Hamiltonian files.

::

    # Henon-Heiles
    dim: 2
    omega: 1 1
    H1: 1 * q1^2*q2 + -1/3 * q2^3

``#`` starts a comment.  ``omega`` entries are exact rationals; each ``H<k>``
line is a polynomial in ``q1..qd``, ``p1..pd`` free of ``eps``.  Missing
orders between the given ones are zero.
"""
from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .algebra import ParseError, PolySeries, parse_poly
from .normalize import HamiltonianModel

__all__ = ["parse_model_text", "parse_model_file", "format_model"]

_KEY = re.compile(r"\s*(dim|omega|H(\d+))\s*:")
_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?$")


def _fail(msg: str, line: int, column: int, text: str) -> ParseError:
    return ParseError(msg, column, text, line)


def parse_model_text(text: str, name: str = "custom", hori_power: int = 1) -> HamiltonianModel:
    """Parse the file format from a string; errors carry 1-based line and column."""
    dim = None
    omega = None
    omega_at = None
    raw_terms: dict[int, tuple[str, int, int, str]] = {}
    for lineno, full in enumerate(text.splitlines(), start=1):
        body = full.split("#", 1)[0]
        if not body.strip():
            continue
        m = _KEY.match(body)
        if m is None:
            col = len(body) - len(body.lstrip()) + 1
            raise _fail("expected 'dim:', 'omega:' or 'H<k>:'", lineno, col, full)
        key, idx = m.group(1), m.group(2)
        rest = body[m.end():]
        start = m.end() + 1
        if key == "dim":
            if dim is not None:
                raise _fail("duplicate 'dim'", lineno, m.start(1) + 1, full)
            tok = rest.strip()
            if not tok.isdigit() or int(tok) < 1:
                raise _fail("dim must be a positive integer", lineno,
                            start + len(rest) - len(rest.lstrip()), full)
            dim = int(tok)
        elif key == "omega":
            if omega is not None:
                raise _fail("duplicate 'omega'", lineno, m.start(1) + 1, full)
            omega = []
            for tm in re.finditer(r"\S+", rest):
                if not _RATIONAL.match(tm.group()):
                    raise _fail(f"frequency {tm.group()!r} is not an exact rational",
                                lineno, start + tm.start(), full)
                try:
                    omega.append(Fraction(tm.group()))
                except ZeroDivisionError:
                    raise _fail("zero denominator", lineno, start + tm.start(), full) from None
            if not omega:
                raise _fail("empty frequency list", lineno, start, full)
            if not any(omega):
                raise _fail("frequency vector must have a nonzero entry", lineno, start, full)
            omega_at = lineno
        else:
            k = int(idx)
            if k < 1:
                raise _fail("perturbation orders start at H1", lineno, m.start(1) + 1, full)
            if k in raw_terms:
                raise _fail(f"duplicate H{k}", lineno, m.start(1) + 1, full)
            raw_terms[k] = (rest, lineno, start, full)
    if dim is None:
        raise _fail("missing 'dim:' line", max(1, len(text.splitlines())), 1, "")
    if omega is None:
        raise _fail("missing 'omega:' line", max(1, len(text.splitlines())), 1, "")
    if len(omega) != dim:
        raise _fail(f"omega has {len(omega)} entries but dim is {dim}", omega_at, 1, "")
    terms = []
    for k in range(1, max(raw_terms, default=0) + 1):
        if k not in raw_terms:
            terms.append(PolySeries.zero(dim, "pq"))
            continue
        expr, lineno, start, full = raw_terms[k]
        try:
            h = parse_poly(expr, dim, "pq")
        except ParseError as e:
            raise _fail(e.msg, lineno, start + e.column - 1, full) from None
        if not h.is_eps_free() or h.z_degree() > 0:
            raise _fail(f"H{k} must not contain eps or z", lineno, start, full)
        terms.append(h)
    return HamiltonianModel.from_pq(omega, terms, name=name, order=len(terms),
                                    hori_power=hori_power)


def parse_model_file(path, hori_power: int = 1) -> HamiltonianModel:
    """Read a model file; the model is named after the file stem."""
    p = Path(path)
    return parse_model_text(p.read_text(), name=p.stem, hori_power=hori_power)


def format_model(H: HamiltonianModel) -> str:
    """Render a model in the file format (pq frame); parses back to the same model."""
    lines = [f"dim: {H.dim}", "omega: " + " ".join(str(w) for w in H.omega.omega)]
    for k, h in enumerate(H.terms_pq(), start=1):
        if h:
            lines.append(f"H{k}: " + h.to_text())
    return "\n".join(lines) + "\n"
