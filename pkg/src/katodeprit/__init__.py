"""Exact normalization of perturbed polynomial Hamiltonians.

The normalizing Lie-Deprit generator is obtained in closed form from the
perturbation expansion of the integrating operator, ``G = S_H dH/deps``,
instead of order by order.  Classical Deprit and inverse-transform
normalizations are included as comparators, together with formal integrals
and built-in test models.
"""
from .algebra import ExtScalar, Monomial, ParseError, PolySeries, parse_poly
from .canonical import from_birkhoff, liouville_apply, poisson, to_birkhoff
from .integrals import (CenterBasis, IntegrityError, center_elements, center_generators,
                        gustavson_integral, hori_integral)
from .kato import OperatorWord, generator_from_words, kato_apply, kato_words, word_apply
from .modelfile import format_model, parse_model_file, parse_model_text
from .models import builtin, henon_heiles, pendulum, toda2d
from .normalize import (GeneratorSeries, HamiltonianModel, TermCounter, deprit_classical,
                        dH_deps, direct_transform, direct_transform_fn, explicit_generator,
                        henrard_inverse, henrard_normalize)
from .operators import Frequencies, average, integrate, is_resonant, rz_apply

__version__ = "0.1.0"

__all__ = [
    "ExtScalar", "Monomial", "ParseError", "PolySeries", "parse_poly",
    "from_birkhoff", "liouville_apply", "poisson", "to_birkhoff",
    "CenterBasis", "IntegrityError", "center_elements", "center_generators",
    "gustavson_integral", "hori_integral",
    "OperatorWord", "generator_from_words", "kato_apply", "kato_words", "word_apply",
    "format_model", "parse_model_file", "parse_model_text",
    "builtin", "henon_heiles", "pendulum", "toda2d",
    "GeneratorSeries", "HamiltonianModel", "TermCounter", "deprit_classical", "dH_deps",
    "direct_transform", "direct_transform_fn", "explicit_generator", "henrard_inverse",
    "henrard_normalize",
    "Frequencies", "average", "integrate", "is_resonant", "rz_apply",
]
