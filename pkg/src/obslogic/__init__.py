"""Toolkit for an epistemic logic of expectations and observations.

Core pieces: star-free observation expressions with syntactic residuation,
epistemic expectation models with update by observation, a model checker, a
tableau satisfiability solver with witness extraction, a translation of the
word fragment into announcement logic, hardness-instance generators, and a
brute-force bounded-model oracle.  A FastAPI service wraps the package; the
command-line tool is a thin client of that service.
"""

__version__ = "0.1.0"

from .formula import (
    Formula,
    Vocab,
    classify_fragment,
    fl_closure,
    formula_to_text,
    infer_vocab,
    parse_formula,
    to_nnf,
)
from .model import (
    ExpectationModel,
    ModelError,
    PointedModel,
    model_to_text,
    parse_model,
    surviving,
    update,
    validate,
)
from .obsexpr import (
    Alphabet,
    ObsExpr,
    ParseError,
    Word,
    in_prefixes,
    is_empty,
    is_nullable,
    lang,
    obsexpr_to_text,
    parse_obsexpr,
    residual,
    sum_of_words,
)
from .oracle import SearchBounds, bounded_sat, naive_check
from .pal import enrich_model, pal_check, pal_to_text, pal_update, translate
from .reductions import (
    QbfInstance,
    TilingInstance,
    gen_qbf,
    gen_tiling,
    gen_vbot,
    qbf_eval,
    tiling_eval,
)
from .semantics import check, check_pointed_batch
from .tableau import SolveLimits, SolveResult, solve

__all__ = [
    "Alphabet",
    "ExpectationModel",
    "Formula",
    "ModelError",
    "ObsExpr",
    "ParseError",
    "PointedModel",
    "QbfInstance",
    "SearchBounds",
    "SolveLimits",
    "SolveResult",
    "TilingInstance",
    "Vocab",
    "Word",
    "bounded_sat",
    "check",
    "check_pointed_batch",
    "classify_fragment",
    "enrich_model",
    "fl_closure",
    "formula_to_text",
    "gen_qbf",
    "gen_tiling",
    "gen_vbot",
    "in_prefixes",
    "infer_vocab",
    "is_empty",
    "is_nullable",
    "lang",
    "model_to_text",
    "naive_check",
    "obsexpr_to_text",
    "pal_check",
    "pal_to_text",
    "pal_update",
    "parse_formula",
    "parse_model",
    "parse_obsexpr",
    "qbf_eval",
    "residual",
    "solve",
    "sum_of_words",
    "surviving",
    "tiling_eval",
    "to_nnf",
    "translate",
    "update",
    "validate",
]
