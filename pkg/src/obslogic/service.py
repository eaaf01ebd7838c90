"""HTTP service exposing the solver, checker, translator and generators.

Formulas and models travel as text in their surface grammars; every endpoint
is a pure request/response wrapper over the core package, so the service can
be scaled out or embedded in-process (the CLI does the latter).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .formula import Vocab, formula_to_text, infer_vocab, parse_formula
from .model import ModelError, model_to_text, parse_model
from .obsexpr import Alphabet, ParseError
from .oracle import SearchBounds, SearchSpaceTooLarge, bounded_sat
from .pal import pal_to_text, translate, translation_words
from .reductions import gen_qbf, gen_tiling, gen_vbot, parse_qbf, parse_tiling
from .semantics import check
from .tableau import SolveLimits, solve


class VocabSpec(BaseModel):
    alphabet: list[str] | None = None
    agents: list[str] | None = None
    atoms: list[str] | None = None


class LimitsSpec(BaseModel):
    max_terms: int = Field(default=1_000_000, gt=0)
    max_branches: int = Field(default=100_000, gt=0)
    timeout_s: float = Field(default=60.0, gt=0)


class SolveStatsOut(BaseModel):
    branches: int
    terms: int
    max_depth: int
    elapsed_s: float


class SatRequest(BaseModel):
    formula: str
    vocab: VocabSpec | None = None
    limits: LimitsSpec = LimitsSpec()
    trace: bool = False
    verify: bool = True


class SatResponse(BaseModel):
    status: str  # SAT | UNSAT | INDETERMINATE
    model: str | None = None
    point: str | None = None
    reason: str | None = None
    stats: SolveStatsOut
    trace: list[str] | None = None


class CheckRequest(BaseModel):
    model: str
    state: str | None = None  # defaults to the model's point line
    formula: str


class CheckResponse(BaseModel):
    value: bool


class TranslateRequest(BaseModel):
    formula: str


class TranslateResponse(BaseModel):
    pal_formula: str
    announcement_atoms: list[str]


class GenQbfRequest(BaseModel):
    instance: str


class GenTilingRequest(BaseModel):
    instance: str


class GenVbotRequest(BaseModel):
    n: int = Field(gt=0)


class GenResponse(BaseModel):
    formula: str


class GenVbotResponse(BaseModel):
    fixtures: dict[str, str]


class OracleRequest(BaseModel):
    formula: str
    vocab: VocabSpec | None = None
    max_states: int = Field(default=2, gt=0)
    max_word_len: int = Field(default=2, ge=0)
    max_words: int = Field(default=2, gt=0)
    space_cap: int = Field(default=10_000_000, gt=0)


class OracleResponse(BaseModel):
    status: str  # SAT | NO-MODEL-WITHIN-BOUNDS
    model: str | None = None
    point: str | None = None
    models_tried: int


def _bad_request(exc: Exception) -> HTTPException:
    detail: dict[str, object] = {"message": str(exc)}
    if isinstance(exc, ParseError):
        detail["line"] = exc.line
        detail["column"] = exc.column
    return HTTPException(status_code=400, detail=detail)


def _resolve_vocab(formula_text: str, spec: VocabSpec | None):
    base = parse_formula(formula_text)
    inferred = infer_vocab(base)
    if spec is None:
        return parse_formula(formula_text), inferred
    alphabet = Alphabet(tuple(spec.alphabet)) if spec.alphabet else inferred.alphabet
    agents = tuple(spec.agents) if spec.agents is not None else inferred.agents
    atoms = tuple(spec.atoms) if spec.atoms is not None else inferred.atoms
    vocab = Vocab(alphabet=alphabet, agents=agents, atoms=atoms)
    return parse_formula(formula_text, vocab), vocab


def create_app() -> FastAPI:
    app = FastAPI(title="obslogic", version=__version__)

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "version": __version__}

    @app.post("/sat", response_model=SatResponse)
    def sat(request: SatRequest) -> SatResponse:
        try:
            phi, vocab = _resolve_vocab(request.formula, request.vocab)
        except (ParseError, ValueError) as exc:
            raise _bad_request(exc)
        limits = SolveLimits(
            max_terms=request.limits.max_terms,
            max_branches=request.limits.max_branches,
            timeout_s=request.limits.timeout_s,
        )
        result = solve(phi, vocab, limits, want_trace=request.trace, verify=request.verify)
        model_text = point = None
        if result.model is not None:
            model_text = model_to_text(result.model.model, result.model.point)
            point = result.model.point
        return SatResponse(
            status=result.status.upper(),
            model=model_text,
            point=point,
            reason=result.reason,
            stats=SolveStatsOut(
                branches=result.stats.branches,
                terms=result.stats.terms,
                max_depth=result.stats.max_depth,
                elapsed_s=result.stats.elapsed_s,
            ),
            trace=list(result.trace) if result.trace is not None else None,
        )

    @app.post("/check", response_model=CheckResponse)
    def check_endpoint(request: CheckRequest) -> CheckResponse:
        try:
            model, point = parse_model(request.model)
            state = request.state if request.state is not None else point
            if state is None:
                raise ModelError("no state given and the model has no point line")
            if state not in model.states:
                raise ModelError(f"unknown state {state!r}")
            vocab = Vocab(model.alphabet, model.agents, model.atoms)
            phi = parse_formula(request.formula, vocab)
        except (ParseError, ModelError, ValueError) as exc:
            raise _bad_request(exc)
        return CheckResponse(value=check(model, state, phi))

    @app.post("/translate-pal", response_model=TranslateResponse)
    def translate_endpoint(request: TranslateRequest) -> TranslateResponse:
        try:
            phi = parse_formula(request.formula)
            pal = translate(phi)
        except (ParseError, ValueError) as exc:
            raise _bad_request(exc)
        from .pal import occurrence_atom

        atoms = sorted(occurrence_atom(w) for w in translation_words(phi))
        return TranslateResponse(pal_formula=pal_to_text(pal), announcement_atoms=atoms)

    @app.post("/gen/qbf", response_model=GenResponse)
    def gen_qbf_endpoint(request: GenQbfRequest) -> GenResponse:
        try:
            formula = gen_qbf(parse_qbf(request.instance))
        except ValueError as exc:
            raise _bad_request(exc)
        return GenResponse(formula=formula_to_text(formula))

    @app.post("/gen/tiling", response_model=GenResponse)
    def gen_tiling_endpoint(request: GenTilingRequest) -> GenResponse:
        try:
            formula = gen_tiling(parse_tiling(request.instance))
        except ValueError as exc:
            raise _bad_request(exc)
        return GenResponse(formula=formula_to_text(formula))

    @app.post("/gen/vbot", response_model=GenVbotResponse)
    def gen_vbot_endpoint(request: GenVbotRequest) -> GenVbotResponse:
        try:
            fixtures = gen_vbot(request.n)
        except ValueError as exc:
            raise _bad_request(exc)
        return GenVbotResponse(
            fixtures={name: formula_to_text(phi) for name, phi in fixtures.items()}
        )

    @app.post("/oracle", response_model=OracleResponse)
    def oracle_endpoint(request: OracleRequest) -> OracleResponse:
        try:
            phi, vocab = _resolve_vocab(request.formula, request.vocab)
            bounds = SearchBounds(
                max_states=request.max_states,
                max_word_len=request.max_word_len,
                max_words=request.max_words,
                alphabet=vocab.alphabet,
                agents=vocab.agents,
                atoms=vocab.atoms,
            )
            result = bounded_sat(phi, bounds, space_cap=request.space_cap)
        except SearchSpaceTooLarge as exc:
            raise HTTPException(status_code=422, detail={"message": str(exc)})
        except (ParseError, ValueError) as exc:
            raise _bad_request(exc)
        model_text = point = None
        if result.witness is not None:
            model_text = model_to_text(result.witness.model, result.witness.point)
            point = result.witness.point
        return OracleResponse(
            status="SAT" if result.status == "sat" else "NO-MODEL-WITHIN-BOUNDS",
            model=model_text,
            point=point,
            models_tried=result.models_tried,
        )

    return app


app = create_app()
