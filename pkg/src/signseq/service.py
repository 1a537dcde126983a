"""HTTP surface over a trained model: restoration, marginals, rows, scoring.

Payload builders live here so the CLI's ``restore --json`` output and the
``/api/restore`` response are the same bytes.  The app itself is created
lazily so library users without a web stack never import FastAPI.

No ``from __future__ import annotations`` here: the request models are
local to ``create_app`` and FastAPI must see their real types.
"""

import json

import numpy as np

from .corpus import GAP
from .ngram import END, NgramModel
from .restore import coverage_prefix, gap_marginals, gap_positions, viterbi_restore

API_VERSION = 1
END_LABEL = "</s>"


class ApiError(Exception):
    """Service-level error with an HTTP status and machine-readable code."""

    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def encode_json(payload) -> bytes:
    """Stable compact JSON encoding shared by the CLI and the service."""
    return json.dumps(
        payload, ensure_ascii=False, allow_nan=False, separators=(",", ":")
    ).encode("utf-8")


def parse_text_tokens(items, vocabulary_size: int) -> tuple[int, ...]:
    """Convert a wire-format token list (ints and "?") into internal tokens."""
    if not isinstance(items, (list, tuple)) or not items:
        raise ApiError(422, "invalid_text", "text must be a non-empty list")
    tokens = []
    for item in items:
        if item == "?":
            tokens.append(GAP)
        elif isinstance(item, bool):
            raise ApiError(400, "malformed_sign", f"not a sign id: {item!r}")
        elif isinstance(item, int):
            if not 1 <= item <= vocabulary_size:
                raise ApiError(404, "unknown_sign", f"sign id {item} not in vocabulary")
            tokens.append(item)
        else:
            raise ApiError(400, "malformed_sign", f"not a sign id or '?': {item!r}")
    return tuple(tokens)


def restore_payload(model: NgramModel, tokens, top_k: int) -> dict:
    if top_k < 1:
        raise ApiError(422, "invalid_top_k", "top_k must be >= 1")
    if not gap_positions(tokens):
        raise ApiError(422, "invalid_text", "text contains no gaps")
    result = viterbi_restore(model, tokens, top_k)
    return {
        "method": result.method,
        "gap_positions": list(result.gap_positions),
        "assignments": [
            {
                "filling": list(a.filling),
                "log2_prob": a.log_prob,
                "probability": a.probability,
            }
            for a in result.assignments
        ],
    }


def marginals_payload(model: NgramModel, tokens, committed, *,
                      coverage: float = 0.90, top_k: int | None = None) -> dict:
    gaps = gap_positions(tokens)
    if not gaps:
        return {"coverage": coverage, "committed": {}, "gaps": []}
    committed = dict(committed or {})
    for position, sign in committed.items():
        if position not in gaps:
            raise ApiError(422, "invalid_commit", f"position {position} is not a gap")
        if not 1 <= sign <= model.vocabulary_size:
            raise ApiError(404, "unknown_sign", f"sign id {sign} not in vocabulary")

    marginals = gap_marginals(model, tokens, committed)
    payload_gaps = []
    for position in sorted(marginals):
        probs = marginals[position]
        prefix = coverage_prefix(probs, coverage)
        in_set = set(prefix)
        signs = np.arange(1, probs.size)
        order = np.lexsort((signs, -probs[1:]))
        if top_k is not None:
            order = order[:top_k]
        cumulative = 0.0
        candidates = []
        for index in order:
            sign = int(signs[index])
            prob = float(probs[sign])
            cumulative += prob
            candidates.append(
                {
                    "sign": sign,
                    "prob": prob,
                    "cum_prob": cumulative,
                    "in_coverage_set": sign in in_set,
                }
            )
        payload_gaps.append(
            {
                "position": position,
                "coverage_size": len(prefix),
                "candidates": candidates,
            }
        )
    return {
        "coverage": coverage,
        "committed": {str(pos): sign for pos, sign in sorted(committed.items())},
        "gaps": payload_gaps,
    }


def row_payload(model: NgramModel, context: int, top_k: int) -> dict:
    if not 1 <= context <= model.vocabulary_size:
        raise ApiError(404, "unknown_sign", f"sign id {context} not in vocabulary")
    if top_k < 1:
        raise ApiError(422, "invalid_top_k", "top_k must be >= 1")
    dist = model.distribution((context,))
    # ties order signs ascending with the end token after all signs
    keys = np.concatenate([[model.vocabulary_size + 1], np.arange(1, model.vocabulary_size + 1)])
    order = np.lexsort((keys, -dist))[:top_k]
    followers = [
        {"token": END_LABEL if int(i) == END else int(i), "prob": float(dist[i])}
        for i in order
    ]
    return {"context": context, "followers": followers}


def score_payload(model: NgramModel, tokens) -> dict:
    if gap_positions(tokens):
        raise ApiError(422, "invalid_text", "cannot score a text containing gaps")
    return {"tokens": list(tokens), "log2_prob": model.sequence_log_prob(tokens)}


def generate_payload(model: NgramModel, seed: int, max_len: int) -> dict:
    if max_len < 1:
        raise ApiError(422, "invalid_max_len", "max_len must be >= 1")
    tokens = model.generate(seed, max_len)
    return {"seed": seed, "max_len": max_len, "tokens": list(tokens)}


def meta_payload(model: NgramModel) -> dict:
    return {
        "api_version": API_VERSION,
        "vocabulary_size": model.vocabulary_size,
        "order": model.order,
        "smoothing": model.config.smoothing,
        "corpus_label": model.corpus_label,
    }


def create_app(model: NgramModel, static_dir=None):
    """Build the FastAPI app around one immutable model (reload = restart)."""
    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import Response
    from pydantic import BaseModel, Field

    class RestoreRequest(BaseModel):
        text: list[int | str]
        top_k: int = 10

    class MarginalsRequest(BaseModel):
        text: list[int | str]
        committed: dict[int, int] = Field(default_factory=dict)
        coverage: float = 0.90
        top_k: int | None = None

    class ScoreRequest(BaseModel):
        text: list[int | str]

    app = FastAPI(title="signseq service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def respond(payload) -> Response:
        return Response(content=encode_json(payload), media_type="application/json")

    def error_response(status: int, code: str, message: str) -> Response:
        return Response(
            content=encode_json({"error": {"code": code, "message": message}}),
            media_type="application/json",
            status_code=status,
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, exc: RequestValidationError):
        return error_response(400, "malformed_body", str(exc.errors()[:3]))

    @app.exception_handler(ValueError)
    async def handle_value_error(_request: Request, exc: ValueError):
        return error_response(422, "invalid_request", str(exc))

    @app.post("/api/restore")
    async def api_restore(request: RestoreRequest):
        tokens = parse_text_tokens(request.text, model.vocabulary_size)
        return respond(restore_payload(model, tokens, request.top_k))

    @app.post("/api/marginals")
    async def api_marginals(request: MarginalsRequest):
        tokens = parse_text_tokens(request.text, model.vocabulary_size)
        payload = marginals_payload(
            model, tokens, request.committed,
            coverage=request.coverage, top_k=request.top_k,
        )
        return respond(payload)

    @app.get("/api/row")
    async def api_row(context: int, top_k: int = 20):
        return respond(row_payload(model, context, top_k))

    @app.post("/api/score")
    async def api_score(request: ScoreRequest):
        tokens = parse_text_tokens(request.text, model.vocabulary_size)
        return respond(score_payload(model, tokens))

    @app.get("/api/generate")
    async def api_generate(seed: int, max_len: int = 14):
        return respond(generate_payload(model, seed, max_len))

    @app.get("/api/meta")
    async def api_meta():
        return respond(meta_payload(model))

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
