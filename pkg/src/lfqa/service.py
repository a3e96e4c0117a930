"""HTTP JSON service over the engine.

Endpoints: POST /v1/query, /v1/retrieve, /v1/cgap and GET /v1/health.
Responses are serialized through one canonical JSON writer so identical
inputs yield byte-identical bodies.
"""

from __future__ import annotations

import json
import socket
from urllib.parse import urlparse

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .errors import LfqaError, ProviderError
from .pipeline import Engine

__all__ = ["create_app", "canonical_json"]


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _json_response(body: dict, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(body),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str) -> Response:
    return _json_response({"error": message}, status_code)


def _probe(url: str | None) -> dict:
    if url is None:
        return {"kind": "builtin", "url": None, "reachable": True}
    parsed = urlparse(url)
    host = parsed.hostname or ""
    port = parsed.port or (443 if parsed.scheme == "https" else 80)
    try:
        with socket.create_connection((host, port), timeout=1.0):
            reachable = True
    except OSError:
        reachable = False
    return {"kind": "http", "url": url, "reachable": reachable}


async def _body_json(request: Request) -> dict | None:
    try:
        body = await request.json()
    except Exception:
        return None
    return body if isinstance(body, dict) else None


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="lfqa", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.get("/v1/health")
    def health() -> Response:
        p = engine.cfg.providers
        return _json_response({
            "status": "ok",
            "passages": len(engine.passages),
            "providers": {
                "lm": _probe(p.lm_url),
                "embeddings": _probe(p.emb_url),
                "mrc": _probe(p.mrc_url),
                "mrc2": _probe(p.mrc2_url) if p.mrc2_url else None,
            },
        })

    @app.post("/v1/query")
    async def query(request: Request) -> Response:
        body = await _body_json(request)
        if body is None:
            return _error(400, "request body must be a JSON object")
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error(400, "field 'question' must be a non-empty string")
        mode = body.get("mode")
        if mode is not None and mode not in ("extractive", "abstractive", "cgap"):
            return _error(400, "field 'mode' must be extractive, abstractive or cgap")
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            return _error(400, "field 'seed' must be an integer")
        n = body.get("n")
        if n is not None and (not isinstance(n, int) or isinstance(n, bool) or n < 1):
            return _error(400, "field 'n' must be a positive integer")
        try:
            resp = engine.answer_question(question, mode=mode, seed=seed, n=n)
        except ProviderError as exc:
            return _error(502, f"provider failure: {exc}")
        except (LfqaError, ValueError) as exc:
            return _error(400, str(exc))
        return _json_response(resp.to_dict())

    @app.post("/v1/retrieve")
    async def retrieve(request: Request) -> Response:
        body = await _body_json(request)
        if body is None:
            return _error(400, "request body must be a JSON object")
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error(400, "field 'question' must be a non-empty string")
        n = body.get("n", engine.cfg.retrieval.n)
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            return _error(400, "field 'n' must be a positive integer")
        try:
            hits = engine.retrieve(question, n)
        except ProviderError as exc:
            return _error(502, f"provider failure: {exc}")
        return _json_response({
            "question": question,
            "hits": [
                {"ref": h.ref, "score": h.score, "method": h.method} for h in hits
            ],
        })

    @app.post("/v1/cgap")
    async def cgap_endpoint(request: Request) -> Response:
        body = await _body_json(request)
        if body is None:
            return _error(400, "request body must be a JSON object")
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error(400, "field 'question' must be a non-empty string")
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            return _error(400, "field 'seed' must be an integer")
        k = body.get("k")
        if k is not None and (not isinstance(k, int) or isinstance(k, bool) or k < 1):
            return _error(400, "field 'k' must be a positive integer")
        try:
            result = engine.cgap_answer(question, seed, k)
        except ProviderError as exc:
            return _error(502, f"provider failure: {exc}")
        return _json_response({
            "question": question,
            "seed": seed,
            "contexts": list(result.contexts),
            "raw_answers": list(result.raw_answers),
            "tally": [[key, count] for key, count in result.sorted_tally()],
            "final": result.final,
        })

    return app
