"""HTTP model server: JSON endpoints /tag, /fill, /edit, /ppl, /healthz.

Two modes, combinable:

  --stub             deterministic echo behavior on every endpoint; no
                     weights needed (this is what contract tests use)
  --editor-model P   serve a trained editor artifact on /edit

An endpoint whose backing model is absent (and no stub) answers 503;
malformed requests answer 400 with an {"error": ...} body.  Handlers
are stateless over immutable models, so concurrent requests are safe.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import List, Optional, Tuple

import uvicorn
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .seq2seq import Seq2SeqEditor, Vocab, beam_search, load_artifact

MASK = "[MASK]"

# stub filling prefers these, in order, skipping anything restricted
STUB_FILL_POOL = (
    "the", "good", "thing", "day", "time", "way", "people", "world", "nice", "very",
)


class TagRequest(BaseModel):
    tokens: List[str]


class TagResponse(BaseModel):
    tags: List[str]


class FillRequest(BaseModel):
    context: List[str]
    slots: List[str]
    restricted: List[str] = Field(default_factory=list)


class FillResponse(BaseModel):
    tokens: List[str]


class EditRequest(BaseModel):
    tokens: List[str]
    beam_size: int = Field(default=5, ge=1)
    max_len: int = Field(default=30, ge=1)


class EditResponse(BaseModel):
    tokens: List[str]


class PplRequest(BaseModel):
    tokens: List[str]


class PplResponse(BaseModel):
    ppl: float


def stub_tags(tokens: List[str]) -> List[str]:
    """Deterministic toy tagging: digits NUM, symbols PUNCT, else NOUN."""
    tags = []
    for tok in tokens:
        if any(c.isdigit() for c in tok):
            tags.append("NUM")
        elif not any(c.isalnum() for c in tok):
            tags.append("PUNCT")
        else:
            tags.append("NOUN")
    return tags


def stub_fill(slots: List[str], restricted: List[str]) -> List[str]:
    """Echo non-mask slots; every mask becomes the first allowed word."""
    banned = {r.casefold() for r in restricted}

    def pick() -> str:
        for word in STUB_FILL_POOL:
            if word not in banned:
                return word
        i = 0
        while f"w{i}" in banned:
            i += 1
        return f"w{i}"

    replacement: Optional[str] = None
    out = []
    for slot in slots:
        if slot == MASK:
            if replacement is None:
                replacement = pick()
            out.append(replacement)
        else:
            out.append(slot)
    return out


@dataclass
class ServerState:
    stub: bool = False
    editor: Optional[Tuple[Seq2SeqEditor, Vocab]] = None


def create_app(state: ServerState) -> FastAPI:
    app = FastAPI(title="modelserver", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request, exc):  # malformed JSON or fields
        return JSONResponse(status_code=400, content={"error": str(exc)})

    def unavailable(what: str) -> JSONResponse:
        return JSONResponse(status_code=503, content={"error": f"{what} model not loaded"})

    @app.post("/tag", response_model=TagResponse)
    async def tag(req: TagRequest):
        if not state.stub:
            return unavailable("tagger")
        return TagResponse(tags=stub_tags(req.tokens))

    @app.post("/fill", response_model=FillResponse)
    async def fill(req: FillRequest):
        if not state.stub:
            return unavailable("filler")
        return FillResponse(tokens=stub_fill(req.slots, req.restricted))

    @app.post("/ppl", response_model=PplResponse)
    async def ppl(req: PplRequest):
        if not state.stub:
            return unavailable("scorer")
        return PplResponse(ppl=float(1 + len(req.tokens)))

    @app.post("/edit", response_model=EditResponse)
    async def edit(req: EditRequest):
        if state.editor is not None:
            model, vocab = state.editor
            tokens = beam_search(
                model, vocab, req.tokens, beam_size=req.beam_size, max_len=req.max_len
            )
            return EditResponse(tokens=tokens)
        if state.stub:
            return EditResponse(tokens=req.tokens[: req.max_len])
        return unavailable("editor")

    @app.get("/healthz")
    async def healthz():
        return {
            "status": "ok",
            "stub": state.stub,
            "models": {
                "tagger": state.stub,
                "filler": state.stub,
                "scorer": state.stub,
                "editor": state.stub or state.editor is not None,
            },
        }

    return app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelserver",
        description="Serve /tag, /fill, /edit, /ppl, /healthz over JSON.",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--stub", action="store_true",
                        help="deterministic echo responses, no weights needed")
    parser.add_argument("--editor-model", help="trained editor artifact for /edit")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    state = ServerState(stub=args.stub)
    if args.editor_model:
        state.editor = load_artifact(args.editor_model)
    uvicorn.run(create_app(state), host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
