"""FastAPI application exposing the learn / query / evaluate workflow.

Loaded models and lexicons are cached per file path and invalidated when
the file's size or mtime changes, so repeated queries against the same
model skip the load.  All engine errors map to HTTP 400 with a detail
message; request validation errors surface as FastAPI's usual 422.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..archive_io import (
    LoadedModel,
    corpus_stats,
    load_archive,
    load_lexicons,
    load_model,
    save_model,
)
from ..errors import EngineError
from ..evaluation import evaluate_retrieval, format_report_table
from ..learn import learn
from ..lexicon import FunctionWord
from ..pattern import encode_sentence
from ..retrieve import cover_input
from . import schemas


def _stat_signature(path: str):
    st = os.stat(path)
    return (st.st_size, st.st_mtime_ns)


class _Registry:
    """Path-keyed caches for lexicon pairs and loaded models."""

    def __init__(self):
        self._lexicons = {}
        self._models = {}

    def lexicons(self, fw_path: str, tag_path: str):
        key = (fw_path, tag_path)
        sig = (_stat_signature(fw_path), _stat_signature(tag_path))
        hit = self._lexicons.get(key)
        if hit is None or hit[0] != sig:
            hit = (sig, load_lexicons(fw_path, tag_path))
            self._lexicons[key] = hit
        return hit[1]

    def model(self, model_path: str, fw_path: str | None, tag_path: str | None) -> LoadedModel:
        key = (model_path, fw_path, tag_path)
        sig = _stat_signature(model_path)
        hit = self._models.get(key)
        if hit is None or hit[0] != sig:
            hit = (sig, load_model(model_path, fw_path, tag_path))
            self._models[key] = hit
        return hit[1]


def _pattern_view(pattern) -> schemas.PatternView:
    tokens = []
    for tok in pattern.tokens:
        if isinstance(tok, FunctionWord):
            tokens.append(
                schemas.TokenView(
                    surface=tok.surface,
                    kind="function_word",
                    fw_id=tok.fw_id,
                    groups=sorted(tok.groups),
                )
            )
        else:
            tokens.append(
                schemas.TokenView(
                    surface=tok.surface,
                    kind="content_word",
                    ambiguity_class=sorted(tok.ambiguity_class),
                    lemmas=sorted(tok.lemmas),
                )
            )
    slots = [
        schemas.FwSlotView(index=s.index, fw_id=s.fw_id, groups=sorted(s.groups))
        for s in pattern.fw_slots
    ]
    return schemas.PatternView(
        tokens=tokens, fw_slots=slots, blocks=[list(b) for b in pattern.blocks]
    )


def create_app() -> FastAPI:
    app = FastAPI(title="ebmatch", version=__version__)
    registry = _Registry()

    @app.exception_handler(EngineError)
    async def engine_error(request: Request, exc: EngineError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=400, content={"detail": f"file not found: {exc}"})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/encode", response_model=schemas.PatternView)
    def encode(req: schemas.EncodeRequest):
        """Debug view of a sentence's pattern."""
        fwlex, taglex = registry.lexicons(req.fw_path, req.tag_path)
        return _pattern_view(encode_sentence(req.text, fwlex, taglex))

    @app.post("/learn", response_model=schemas.LearnResponse)
    def learn_endpoint(req: schemas.LearnRequest):
        """Build a model from an archive and save it to ``out_path``."""
        fwlex, taglex = registry.lexicons(req.fw_path, req.tag_path)
        entries = load_archive(req.archive_path, fwlex, taglex)
        model = learn(
            entries, fwlex, taglex,
            weights=req.weights.to_weights(),
            config=req.learn.to_config(),
        )
        save_model(model, req.out_path, req.fw_path, req.tag_path)
        return schemas.LearnResponse(
            model_path=req.out_path,
            clusters=len(model.clusters),
            entries=model.entry_count,
            outer_iterations=model.stats.outer_iterations,
            entry_counts=model.stats.entry_counts,
            segments_created=model.stats.segments_created,
        )

    @app.post("/query", response_model=schemas.QueryResponse)
    def query(req: schemas.QueryRequest):
        """Cover each sentence with translation proposals from the archive."""
        loaded = registry.model(req.model_path, req.fw_path, req.tag_path)
        config = req.query.to_config()
        results = []
        for index, text in enumerate(req.sentences):
            proposals, summary = cover_input(
                loaded.model, text, loaded.fwlex, loaded.taglex, config
            )
            results.append(
                schemas.SentenceResult(
                    sentence_index=index,
                    proposals=[
                        schemas.ProposalView(**p.to_dict()) for p in proposals
                    ],
                    summary=schemas.CoverSummaryView(**summary.to_dict()),
                )
            )
        return schemas.QueryResponse(results=results)

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest):
        """MISSED / MISSED-BY accounting of pruned search on a test set."""
        loaded = registry.model(req.model_path, req.fw_path, req.tag_path)
        report = evaluate_retrieval(
            loaded.model, req.sentences, loaded.fwlex, loaded.taglex,
            req.query.to_config(),
        )
        label = f"{len(loaded.model.clusters)} clusters (c={report.clusters_searched})"
        payload = report.to_dict()
        payload["table"] = format_report_table([(label, report)])
        return schemas.EvaluateResponse(**payload)

    @app.post("/stats", response_model=schemas.StatsResponse)
    def stats(req: schemas.StatsRequest):
        """Corpus statistics of an archive or a learned model."""
        if req.model_path is not None:
            loaded = registry.model(req.model_path, req.fw_path, req.tag_path)
            result = corpus_stats(loaded.model.entries.values(), loaded.model)
        else:
            fwlex, taglex = registry.lexicons(req.fw_path, req.tag_path)
            entries = load_archive(req.archive_path, fwlex, taglex)
            result = corpus_stats(entries)
        return schemas.StatsResponse(**result.to_dict())

    return app
