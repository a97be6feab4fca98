"""HTTP annotation service consumed by the browser client.

All endpoints live under /api/v1. Reads are served from immutable
snapshots; label and lexicon writes funnel through a single lock each,
so concurrent clients cannot interleave partial updates. The store path
comes from the CAUSALREQ_STORE environment variable unless configured
explicitly.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .annotation import AssignmentError, AssignmentPlan
from .corpus import CausalLabelRecord, CorpusError, LabeledCorpus
from .lexicon import CueLexicon, LexiconError, default_lexicon
from .store import LabelStore

STORE_ENV_VAR = "CAUSALREQ_STORE"


@dataclass
class ServiceConfig:
    corpus: LabeledCorpus
    store_path: Optional[str] = None
    lexicon: Optional[CueLexicon] = None
    lexicon_path: Optional[str] = None
    annotators: Sequence[str] = ("a1", "a2")
    unique_per_annotator: int = 0
    overlap_per_pair: int = 0
    seed: int = 0
    randomize: bool = False


class LabelBody(BaseModel):
    sentence_id: str
    annotator: str
    causal: bool
    explicit: Optional[bool] = None
    marked: Optional[bool] = None
    single_sentence: Optional[bool] = None
    single_cause: Optional[bool] = None
    single_effect: Optional[bool] = None
    event_chain: Optional[bool] = None
    relationship: Optional[str] = None
    temporality: Optional[str] = None
    cue_phrases: list[str] = Field(default_factory=list)


class DeferBody(BaseModel):
    sentence_id: str
    annotator: str


class CueBody(BaseModel):
    phrase: str
    syntactic_type: str = "conjunction"
    relationship_class: Optional[str] = None


def create_app(config: ServiceConfig) -> FastAPI:
    store_path = config.store_path or os.environ.get(STORE_ENV_VAR)
    if not store_path:
        raise ValueError(
            f"no store path configured; set {STORE_ENV_VAR} or ServiceConfig.store_path"
        )
    store = LabelStore(store_path)
    state = {"lexicon": config.lexicon or default_lexicon()}
    lexicon_lock = threading.Lock()
    if config.unique_per_annotator or config.overlap_per_pair:
        plan = AssignmentPlan(
            config.corpus,
            config.annotators,
            unique_per_annotator=config.unique_per_annotator,
            overlap_per_pair=config.overlap_per_pair,
            seed=config.seed,
            randomize=config.randomize,
        )
    else:
        # default: everything assigned to everyone, document order
        plan = AssignmentPlan(
            config.corpus,
            config.annotators,
            unique_per_annotator=0,
            overlap_per_pair=0,
            seed=config.seed,
            randomize=config.randomize,
        )
        plan._assignment = {
            a: tuple(s.id for s in config.corpus.sentences) for a in config.annotators
        }

    app = FastAPI(title="causalreq annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.plan = plan

    def sentence_or_404(sentence_id: str):
        try:
            return config.corpus.sentence(sentence_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown sentence {sentence_id!r}")

    @app.get("/api/v1/tasks/next")
    def next_task(annotator: str = Query(...)):
        try:
            task = plan.next_task(
                annotator,
                store,
                known_cues=state["lexicon"].canonical_phrases(),
            )
        except AssignmentError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return task.to_dict()

    @app.post("/api/v1/tasks/defer")
    def defer(body: DeferBody):
        sentence_or_404(body.sentence_id)
        if body.annotator not in plan.annotators:
            raise HTTPException(status_code=404, detail=f"unknown annotator {body.annotator!r}")
        return store.defer(body.sentence_id, body.annotator)

    @app.post("/api/v1/labels")
    def submit_label(body: LabelBody):
        sentence_or_404(body.sentence_id)
        if body.annotator not in plan.annotators:
            raise HTTPException(status_code=404, detail=f"unknown annotator {body.annotator!r}")
        if body.sentence_id not in plan.assigned_to(body.annotator):
            raise HTTPException(
                status_code=409,
                detail=f"sentence {body.sentence_id!r} is not assigned to {body.annotator!r}",
            )
        try:
            record = CausalLabelRecord(
                sentence_id=body.sentence_id,
                annotator=body.annotator,
                causal=body.causal,
                explicit=body.explicit,
                marked=body.marked,
                single_sentence=body.single_sentence,
                single_cause=body.single_cause,
                single_effect=body.single_effect,
                event_chain=body.event_chain,
                relationship=body.relationship,
                temporality=body.temporality,
                cue_phrases=tuple(body.cue_phrases),
            )
        except CorpusError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return store.submit(record)

    @app.get("/api/v1/sentences/{sentence_id}/context")
    def context(sentence_id: str):
        sentence = sentence_or_404(sentence_id)
        predecessor, successor = config.corpus.neighbors(sentence_id)

        def sent(s):
            return None if s is None else {
                "id": s.id,
                "text": s.text,
                "document_id": s.document_id,
                "domain": s.domain,
                "position": s.position,
            }

        return {
            "sentence": sent(sentence),
            "predecessor": sent(predecessor),
            "successor": sent(successor),
        }

    @app.get("/api/v1/cues")
    def list_cues():
        lexicon = state["lexicon"]
        return {
            "phrases": [
                {
                    "phrase": e.phrase,
                    "canonical": e.canonical,
                    "syntactic_type": e.syntactic_type,
                    "relationship_class": e.relationship_class,
                }
                for e in lexicon.entries
            ]
        }

    @app.post("/api/v1/cues")
    def add_cue(body: CueBody):
        with lexicon_lock:
            try:
                updated, added = state["lexicon"].add(
                    body.phrase, body.syntactic_type, body.relationship_class
                )
            except LexiconError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            state["lexicon"] = updated
            if added and config.lexicon_path:
                with open(config.lexicon_path, "w", encoding="utf-8") as fh:
                    fh.write(updated.to_csv())
        return {"added": added, "phrases": len(state["lexicon"])}

    @app.get("/api/v1/progress")
    def progress(annotator: Optional[str] = None):
        table = plan.progress(store)
        if annotator is not None:
            if annotator not in table:
                raise HTTPException(status_code=404, detail=f"unknown annotator {annotator!r}")
            return {annotator: table[annotator]}
        return table

    @app.get("/api/v1/export")
    def export():
        return {"labels": store.export_labels()}

    return app
