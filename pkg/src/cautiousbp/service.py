"""Session-oriented HTTP API over the engines.

A session holds one propagated cautious state on the clean tree and, once a
hypothesis is set, a second one on the hypothesis-conditioned tree; both
always carry the same findings.  Mutating endpoints rebuild and repropagate
both states before answering (a real propagation, and the response says so),
while what-if answers come from the stored tables alone and the response
carries the message-count delta as proof.

Sessions live in memory and are evicted after an idle timeout.  Requests to
one session are serialized; distinct sessions are independent.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import analysis
from .cautious import CautiousState
from .errors import CautiousBPError, ImpossibleHypothesisError, ModelError
from .hugin import condition_on_hypothesis
from .jointree import JunctionTree, compile_network
from .model import (
    BayesianNetwork,
    Finding,
    Hypothesis,
    finding_from_document,
    network_from_document,
)

DEFAULT_IDLE_TIMEOUT = 3600.0


class CreateSessionRequest(BaseModel):
    model: str | None = None
    network: dict | None = None
    thresholds: list[float] | None = None


class AddFindingRequest(BaseModel):
    id: str
    variable: str
    state: str | None = None
    likelihood: list[float] | None = None


class HypothesisRequest(BaseModel):
    assignments: dict[str, str]
    thresholds: list[float] | None = None


class WhatIfRequest(BaseModel):
    finding_id: str
    state: str | None = None
    likelihood: list[float] | None = None


@dataclass
class Session:
    id: str
    model_name: str
    network: BayesianNetwork
    tree: JunctionTree
    clean: CautiousState
    findings: dict[str, Finding] = field(default_factory=dict)
    hypothesis: Hypothesis | None = None
    conditioned_tree: JunctionTree | None = None
    conditioned: CautiousState | None = None
    p_h: float | None = None
    thresholds: analysis.SensitivityThresholds = field(
        default_factory=analysis.SensitivityThresholds
    )
    revision: int = 0
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _propagated(tree: JunctionTree, findings) -> CautiousState:
    state = CautiousState(tree, findings)
    state.propagate()
    return state


class SessionStore:
    def __init__(self, idle_timeout: float = DEFAULT_IDLE_TIMEOUT):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.idle_timeout = idle_timeout

    def purge(self) -> None:
        now = time.monotonic()
        with self._lock:
            stale = [
                sid
                for sid, s in self._sessions.items()
                if now - s.last_access > self.idle_timeout
            ]
            for sid in stale:
                del self._sessions[sid]

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        self.purge()
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        session.last_access = time.monotonic()
        return session

    def drop(self, session_id: str) -> None:
        with self._lock:
            self._sessions.pop(session_id, None)


def _view(session: Session) -> dict[str, Any]:
    """The coherent snapshot every response is based on: one revision,
    numbers straight from the library."""
    state = session.clean
    p_e = state.evidence_mass
    marginals = {
        name: {
            "states": list(states),
            "probabilities": state.marginal(name).tolist(),
        }
        for name, states in session.tree.state_labels.items()
    } if p_e else {}
    conflict_doc = None
    if session.findings and p_e:
        conflict_doc = analysis.conflict(state).to_document()
    hypothesis_doc = None
    if session.hypothesis is not None:
        hypothesis_doc = {
            "assignments": session.hypothesis.as_dict(),
            "p_h": session.p_h,
            "p_h_given_e": analysis.posterior_given_subset(
                session.clean, session.conditioned, session.p_h, state.finding_ids
            )
            if p_e
            else None,
        }
    return {
        "session_id": session.id,
        "revision": session.revision,
        "model": session.model_name,
        "variables": [
            {"name": name, "states": list(states)}
            for name, states in session.tree.state_labels.items()
        ],
        "p_e": p_e,
        "marginals": marginals,
        "findings": [
            {"id": f.id, "variable": f.variable, "likelihood": list(f.likelihood)}
            for f in session.findings.values()
        ],
        "conflict": conflict_doc,
        "hypothesis": hypothesis_doc,
        "thresholds": list(session.thresholds.as_tuple()),
    }


def _rebuild(session: Session, findings: dict[str, Finding]) -> None:
    """Replace the finding set and repropagate both states atomically."""
    clean = _propagated(session.tree, findings.values())
    conditioned = (
        _propagated(session.conditioned_tree, findings.values())
        if session.conditioned_tree is not None
        else None
    )
    if clean.evidence_mass == 0.0:
        raise HTTPException(status_code=409, detail="evidence has zero probability")
    session.findings = dict(findings)
    session.clean = clean
    session.conditioned = conditioned
    session.revision += 1


def create_app(
    model_dir: str | None = None,
    models: dict[str, BayesianNetwork] | None = None,
    ui_dir: str | None = None,
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
) -> FastAPI:
    app = FastAPI(title="cautiousbp session service")
    store = SessionStore(idle_timeout)
    registry: dict[str, BayesianNetwork] = dict(models or {})
    if model_dir:
        for path in sorted(Path(model_dir).glob("*.json")):
            try:
                registry[path.stem] = network_from_document(
                    json.loads(path.read_text(encoding="utf-8"))
                )
            except (ModelError, json.JSONDecodeError) as exc:
                raise ModelError(f"bad model file {path}: {exc}") from exc
    app.state.store = store
    app.state.models = registry

    @app.exception_handler(CautiousBPError)
    async def _library_error(request, exc: CautiousBPError):  # noqa: ANN001
        from fastapi.responses import JSONResponse

        status = 400 if isinstance(exc, ModelError) else 409
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/models")
    def list_models() -> dict:
        return {"models": sorted(registry)}

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest) -> dict:
        store.purge()
        if body.network is not None:
            network = network_from_document(body.network)
            name = body.model or "inline"
        elif body.model is not None:
            network = registry.get(body.model)
            if network is None:
                raise HTTPException(status_code=404, detail=f"no model {body.model!r}")
            name = body.model
        else:
            raise HTTPException(status_code=400, detail="need a model name or inline network")
        tree = compile_network(network)
        session = Session(
            id=uuid.uuid4().hex,
            model_name=name,
            network=network,
            tree=tree,
            clean=_propagated(tree, ()),
        )
        if body.thresholds:
            session.thresholds = analysis.SensitivityThresholds(*body.thresholds)
        store.add(session)
        return _view(session)

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str) -> dict:
        store.get(session_id)
        store.drop(session_id)
        return {"closed": session_id}

    @app.post("/sessions/{session_id}/findings")
    def add_finding(session_id: str, body: AddFindingRequest) -> dict:
        session = store.get(session_id)
        with session.lock:
            finding = finding_from_document(
                body.model_dump(exclude_none=True), session.tree.state_labels
            )
            if finding.id in session.findings:
                raise HTTPException(
                    status_code=400, detail=f"finding id {finding.id!r} already entered"
                )
            updated = dict(session.findings)
            updated[finding.id] = finding
            _rebuild(session, updated)
            view = _view(session)
        view["repropagated"] = True
        return view

    @app.delete("/sessions/{session_id}/findings/{finding_id}")
    def retract_finding(session_id: str, finding_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            if finding_id not in session.findings:
                raise HTTPException(status_code=404, detail=f"no finding {finding_id!r}")
            updated = dict(session.findings)
            del updated[finding_id]
            _rebuild(session, updated)
            view = _view(session)
        view["repropagated"] = True
        return view

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            return _view(session)

    @app.get("/sessions/{session_id}/marginals")
    def get_marginals(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            view = _view(session)
        return {
            "revision": view["revision"],
            "p_e": view["p_e"],
            "marginals": view["marginals"],
        }

    @app.get("/sessions/{session_id}/conflict")
    def get_conflict(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            report = analysis.conflict(session.clean)
            return {"revision": session.revision, **report.to_document()}

    @app.get("/sessions/{session_id}/subsets")
    def get_subsets(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            return {
                "revision": session.revision,
                "subsets": [
                    {
                        "findings": sorted(s.ids),
                        "probability": session.clean.subset_probability(s.ids),
                    }
                    for s in session.clean.accessible_subsets()
                ],
            }

    @app.put("/sessions/{session_id}/hypothesis")
    def set_hypothesis(session_id: str, body: HypothesisRequest) -> dict:
        session = store.get(session_id)
        with session.lock:
            hypothesis = Hypothesis.of(body.assignments)
            try:
                conditioned_tree, p_h = condition_on_hypothesis(session.tree, hypothesis)
            except ImpossibleHypothesisError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            session.hypothesis = hypothesis
            session.conditioned_tree = conditioned_tree
            session.conditioned = _propagated(conditioned_tree, session.findings.values())
            session.p_h = p_h
            if body.thresholds:
                session.thresholds = analysis.SensitivityThresholds(*body.thresholds)
            session.revision += 1
            return _view(session)

    @app.delete("/sessions/{session_id}/hypothesis")
    def clear_hypothesis(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            session.hypothesis = None
            session.conditioned_tree = None
            session.conditioned = None
            session.p_h = None
            session.revision += 1
            return _view(session)

    @app.get("/sessions/{session_id}/sensitivity")
    def get_sensitivity(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            if session.hypothesis is None:
                raise HTTPException(status_code=409, detail="no hypothesis set")
            report = analysis.classify_sensitivity(
                session.clean,
                session.conditioned,
                session.hypothesis,
                session.p_h,
                session.thresholds,
            )
            return {"revision": session.revision, **report.to_document()}

    @app.post("/sessions/{session_id}/whatif")
    def what_if(session_id: str, body: WhatIfRequest) -> dict:
        session = store.get(session_id)
        with session.lock:
            if body.finding_id not in session.findings:
                raise HTTPException(
                    status_code=404, detail=f"no finding {body.finding_id!r}"
                )
            current = session.findings[body.finding_id]
            doc: dict[str, Any] = {"id": "__replacement", "variable": current.variable}
            if body.state is not None:
                doc["state"] = body.state
            elif body.likelihood is not None:
                doc["likelihood"] = body.likelihood
            else:
                raise HTTPException(status_code=400, detail="need a state or likelihood")
            replacement = finding_from_document(doc, session.tree.state_labels)

            sent_before = session.clean.counters.messages_sent
            if session.conditioned is not None:
                sent_before += session.conditioned.counters.messages_sent
            p_swapped = session.clean.what_if(body.finding_id, replacement)
            posterior = None
            if session.hypothesis is not None:
                posterior = analysis.what_if_posterior(
                    session.clean,
                    session.conditioned,
                    session.p_h,
                    body.finding_id,
                    replacement,
                )
            sent_after = session.clean.counters.messages_sent
            if session.conditioned is not None:
                sent_after += session.conditioned.counters.messages_sent
            return {
                "revision": session.revision,
                "finding_id": body.finding_id,
                "replacement": {
                    "variable": current.variable,
                    "likelihood": list(replacement.likelihood),
                },
                "p_e": session.clean.evidence_mass,
                "p_swapped": p_swapped,
                "p_h_given_swapped": posterior,
                "messages_sent_delta": sent_after - sent_before,
                "propagation_free": sent_after == sent_before,
            }

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            return {"revision": session.revision, **session.tree.to_document()}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
