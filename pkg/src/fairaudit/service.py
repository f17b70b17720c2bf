"""Read-mostly HTTP service over an experiment store.

Endpoints:
  GET  /experiments                         list summaries
  GET  /experiments/{id}                    full persisted document
  GET  /experiments/{id}/comparison         selector-driven comparison
  POST /runs                                queue a pipeline run
  GET  /runs/{run_id}                       poll run status

Comparison responses are pure functions of (store contents, query); runs
execute serially on a single worker thread. All floats are serialized with
six significant digits.
"""

from __future__ import annotations

import queue
import threading
import uuid
from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import compare
from .errors import ConfigError
from .jsonio import round_floats
from .pipeline import ExperimentStore, PipelineConfig, run_pipeline


class ExperimentSummary(BaseModel):
    id: str
    created_at: str | None = None
    n_entries: int
    n_failures: int
    fingerprint: str


class PlaneEntry(BaseModel):
    strategy_id: str
    family: str
    phi_abs: float
    pi: float | None
    score: float | None
    feasible: bool


class ComparisonResponse(BaseModel):
    experiment_id: str
    selector: dict
    entries: list[PlaneEntry]
    ranking: list[str]
    feasible: list[str]
    winner: str | None
    suggestion: str | None = None


class RunRequest(BaseModel):
    config: dict


class RunStatus(BaseModel):
    run_id: str
    status: Literal["queued", "running", "done", "failed"]
    experiment_id: str | None = None
    error: str | None = None


class _RunWorker:
    """Serial pipeline executor; at most one run at a time."""

    def __init__(self, store: ExperimentStore):
        self.store = store
        self.queue: queue.Queue = queue.Queue()
        self.status: dict[str, dict] = {}
        self.lock = threading.Lock()
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    def submit(self, config: PipelineConfig) -> str:
        run_id = uuid.uuid4().hex[:12]
        with self.lock:
            self.status[run_id] = {"status": "queued"}
        self.queue.put((run_id, config))
        return run_id

    def get(self, run_id: str) -> dict | None:
        with self.lock:
            st = self.status.get(run_id)
            return dict(st) if st is not None else None

    def _loop(self):
        while True:
            run_id, config = self.queue.get()
            with self.lock:
                self.status[run_id] = {"status": "running"}
            try:
                experiment = run_pipeline(config, store=self.store)
                with self.lock:
                    self.status[run_id] = {
                        "status": "done",
                        "experiment_id": experiment.id,
                    }
            except Exception as exc:  # isolate worker from any failure
                with self.lock:
                    self.status[run_id] = {
                        "status": "failed",
                        "error": f"{type(exc).__name__}: {exc}",
                    }


def _selector_from_query(phi, pi, beta, Phi, mode) -> compare.SelectorConfig:
    try:
        return compare.SelectorConfig(
            phi_metric=phi, pi_metric=pi, beta=beta, Phi=Phi, mode=mode
        ).validate()
    except ConfigError as exc:
        raise HTTPException(
            status_code=422,
            detail=[{"loc": ["query"], "msg": str(exc), "type": "value_error"}],
        ) from exc


def create_app(store_path, ui_dir=None) -> FastAPI:
    store = ExperimentStore(store_path)
    app = FastAPI(title="fairaudit", version="0.1.0")
    worker = _RunWorker(store)
    app.state.store = store
    app.state.worker = worker

    @app.get("/experiments", response_model=list[ExperimentSummary])
    def list_experiments():
        return store.list()

    @app.get("/experiments/{exp_id}")
    def get_experiment(exp_id: str):
        try:
            return JSONResponse(store.load_doc(exp_id))
        except (KeyError, ConfigError):
            raise HTTPException(
                status_code=404, detail={"error": "experiment not found", "id": exp_id}
            ) from None

    @app.get("/experiments/{exp_id}/comparison", response_model=ComparisonResponse)
    def get_comparison(
        exp_id: str,
        phi: str = Query("dp"),
        pi: str = Query("f1"),
        beta: float = Query(1.0, gt=0),
        Phi: float = Query(0.05, ge=0),
        mode: str = Query("tradeoff"),
    ):
        try:
            experiment = store.load(exp_id)
        except (KeyError, ConfigError):
            raise HTTPException(
                status_code=404, detail={"error": "experiment not found", "id": exp_id}
            ) from None
        selector = _selector_from_query(phi, pi, beta, Phi, mode)
        ranked = compare.rank(experiment.entries, selector)
        if selector.mode == "constrained":
            selection = compare.constrained_best(experiment.entries, selector)
            winner = selection.winner.strategy_id if selection.winner else None
            feasible = list(selection.feasible)
            suggestion = selection.suggestion.strategy_id if selection.suggestion else None
        else:
            scored = [r for r in ranked if r.score is not None]
            winner = scored[0].strategy_id if scored else None
            feasible = []
            suggestion = None
        doc = ComparisonResponse(
            experiment_id=exp_id,
            selector={
                "phi": selector.phi_metric,
                "pi": selector.pi_metric,
                "beta": selector.beta,
                "Phi": selector.Phi,
                "mode": selector.mode,
            },
            entries=[
                PlaneEntry(
                    strategy_id=r.strategy_id,
                    family=r.family,
                    phi_abs=r.phi_abs,
                    pi=r.pi,
                    score=r.score,
                    feasible=r.feasible,
                )
                for r in ranked
            ],
            ranking=[r.strategy_id for r in ranked],
            feasible=feasible,
            winner=winner,
            suggestion=suggestion,
        )
        return JSONResponse(round_floats(doc.model_dump()))

    @app.post("/runs", response_model=RunStatus, status_code=202)
    def launch_run(request: RunRequest):
        try:
            config = PipelineConfig.from_dict(request.config)
        except ConfigError as exc:
            raise HTTPException(
                status_code=422,
                detail=[{"loc": ["body", "config"], "msg": str(exc), "type": "value_error"}],
            ) from exc
        run_id = worker.submit(config)
        return RunStatus(run_id=run_id, status="queued")

    @app.get("/runs/{run_id}", response_model=RunStatus)
    def run_status(run_id: str):
        st = worker.get(run_id)
        if st is None:
            raise HTTPException(
                status_code=404, detail={"error": "run not found", "id": run_id}
            )
        return RunStatus(run_id=run_id, **st)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(store_path, host: str = "127.0.0.1", port: int = 8000, ui_dir=None):
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    app = create_app(store_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
