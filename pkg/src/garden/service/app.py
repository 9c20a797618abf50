"""HTTP surface over the analyzer, retriever, debugger and pipeline.

GET endpoints are side-effect-free over immutable loaded artifacts; config
edits write new file versions and pipeline runs execute one at a time
behind a lock, so the probe -> reconfigure -> reprocess loop is explicit.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import ops, pipeline
from ..cleaners import CleanRule
from ..corpus import load_documents, write_documents
from ..errors import ConfigError, GardenError
from .models import (
    CleanPreviewRequest,
    ConfigPutRequest,
    ConfigResponse,
    ConfigSavedResponse,
    HealthResponse,
    PipelineRunRequest,
    RunStartedResponse,
    SweepRequest,
)
from .state import AppState, build_state

DEFAULT_PORT = 8080

_STATUS_BY_CODE = {
    "corpus_not_loaded": 404,
    "index_not_loaded": 404,
    "stats_unavailable": 404,
    "config_not_loaded": 404,
    "run_not_found": 404,
    "stats_file_not_found": 404,
    "run_in_progress": 409,
}


def resolve_port(cli_port: int | None) -> int:
    """GARDEN_PORT overrides the CLI flag; both default to 8080."""
    env = os.environ.get("GARDEN_PORT")
    if env:
        return int(env)
    return cli_port if cli_port is not None else DEFAULT_PORT


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="garden", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=os.environ.get("GARDEN_CORS_ORIGINS", "*").split(","),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(GardenError)
    async def _garden_error(_request, exc: GardenError):
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(exc.code, 400),
            content={"code": exc.code, "message": exc.message, "detail": {}},
        )

    def need_corpus():
        if state.corpus is None:
            raise GardenError("corpus_not_loaded", "server was started without a corpus")
        return state.corpus

    def need_index():
        if state.manifest is None or state.shards is None:
            raise GardenError("index_not_loaded", "server was started without an index")
        return state.manifest, state.shards

    @app.get("/api/health", response_model=HealthResponse)
    def health():
        return HealthResponse()

    @app.get("/api/stats")
    def stats():
        if state.stats is None:
            raise GardenError("stats_unavailable", "no stats file loaded and no corpus to compute from")
        return state.stats

    @app.get("/api/stats/diff")
    def stats_diff(raw: str = Query(...), refined: str = Query(...)):
        payloads = []
        for path in (raw, refined):
            p = Path(path)
            if not p.exists():
                raise GardenError("stats_file_not_found", f"stats file not found: {path}")
            payloads.append(json.loads(p.read_text(encoding="utf-8")))
        return ops.diff_payload(payloads[0], payloads[1])

    @app.get("/api/search")
    def search(q: str = Query(...), k: int = Query(default=10, ge=1)):
        manifest, shards = need_index()
        return ops.search_payload(manifest, shards, q, k)

    @app.post("/api/debug/sweep")
    def debug_sweep(request: SweepRequest):
        docs = need_corpus()
        base = state.sweep_base_params(request.filter, request.params)
        return ops.sweep_payload(
            docs,
            request.filter,
            request.param,
            request.values,
            sample_k=request.sample,
            seed=request.seed,
            base_params=base,
        )

    @app.post("/api/debug/clean-preview")
    def debug_clean_preview(request: CleanPreviewRequest):
        docs = need_corpus()
        rule = CleanRule(
            scope=request.rule.scope,
            matcher=request.rule.matcher,
            pattern=request.rule.pattern,
            action=request.rule.action,
            replace_with=request.rule.replace_with,
            fixpoint=request.rule.fixpoint,
        )
        return ops.clean_preview_payload(
            docs, rule, sample_k=request.sample, seed=request.seed, max_cases=request.max_cases
        )

    @app.get("/api/operators")
    def operators():
        return ops.operators_payload()

    @app.get("/api/config", response_model=ConfigResponse)
    def get_config():
        path = state.current_config_path()
        return ConfigResponse(
            path=str(path),
            version=len(state.config_versions),
            content=path.read_text(encoding="utf-8"),
        )

    @app.put("/api/config", response_model=ConfigSavedResponse)
    def put_config(request: ConfigPutRequest):
        pipeline.load_config(request.content)  # raises ConfigError on bad configs
        if request.validate_only:
            path = state.config_versions[-1] if state.config_versions else state.current_config_path()
            return ConfigSavedResponse(path=str(path), version=len(state.config_versions), valid=True)
        base = state.current_config_path() if state.config_path else None
        if base is None:
            raise GardenError("config_not_loaded", "server was started without a config file")
        original = state.config_path
        assert original is not None
        version = len(state.config_versions) + 1
        new_path = original.with_name(f"{original.stem}.v{version:04d}{original.suffix}")
        new_path.write_text(request.content, encoding="utf-8")
        state.config_versions.append(new_path)
        return ConfigSavedResponse(path=str(new_path), version=version, valid=True)

    @app.post("/api/pipeline/run", response_model=RunStartedResponse)
    def pipeline_run(request: PipelineRunRequest):
        config_path = Path(request.config_path)
        if not config_path.exists():
            raise ConfigError(f"config file not found: {config_path}")
        input_path = Path(request.input)
        if not input_path.exists():
            raise GardenError("input_not_found", f"input path not found: {input_path}")
        if not state.run_lock.acquire(blocking=False):
            raise GardenError("run_in_progress", "another pipeline run is active")
        run_id = state.next_run_id()
        state.runs[run_id] = {"run_id": run_id, "state": "running"}

        def execute():
            try:
                config = pipeline.load_config_file(config_path)
                docs, errors = load_documents(input_path, strict=config.strict)
                refined, report = pipeline.run_pipeline(config, docs)
                write_documents(refined, request.output)
                report_dict = pipeline.report_to_dict(report)
                report_dict["record_errors"] = len(errors)
                if request.report:
                    Path(request.report).parent.mkdir(parents=True, exist_ok=True)
                    Path(request.report).write_text(
                        json.dumps(report_dict, ensure_ascii=False, indent=2), encoding="utf-8"
                    )
                state.runs[run_id] = {
                    "run_id": run_id,
                    "state": "done",
                    "output": str(request.output),
                    "report": report_dict,
                }
            except Exception as exc:  # surfaced via the run status, not the POST
                state.runs[run_id] = {"run_id": run_id, "state": "error", "error": str(exc)}
            finally:
                state.run_lock.release()

        threading.Thread(target=execute, daemon=True).start()
        return RunStartedResponse(run_id=run_id)

    @app.get("/api/pipeline/runs/{run_id}")
    def run_status(run_id: str):
        if run_id not in state.runs:
            raise GardenError("run_not_found", f"no such run: {run_id}")
        return state.runs[run_id]

    return app


def serve(
    corpus_path=None,
    index_dir=None,
    stats_path=None,
    config_path=None,
    lm_path=None,
    lang_models_spec=None,
    port: int | None = None,
    host: str = "127.0.0.1",
) -> None:
    """Build state, create the app and block in uvicorn."""
    import uvicorn

    state = build_state(
        corpus_path=corpus_path,
        index_dir=index_dir,
        stats_path=stats_path,
        config_path=config_path,
        lm_path=lm_path,
        lang_models_spec=lang_models_spec,
    )
    uvicorn.run(create_app(state), host=host, port=resolve_port(port))
