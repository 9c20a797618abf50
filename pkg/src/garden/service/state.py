"""Immutable loaded artifacts plus the single pipeline-run lock."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .. import lm as lm_mod
from .. import ops, registry, retriever
from ..corpus import Document, load_documents
from ..errors import GardenError


@dataclass
class AppState:
    corpus: Optional[list[Document]] = None
    manifest: Optional[retriever.IndexManifest] = None
    shards: Optional[list[retriever.ShardIndex]] = None
    stats: Optional[dict] = None
    lm_model: Optional[lm_mod.NgramModel] = None
    lm_path: Optional[str] = None
    lang_models: Optional[dict[str, lm_mod.NgramModel]] = None
    config_path: Optional[Path] = None
    config_versions: list[Path] = field(default_factory=list)
    runs: dict[str, dict[str, Any]] = field(default_factory=dict)
    run_lock: threading.Lock = field(default_factory=threading.Lock)
    _run_counter: int = 0

    def next_run_id(self) -> str:
        self._run_counter += 1
        return f"run-{self._run_counter:04d}"

    def current_config_path(self) -> Path:
        if self.config_versions:
            return self.config_versions[-1]
        if self.config_path is None:
            raise GardenError("config_not_loaded", "server was started without a config file")
        return self.config_path

    def sweep_base_params(self, filter_name: str, user_params: dict[str, Any]) -> dict[str, Any]:
        """Inject the served LM into perplexity sweeps unless the caller set one."""
        params = dict(user_params)
        if filter_name == "filter_by_perplexity" and "model_path" not in params and self.lm_path:
            params["model_path"] = self.lm_path
        return params


def build_state(
    corpus_path: str | Path | None = None,
    index_dir: str | Path | None = None,
    stats_path: str | Path | None = None,
    config_path: str | Path | None = None,
    lm_path: str | Path | None = None,
    lang_models_spec: str | None = None,
) -> AppState:
    """Load server artifacts up front; fails at startup on bad paths."""
    if corpus_path is None and index_dir is None:
        raise GardenError("nothing_to_serve", "serve needs at least a corpus or an index")
    state = AppState()
    if corpus_path is not None:
        docs, _errors = load_documents(corpus_path)
        state.corpus = docs
    if index_dir is not None:
        state.manifest, state.shards = retriever.load_index(index_dir)
    if lm_path is not None:
        state.lm_model = registry.load_model_path(str(lm_path))
        state.lm_path = str(lm_path)
    if lang_models_spec:
        state.lang_models = registry.load_language_models(lang_models_spec)
    if stats_path is not None:
        state.stats = json.loads(Path(stats_path).read_text(encoding="utf-8"))
    elif state.corpus is not None:
        state.stats = ops.stats_payload(
            state.corpus, model=state.lm_model, lang_models=state.lang_models
        )
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise GardenError("config_not_found", f"config file not found: {path}")
        state.config_path = path
    return state
