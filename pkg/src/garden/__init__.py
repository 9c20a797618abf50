"""garden: curation pipeline and analytics for pretraining corpora.

Processing: reformat raw sources to JSONL documents, clean them with
exact/regex rules, filter on LM labels and handcrafted features, and
remove near-duplicates with MinHash LSH - all driven by one config file.
Analysis: corpus statistics, BM25 retrieval over a sharded index, and
filter/cleaner debugging sweeps, exposed through a CLI and an HTTP API.
"""

from .corpus import Document, RecordError, parse_jsonl_line, serialize_document
from .errors import ConfigError, GardenError, ModelError
from .pipeline import PipelineConfig, RunReport, StageReport, StageSpec, load_config, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Document",
    "RecordError",
    "parse_jsonl_line",
    "serialize_document",
    "GardenError",
    "ConfigError",
    "ModelError",
    "PipelineConfig",
    "StageSpec",
    "StageReport",
    "RunReport",
    "load_config",
    "run_pipeline",
    "__version__",
]
