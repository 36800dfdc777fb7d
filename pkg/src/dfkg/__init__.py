"""Digital forensic artifact pipeline and knowledge graph toolkit."""

__version__ = "0.1.0"

from .flatten import FlatRecord, UIDParts, make_uid
from .graph import build_graph
from .evaluate import compute_metrics
from .pipeline import RunConfig, run_pipeline

__all__ = [
    "FlatRecord",
    "UIDParts",
    "make_uid",
    "build_graph",
    "compute_metrics",
    "RunConfig",
    "run_pipeline",
    "__version__",
]
