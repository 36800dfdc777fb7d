"""Artifact refinement: entity typing of flattened records.

Engines implement a single contract: a batch of flattened records goes in,
typed artifacts tied to input UIDs come out. The mock engine is a
deterministic rule table used for tests and offline runs; the remote engine
drives a chat-completion HTTP endpoint with the same prompt either way.
"""

from .artifacts import (
    ENTITY_CSV_NAMES,
    EntityType,
    RefinedArtifact,
    RefinementEngine,
    apply_threshold,
    read_entity_csvs,
    write_entity_csvs,
)
from .mock import MockEngine, PACKAGE_APP_NAMES, app_name_for_package, mock_refine
from .prompting import ParseWarning, build_prompt, parse_refinement
from .remote import RemoteEngine, RemoteEngineConfig
from .timestamps import DEFAULT_ZONE, normalize_timestamp

__all__ = [
    "ENTITY_CSV_NAMES",
    "EntityType",
    "RefinedArtifact",
    "RefinementEngine",
    "apply_threshold",
    "read_entity_csvs",
    "write_entity_csvs",
    "MockEngine",
    "PACKAGE_APP_NAMES",
    "app_name_for_package",
    "mock_refine",
    "ParseWarning",
    "build_prompt",
    "parse_refinement",
    "RemoteEngine",
    "RemoteEngineConfig",
    "DEFAULT_ZONE",
    "normalize_timestamp",
]
