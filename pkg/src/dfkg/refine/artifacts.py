"""Entity type vocabulary, refined artifact record, and engine contract."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Protocol, Sequence

from ..flatten import FlatRecord


class EntityType(str, Enum):
    """Closed set of forensic entity labels. Engines may not invent new ones."""

    APP_NAME = "App Name"
    USERNAME = "Username"
    HUMAN_NAME = "Human Name"
    PHONE_NUMBER = "Phone Number"
    EMAIL = "Email"
    SEARCH_KEYWORD = "Search keyword"
    MESSAGE = "Message"
    MAC_ADDRESS = "MAC Address"
    LONGITUDE = "Longitude"
    LATITUDE = "Latitude"
    ADDRESS = "Address"
    TIMESTAMP = "Timestamp"


ENTITY_LABELS = {e.value for e in EntityType}

# Output file per entity type. Names for the seven exemplified types are
# fixed interface; the rest follow the same convention.
ENTITY_CSV_NAMES: Dict[EntityType, str] = {
    EntityType.EMAIL: "Email.csv",
    EntityType.TIMESTAMP: "Timestamp.csv",
    EntityType.PHONE_NUMBER: "Phone_number.csv",
    EntityType.HUMAN_NAME: "Name.csv",
    EntityType.SEARCH_KEYWORD: "Google_Search.csv",
    EntityType.MAC_ADDRESS: "Mac_addr.csv",
    EntityType.APP_NAME: "Appname.csv",
    EntityType.USERNAME: "Username.csv",
    EntityType.MESSAGE: "Message.csv",
    EntityType.LONGITUDE: "Longitude.csv",
    EntityType.LATITUDE: "Latitude.csv",
    EntityType.ADDRESS: "Address.csv",
}


@dataclass(frozen=True)
class RefinedArtifact:
    """One typed extraction, tied to the UID of the record it came from."""

    uid: str
    entity_type: EntityType
    refined_value: str
    confidence: int  # 1..10
    engine: str


class RefinementEngine(Protocol):
    """Batch refinement contract: emitted uids are a subset of input uids."""

    name: str

    def refine(self, batch: Sequence[FlatRecord]) -> List[RefinedArtifact]: ...


def apply_threshold(
    artifacts: Sequence[RefinedArtifact], min_confidence: int = 5
) -> List[RefinedArtifact]:
    """Keep artifacts at or above the cutoff, preserving input order."""
    return [a for a in artifacts if a.confidence >= min_confidence]


def write_entity_csvs(out_dir: Path, artifacts: Sequence[RefinedArtifact]) -> None:
    """Write one CSV per entity type (uid, refined_value, confidence).

    All twelve files are always written so reruns produce the same listing
    whether or not a type appeared in this run.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    by_type: Dict[EntityType, List[RefinedArtifact]] = {e: [] for e in EntityType}
    for a in artifacts:
        by_type[a.entity_type].append(a)
    for etype, name in ENTITY_CSV_NAMES.items():
        with open(out_dir / name, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["uid", "refined_value", "confidence"])
            for a in by_type[etype]:
                w.writerow([a.uid, a.refined_value, a.confidence])


def read_entity_csvs(out_dir: Path, engine: str) -> List[RefinedArtifact]:
    """Reload artifacts from the per-type CSVs, ordered by (uid, type, value)."""
    artifacts: List[RefinedArtifact] = []
    for etype, name in ENTITY_CSV_NAMES.items():
        path = out_dir / name
        if not path.exists():
            continue
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                artifacts.append(
                    RefinedArtifact(
                        uid=row["uid"],
                        entity_type=etype,
                        refined_value=row["refined_value"],
                        confidence=int(row["confidence"]),
                        engine=engine,
                    )
                )
    artifacts.sort(key=lambda a: (a.uid, a.entity_type.value, a.refined_value))
    return artifacts
