"""Consolidation of refined artifacts into per-UID evidence records.

Grouping is by UID alone: one source row yields exactly one evidence record
regardless of how many artifacts were refined out of it. Duplicate artifacts
are kept here (the graph layer dedupes at node identity); an artifact whose
UID has no flattened record behind it is a hard error, because that breaks
the custody chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

from .errors import DanglingUid
from .flatten import RecordIndex
from .refine.artifacts import EntityType, RefinedArtifact


@dataclass(frozen=True)
class SourceRef:
    database: str
    table: str
    path: str
    lid: int


@dataclass
class EvidenceRecord:
    uid: str
    artifacts: List[RefinedArtifact]
    source: SourceRef


def consolidate(
    artifacts: Sequence[RefinedArtifact], index: RecordIndex
) -> List[EvidenceRecord]:
    """Group artifacts by UID into evidence records ordered by UID.

    Artifact order within a record follows input order (stable). Raises
    DanglingUid when an artifact's UID resolves to no flattened record.
    """
    grouped: Dict[str, List[RefinedArtifact]] = {}
    for a in artifacts:
        if a.uid not in index:
            raise DanglingUid(f"artifact references unknown uid {a.uid!r}")
        grouped.setdefault(a.uid, []).append(a)

    records: List[EvidenceRecord] = []
    for uid in sorted(grouped):
        rec = index.resolve(uid)
        assert rec is not None
        records.append(
            EvidenceRecord(
                uid=uid,
                artifacts=grouped[uid],
                source=SourceRef(
                    database=rec.database, table=rec.table, path=rec.path, lid=rec.lid
                ),
            )
        )
    return records


def write_evidence_jsonl(path: Path, records: Sequence[EvidenceRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "uid": rec.uid,
                        "source": {
                            "database": rec.source.database,
                            "table": rec.source.table,
                            "path": rec.source.path,
                            "lid": rec.source.lid,
                        },
                        "artifacts": [
                            {
                                "entity_type": a.entity_type.value,
                                "refined_value": a.refined_value,
                                "confidence": a.confidence,
                                "engine": a.engine,
                            }
                            for a in rec.artifacts
                        ],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_evidence_jsonl(path: Path) -> List[EvidenceRecord]:
    records: List[EvidenceRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(
                EvidenceRecord(
                    uid=obj["uid"],
                    artifacts=[
                        RefinedArtifact(
                            uid=obj["uid"],
                            entity_type=EntityType(a["entity_type"]),
                            refined_value=a["refined_value"],
                            confidence=a["confidence"],
                            engine=a["engine"],
                        )
                        for a in obj["artifacts"]
                    ],
                    source=SourceRef(
                        database=obj["source"]["database"],
                        table=obj["source"]["table"],
                        path=obj["source"]["path"],
                        lid=obj["source"]["lid"],
                    ),
                )
            )
    return records
