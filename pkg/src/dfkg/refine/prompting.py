"""Prompt assembly and total parsing of engine responses.

The parser never raises on engine output: every response line becomes either
one artifact or one warning, so the two counts always partition the input
lines (as produced by ``str.splitlines``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Sequence, Set, Tuple

from ..errors import EmptyBatch
from ..flatten import FlatRecord
from .artifacts import ENTITY_LABELS, EntityType, RefinedArtifact

PROMPT_INSTRUCTIONS = """\
You are a forensic artifact refinement engine. Your task is to analyze each input row from a CSV file extracted from a mobile application database. Each row contains metadata and column-value pairs. Identify valid forensic artifacts, refine them, assign confidence scores, and output each artifact individually in the required format.
Each row contains:
Database Name (DB), Table Name (TN), File Path (FP), Row Line Number (LID), Unique Identifier (UID), One or more column-value pairs
Your task is to:
1) Use column names and metadata to determine the context of each value.
2) Extract only valid forensic artifacts of the following types:
     Email
     Phone Number
     Human Name (real human names)
     Username
     App Name (convert package names to recognizable names)
     Timestamp (convert to human-readable format)
     Search Keyword (from queries and titles)
     Message (user-generated text like SMS or chat)
     MAC Address
     Longitude
     Latitude
     Address (only identifiable physical locations)
3) For each artifact:
     Refine the value by correcting inconsistencies, removing obfuscations (e.g., encoded characters), and converting to a human-readable forensic format.
     Assign a confidence score between 1 (low certainty) and 10 (high certainty).
     Only retain artifacts with a confidence score of 5 or higher.
4) Output Structure (F):
    For every valid artifact identified, output a structured entry including:
     Entity Type (Exact label from the list below)
     Refined Value (The cleaned, normalized, human-readable artifact)
     Confidence Score (An integer from 1 to 10)
     Each extracted artifact must be listed separately, even if multiple artifacts are extracted from the same input row.
     In Output Use the exact entity type labels listed below for all output entries:
     App Name, Username, Human Name, Phone Number, Email, Search keyword, Message, MAC Address, Longitude, Latitude, Address, Timestamp.
5) Important rules:
     Do not include irrelevant system-level fields or Android internal configuration metadata
     Only use values that can be reliably interpreted based on column names and context
     Do not infer or invent artifact types not listed above
     If a value is partially recovered or decoded, include it only if confidence >= 5
     Each artifact must be written individually, not grouped or merged
"""

FORMAT_DIRECTIVE = """\
Answer in JSON lines, exactly one JSON object per artifact and nothing else.
Each object must have the keys "uid", "entity_type", "refined_value" and
"confidence". "uid" must be copied verbatim from the input row the artifact
came from. Do not wrap the output in markdown fences or prose.
"""


def serialize_record(record: FlatRecord) -> str:
    """One record as a prompt data line: UID | DB | TN | FP | LID | pairs."""
    return " | ".join(
        [
            record.uid,
            record.database,
            record.table,
            record.path,
            str(record.lid),
            json.dumps(record.pairs, ensure_ascii=False),
        ]
    )


def build_prompt(batch: Sequence[FlatRecord]) -> str:
    """Instructions, then one data line per record, then the format directive."""
    if not batch:
        raise EmptyBatch("cannot build a prompt for an empty batch")
    lines = [serialize_record(r) for r in batch]
    return PROMPT_INSTRUCTIONS + "\nRows:\n" + "\n".join(lines) + "\n\n" + FORMAT_DIRECTIVE


@dataclass(frozen=True)
class ParseWarning:
    line_no: int  # 1-based
    reason: str
    text: str


def _warn(line_no: int, reason: str, line: str) -> ParseWarning:
    return ParseWarning(line_no=line_no, reason=reason, text=line[:200])


def parse_refinement(
    raw: str, valid_uids: Set[str], engine: str = "remote"
) -> Tuple[List[RefinedArtifact], List[ParseWarning]]:
    """Parse an engine response into artifacts plus per-line warnings.

    Total function: malformed lines are reported, never raised. Unknown UIDs
    are rejected here so downstream consolidation can treat a dangling UID as
    a hard error in its own right.
    """
    artifacts: List[RefinedArtifact] = []
    warnings: List[ParseWarning] = []
    for i, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            warnings.append(_warn(i, "blank line", line))
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError:
            warnings.append(_warn(i, "invalid JSON", line))
            continue
        if not isinstance(obj, dict):
            warnings.append(_warn(i, "not a JSON object", line))
            continue
        missing = [k for k in ("uid", "entity_type", "refined_value", "confidence") if k not in obj]
        if missing:
            warnings.append(_warn(i, f"missing field {missing[0]}", line))
            continue
        uid = obj["uid"]
        if not isinstance(uid, str) or uid not in valid_uids:
            warnings.append(_warn(i, "unknown uid", line))
            continue
        etype = obj["entity_type"]
        if not isinstance(etype, str) or etype not in ENTITY_LABELS:
            warnings.append(_warn(i, "unknown entity type", line))
            continue
        value = obj["refined_value"]
        if not isinstance(value, str) or not value.strip():
            warnings.append(_warn(i, "empty refined_value", line))
            continue
        conf = obj["confidence"]
        if isinstance(conf, bool) or not isinstance(conf, int) or not 1 <= conf <= 10:
            warnings.append(_warn(i, "confidence out of range", line))
            continue
        artifacts.append(
            RefinedArtifact(
                uid=uid,
                entity_type=EntityType(etype),
                refined_value=value,
                confidence=conf,
                engine=engine,
            )
        )
    return artifacts, warnings
