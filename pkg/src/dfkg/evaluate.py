"""Ground-truth matching, the eight-figure metric suite, verdict review.

All metrics are percentages rounded half-up to two decimals. A metric whose
denominator is zero is reported as undefined, never as 0 or 100: an empty
class carries no signal in either direction.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .consolidate import EvidenceRecord
from .errors import IllegalTransition, UnknownEdge
from .flatten import RecordIndex
from .graph import EDGE_TAXONOMY, ForensicGraph, normalize_value, pair_label, node_value
from .refine.artifacts import EntityType, RefinedArtifact

log = logging.getLogger(__name__)

METRIC_NAMES = ("EEA", "ECA", "KGCA", "FAP", "FAR", "FAF1", "AIS", "CCA", "CCS")

_LABEL_TO_PAIR = {pair_label(p): p for p in EDGE_TAXONOMY}


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GtArtifact:
    entity_type: EntityType
    value: str
    uid: Optional[str] = None


@dataclass(frozen=True)
class GtRelation:
    type_pair: str
    values: Tuple[str, str]  # taxonomy orientation


@dataclass
class GroundTruth:
    artifacts: List[GtArtifact]
    relationships: List[GtRelation]

    def to_json_dict(self) -> dict:
        return {
            "artifacts": [
                {
                    "entity_type": a.entity_type.value,
                    "value": a.value,
                    **({"uid": a.uid} if a.uid else {}),
                }
                for a in self.artifacts
            ],
            "relationships": [
                {"type_pair": r.type_pair, "values": list(r.values)}
                for r in self.relationships
            ],
        }


def load_ground_truth(path: Path) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    artifacts = [
        GtArtifact(
            entity_type=EntityType(a["entity_type"]),
            value=a["value"],
            uid=a.get("uid"),
        )
        for a in obj.get("artifacts", [])
    ]
    relationships = []
    for r in obj.get("relationships", []):
        if r["type_pair"] not in _LABEL_TO_PAIR:
            raise ValueError(f"unknown relationship type pair {r['type_pair']!r}")
        v = r["values"]
        relationships.append(GtRelation(type_pair=r["type_pair"], values=(v[0], v[1])))
    return GroundTruth(artifacts=artifacts, relationships=relationships)


def save_ground_truth(path: Path, gt: GroundTruth) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gt.to_json_dict(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Tally and metric computation
# ---------------------------------------------------------------------------


@dataclass
class Tally:
    """Numerators and denominators for every reported figure."""

    true_extractions: int = 0
    total_potential_extractions: int = 0
    correctly_consolidated: int = 0
    total_consolidated: int = 0
    correct_connections: int = 0
    total_connections: int = 0
    tp: int = 0
    fp: int = 0
    fn: int = 0
    artifacts_matching_context: int = 0
    artifacts_with_intact_custody: int = 0
    total_artifacts: int = 0
    # Raw-string equality against ground truth; feeds AIS when set.
    exact_value_matches: Optional[int] = None

    def to_json_dict(self) -> dict:
        out = {
            "true_extractions": self.true_extractions,
            "total_potential_extractions": self.total_potential_extractions,
            "correctly_consolidated": self.correctly_consolidated,
            "total_consolidated": self.total_consolidated,
            "correct_connections": self.correct_connections,
            "total_connections": self.total_connections,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "artifacts_matching_context": self.artifacts_matching_context,
            "artifacts_with_intact_custody": self.artifacts_with_intact_custody,
            "total_artifacts": self.total_artifacts,
        }
        if self.exact_value_matches is not None:
            out["exact_value_matches"] = self.exact_value_matches
        return out


_CENT = Decimal("0.01")


def _pct(num: int, den: int) -> Optional[float]:
    if den == 0:
        return None
    return float((Decimal(num) * 100 / Decimal(den)).quantize(_CENT, ROUND_HALF_UP))


def compute_metrics(t: Tally) -> Dict[str, Optional[float]]:
    """The nine reported figures; None marks an undefined (empty-class) value."""
    metrics: Dict[str, Optional[float]] = {}
    metrics["EEA"] = _pct(t.true_extractions, t.total_potential_extractions)
    metrics["ECA"] = _pct(t.correctly_consolidated, t.total_consolidated)
    metrics["KGCA"] = _pct(t.correct_connections, t.total_connections)
    metrics["FAP"] = _pct(t.tp, t.tp + t.fp)
    metrics["FAR"] = _pct(t.tp, t.tp + t.fn)

    if t.tp + t.fp == 0 or t.tp + t.fn == 0:
        metrics["FAF1"] = None
    else:
        p = Decimal(t.tp) * 100 / Decimal(t.tp + t.fp)
        r = Decimal(t.tp) * 100 / Decimal(t.tp + t.fn)
        if p + r == 0:
            metrics["FAF1"] = None
        else:
            metrics["FAF1"] = float((2 * p * r / (p + r)).quantize(_CENT, ROUND_HALF_UP))

    ais_num = (
        t.exact_value_matches if t.exact_value_matches is not None else t.true_extractions
    )
    metrics["AIS"] = _pct(ais_num, t.total_potential_extractions)
    metrics["CCA"] = _pct(t.artifacts_with_intact_custody, t.total_artifacts)
    metrics["CCS"] = _pct(t.artifacts_matching_context, t.total_artifacts)
    return metrics


@dataclass
class MetricsReport:
    run_id: str
    engine: str
    min_confidence: int
    timestamp: str
    tally: Tally
    metrics: Dict[str, Optional[float]]

    def to_json_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "engine": self.engine,
            "min_confidence": self.min_confidence,
            "timestamp": self.timestamp,
            "metrics": {
                name: ("undefined" if self.metrics.get(name) is None else self.metrics[name])
                for name in METRIC_NAMES
            },
            "tally": self.tally.to_json_dict(),
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n").encode(
            "utf-8"
        )


def build_report(
    run_id: str, engine: str, min_confidence: int, timestamp: str, tally: Tally
) -> MetricsReport:
    return MetricsReport(
        run_id=run_id,
        engine=engine,
        min_confidence=min_confidence,
        timestamp=timestamp,
        tally=tally,
        metrics=compute_metrics(tally),
    )


# ---------------------------------------------------------------------------
# Ground-truth matching
# ---------------------------------------------------------------------------


def _normalized_gt_key(a: GtArtifact) -> Tuple[EntityType, str]:
    norm = normalize_value(a.entity_type, a.value)
    if norm != a.value:
        log.warning(
            "ground-truth value not in normal form: %r (%s) -> %r",
            a.value,
            a.entity_type.value,
            norm,
        )
    return (a.entity_type, norm)


def _gt_relation_set(gt: Optional[GroundTruth]) -> set:
    rel = set()
    if gt is None:
        return rel
    for r in gt.relationships:
        pair = _LABEL_TO_PAIR[r.type_pair]
        va = normalize_value(pair[0], r.values[0])
        vb = normalize_value(pair[1], r.values[1])
        if (va, vb) != r.values:
            log.warning("ground-truth relation values not in normal form: %s", r)
        rel.add((r.type_pair, va, vb))
    return rel


def connection_tally(
    graph: ForensicGraph,
    verdicts: Mapping[Tuple[str, str], str],
    gt: Optional[GroundTruth],
    strict: bool = False,
) -> Tuple[int, int]:
    """(correct, total) over hypothesis instances.

    A reviewer verdict always overrides static ground truth. Pending
    instances count only when ground truth covers them, unless ``strict``
    pulls every pending instance into the denominator as unproven.
    """
    gt_rel = _gt_relation_set(gt)
    correct = 0
    total = 0
    for edge in graph.edges:
        va = node_value(edge.endpoints[0])
        vb = node_value(edge.endpoints[1])
        in_gt = (edge.type_pair, va, vb) in gt_rel
        for uid in edge.provenance:
            verdict = verdicts.get((edge.edge_id, uid), "pending")
            if verdict == "valid":
                correct += 1
                total += 1
            elif verdict == "invalid":
                total += 1
            elif in_gt:
                correct += 1
                total += 1
            elif strict:
                total += 1
    return correct, total


def match_ground_truth(
    artifacts: Sequence[RefinedArtifact],
    records: Sequence[EvidenceRecord],
    graph: ForensicGraph,
    gt: GroundTruth,
    index: Optional[RecordIndex] = None,
    verdicts: Optional[Mapping[Tuple[str, str], str]] = None,
    strict: bool = False,
) -> Tally:
    """Score a run against ground truth.

    An artifact is a true positive iff its normalized (type, value) appears
    among the ground-truth artifacts. Custody and context figures are counted
    over true positives, matching how reported accuracy treats confirmed
    artifacts only.
    """
    by_key: Dict[Tuple[EntityType, str], List[GtArtifact]] = {}
    for entry in gt.artifacts:
        by_key.setdefault(_normalized_gt_key(entry), []).append(entry)

    tp = fp = exact = context = intact = 0
    produced_keys = set()
    uid_universe = {rec.uid for rec in records}

    for a in artifacts:
        key = (a.entity_type, normalize_value(a.entity_type, a.refined_value))
        entries = by_key.get(key)
        if not entries:
            fp += 1
            continue
        tp += 1
        produced_keys.add(key)
        if any(e.value == a.refined_value for e in entries):
            exact += 1
        if any(e.uid is None or e.uid == a.uid for e in entries):
            context += 1
        if index is not None:
            if index.verify(a.uid):
                intact += 1
        elif a.uid in uid_universe:
            intact += 1

    fn = sum(1 for entry in gt.artifacts if _normalized_gt_key(entry) not in produced_keys)

    correct_rec = 0
    for rec in records:
        misplaced = False
        for a in rec.artifacts:
            key = (a.entity_type, normalize_value(a.entity_type, a.refined_value))
            entries = by_key.get(key)
            if not entries:
                continue
            if all(e.uid is not None and e.uid != rec.uid for e in entries):
                misplaced = True
                break
        if not misplaced:
            correct_rec += 1

    correct_conn, total_conn = connection_tally(graph, verdicts or {}, gt, strict=strict)

    return Tally(
        true_extractions=tp,
        total_potential_extractions=len(artifacts),
        correctly_consolidated=correct_rec,
        total_consolidated=len(records),
        correct_connections=correct_conn,
        total_connections=total_conn,
        tp=tp,
        fp=fp,
        fn=fn,
        artifacts_matching_context=context,
        artifacts_with_intact_custody=intact,
        total_artifacts=tp,
        exact_value_matches=exact,
    )


# ---------------------------------------------------------------------------
# Custody audit
# ---------------------------------------------------------------------------


def audit_custody(
    artifacts: Sequence[RefinedArtifact], index: RecordIndex
) -> Tuple[int, List[dict]]:
    """Verify every artifact's UID re-derives from its stored source row.

    Returns (intact count, breach list); each breach names the uid and why.
    """
    intact = 0
    breaches: List[dict] = []
    for a in artifacts:
        if a.uid not in index:
            breaches.append({"uid": a.uid, "reason": "unknown uid"})
        elif not index.verify(a.uid):
            breaches.append({"uid": a.uid, "reason": "uid mismatch"})
        else:
            intact += 1
    return intact, breaches


# ---------------------------------------------------------------------------
# Verdict review state machine
# ---------------------------------------------------------------------------

VALID_VERDICTS = ("pending", "valid", "invalid")


@dataclass
class HypothesisVerdict:
    edge_id: str
    uid: str
    verdict: str  # target state: valid | invalid
    reviewer: str = ""
    note: str = ""


@dataclass
class InstanceState:
    edge_id: str
    uid: str
    type_pair: str
    hypothesis: str
    verdict: str = "pending"
    reviewer: str = ""
    note: str = ""
    decided_at: str = ""

    def to_json_dict(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "uid": self.uid,
            "type_pair": self.type_pair,
            "hypothesis": self.hypothesis,
            "verdict": self.verdict,
            "reviewer": self.reviewer,
            "note": self.note,
            "decided_at": self.decided_at,
        }


class VerdictStore:
    """Review state for every hypothesis instance of one run.

    State changes go through ``record_verdict``; each applied change is
    pushed to the audit sink exactly once. Identical re-submissions are
    accepted and change nothing.
    """

    def __init__(
        self,
        instances: Dict[Tuple[str, str], InstanceState],
        audit_sink: Optional[Callable[[dict], None]] = None,
    ):
        self._instances = instances
        self._audit_sink = audit_sink

    @classmethod
    def from_graph(
        cls, graph: ForensicGraph, audit_sink: Optional[Callable[[dict], None]] = None
    ) -> "VerdictStore":
        instances: Dict[Tuple[str, str], InstanceState] = {}
        for edge in graph.edges:
            for uid in edge.provenance:
                instances[(edge.edge_id, uid)] = InstanceState(
                    edge_id=edge.edge_id,
                    uid=uid,
                    type_pair=edge.type_pair,
                    hypothesis=edge.hypothesis,
                )
        return cls(instances, audit_sink)

    def __len__(self) -> int:
        return len(self._instances)

    def get(self, edge_id: str, uid: str) -> Optional[InstanceState]:
        return self._instances.get((edge_id, uid))

    def states(self) -> List[InstanceState]:
        return [self._instances[k] for k in sorted(self._instances)]

    def verdict_map(self) -> Dict[Tuple[str, str], str]:
        return {k: s.verdict for k, s in self._instances.items()}

    def counts(self) -> Dict[str, int]:
        c = {"pending": 0, "valid": 0, "invalid": 0}
        for s in self._instances.values():
            c[s.verdict] += 1
        c["total"] = len(self._instances)
        return c

    def to_json_dict(self) -> dict:
        return {"instances": [s.to_json_dict() for s in self.states()]}

    @classmethod
    def from_json_dict(
        cls, obj: dict, audit_sink: Optional[Callable[[dict], None]] = None
    ) -> "VerdictStore":
        instances = {}
        for item in obj.get("instances", []):
            state = InstanceState(
                edge_id=item["edge_id"],
                uid=item["uid"],
                type_pair=item["type_pair"],
                hypothesis=item["hypothesis"],
                verdict=item.get("verdict", "pending"),
                reviewer=item.get("reviewer", ""),
                note=item.get("note", ""),
                decided_at=item.get("decided_at", ""),
            )
            instances[(state.edge_id, state.uid)] = state
        return cls(instances, audit_sink)


def record_verdict(v: HypothesisVerdict, store: VerdictStore) -> Tuple[InstanceState, bool]:
    """Apply one verdict. Returns (state, changed).

    pending -> valid/invalid needs no note; flipping an already-adjudicated
    instance is a correction and requires a non-empty note. Submitting the
    identical verdict again is a no-op. "pending" is never a legal target.
    """
    state = store.get(v.edge_id, v.uid)
    if state is None:
        raise UnknownEdge(f"no hypothesis instance ({v.edge_id!r}, {v.uid!r})")
    if v.verdict not in ("valid", "invalid"):
        raise IllegalTransition(
            f"illegal transition {state.verdict} -> {v.verdict!r} (target must be valid or invalid)"
        )
    if state.verdict == v.verdict:
        return state, False
    if state.verdict != "pending" and not v.note.strip():
        raise IllegalTransition(
            f"correction {state.verdict} -> {v.verdict} requires a non-empty note"
        )
    state.verdict = v.verdict
    state.reviewer = v.reviewer
    state.note = v.note
    state.decided_at = datetime.now(timezone.utc).isoformat()
    if store._audit_sink is not None:
        store._audit_sink(
            {
                "ts": state.decided_at,
                "edge_id": state.edge_id,
                "uid": state.uid,
                "verdict": state.verdict,
                "reviewer": state.reviewer,
                "note": state.note,
            }
        )
    return state, True
