"""Forensic knowledge graph: entity nodes, taxonomy edges, hypotheses.

Node identity is the entity type plus the normalized value, so the same
email seen in two databases collapses into one node whose provenance lists
both UIDs. Edges exist only between artifacts that co-occur inside a single
evidence record and whose type pair is in the closed taxonomy below. Each
distinct (edge, provenance-uid) pair is one reviewable hypothesis instance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .consolidate import EvidenceRecord
from .refine.artifacts import EntityType
from .refine.mock import app_name_for_package, _PACKAGE_RE

DEFAULT_MIN_CONFIDENCE = 5

# Closed relationship taxonomy. Pair order here is the canonical endpoint
# orientation and the reporting order.
EDGE_TAXONOMY: Tuple[Tuple[EntityType, EntityType], ...] = (
    (EntityType.TIMESTAMP, EntityType.APP_NAME),
    (EntityType.EMAIL, EntityType.APP_NAME),
    (EntityType.APP_NAME, EntityType.SEARCH_KEYWORD),
    (EntityType.MAC_ADDRESS, EntityType.APP_NAME),
    (EntityType.TIMESTAMP, EntityType.EMAIL),
    (EntityType.TIMESTAMP, EntityType.SEARCH_KEYWORD),
    (EntityType.TIMESTAMP, EntityType.MAC_ADDRESS),
    (EntityType.HUMAN_NAME, EntityType.TIMESTAMP),
    (EntityType.HUMAN_NAME, EntityType.APP_NAME),
    (EntityType.PHONE_NUMBER, EntityType.APP_NAME),
    (EntityType.PHONE_NUMBER, EntityType.EMAIL),
)


def pair_label(pair: Tuple[EntityType, EntityType]) -> str:
    return f"{pair[0].value}-{pair[1].value}"


PAIR_LABELS: Tuple[str, ...] = tuple(pair_label(p) for p in EDGE_TAXONOMY)

_TAXONOMY_BY_SET = {frozenset(p): p for p in EDGE_TAXONOMY}
_TAXONOMY_INDEX = {p: i for i, p in enumerate(EDGE_TAXONOMY)}


def taxonomy_pair(
    a: EntityType, b: EntityType
) -> Optional[Tuple[EntityType, EntityType]]:
    """Canonical taxonomy pair for two types, or None when not related."""
    if a == b:
        return None
    return _TAXONOMY_BY_SET.get(frozenset((a, b)))


# ---------------------------------------------------------------------------
# Value normalization (node identity). The evaluator uses the same rules so
# ground truth and graph live in one value space.
# ---------------------------------------------------------------------------

_PHONE_SEPARATORS = " -.() "


def normalize_value(entity_type: EntityType, value: str) -> str:
    v = value.strip()
    if entity_type == EntityType.EMAIL:
        return v.lower()
    if entity_type == EntityType.MAC_ADDRESS:
        return v.upper()
    if entity_type == EntityType.PHONE_NUMBER:
        compact = "".join(c for c in v if c not in _PHONE_SEPARATORS)
        digits = compact[1:] if compact.startswith("+") else compact
        if digits.isdigit() and 8 <= len(digits) <= 15:
            return "+" + digits
        return v
    return v


# ---------------------------------------------------------------------------
# Graph model
# ---------------------------------------------------------------------------


@dataclass
class EntityNode:
    node_id: str  # "<entity type>|<normalized value>"
    entity_type: EntityType
    value: str
    provenance: List[str]  # sorted uids
    max_confidence: int


@dataclass
class RelationEdge:
    edge_id: str
    type_pair: str
    endpoints: Tuple[str, str]  # node ids, taxonomy orientation
    provenance: List[str]  # sorted uids
    hypothesis: str


@dataclass
class IsolatedGroup:
    app_name: str
    members: List[str]  # sorted node ids


@dataclass
class ForensicGraph:
    nodes: List[EntityNode]
    edges: List[RelationEdge]
    isolated_groups: List[IsolatedGroup]
    min_confidence: int = DEFAULT_MIN_CONFIDENCE
    # uid -> source path, used for isolated-node app attribution. Not part of
    # the serialized form.
    uid_paths: Dict[str, str] = field(default_factory=dict, repr=False)

    def node_by_id(self, node_id: str) -> Optional[EntityNode]:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        return None

    def instances(self) -> List[Tuple[str, str]]:
        """All reviewable hypothesis instances as sorted (edge_id, uid)."""
        out = [(e.edge_id, uid) for e in self.edges for uid in e.provenance]
        out.sort()
        return out

    def to_json_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "node_id": n.node_id,
                    "entity_type": n.entity_type.value,
                    "value": n.value,
                    "provenance": list(n.provenance),
                    "max_confidence": n.max_confidence,
                }
                for n in self.nodes
            ],
            "edges": [
                {
                    "edge_id": e.edge_id,
                    "type_pair": e.type_pair,
                    "endpoints": list(e.endpoints),
                    "provenance": list(e.provenance),
                    "hypothesis": e.hypothesis,
                }
                for e in self.edges
            ],
            "isolated_groups": [
                {"app_name": g.app_name, "members": list(g.members)}
                for g in self.isolated_groups
            ],
        }

    def to_json_bytes(self) -> bytes:
        text = json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False)
        return (text + "\n").encode("utf-8")


def node_value(node_id: str) -> str:
    """Recover the value half of a node id (types never contain '|')."""
    return node_id.split("|", 1)[1]


def _edge_id(label: str, endpoint_a: str, endpoint_b: str) -> str:
    blob = f"{label}|{endpoint_a}|{endpoint_b}".encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Hypothesis sentences, one template per taxonomy pair.
# ---------------------------------------------------------------------------

_T = EntityType


def generate_hypothesis(pair: Tuple[EntityType, EntityType], values: Dict[EntityType, str]) -> str:
    app = values.get(_T.APP_NAME, "")
    ts = values.get(_T.TIMESTAMP, "")
    if pair == (_T.TIMESTAMP, _T.APP_NAME):
        return f"User interacted with {app} on {ts}."
    if pair == (_T.EMAIL, _T.APP_NAME):
        return f"User account associated with the email {values[_T.EMAIL]} was linked to {app}."
    if pair == (_T.APP_NAME, _T.SEARCH_KEYWORD):
        return f'User performed a Google search for "{values[_T.SEARCH_KEYWORD]}" in {app}.'
    if pair == (_T.MAC_ADDRESS, _T.APP_NAME):
        return f"Device with MAC address {values[_T.MAC_ADDRESS]} was connected via Bluetooth."
    if pair == (_T.TIMESTAMP, _T.EMAIL):
        return f"User interacted with content associated with the email {values[_T.EMAIL]} on {ts}."
    if pair == (_T.TIMESTAMP, _T.SEARCH_KEYWORD):
        return f'User searched for "{values[_T.SEARCH_KEYWORD]}" at {ts}.'
    if pair == (_T.TIMESTAMP, _T.MAC_ADDRESS):
        return f"Device with MAC address {values[_T.MAC_ADDRESS]} connected via Bluetooth on {ts}."
    if pair == (_T.HUMAN_NAME, _T.TIMESTAMP):
        return f"User interacted with {values[_T.HUMAN_NAME]} on {ts}."
    if pair == (_T.HUMAN_NAME, _T.APP_NAME):
        return f"User interacted with {values[_T.HUMAN_NAME]} on {app}."
    if pair == (_T.PHONE_NUMBER, _T.APP_NAME):
        return f"The phone number {values[_T.PHONE_NUMBER]} is associated with {app}."
    if pair == (_T.PHONE_NUMBER, _T.EMAIL):
        return f"The email {values[_T.EMAIL]} is associated with the phone number {values[_T.PHONE_NUMBER]}."
    raise ValueError(f"no hypothesis template for pair {pair}")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def build_graph(
    records: Sequence[EvidenceRecord], min_confidence: int = DEFAULT_MIN_CONFIDENCE
) -> ForensicGraph:
    """Build nodes, taxonomy edges and isolated groups from evidence records."""
    nodes: Dict[str, EntityNode] = {}
    provenance: Dict[str, set] = {}
    for rec in records:
        for a in rec.artifacts:
            if a.confidence < min_confidence:
                continue
            value = normalize_value(a.entity_type, a.refined_value)
            if not value:
                continue
            nid = f"{a.entity_type.value}|{value}"
            node = nodes.get(nid)
            if node is None:
                nodes[nid] = EntityNode(
                    node_id=nid,
                    entity_type=a.entity_type,
                    value=value,
                    provenance=[],
                    max_confidence=a.confidence,
                )
                provenance[nid] = set()
            else:
                node.max_confidence = max(node.max_confidence, a.confidence)
            provenance[nid].add(rec.uid)
    for nid, node in nodes.items():
        node.provenance = sorted(provenance[nid])

    edges = derive_edges(records, min_confidence)

    graph = ForensicGraph(
        nodes=sorted(nodes.values(), key=lambda n: n.node_id),
        edges=edges,
        isolated_groups=[],
        min_confidence=min_confidence,
        uid_paths={rec.uid: rec.source.path for rec in records},
    )
    graph.isolated_groups = group_isolated(graph)
    return graph


def derive_edges(
    records: Sequence[EvidenceRecord], min_confidence: int = DEFAULT_MIN_CONFIDENCE
) -> List[RelationEdge]:
    """Edges from within-record co-occurrence, restricted to the taxonomy."""
    edges: Dict[str, RelationEdge] = {}
    edge_prov: Dict[str, set] = {}
    for rec in records:
        # node ids present in this record, bucketed by type
        by_type: Dict[EntityType, List[str]] = {}
        for a in rec.artifacts:
            if a.confidence < min_confidence:
                continue
            value = normalize_value(a.entity_type, a.refined_value)
            if not value:
                continue
            nid = f"{a.entity_type.value}|{value}"
            bucket = by_type.setdefault(a.entity_type, [])
            if nid not in bucket:
                bucket.append(nid)
        for pair in EDGE_TAXONOMY:
            ta, tb = pair
            if ta not in by_type or tb not in by_type:
                continue
            for nid_a in by_type[ta]:
                for nid_b in by_type[tb]:
                    label = pair_label(pair)
                    eid = _edge_id(label, nid_a, nid_b)
                    if eid not in edges:
                        values = {ta: node_value(nid_a), tb: node_value(nid_b)}
                        edges[eid] = RelationEdge(
                            edge_id=eid,
                            type_pair=label,
                            endpoints=(nid_a, nid_b),
                            provenance=[],
                            hypothesis=generate_hypothesis(pair, values),
                        )
                        edge_prov[eid] = set()
                    edge_prov[eid].add(rec.uid)
    out = []
    for eid, edge in edges.items():
        edge.provenance = sorted(edge_prov[eid])
        out.append(edge)
    out.sort(key=lambda e: (PAIR_LABELS.index(e.type_pair), e.endpoints))
    return out


def _app_for_path(path: str) -> Optional[str]:
    for seg in path.split("/"):
        if seg and _PACKAGE_RE.match(seg):
            named = app_name_for_package(seg)
            if named is not None:
                return named[0]
    return None


def group_isolated(graph: ForensicGraph) -> List[IsolatedGroup]:
    """Bucket degree-0 nodes by originating app, alphabetically.

    App attribution comes from the source path of the node's first
    provenance record; nodes with no package-like path segment fall into
    the "(unattributed)" bucket.
    """
    connected = set()
    for e in graph.edges:
        connected.update(e.endpoints)
    groups: Dict[str, List[str]] = {}
    for node in graph.nodes:
        if node.node_id in connected:
            continue
        app = None
        for uid in node.provenance:  # provenance is sorted; first hit wins
            path = graph.uid_paths.get(uid)
            if path:
                app = _app_for_path(path)
                if app:
                    break
        groups.setdefault(app or "(unattributed)", []).append(node.node_id)
    return [
        IsolatedGroup(app_name=name, members=sorted(members))
        for name, members in sorted(groups.items())
    ]


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------


def parse_graph_json(data: bytes | str | dict) -> ForensicGraph:
    if isinstance(data, (bytes, str)):
        obj = json.loads(data)
    else:
        obj = data
    nodes = [
        EntityNode(
            node_id=n["node_id"],
            entity_type=EntityType(n["entity_type"]),
            value=n["value"],
            provenance=list(n["provenance"]),
            max_confidence=n["max_confidence"],
        )
        for n in obj["nodes"]
    ]
    edges = [
        RelationEdge(
            edge_id=e["edge_id"],
            type_pair=e["type_pair"],
            endpoints=(e["endpoints"][0], e["endpoints"][1]),
            provenance=list(e["provenance"]),
            hypothesis=e["hypothesis"],
        )
        for e in obj["edges"]
    ]
    groups = [
        IsolatedGroup(app_name=g["app_name"], members=list(g["members"]))
        for g in obj.get("isolated_groups", [])
    ]
    return ForensicGraph(nodes=nodes, edges=edges, isolated_groups=groups)


def to_dot(graph: ForensicGraph) -> str:
    """Graphviz rendering for static inspection."""
    lines = ["graph dfkg {", "  node [shape=box, fontsize=10];"]
    for n in graph.nodes:
        label = f"{n.entity_type.value}\\n{n.value}".replace('"', '\\"')
        lines.append(f'  "{n.node_id}" [label="{label}"];'.replace("\n", " "))
    for e in graph.edges:
        a, b = e.endpoints
        lines.append(f'  "{a}" -- "{b}" [label="{e.type_pair}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
