"""HTTP JSON API over stored runs.

Serves the graph, hypothesis instances, provenance lookups, and metrics to
the review UI and the CLI. Read endpoints are side-effect-free; verdict
writes are serialized per run. All content hashes are lowercase hex SHA-256
of the exact payload bytes.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    CustodyBreach,
    DfkgError,
    IllegalTransition,
    LockHeld,
    RunNotFound,
    StageNotReady,
    UnknownEdge,
    UnknownUid,
)
from .evaluate import (
    HypothesisVerdict,
    Tally,
    compute_metrics,
    connection_tally,
    load_ground_truth,
    record_verdict,
)
from .flatten import RecordIndex, read_unified_csv, table_csv_name
from .graph import parse_graph_json
from .store import RunStore

log = logging.getLogger(__name__)

API_PREFIX = "/api/v1"

_STATUS_FOR = {
    RunNotFound: 404,
    UnknownUid: 404,
    UnknownEdge: 404,
    StageNotReady: 409,
    CustodyBreach: 409,
    IllegalTransition: 409,
    LockHeld: 409,
}


class VerdictIn(BaseModel):
    edge_id: str
    uid: str
    verdict: str
    reviewer: str = ""
    note: str = ""


def _default_ui_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


def _run_summary(manifest: dict) -> dict:
    keys = (
        "run_id",
        "device_id",
        "created_at",
        "engine",
        "sample_interval",
        "min_confidence",
        "stages",
        "counts",
    )
    return {k: manifest.get(k) for k in keys}


class _RunIndexCache:
    """Unified-record indexes keyed by run; run files are append-only."""

    def __init__(self, store: RunStore):
        self.store = store
        self._cache: Dict[str, Tuple[float, RecordIndex]] = {}
        self._lock = threading.Lock()

    def get(self, run_id: str) -> Optional[RecordIndex]:
        path = self.store.unified_path(run_id)
        if not path.exists():
            return None
        mtime = path.stat().st_mtime
        with self._lock:
            hit = self._cache.get(run_id)
            if hit is not None and hit[0] == mtime:
                return hit[1]
        manifest = self.store.manifest(run_id)
        index = RecordIndex(manifest["device_id"], read_unified_csv(path))
        with self._lock:
            self._cache[run_id] = (mtime, index)
        return index


def create_app(data_dir: Path, ui_dir: Optional[Path] = None) -> FastAPI:
    """Build the API application over one data directory."""
    store = RunStore(Path(data_dir))
    indexes = _RunIndexCache(store)
    write_locks: Dict[str, threading.Lock] = {}
    write_guard = threading.Lock()

    app = FastAPI(title="dfkg service", docs_url=None, redoc_url=None)

    def run_lock(run_id: str) -> threading.Lock:
        with write_guard:
            if run_id not in write_locks:
                write_locks[run_id] = threading.Lock()
            return write_locks[run_id]

    @app.exception_handler(DfkgError)
    async def _dfkg_error(request: Request, exc: DfkgError):
        status = _STATUS_FOR.get(type(exc), 400)
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    def load_graph_bytes(run_id: str) -> bytes:
        manifest = store.manifest(run_id)
        if not manifest.get("stages", {}).get("graph"):
            raise StageNotReady(f"run {run_id} has no graph yet")
        return store.graph_path(run_id).read_bytes()

    def current_connection_numbers(run_id: str, manifest: dict) -> Tuple[int, int, dict]:
        graph = parse_graph_json(store.graph_path(run_id).read_bytes())
        verdicts = store.load_verdicts(run_id)
        gt = None
        gt_path = store.ground_truth_path(run_id)
        if gt_path.exists():
            gt = load_ground_truth(gt_path)
        correct, total = connection_tally(
            graph, verdicts.verdict_map(), gt, strict=bool(manifest.get("strict"))
        )
        return correct, total, verdicts.counts()

    @app.get(API_PREFIX + "/health")
    def health():
        return {"status": "ok"}

    @app.get(API_PREFIX + "/runs")
    def list_runs():
        manifests = store.list_runs()
        manifests.sort(key=lambda m: (m.get("created_at", ""), m.get("run_id", "")), reverse=True)
        return {"runs": [_run_summary(m) for m in manifests]}

    @app.get(API_PREFIX + "/runs/{run_id}")
    def get_run(run_id: str):
        return store.manifest(run_id)

    @app.get(API_PREFIX + "/runs/{run_id}/graph")
    def get_graph(run_id: str):
        payload = load_graph_bytes(run_id)
        digest = hashlib.sha256(payload).hexdigest()
        return Response(
            content=payload,
            media_type="application/json",
            headers={"ETag": f'"{digest}"', "X-Content-SHA256": digest},
        )

    @app.get(API_PREFIX + "/runs/{run_id}/hypotheses")
    def get_hypotheses(run_id: str):
        manifest = store.manifest(run_id)
        if not store.hypotheses_path(run_id).exists():
            raise StageNotReady(f"run {run_id} has no hypothesis instances yet")
        verdicts = store.load_verdicts(run_id)
        return {
            "run_id": run_id,
            "device_id": manifest.get("device_id"),
            "counts": verdicts.counts(),
            "instances": [s.to_json_dict() for s in verdicts.states()],
        }

    @app.get(API_PREFIX + "/runs/{run_id}/metrics")
    def get_metrics(run_id: str):
        manifest = store.manifest(run_id)
        if not store.metrics_path(run_id).exists():
            raise StageNotReady(f"run {run_id} has not been evaluated yet")
        report = json.loads(store.metrics_path(run_id).read_text(encoding="utf-8"))
        correct, total, counts = current_connection_numbers(run_id, manifest)
        tally = Tally(**report.get("tally", {}))
        tally.correct_connections = correct
        tally.total_connections = total
        metrics = compute_metrics(tally)
        report["tally"] = tally.to_json_dict()
        report["metrics"] = {
            name: ("undefined" if value is None else value) for name, value in metrics.items()
        }
        report["verdicts"] = counts
        return report

    @app.get(API_PREFIX + "/provenance/{uid}")
    def resolve_provenance(uid: str):
        manifests = store.list_runs()
        manifests.sort(key=lambda m: (m.get("created_at", ""), m.get("run_id", "")), reverse=True)
        for manifest in manifests:
            run_id = manifest["run_id"]
            index = indexes.get(run_id)
            if index is None or uid not in index:
                continue
            if not index.verify(uid):
                raise CustodyBreach(f"uid {uid} fails custody recomputation in run {run_id}")
            record = index.resolve(uid)
            db_ref = None
            db_path = store.databases_path(run_id)
            if db_path.exists():
                for entry in json.loads(db_path.read_text(encoding="utf-8")):
                    if (
                        entry.get("file_path") == record.path
                        and entry.get("database_name") == record.database
                    ):
                        db_ref = entry
                        break
            return {
                "uid": uid,
                "run_id": run_id,
                "device_id": manifest.get("device_id"),
                "record": {
                    "database": record.database,
                    "table": record.table,
                    "path": record.path,
                    "lid": record.lid,
                    "pairs": record.pairs,
                },
                "table_csv": "tables/" + table_csv_name([record]),
                "database": db_ref,
            }
        raise UnknownUid(f"uid {uid} is not present in any stored run")

    @app.post(API_PREFIX + "/runs/{run_id}/verdicts")
    def post_verdict(run_id: str, body: VerdictIn):
        manifest = store.manifest(run_id)
        if not store.hypotheses_path(run_id).exists():
            raise StageNotReady(f"run {run_id} has no hypothesis instances yet")
        with run_lock(run_id):
            verdicts = store.load_verdicts(run_id)
            state, changed = record_verdict(
                HypothesisVerdict(
                    edge_id=body.edge_id,
                    uid=body.uid,
                    verdict=body.verdict,
                    reviewer=body.reviewer,
                    note=body.note,
                ),
                verdicts,
            )
            if changed:
                store.save_verdicts(run_id, verdicts)
            graph = parse_graph_json(store.graph_path(run_id).read_bytes())
            gt = None
            gt_path = store.ground_truth_path(run_id)
            if gt_path.exists():
                gt = load_ground_truth(gt_path)
            correct, total = connection_tally(
                graph, verdicts.verdict_map(), gt, strict=bool(manifest.get("strict"))
            )
        kgca = compute_metrics(Tally(correct_connections=correct, total_connections=total))["KGCA"]
        return {
            "instance": state.to_json_dict(),
            "changed": changed,
            "counts": verdicts.counts(),
            "kgca": "undefined" if kgca is None else kgca,
        }

    ui = Path(ui_dir) if ui_dir is not None else _default_ui_dir()
    if ui.is_dir():
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app
