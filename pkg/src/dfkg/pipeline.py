"""End-to-end orchestration: scan, flatten, refine, graph, evaluate.

Every stage reads its inputs from the run directory and writes its outputs
back there, so a run interrupted between stages resumes from disk and ends
byte-identical to an uninterrupted one. The run id is derived from the
scanned content and the run parameters, never from the clock, which is what
makes rerun-equals-resume work.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .consolidate import consolidate, read_evidence_jsonl, write_evidence_jsonl
from .errors import CorruptDatabase, DfkgError, StageNotReady
from .evaluate import (
    METRIC_NAMES,
    Tally,
    VerdictStore,
    audit_custody,
    build_report,
    compute_metrics,
    connection_tally,
    load_ground_truth,
    match_ground_truth,
    MetricsReport,
)
from .flatten import (
    DEFAULT_DENYLIST,
    DEFAULT_SAMPLE_INTERVAL,
    RecordIndex,
    read_unified_csv,
    table_csv_name,
    unify,
    write_table_csv,
    write_unified_csv,
    flatten_table,
)
from .graph import build_graph, parse_graph_json
from .ingest import DatabaseRef, enumerate_tables, read_rows, scan_image
from .refine import (
    MockEngine,
    RemoteEngine,
    RemoteEngineConfig,
    apply_threshold,
    read_entity_csvs,
    write_entity_csvs,
)
from .refine.timestamps import DEFAULT_ZONE
from .store import RunLock, RunStore, STAGES

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    image_root: Path
    device_id: str
    out_dir: Path
    sample_interval: int = DEFAULT_SAMPLE_INTERVAL
    min_confidence: int = 5
    engine: str = "mock"  # mock | remote
    endpoint: Optional[str] = None
    model: str = "gpt-4"
    zone: str = DEFAULT_ZONE
    denylist: Tuple[str, ...] = DEFAULT_DENYLIST
    ground_truth: Optional[Path] = None
    batch_size: int = 40
    max_in_flight: int = 4
    strict: bool = False


def config_from_manifest(manifest: dict, out_dir: Path) -> RunConfig:
    return RunConfig(
        image_root=Path(manifest["image_root"]),
        device_id=manifest["device_id"],
        out_dir=Path(out_dir),
        sample_interval=manifest["sample_interval"],
        min_confidence=manifest["min_confidence"],
        engine=manifest["engine"],
        endpoint=manifest.get("endpoint"),
        model=manifest.get("model", "gpt-4"),
        zone=manifest["zone"],
        denylist=tuple(manifest["denylist"]),
        ground_truth=Path(manifest["ground_truth"]) if manifest.get("ground_truth") else None,
        batch_size=manifest.get("batch_size", 40),
        max_in_flight=manifest.get("max_in_flight", 4),
        strict=manifest.get("strict", False),
    )


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def derive_run_id(cfg: RunConfig, refs: Sequence[DatabaseRef]) -> str:
    """Content-addressed run id: same inputs and parameters, same run."""
    payload = {
        "device_id": cfg.device_id,
        "databases": [
            (r.file_path, r.database_name, _sha256_file(r.local_path)) for r in refs
        ],
        "engine": cfg.engine,
        "sample_interval": cfg.sample_interval,
        "min_confidence": cfg.min_confidence,
        "zone": cfg.zone,
        "denylist": list(cfg.denylist),
    }
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def _evidence_timestamp(refs: Sequence[DatabaseRef]) -> str:
    """Deterministic report stamp: newest mtime among the scanned databases."""
    if not refs:
        return datetime.fromtimestamp(0, tz=timezone.utc).isoformat()
    newest = max(r.local_path.stat().st_mtime for r in refs)
    return datetime.fromtimestamp(int(newest), tz=timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_scan(cfg: RunConfig, store: RunStore) -> str:
    refs = scan_image(cfg.image_root, cfg.device_id)
    run_id = derive_run_id(cfg, refs)
    root = Path(cfg.image_root).resolve()

    if store.exists(run_id):
        manifest = store.manifest(run_id)
    else:
        manifest = {
            "run_id": run_id,
            "device_id": cfg.device_id,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "engine": cfg.engine,
            "endpoint": cfg.endpoint,
            "model": cfg.model,
            "sample_interval": cfg.sample_interval,
            "min_confidence": cfg.min_confidence,
            "zone": cfg.zone,
            "denylist": list(cfg.denylist),
            "image_root": str(root),
            "ground_truth": str(cfg.ground_truth) if cfg.ground_truth else None,
            "batch_size": cfg.batch_size,
            "max_in_flight": cfg.max_in_flight,
            "strict": cfg.strict,
            "evidence_timestamp": _evidence_timestamp(refs),
            "stages": {name: False for name in STAGES},
            "counts": {},
        }

    entries = []
    for r in refs:
        entry = r.manifest_entry()
        entry["local_rel"] = str(r.local_path.resolve().relative_to(root))
        entries.append(entry)
    store.run_dir(run_id).mkdir(parents=True, exist_ok=True)
    with open(store.databases_path(run_id), "w", encoding="utf-8") as fh:
        json.dump(entries, fh, indent=2, ensure_ascii=False)
        fh.write("\n")

    manifest["counts"]["databases"] = len(refs)
    manifest["stages"]["scan"] = True
    store.save_manifest(run_id, manifest)
    log.info("scan: %d databases under %s", len(refs), root)
    return run_id


def load_databases(store: RunStore, run_id: str, image_root: Path) -> List[DatabaseRef]:
    with open(store.databases_path(run_id), encoding="utf-8") as fh:
        entries = json.load(fh)
    refs = []
    for e in entries:
        refs.append(
            DatabaseRef(
                device_id=e["device_id"],
                file_path=e["file_path"],
                database_name=e["database_name"],
                byte_size=e["byte_size"],
                signature=e["signature"],
                local_path=Path(image_root) / e["local_rel"],
            )
        )
    return refs


def stage_flatten(cfg: RunConfig, store: RunStore, run_id: str) -> None:
    manifest = store.manifest(run_id)
    if not manifest["stages"].get("scan"):
        raise StageNotReady("flatten requires a completed scan stage")
    refs = load_databases(store, run_id, Path(manifest["image_root"]))

    tables_dir = store.tables_dir(run_id)
    tables_dir.mkdir(parents=True, exist_ok=True)
    all_records = []
    for db in refs:
        try:
            tables = enumerate_tables(db)
        except CorruptDatabase as exc:
            log.warning("database skipped: %s", exc)
            continue
        for table in tables:
            records = flatten_table(db, table, read_rows(db, table))
            if not records:
                continue
            write_table_csv(tables_dir / table_csv_name(records), records)
            all_records.extend(records)

    sampled = unify(all_records, cfg.sample_interval, cfg.denylist)
    write_unified_csv(store.unified_path(run_id), sampled)

    manifest["counts"]["records_total"] = len(all_records)
    manifest["counts"]["records_sampled"] = len(sampled)
    manifest["stages"]["flatten"] = True
    store.save_manifest(run_id, manifest)
    log.info("flatten: %d rows, %d sampled", len(all_records), len(sampled))


def make_engine(cfg: RunConfig, store: RunStore, run_id: str):
    if cfg.engine == "mock":
        return MockEngine(zone=cfg.zone)
    if cfg.engine == "remote":
        if not cfg.endpoint:
            raise DfkgError("remote engine requires --endpoint")
        return RemoteEngine(
            RemoteEngineConfig(
                endpoint=cfg.endpoint,
                model=cfg.model,
                batch_size=cfg.batch_size,
                max_in_flight=cfg.max_in_flight,
                audit_path=store.refine_audit_path(run_id),
            )
        )
    raise DfkgError(f"unknown engine {cfg.engine!r}")


def stage_refine(cfg: RunConfig, store: RunStore, run_id: str) -> None:
    manifest = store.manifest(run_id)
    if not manifest["stages"].get("flatten"):
        raise StageNotReady("refine requires a completed flatten stage")
    records = read_unified_csv(store.unified_path(run_id))
    engine = make_engine(cfg, store, run_id)
    artifacts = engine.refine(records)
    # Canonical order regardless of engine scheduling.
    artifacts = sorted(artifacts, key=lambda a: (a.uid, a.entity_type.value, a.refined_value))
    retained = apply_threshold(artifacts, cfg.min_confidence)
    write_entity_csvs(store.artifacts_dir(run_id), retained)

    manifest["counts"]["artifacts"] = len(retained)
    manifest["stages"]["refine"] = True
    store.save_manifest(run_id, manifest)
    log.info("refine: %d artifacts kept of %d emitted", len(retained), len(artifacts))


def stage_graph(cfg: RunConfig, store: RunStore, run_id: str) -> None:
    manifest = store.manifest(run_id)
    if not manifest["stages"].get("refine"):
        raise StageNotReady("graph requires a completed refine stage")
    records = read_unified_csv(store.unified_path(run_id))
    index = RecordIndex(cfg.device_id, records)
    artifacts = read_entity_csvs(store.artifacts_dir(run_id), engine=cfg.engine)

    evidence = consolidate(artifacts, index)
    write_evidence_jsonl(store.evidence_path(run_id), evidence)

    graph = build_graph(evidence, cfg.min_confidence)
    store.graph_path(run_id).write_bytes(graph.to_json_bytes())
    verdicts = VerdictStore.from_graph(graph)
    store.save_verdicts(run_id, verdicts)

    manifest["counts"]["evidence_records"] = len(evidence)
    manifest["counts"]["nodes"] = len(graph.nodes)
    manifest["counts"]["edges"] = len(graph.edges)
    manifest["counts"]["instances"] = len(verdicts)
    manifest["stages"]["graph"] = True
    store.save_manifest(run_id, manifest)
    log.info(
        "graph: %d nodes, %d edges, %d instances",
        len(graph.nodes),
        len(graph.edges),
        len(verdicts),
    )


def stage_evaluate(cfg: RunConfig, store: RunStore, run_id: str) -> None:
    manifest = store.manifest(run_id)
    if not manifest["stages"].get("graph"):
        raise StageNotReady("evaluate requires a completed graph stage")
    artifacts = read_entity_csvs(store.artifacts_dir(run_id), engine=cfg.engine)
    evidence = read_evidence_jsonl(store.evidence_path(run_id))
    graph = parse_graph_json(store.graph_path(run_id).read_bytes())
    index = RecordIndex(cfg.device_id, read_unified_csv(store.unified_path(run_id)))
    verdicts = store.load_verdicts(run_id).verdict_map()
    stamp = manifest["evidence_timestamp"]

    if cfg.ground_truth:
        shutil.copyfile(cfg.ground_truth, store.ground_truth_path(run_id))
        gt = load_ground_truth(store.ground_truth_path(run_id))
        tally = match_ground_truth(
            artifacts, evidence, graph, gt, index=index, verdicts=verdicts, strict=cfg.strict
        )
        report = build_report(run_id, cfg.engine, cfg.min_confidence, stamp, tally)
    else:
        # Without ground truth only custody and adjudicated connections are
        # measurable; everything else is reported as undefined.
        intact, _breaches = audit_custody(artifacts, index)
        correct, total = connection_tally(graph, verdicts, None, strict=cfg.strict)
        tally = Tally(
            correct_connections=correct,
            total_connections=total,
            artifacts_with_intact_custody=intact,
            total_artifacts=len(artifacts),
        )
        metrics = {name: None for name in METRIC_NAMES}
        full = compute_metrics(tally)
        metrics["CCA"] = full["CCA"]
        metrics["KGCA"] = full["KGCA"]
        report = MetricsReport(
            run_id=run_id,
            engine=cfg.engine,
            min_confidence=cfg.min_confidence,
            timestamp=stamp,
            tally=tally,
            metrics=metrics,
        )

    store.metrics_path(run_id).write_bytes(report.to_json_bytes())
    manifest["stages"]["evaluate"] = True
    store.save_manifest(run_id, manifest)
    log.info("evaluate: metrics written for run %s", run_id)


_STAGE_FNS = {
    "flatten": stage_flatten,
    "refine": stage_refine,
    "graph": stage_graph,
    "evaluate": stage_evaluate,
}


def run_pipeline(cfg: RunConfig) -> str:
    """Execute all stages, resuming whatever a previous run already finished."""
    store = RunStore(cfg.out_dir)
    with RunLock(cfg.out_dir):
        run_id = stage_scan(cfg, store)
        for name in ("flatten", "refine", "graph", "evaluate"):
            manifest = store.manifest(run_id)
            if manifest["stages"].get(name):
                log.info("%s: already complete, skipping", name)
                continue
            _STAGE_FNS[name](cfg, store, run_id)
    return run_id


def rerun_stage(cfg: RunConfig, store: RunStore, run_id: str, stage: str) -> None:
    """Re-execute one stage and invalidate everything downstream of it."""
    if stage not in _STAGE_FNS:
        raise DfkgError(f"unknown stage {stage!r}")
    manifest = store.manifest(run_id)
    order = list(STAGES)
    idx = order.index(stage)
    for later in order[idx:]:
        manifest["stages"][later] = False
    store.save_manifest(run_id, manifest)
    with RunLock(cfg.out_dir):
        _STAGE_FNS[stage](cfg, store, run_id)
