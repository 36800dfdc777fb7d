import json
import os
from pathlib import Path

import pytest

from dfkg.errors import LockHeld, StageNotReady
from dfkg.pipeline import (
    RunConfig,
    config_from_manifest,
    rerun_stage,
    run_pipeline,
    stage_flatten,
    stage_graph,
    stage_scan,
)
from dfkg.store import STAGES, RunLock, RunStore


@pytest.fixture(scope="module")
def image(demo_fixture):
    return demo_fixture


def _cfg(image, out):
    return RunConfig(
        image_root=image["image"],
        device_id=image["device"],
        out_dir=out,
        ground_truth=image["gt"],
    )


def test_run_pipeline_completes_all_stages(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    run_id = run_pipeline(cfg)
    store = RunStore(cfg.out_dir)
    manifest = store.manifest(run_id)
    assert all(manifest["stages"][s] for s in STAGES)
    for p in (
        store.databases_path(run_id),
        store.unified_path(run_id),
        store.evidence_path(run_id),
        store.graph_path(run_id),
        store.metrics_path(run_id),
    ):
        assert p.exists(), p


def test_run_id_is_content_addressed(image, tmp_path):
    a = run_pipeline(_cfg(image, tmp_path / "a"))
    b = run_pipeline(_cfg(image, tmp_path / "b"))
    assert a == b
    # a parameter change must land in a different run
    cfg = _cfg(image, tmp_path / "c")
    cfg.sample_interval = 3
    assert run_pipeline(cfg) != a


def test_rerun_is_resume_and_byte_stable(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    run_id = run_pipeline(cfg)
    store = RunStore(cfg.out_dir)
    before = store.graph_path(run_id).read_bytes()
    # second invocation sees finished stages and rewrites nothing
    mtime = store.graph_path(run_id).stat().st_mtime_ns
    assert run_pipeline(cfg) == run_id
    assert store.graph_path(run_id).stat().st_mtime_ns == mtime
    assert store.graph_path(run_id).read_bytes() == before


def test_stage_guards_reject_out_of_order_execution(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    store = RunStore(cfg.out_dir)
    run_id = stage_scan(cfg, store)
    with pytest.raises(StageNotReady):
        stage_graph(cfg, store, run_id)
    stage_flatten(cfg, store, run_id)
    with pytest.raises(StageNotReady):
        stage_graph(cfg, store, run_id)  # refine still missing


def test_rerun_stage_invalidates_downstream(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    run_id = run_pipeline(cfg)
    store = RunStore(cfg.out_dir)
    rerun_stage(cfg, store, run_id, "refine")
    manifest = store.manifest(run_id)
    assert manifest["stages"]["scan"] and manifest["stages"]["flatten"]
    assert manifest["stages"]["refine"]
    assert not manifest["stages"]["graph"]
    assert not manifest["stages"]["evaluate"]
    # finishing the run again restores every flag
    run_pipeline(cfg)
    manifest = store.manifest(run_id)
    assert all(manifest["stages"][s] for s in STAGES)


def test_config_round_trips_through_manifest(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    cfg.strict = True
    run_id = run_pipeline(cfg)
    store = RunStore(cfg.out_dir)
    back = config_from_manifest(store.manifest(run_id), cfg.out_dir)
    assert back == cfg


def test_lock_blocks_while_holder_is_alive(tmp_path):
    with RunLock(tmp_path):
        with pytest.raises(LockHeld):
            with RunLock(tmp_path):
                pass
    # released on exit
    with RunLock(tmp_path):
        pass


def test_lock_steals_from_dead_pid(tmp_path):
    lock = Path(tmp_path) / ".lock"
    # find a pid that cannot be alive
    dead = 2
    while True:
        try:
            os.kill(dead, 0)
        except ProcessLookupError:
            break
        except PermissionError:
            pass
        dead += 1
    lock.write_text(str(dead))
    with RunLock(tmp_path):
        assert lock.read_text() == str(os.getpid())


def test_evidence_timestamp_pinned_by_fixture_mtime(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    run_id = run_pipeline(cfg)
    manifest = RunStore(cfg.out_dir).manifest(run_id)
    assert manifest["evidence_timestamp"] == "2021-05-03T00:00:00+00:00"


def test_manifest_records_scan_inventory(image, tmp_path):
    cfg = _cfg(image, tmp_path / "runs")
    run_id = run_pipeline(cfg)
    store = RunStore(cfg.out_dir)
    refs = json.loads(store.databases_path(run_id).read_text(encoding="utf-8"))
    assert len(refs) == 7
    names = {r["database_name"] for r in refs}
    assert "pairings.jpg" in names  # signature match, not extension
    assert "notes.txt" not in names
