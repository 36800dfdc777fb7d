import shutil
import sqlite3
from pathlib import Path

import pytest

from dfkg.fixtures import (
    DEMO_DEVICE,
    RELATION_DEVICE,
    build_demo_image,
    build_relationship_image,
)
from dfkg.pipeline import RunConfig, run_pipeline
from dfkg.store import RunStore


def make_db(path: Path, tables: dict) -> Path:
    """tables: {name: (columns, rows)}; columns are untyped (blob affinity)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    con = sqlite3.connect(path)
    try:
        for name, (cols, rows) in tables.items():
            col_defs = ", ".join(f'"{c}"' for c in cols)
            con.execute(f'CREATE TABLE "{name}" ({col_defs})')
            if rows:
                marks = ",".join("?" * len(cols))
                con.executemany(f'INSERT INTO "{name}" VALUES ({marks})', rows)
        con.commit()
    finally:
        con.close()
    return path


@pytest.fixture(scope="session")
def demo_fixture(tmp_path_factory):
    dest = tmp_path_factory.mktemp("demo_fx")
    image = build_demo_image(dest)
    return {"image": image, "gt": dest / "ground_truth.json", "device": DEMO_DEVICE}


@pytest.fixture(scope="session")
def demo_run(demo_fixture, tmp_path_factory):
    out = tmp_path_factory.mktemp("demo_out")
    cfg = RunConfig(
        image_root=demo_fixture["image"],
        device_id=demo_fixture["device"],
        out_dir=out,
        ground_truth=demo_fixture["gt"],
    )
    run_id = run_pipeline(cfg)
    return dict(demo_fixture, out=out, run_id=run_id, store=RunStore(out))


@pytest.fixture(scope="session")
def relations_fixture(tmp_path_factory):
    dest = tmp_path_factory.mktemp("rel_fx")
    image = build_relationship_image(dest)
    return {"image": image, "gt": dest / "ground_truth.json", "device": RELATION_DEVICE}


@pytest.fixture(scope="session")
def relations_run(relations_fixture, tmp_path_factory):
    out = tmp_path_factory.mktemp("rel_out")
    cfg = RunConfig(
        image_root=relations_fixture["image"],
        device_id=relations_fixture["device"],
        out_dir=out,
        sample_interval=1,
        ground_truth=relations_fixture["gt"],
    )
    run_id = run_pipeline(cfg)
    return dict(relations_fixture, out=out, run_id=run_id, store=RunStore(out))


@pytest.fixture
def relations_run_copy(relations_run, tmp_path):
    """Writable clone of the relationship run for verdict-mutating tests."""
    out = tmp_path / "data"
    shutil.copytree(relations_run["out"], out)
    clone = dict(relations_run)
    clone["out"] = out
    clone["store"] = RunStore(out)
    return clone
