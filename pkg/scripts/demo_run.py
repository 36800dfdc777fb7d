#!/usr/bin/env python3
"""Build the bundled demo image, run the whole pipeline on it, print results.

Writes everything under --workdir (default: a fresh temp directory) and
leaves the run in place so `dfkg serve --data-dir <workdir>/data` can browse
it afterwards.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dfkg.fixtures import DEMO_DEVICE, RELATION_DEVICE, build_demo_image, build_relationship_image
from dfkg.pipeline import RunConfig, run_pipeline
from dfkg.store import RunStore


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=None)
    parser.add_argument("--kind", choices=("demo", "relations"), default="demo")
    args = parser.parse_args(argv)

    workdir = args.workdir or Path(tempfile.mkdtemp(prefix="dfkg-demo-"))
    fixture_dir = workdir / "fixture"
    if args.kind == "demo":
        image = build_demo_image(fixture_dir)
        device, interval = DEMO_DEVICE, None
    else:
        image = build_relationship_image(fixture_dir)
        device, interval = RELATION_DEVICE, 1

    cfg = RunConfig(
        image_root=image,
        device_id=device,
        out_dir=workdir / "data",
        ground_truth=fixture_dir / "ground_truth.json",
        **({"sample_interval": interval} if interval else {}),
    )
    run_id = run_pipeline(cfg)

    store = RunStore(cfg.out_dir)
    report = json.loads(store.metrics_path(run_id).read_text(encoding="utf-8"))
    graph = json.loads(store.graph_path(run_id).read_text(encoding="utf-8"))
    print(f"run_id     {run_id}")
    print(f"data dir   {cfg.out_dir}")
    print(f"nodes      {len(graph['nodes'])}")
    print(f"edges      {len(graph['edges'])}")
    for name, value in report["metrics"].items():
        print(f"{name:<10} {value}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
