"""Operator entry point.

Subcommands map one-to-one onto pipeline stages plus `run` (everything),
`serve` (HTTP API), and `fixture-gen` (synthetic images with ground truth).
Logs go to stderr; the only stdout output is the run id or, for
fixture-gen, a small JSON description of what was written.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import fixtures
from .errors import DfkgError, RunNotFound
from .flatten import DEFAULT_DENYLIST, DEFAULT_SAMPLE_INTERVAL
from .pipeline import RunConfig, config_from_manifest, rerun_stage, run_pipeline, stage_scan
from .refine.timestamps import DEFAULT_ZONE
from .store import RunLock, RunStore

log = logging.getLogger(__name__)


def _interval(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("sample interval must be >= 1")
    return value


def _confidence(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 10:
        raise argparse.ArgumentTypeError("confidence threshold must be in 1..10")
    return value


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--root", required=True, type=Path, help="device image root directory")
    p.add_argument("--device-id", required=True, help="device identifier baked into every uid")
    p.add_argument("--out", required=True, type=Path, help="data directory for run output")
    p.add_argument("--sample-interval", type=_interval, default=DEFAULT_SAMPLE_INTERVAL)
    p.add_argument("--min-confidence", type=_confidence, default=5)
    p.add_argument("--engine", choices=("mock", "remote"), default="mock")
    p.add_argument("--endpoint", default=None, help="remote engine chat-completions URL")
    p.add_argument("--model", default="gpt-4")
    p.add_argument("--zone", default=DEFAULT_ZONE, help="IANA zone for timestamp rendering")
    p.add_argument(
        "--deny",
        action="append",
        default=None,
        metavar="PREFIX",
        help="system-app path prefix to exclude; repeatable, replaces the default list",
    )
    p.add_argument("--no-denylist", action="store_true", help="disable system-app exclusion")
    p.add_argument("--ground-truth", type=Path, default=None)
    p.add_argument("--batch-size", type=int, default=40)
    p.add_argument("--max-in-flight", type=int, default=4)
    p.add_argument("--strict", action="store_true", help="count unreviewed connections against KGCA")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.no_denylist:
        denylist: tuple = ()
    elif args.deny is not None:
        denylist = tuple(args.deny)
    else:
        denylist = DEFAULT_DENYLIST
    return RunConfig(
        image_root=args.root,
        device_id=args.device_id,
        out_dir=args.out,
        sample_interval=args.sample_interval,
        min_confidence=args.min_confidence,
        engine=args.engine,
        endpoint=args.endpoint,
        model=args.model,
        zone=args.zone,
        denylist=denylist,
        ground_truth=args.ground_truth,
        batch_size=args.batch_size,
        max_in_flight=args.max_in_flight,
        strict=args.strict,
    )


def _resolve_run(store: RunStore, run_id: Optional[str]) -> str:
    if run_id:
        return run_id
    latest = store.latest_run_id()
    if latest is None:
        raise RunNotFound(f"no runs under {store.data_dir}")
    return latest


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    store = RunStore(cfg.out_dir)
    with RunLock(cfg.out_dir):
        run_id = stage_scan(cfg, store)
    if args.manifest:
        args.manifest.parent.mkdir(parents=True, exist_ok=True)
        args.manifest.write_bytes(store.databases_path(run_id).read_bytes())
    print(run_id)
    return 0


def cmd_stage(args: argparse.Namespace) -> int:
    store = RunStore(args.out)
    run_id = _resolve_run(store, args.run_id)
    manifest = store.manifest(run_id)
    cfg = config_from_manifest(manifest, args.out)

    if args.cmd == "evaluate":
        dirty = False
        if args.ground_truth is not None:
            cfg = replace(cfg, ground_truth=args.ground_truth)
            manifest["ground_truth"] = str(args.ground_truth)
            dirty = True
        if args.strict:
            cfg = replace(cfg, strict=True)
            manifest["strict"] = True
            dirty = True
        if dirty:
            store.save_manifest(run_id, manifest)

    rerun_stage(cfg, store, run_id, args.cmd)
    print(run_id)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    run_id = run_pipeline(_config_from_args(args))
    print(run_id)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_fixture_gen(args: argparse.Namespace) -> int:
    dest = args.dest
    if args.kind == "demo":
        image = fixtures.build_demo_image(dest, zone=args.zone)
        device_id = fixtures.DEMO_DEVICE
        interval = DEFAULT_SAMPLE_INTERVAL
    else:
        image = fixtures.build_relationship_image(dest, zone=args.zone)
        device_id = fixtures.RELATION_DEVICE
        interval = 1
    print(
        json.dumps(
            {
                "kind": args.kind,
                "image_root": str(image),
                "ground_truth": str(Path(dest) / "ground_truth.json"),
                "device_id": device_id,
                "sample_interval": interval,
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfkg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("scan", help="discover databases and open a run")
    _add_config_flags(p)
    p.add_argument("--manifest", type=Path, default=None, help="also copy databases.json here")
    p.set_defaults(func=cmd_scan)

    for name, help_text in (
        ("flatten", "flatten and sample scanned databases"),
        ("refine", "extract artifacts from flattened records"),
        ("graph", "consolidate artifacts and build the knowledge graph"),
        ("evaluate", "score the run and write the metrics report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--run-id", default=None, help="defaults to the newest run")
        if name == "evaluate":
            p.add_argument("--ground-truth", type=Path, default=None)
            p.add_argument("--strict", action="store_true")
        p.set_defaults(func=cmd_stage)

    p = sub.add_parser("run", help="run every stage end to end")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="serve stored runs over HTTP")
    p.add_argument("--data-dir", required=True, type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui-dir", type=Path, default=None, help="static review UI directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("fixture-gen", help="write a synthetic image plus ground truth")
    p.add_argument("--dest", required=True, type=Path)
    p.add_argument("--kind", choices=("demo", "relations"), default="demo")
    p.add_argument("--zone", default=DEFAULT_ZONE)
    p.set_defaults(func=cmd_fixture_gen)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DfkgError as exc:
        print(f"error [{args.cmd}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
