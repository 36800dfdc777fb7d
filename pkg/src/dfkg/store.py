"""Run-directory persistence.

One run = one directory under ``<data_dir>/runs/<run_id>`` holding every
stage output as a plain file plus a JSON manifest with stage completion
flags. Mutable review state (verdicts) lives in hypotheses.json with an
append-only audit log beside it.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict, List, Optional

from .errors import LockHeld, RunNotFound
from .evaluate import VerdictStore

STAGES = ("scan", "flatten", "refine", "graph", "evaluate")


class RunLock:
    """Exclusive lock over a data directory (single pipeline instance)."""

    def __init__(self, data_dir: Path):
        self.path = Path(data_dir) / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            try:
                pid = int(self.path.read_text().strip() or "0")
            except ValueError:
                pid = 0
            if pid and _pid_alive(pid):
                raise LockHeld(f"lock held by pid {pid}: {self.path}")
            self.path.unlink(missing_ok=True)  # stale lock from a dead process
        fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class RunStore:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.runs_root = self.data_dir / "runs"

    # -- directory layout ------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.runs_root / run_id

    def manifest_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "manifest.json"

    def databases_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "databases.json"

    def tables_dir(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "tables"

    def unified_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "unified_records.csv"

    def artifacts_dir(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "artifacts"

    def refine_audit_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "refine_audit.jsonl"

    def evidence_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "evidence_records.jsonl"

    def graph_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "graph.json"

    def hypotheses_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "hypotheses.json"

    def verdict_audit_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "verdict_audit.jsonl"

    def ground_truth_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "ground_truth.json"

    def metrics_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "metrics_report.json"

    # -- manifests ---------------------------------------------------------

    def exists(self, run_id: str) -> bool:
        return self.manifest_path(run_id).exists()

    def manifest(self, run_id: str) -> Dict:
        path = self.manifest_path(run_id)
        if not path.exists():
            raise RunNotFound(f"no run {run_id!r} under {self.runs_root}")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def save_manifest(self, run_id: str, manifest: Dict) -> None:
        self.run_dir(run_id).mkdir(parents=True, exist_ok=True)
        with open(self.manifest_path(run_id), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, ensure_ascii=False)
            fh.write("\n")

    def list_runs(self) -> List[Dict]:
        if not self.runs_root.is_dir():
            return []
        out = []
        for entry in sorted(self.runs_root.iterdir()):
            mpath = entry / "manifest.json"
            if mpath.exists():
                with open(mpath, encoding="utf-8") as fh:
                    out.append(json.load(fh))
        return out

    def latest_run_id(self) -> Optional[str]:
        runs = self.list_runs()
        if not runs:
            return None
        runs.sort(key=lambda m: (m.get("created_at", ""), m.get("run_id", "")))
        return runs[-1]["run_id"]

    # -- verdict state ----------------------------------------------------

    def append_verdict_audit(self, run_id: str, entry: dict) -> None:
        with open(self.verdict_audit_path(run_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def verdict_audit_entries(self, run_id: str) -> List[dict]:
        path = self.verdict_audit_path(run_id)
        if not path.exists():
            return []
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(json.loads(line))
        return entries

    def load_verdicts(self, run_id: str) -> VerdictStore:
        path = self.hypotheses_path(run_id)
        if not path.exists():
            raise RunNotFound(f"run {run_id!r} has no hypotheses yet")
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return VerdictStore.from_json_dict(
            obj, audit_sink=lambda e: self.append_verdict_audit(run_id, e)
        )

    def save_verdicts(self, run_id: str, store: VerdictStore) -> None:
        with open(self.hypotheses_path(run_id), "w", encoding="utf-8") as fh:
            json.dump(store.to_json_dict(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")
