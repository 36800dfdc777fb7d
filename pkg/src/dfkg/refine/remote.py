"""HTTP-backed refinement engine (chat-completion style endpoint).

The engine never blocks the pipeline: a batch that still fails after the
retry budget is logged as unrefined and skipped. Every exchange is appended
verbatim to an audit log so refinement provenance can be reviewed later.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from ..flatten import FlatRecord
from .artifacts import RefinedArtifact
from .prompting import ParseWarning, build_prompt, parse_refinement

log = logging.getLogger(__name__)

ENGINE_NAME = "remote"
TOKEN_ENV = "DFKG_ENGINE_TOKEN"

# (status_code, body_text)
PostFn = Callable[[str, dict, dict], Tuple[int, str]]


def _default_post(url: str, headers: dict, body: dict) -> Tuple[int, str]:
    import httpx

    resp = httpx.post(url, headers=headers, json=body, timeout=120.0)
    return resp.status_code, resp.text


@dataclass
class RemoteEngineConfig:
    endpoint: str
    model: str = "gpt-4"
    token_env: str = TOKEN_ENV
    batch_size: int = 40
    max_in_flight: int = 4
    retries: int = 3
    backoff_base: float = 0.5
    audit_path: Optional[Path] = None
    post_fn: PostFn = field(default=_default_post, repr=False)


class RemoteEngine:
    """Batched, bounded-concurrency client for a remote refinement endpoint."""

    name = ENGINE_NAME

    def __init__(self, config: RemoteEngineConfig):
        self.config = config
        self.warnings: List[ParseWarning] = []
        self.unrefined_uids: List[str] = []

    # -- audit ---------------------------------------------------------

    def _audit(self, uids: Sequence[str], status: str, response: str) -> None:
        if self.config.audit_path is None:
            return
        entry = {
            "ts": datetime.now(timezone.utc).isoformat(),
            "uids": list(uids),
            "status": status,
            "response": response,
        }
        with open(self.config.audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    # -- transport -----------------------------------------------------

    def _call_once(self, prompt: str) -> Tuple[int, str]:
        token = os.environ.get(self.config.token_env, "")
        headers = {"Content-Type": "application/json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        return self.config.post_fn(self.config.endpoint, headers, body)

    @staticmethod
    def _extract_content(body_text: str) -> str:
        """Pull the completion text out of a chat-style response envelope."""
        try:
            payload = json.loads(body_text)
            return payload["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            # Some endpoints return raw text; parse it as-is.
            return body_text

    def _refine_chunk(self, chunk: Sequence[FlatRecord]) -> List[RefinedArtifact]:
        prompt = build_prompt(chunk)
        uids = [r.uid for r in chunk]
        delay = self.config.backoff_base
        last_err = ""
        for attempt in range(1, self.config.retries + 1):
            try:
                status, text = self._call_once(prompt)
            except Exception as exc:
                last_err = str(exc)
                status, text = 0, ""
            if status == 200:
                self._audit(uids, "ok", text)
                artifacts, warnings = parse_refinement(
                    self._extract_content(text), set(uids), engine=self.name
                )
                self.warnings.extend(warnings)
                return artifacts
            last_err = last_err or f"HTTP {status}"
            log.warning(
                "engine call failed (attempt %d/%d): %s",
                attempt,
                self.config.retries,
                last_err,
            )
            if attempt < self.config.retries:
                time.sleep(delay)
                delay *= 2
        self._audit(uids, f"failed: {last_err}", "")
        self.unrefined_uids.extend(uids)
        log.warning("batch of %d records left unrefined: %s", len(uids), last_err)
        return []

    # -- public contract -------------------------------------------------

    def refine(self, batch: Sequence[FlatRecord]) -> List[RefinedArtifact]:
        """Refine records in bounded-concurrency chunks.

        Results are merged in deterministic (uid, type, value) order so the
        scheduling of chunks can never change downstream output.
        """
        size = max(1, self.config.batch_size)
        chunks = [batch[i : i + size] for i in range(0, len(batch), size)]
        artifacts: List[RefinedArtifact] = []
        if not chunks:
            return artifacts
        with ThreadPoolExecutor(max_workers=max(1, self.config.max_in_flight)) as pool:
            for result in pool.map(self._refine_chunk, chunks):
                artifacts.extend(result)
        artifacts.sort(key=lambda a: (a.uid, a.entity_type.value, a.refined_value))
        return artifacts
