"""Row flattening and the UID scheme that anchors chain of custody.

Every flattened record carries a UID built from the SHA-256 of the device id,
image-relative directory and database filename (first 8 hex digits), joined
with the table name and the 1-based row ordinal:

    9f97eac5_UserStore_114

The hash input is the direct UTF-8 concatenation of the three strings with no
separator. Recomputing the UID from a stored record's source coordinates and
comparing is the custody check used throughout.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import InvalidParts
from .ingest import DatabaseRef, RawRow

UID_RE = re.compile(r"^[0-9a-f]{8}_.+_[0-9]+$")

# Packages whose stores hold platform configuration rather than user activity.
# Deliberately narrower than "com.android.*": user-facing system apps such as
# com.android.chrome must stay in scope.
DEFAULT_DENYLIST: Tuple[str, ...] = (
    "com.android.providers.",
    "com.android.settings",
    "com.android.systemui",
    "com.android.server.",
    "com.google.android.gms",
    "com.google.android.gsf",
    "android",
)

DEFAULT_SAMPLE_INTERVAL = 6


@dataclass(frozen=True)
class UIDParts:
    device_id: str
    file_path: str
    database_name: str
    table_name: str
    lid: int


def make_uid(parts: UIDParts) -> str:
    """Mint the UID for one row. Pure function of its parts."""
    if not parts.device_id or not parts.file_path or not parts.database_name:
        raise InvalidParts("device_id, file_path and database_name must be non-empty")
    if not parts.table_name:
        raise InvalidParts("table_name must be non-empty")
    if parts.lid < 1:
        raise InvalidParts(f"lid must be >= 1, got {parts.lid}")
    blob = (parts.device_id + parts.file_path + parts.database_name).encode("utf-8")
    prefix = hashlib.sha256(blob).hexdigest()[:8]
    return f"{prefix}_{parts.table_name}_{parts.lid}"


@dataclass
class FlatRecord:
    """One flattened row: source coordinates, UID, and ordered column pairs."""

    database: str
    table: str
    path: str
    uid: str
    lid: int
    pairs: Dict[str, str]  # insertion order == native column order


def render_cell(value: object) -> str:
    """Render one storage-class value to its flat string form.

    Nulls become empty strings, numerics their canonical decimal text, and
    blobs keep printable ASCII while escaping every other byte as lowercase
    ``\\xNN``.
    """
    if value is None:
        return ""
    if isinstance(value, bytes):
        out = []
        for b in value:
            if 0x20 <= b <= 0x7E:
                out.append(chr(b))
            else:
                out.append(f"\\x{b:02x}")
        return "".join(out)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def flatten_table(db: DatabaseRef, table: str, rows: Iterable[RawRow]) -> List[FlatRecord]:
    """Flatten streamed rows of one table into uniform records."""
    records: List[FlatRecord] = []
    for raw in rows:
        uid = make_uid(
            UIDParts(
                device_id=db.device_id,
                file_path=db.file_path,
                database_name=db.database_name,
                table_name=table,
                lid=raw.row_index,
            )
        )
        pairs = {col: render_cell(val) for col, val in raw.cells}
        records.append(
            FlatRecord(
                database=db.database_name,
                table=table,
                path=db.file_path,
                uid=uid,
                lid=raw.row_index,
                pairs=pairs,
            )
        )
    return records


def _denylisted(path: str, denylist: Sequence[str]) -> bool:
    if not denylist:
        return False
    segments = [s for s in path.split("/") if s]
    for entry in denylist:
        if not entry:
            continue
        if path.startswith(entry):
            return True
        if any(seg.startswith(entry) for seg in segments):
            return True
    return False


def unify(
    records: Sequence[FlatRecord],
    sample_interval: int = DEFAULT_SAMPLE_INTERVAL,
    denylist: Sequence[str] = DEFAULT_DENYLIST,
) -> List[FlatRecord]:
    """Apply the exclusion denylist, then keep every k-th record.

    Exclusion happens first so denylisted records never shift the sampling
    phase. Kept positions are 1, 1+k, 1+2k, ... over the surviving records in
    stable input order. ``sample_interval`` must be a positive integer.
    """
    if sample_interval < 1:
        raise ValueError(f"sample_interval must be >= 1, got {sample_interval}")
    in_scope = [r for r in records if not _denylisted(r.path, denylist)]
    return [r for i, r in enumerate(in_scope) if i % sample_interval == 0]


class RecordIndex:
    """uid -> FlatRecord lookup plus the custody recompute for one device."""

    def __init__(self, device_id: str, records: Iterable[FlatRecord]):
        self.device_id = device_id
        self._by_uid: Dict[str, FlatRecord] = {}
        for r in records:
            self._by_uid[r.uid] = r

    def __len__(self) -> int:
        return len(self._by_uid)

    def __contains__(self, uid: str) -> bool:
        return uid in self._by_uid

    def resolve(self, uid: str) -> Optional[FlatRecord]:
        return self._by_uid.get(uid)

    def verify(self, uid: str) -> bool:
        """True when the stored record still re-derives its own UID."""
        rec = self._by_uid.get(uid)
        if rec is None:
            return False
        derived = make_uid(
            UIDParts(
                device_id=self.device_id,
                file_path=rec.path,
                database_name=rec.database,
                table_name=rec.table,
                lid=rec.lid,
            )
        )
        return derived == uid

    def records(self) -> List[FlatRecord]:
        return list(self._by_uid.values())


# ---------------------------------------------------------------------------
# CSV serialization. Both writers emit RFC-4180 CSV, UTF-8, LF line endings.
# ---------------------------------------------------------------------------

FIXED_COLUMNS = ["database", "table", "path", "uid", "lid"]


def _open_csv(path: Path):
    return open(path, "w", encoding="utf-8", newline="")


def write_table_csv(path: Path, records: Sequence[FlatRecord]) -> None:
    """Per-table CSV: fixed columns followed by the table's native columns."""
    native: List[str] = []
    for r in records:
        for col in r.pairs:
            if col not in native:
                native.append(col)
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIXED_COLUMNS + native)
        for r in records:
            w.writerow(
                [r.database, r.table, r.path, r.uid, r.lid]
                + [r.pairs.get(c, "") for c in native]
            )


def write_unified_csv(path: Path, records: Sequence[FlatRecord]) -> None:
    """Unified CSV with a JSON ``pairs`` column preserving column order."""
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIXED_COLUMNS + ["pairs"])
        for r in records:
            w.writerow(
                [
                    r.database,
                    r.table,
                    r.path,
                    r.uid,
                    r.lid,
                    json.dumps(r.pairs, ensure_ascii=False),
                ]
            )


def read_unified_csv(path: Path) -> List[FlatRecord]:
    records: List[FlatRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(
                FlatRecord(
                    database=row["database"],
                    table=row["table"],
                    path=row["path"],
                    uid=row["uid"],
                    lid=int(row["lid"]),
                    pairs=json.loads(row["pairs"]),
                )
            )
    return records


def table_csv_name(records: Sequence[FlatRecord]) -> str:
    """Stable filename for a table's CSV: UID hash prefix + table name."""
    first = records[0]
    prefix = first.uid.split("_", 1)[0]
    safe_table = re.sub(r"[^A-Za-z0-9_.-]", "_", first.table)
    return f"{prefix}_{safe_table}.csv"
