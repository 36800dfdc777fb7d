"""Signature-based discovery of SQLite databases inside a mounted image tree.

Detection relies on the 16-byte file header, never on the file extension, so
renamed databases (e.g. a ``.jpg`` that is really SQLite) are still picked up.
WAL/journal sidecars are not databases and are skipped by the same check.
"""

from __future__ import annotations

import logging
import sqlite3
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

from .errors import CorruptDatabase, RootNotFound, TableNotFound

log = logging.getLogger(__name__)

# First 16 bytes of every well-formed SQLite 3 main database file.
SQLITE_MAGIC = b"SQLite format 3\x00"


@dataclass(frozen=True)
class DatabaseRef:
    """One discovered database.

    ``file_path`` is the image-relative directory of the file written with a
    leading and trailing slash ("/data/com.whatsapp/databases/"); together
    with ``database_name`` it anchors every UID minted from this database.
    ``local_path`` is the on-disk location used to open the file and is not
    part of the serialized manifest.
    """

    device_id: str
    file_path: str
    database_name: str
    byte_size: int
    signature: str
    local_path: Optional[Path] = field(default=None, compare=False, repr=False)

    def manifest_entry(self) -> dict:
        return {
            "device_id": self.device_id,
            "file_path": self.file_path,
            "database_name": self.database_name,
            "byte_size": self.byte_size,
            "signature": self.signature,
        }


@dataclass
class RawRow:
    """A physical row: 1-based scan ordinal plus ordered (column, value) cells."""

    table: str
    row_index: int
    cells: List[Tuple[str, object]]


def _rel_dir(root: Path, file: Path) -> str:
    rel = file.parent.relative_to(root).as_posix()
    if rel == ".":
        return "/"
    return "/" + rel + "/"


def scan_image(root: Path, device_id: str) -> List[DatabaseRef]:
    """Walk ``root`` and return every file whose header is the SQLite magic.

    Results are ordered lexicographically by (file_path, database_name) so
    repeated scans of the same tree are identical. Unreadable files are
    logged as warnings and skipped, never fatal.
    """
    root = Path(root)
    if not root.is_dir():
        raise RootNotFound(f"image root not found: {root}")

    refs: List[DatabaseRef] = []
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        try:
            with open(path, "rb") as fh:
                header = fh.read(16)
        except OSError as exc:
            log.warning("unreadable file skipped: %s (%s)", path, exc)
            continue
        if header != SQLITE_MAGIC:
            continue
        refs.append(
            DatabaseRef(
                device_id=device_id,
                file_path=_rel_dir(root, path),
                database_name=path.name,
                byte_size=path.stat().st_size,
                signature="sqlite3",
                local_path=path,
            )
        )
    refs.sort(key=lambda r: (r.file_path, r.database_name))
    return refs


def _connect_ro(path: Path) -> sqlite3.Connection:
    # immutable=1 keeps sqlite from touching WAL/journal sidecars on open.
    quoted = urllib.parse.quote(str(path))
    return sqlite3.connect(f"file:{quoted}?mode=ro&immutable=1", uri=True)


def enumerate_tables(db: DatabaseRef) -> List[str]:
    """List user tables in deterministic (sorted) order.

    Internal ``sqlite_*`` tables are excluded. Raises CorruptDatabase when
    the file carries the magic header but the page structure is unreadable.
    """
    if db.local_path is None:
        raise CorruptDatabase(f"no local path recorded for {db.database_name}")
    try:
        con = _connect_ro(db.local_path)
        try:
            rows = con.execute(
                "SELECT name FROM sqlite_master WHERE type='table'"
            ).fetchall()
        finally:
            con.close()
    except sqlite3.Error as exc:
        raise CorruptDatabase(f"{db.file_path}{db.database_name}: {exc}") from exc
    names = [r[0] for r in rows if not r[0].startswith("sqlite_")]
    return sorted(names)


def read_rows(
    db: DatabaseRef, table: str, skip_log: Optional[list] = None
) -> Iterator[RawRow]:
    """Stream rows of ``table`` with 1-based ordinals in physical scan order.

    Cell values keep their storage class (str/int/float/bytes/None).
    A row that cannot be materialized is appended to ``skip_log`` and the
    remainder of the table is abandoned (the cursor is unusable past a
    damaged page).
    """
    if db.local_path is None:
        raise CorruptDatabase(f"no local path recorded for {db.database_name}")
    try:
        con = _connect_ro(db.local_path)
    except sqlite3.Error as exc:
        raise CorruptDatabase(f"{db.file_path}{db.database_name}: {exc}") from exc
    try:
        names = {
            r[0]
            for r in con.execute("SELECT name FROM sqlite_master WHERE type='table'")
        }
        if table not in names:
            raise TableNotFound(f"{db.database_name} has no table {table!r}")
        cur = con.execute(f'SELECT * FROM "{table}"')
        columns = [d[0] for d in cur.description]
        index = 0
        while True:
            try:
                row = cur.fetchone()
            except sqlite3.Error as exc:
                log.warning("row skipped in %s.%s: %s", db.database_name, table, exc)
                if skip_log is not None:
                    skip_log.append((table, index + 1, str(exc)))
                break
            if row is None:
                break
            index += 1
            yield RawRow(table=table, row_index=index, cells=list(zip(columns, row)))
    finally:
        con.close()


def fetch_row(db: DatabaseRef, table: str, row_index: int) -> Optional[RawRow]:
    """Re-fetch a single row by its scan ordinal (traceability round trips)."""
    for raw in read_rows(db, table):
        if raw.row_index == row_index:
            return raw
    return None
