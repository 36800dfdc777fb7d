import sqlite3

import pytest

from dfkg.errors import CorruptDatabase, RootNotFound, TableNotFound
from dfkg.ingest import SQLITE_MAGIC, enumerate_tables, fetch_row, read_rows, scan_image

from conftest import make_db


def test_scan_finds_databases_by_signature(tmp_path):
    make_db(tmp_path / "data" / "com.app.one" / "databases" / "a.db", {"t": (["c"], [(1,)])})
    # extension lies, header does not
    make_db(tmp_path / "data" / "com.app.two" / "files" / "cache.jpg", {"t": (["c"], [(1,)])})
    (tmp_path / "data" / "com.app.one" / "readme.txt").write_text("not a database")
    (tmp_path / "data" / "com.app.one" / "short").write_bytes(b"\x00\x01")

    refs = scan_image(tmp_path, "DEV")
    names = [(r.file_path, r.database_name) for r in refs]
    assert names == [
        ("/data/com.app.one/databases/", "a.db"),
        ("/data/com.app.two/files/", "cache.jpg"),
    ]
    for r in refs:
        assert r.device_id == "DEV"
        assert r.signature == "sqlite3"
        assert r.byte_size == r.local_path.stat().st_size


def test_scan_skips_wal_and_journal_sidecars(tmp_path):
    make_db(tmp_path / "a.db", {"t": (["c"], [(1,)])})
    (tmp_path / "a.db-wal").write_bytes(b"\x37\x7f\x06\x82" + b"\x00" * 64)
    (tmp_path / "a.db-journal").write_bytes(b"\xd9\xd5\x05\xf9\x20\xa1\x63\xd7" + b"\x00" * 64)
    refs = scan_image(tmp_path, "DEV")
    assert [r.database_name for r in refs] == ["a.db"]


def test_scan_root_files_get_slash_path(tmp_path):
    make_db(tmp_path / "root.db", {"t": (["c"], [(1,)])})
    refs = scan_image(tmp_path, "DEV")
    assert refs[0].file_path == "/"


def test_scan_missing_root(tmp_path):
    with pytest.raises(RootNotFound):
        scan_image(tmp_path / "nope", "DEV")


def test_scan_empty_root(tmp_path):
    assert scan_image(tmp_path, "DEV") == []


def test_enumerate_tables_sorted_without_internal(tmp_path):
    path = make_db(tmp_path / "m.db", {"zeta": (["c"], []), "Alpha": (["c"], [])})
    con = sqlite3.connect(path)
    con.execute("CREATE INDEX idx_c ON zeta(c)")  # forces sqlite_autoindex-ish entries
    con.commit()
    con.close()
    refs = scan_image(tmp_path, "DEV")
    tables = enumerate_tables(refs[0])
    assert tables == sorted(tables)
    assert set(tables) == {"Alpha", "zeta"}


def test_enumerate_tables_corrupt_database(tmp_path):
    bad = tmp_path / "bad.db"
    bad.write_bytes(SQLITE_MAGIC + b"\xff" * 400)
    refs = scan_image(tmp_path, "DEV")
    assert len(refs) == 1
    with pytest.raises(CorruptDatabase):
        enumerate_tables(refs[0])


def test_read_rows_one_based_physical_order(tmp_path):
    make_db(tmp_path / "m.db", {"t": (["a", "b"], [(10, "x"), (20, "y"), (30, None)])})
    refs = scan_image(tmp_path, "DEV")
    rows = list(read_rows(refs[0], "t"))
    assert [r.row_index for r in rows] == [1, 2, 3]
    assert rows[0].cells == [("a", 10), ("b", "x")]
    assert rows[2].cells == [("a", 30), ("b", None)]


def test_read_rows_unknown_table(tmp_path):
    make_db(tmp_path / "m.db", {"t": (["a"], [])})
    refs = scan_image(tmp_path, "DEV")
    with pytest.raises(TableNotFound):
        list(read_rows(refs[0], "missing"))


def test_fetch_row_matches_scan_ordinal(tmp_path):
    make_db(tmp_path / "m.db", {"t": (["a"], [(i,) for i in range(5)])})
    refs = scan_image(tmp_path, "DEV")
    row = fetch_row(refs[0], "t", 4)
    assert row is not None
    assert row.row_index == 4
    assert row.cells == [("a", 3)]


def test_source_opened_read_only(tmp_path):
    path = make_db(tmp_path / "m.db", {"t": (["a"], [(1,)])})
    before = path.read_bytes()
    refs = scan_image(tmp_path, "DEV")
    list(read_rows(refs[0], "t"))
    enumerate_tables(refs[0])
    assert path.read_bytes() == before
