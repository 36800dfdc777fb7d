"""Synthetic device images with known ground truth.

Two generators:

* ``build_demo_image``: a small multi-app image planting seven artifacts of
  seven different entity types (obfuscated email blob, protobuf-wrapped
  epoch, phone blob, truncated JSON name, browser search title, MAC address,
  package path), plus a denylisted settings decoy and a signature-detectable
  database renamed to ``.jpg``. Planted rows are positioned to survive
  interval-6 sampling: every in-scope table holds a multiple of 6 rows and
  planted rows sit at in-table positions of 1 mod 6.

* ``build_relationship_image``: 72 rows, each yielding exactly one related
  artifact pair, spread over the full relationship taxonomy. Four instances
  (two timestamp-app, two email-app, all mislinked to Twitter) are excluded
  from ground truth so reviewers have something real to mark invalid. Run
  this one with sample interval 1.

File mtimes are pinned so repeated generation is byte-for-byte stable.
"""

from __future__ import annotations

import os
import sqlite3
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Tuple
from zoneinfo import ZoneInfo

from .evaluate import GroundTruth, GtArtifact, GtRelation, save_ground_truth
from .flatten import UIDParts, make_uid
from .refine.artifacts import EntityType
from .refine.timestamps import DEFAULT_ZONE, normalize_timestamp

FIXED_MTIME = 1620000000  # 2021-05-03T00:53:20Z

DEMO_DEVICE = "HEISENBERG-NOTE10"
RELATION_DEVICE = "RELATION-STUDY-01"


def _write_db(path: Path, tables: Dict[str, Tuple[List[str], List[tuple]]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        path.unlink()
    con = sqlite3.connect(path)
    try:
        for name, (cols, rows) in tables.items():
            col_defs = ", ".join(f'"{c}"' for c in cols)
            con.execute(f'CREATE TABLE "{name}" ({col_defs})')
            marks = ",".join("?" * len(cols))
            con.executemany(f'INSERT INTO "{name}" VALUES ({marks})', rows)
        con.commit()
    finally:
        con.close()
    os.utime(path, (FIXED_MTIME, FIXED_MTIME))


def _uid(device: str, path: str, db: str, table: str, lid: int) -> str:
    return make_uid(UIDParts(device, path, db, table, lid))


# ---------------------------------------------------------------------------
# Demo image (seven planted artifacts)
# ---------------------------------------------------------------------------

EMAIL_BLOB = b"a\x19heisenbergercarro@gmail.com\x0b\x00pro"
PHONE_BLOB = b"n\x0c+16506808040\x12\t\n\x01"
TS_BLOB = b'\x03\x0f"1617477858090"\xe2\x03'
NAME_FRAGMENT = 'ull_name":"Marsha Mellos","pro'
SEARCH_TITLE = "hidden photos apps - Google Search"
MAC_VALUE = "34:C7:31:F8:61:3B"
DPATH_VALUE = "/data/user/0/com.instagram.android/databases/direct.db"


def build_demo_image(dest: Path, zone: str = DEFAULT_ZONE) -> Path:
    """Write the demo image tree plus its ground_truth.json; returns image root."""
    dest = Path(dest)
    image = dest / "image"
    data = image / "data"

    history_rows = [(SEARCH_TITLE, "r1")] + [
        (f"chrome page {i}", f"r{i}") for i in range(2, 13)
    ]
    _write_db(
        data / "com.android.chrome" / "databases" / "history.db",
        {"history": (["title", "note"], history_rows)},
    )

    # Denylisted decoy: would contribute an email artifact if exclusion broke.
    settings_rows = [(f"pref{i}", "decoy.email@example.com") for i in range(1, 6)]
    _write_db(
        data / "com.android.settings" / "databases" / "settings.db",
        {"prefs": (["name", "value"], settings_rows)},
    )

    doc_rows = [(TS_BLOB, "r1")] + [(b"\x08\x96\x01", f"r{i}") for i in range(2, 7)]
    _write_db(
        data / "com.google.android.apps.docs" / "databases" / "drive.db",
        {"DocEvents": (["proto", "note"], doc_rows)},
    )

    media_rows = [(DPATH_VALUE, "r1")] + [
        (f"/storage/emulated/0/pictures/img{i}.jpg", f"r{i}") for i in range(2, 7)
    ]
    _write_db(
        data / "com.instagram.android" / "databases" / "insta.db",
        {"media": (["DPath", "note"], media_rows)},
    )

    # Magic-header database renamed to .jpg: must still be discovered.
    bt_rows = [(MAC_VALUE, "r1")] + [(f"device {i}", f"r{i}") for i in range(2, 7)]
    _write_db(
        data / "com.samsung.bluetooth" / "databases" / "pairings.jpg",
        {"bt_history": (["address", "note"], bt_rows)},
    )

    friend_rows = [(PHONE_BLOB, "r1")] + [
        (b"pad" + bytes([i]), f"r{i}") for i in range(2, 7)
    ]
    user_rows = [(EMAIL_BLOB, "r1")] + [
        (b"profile" + bytes([i]), f"r{i}") for i in range(2, 13)
    ]
    _write_db(
        data / "com.snapchat.android" / "databases" / "core.db",
        {
            "Friend": (["blobVal", "note"], friend_rows),
            "UserStore": (["realVal", "note"], user_rows),
        },
    )

    tw_rows = [(NAME_FRAGMENT, "r1")] + [
        ('{"bio":"row %d"}' % i, f"r{i}") for i in range(2, 7)
    ]
    _write_db(
        data / "com.twitter.android" / "databases" / "twitter.db",
        {"users": (["Data", "note"], tw_rows)},
    )

    notes = image / "notes.txt"
    notes.write_text("acquisition scratch file, not a database\n", encoding="utf-8")
    os.utime(notes, (FIXED_MTIME, FIXED_MTIME))

    ts_text = normalize_timestamp(1617477858090, unit="ms", zone=zone)
    gt = GroundTruth(
        artifacts=[
            GtArtifact(
                EntityType.EMAIL,
                "heisenbergercarro@gmail.com",
                _uid(DEMO_DEVICE, "/data/com.snapchat.android/databases/", "core.db", "UserStore", 1),
            ),
            GtArtifact(
                EntityType.TIMESTAMP,
                ts_text,
                _uid(DEMO_DEVICE, "/data/com.google.android.apps.docs/databases/", "drive.db", "DocEvents", 1),
            ),
            GtArtifact(
                EntityType.PHONE_NUMBER,
                "+16506808040",
                _uid(DEMO_DEVICE, "/data/com.snapchat.android/databases/", "core.db", "Friend", 1),
            ),
            GtArtifact(
                EntityType.HUMAN_NAME,
                "Marsha Mellos",
                _uid(DEMO_DEVICE, "/data/com.twitter.android/databases/", "twitter.db", "users", 1),
            ),
            GtArtifact(
                EntityType.SEARCH_KEYWORD,
                "hidden photos apps",
                _uid(DEMO_DEVICE, "/data/com.android.chrome/databases/", "history.db", "history", 1),
            ),
            GtArtifact(
                EntityType.MAC_ADDRESS,
                MAC_VALUE,
                _uid(DEMO_DEVICE, "/data/com.samsung.bluetooth/databases/", "pairings.jpg", "bt_history", 1),
            ),
            GtArtifact(
                EntityType.APP_NAME,
                "Instagram",
                _uid(DEMO_DEVICE, "/data/com.instagram.android/databases/", "insta.db", "media", 1),
            ),
        ],
        relationships=[],
    )
    save_ground_truth(dest / "ground_truth.json", gt)
    return image


# ---------------------------------------------------------------------------
# Relationship image (full taxonomy, 72 instances)
# ---------------------------------------------------------------------------

# (pair label, count) in taxonomy order; counts sum to 72.
RELATION_DISTRIBUTION = (
    ("Timestamp-App Name", 24),
    ("Email-App Name", 5),
    ("App Name-Search keyword", 13),
    ("MAC Address-App Name", 3),
    ("Timestamp-Email", 5),
    ("Timestamp-Search keyword", 13),
    ("Timestamp-MAC Address", 3),
    ("Human Name-Timestamp", 2),
    ("Human Name-App Name", 2),
    ("Phone Number-App Name", 1),
    ("Phone Number-Email", 1),
)

_APPS = (
    ("com.google.android.apps.docs", "Google Drive"),
    ("com.android.chrome", "Chrome"),
    ("com.snapchat.android", "Snapchat"),
    ("com.instagram.android", "Instagram"),
    ("com.whatsapp", "WhatsApp"),
)

_BASE_MS = 1617477858090  # 03 April 2021 15:24:18 America/New_York
_DAY_MS = 86_400_000


def _epoch_for(local: datetime, zone: str) -> int:
    return int(local.replace(tzinfo=ZoneInfo(zone)).timestamp() * 1000)


def _dpath(package: str) -> str:
    return f"/data/user/0/{package}/databases/main.db"


def build_relationship_image(dest: Path, zone: str = DEFAULT_ZONE) -> Path:
    """Write the relationship-study image and ground truth; returns image root."""
    dest = Path(dest)
    image = dest / "image"
    db_dir_path = "/data/com.example.study/databases/"
    db_file = image / "data" / "com.example.study" / "databases" / "relations.db"
    db_name = "relations.db"

    def uid(table: str, lid: int) -> str:
        return _uid(RELATION_DEVICE, db_dir_path, db_name, table, lid)

    tables: Dict[str, Tuple[List[str], List[tuple]]] = {}
    gt_artifacts: List[GtArtifact] = []
    gt_relations: List[GtRelation] = []

    def note_artifact(table: str, lid: int, etype: EntityType, value: str) -> str:
        gt_artifacts.append(GtArtifact(etype, value, uid(table, lid)))
        return value

    # 1) Timestamp-App Name, 24 rows, last two mislinked to Twitter (invalid).
    rows = []
    for i in range(22):
        pkg, app = _APPS[i % len(_APPS)]
        ms = _BASE_MS + i * _DAY_MS
        rows.append((ms, _dpath(pkg)))
        ts = normalize_timestamp(ms, "ms", zone)
        lid = i + 1
        note_artifact("t01_ts_app", lid, EntityType.TIMESTAMP, ts)
        note_artifact("t01_ts_app", lid, EntityType.APP_NAME, app)
        gt_relations.append(GtRelation("Timestamp-App Name", (ts, app)))
    bad_ms_1 = _epoch_for(datetime(2021, 6, 25, 2, 29, 19), zone)
    bad_ms_2 = _epoch_for(datetime(2021, 7, 19, 17, 48, 0), zone)
    for lid, ms in ((23, bad_ms_1), (24, bad_ms_2)):
        rows.append((ms, _dpath("com.twitter.android")))
        ts = normalize_timestamp(ms, "ms", zone)
        note_artifact("t01_ts_app", lid, EntityType.TIMESTAMP, ts)
        note_artifact("t01_ts_app", lid, EntityType.APP_NAME, "Twitter")
        # deliberately absent from gt_relations: these links are wrong
    tables["t01_ts_app"] = (["ts", "DPath"], rows)

    # 2) Email-App Name, 5 rows, last two mislinked to Twitter (invalid).
    rows = []
    emails = [
        "alice.johnson@gmail.com",
        "bob.the.builder@outlook.com",
        "carol@protonmail.com",
    ]
    for i, email in enumerate(emails):
        pkg, app = _APPS[i % 3]
        rows.append((email, _dpath(pkg)))
        lid = i + 1
        e = note_artifact("t02_email_app", lid, EntityType.EMAIL, email)
        note_artifact("t02_email_app", lid, EntityType.APP_NAME, app)
        gt_relations.append(GtRelation("Email-App Name", (e, app)))
    for lid, email in ((4, "CryptoWendyO@protonmail.com"), (5, "WendyO.backup@protonmail.com")):
        rows.append((email, _dpath("com.twitter.android")))
        note_artifact("t02_email_app", lid, EntityType.EMAIL, email)
        note_artifact("t02_email_app", lid, EntityType.APP_NAME, "Twitter")
    tables["t02_email_app"] = (["account_email", "DPath"], rows)

    # 3) App Name-Search keyword, 13 rows, all Chrome.
    queries = [
        "italianos near me",
        "hidden photos apps",
        "weather boston",
        "flight sfo to jfk",
        "used camper vans",
        "how to make pour over coffee",
        "bike trails near salem",
        "cheap hotels portland",
        "python csv module",
        "best hiking boots 2021",
        "thai food delivery",
        "phone battery draining fast",
        "karaoke bars downtown",
    ]
    rows = []
    for i, q in enumerate(queries):
        rows.append((f"{q} - Google Search", _dpath("com.android.chrome")))
        lid = i + 1
        note_artifact("t03_app_search", lid, EntityType.SEARCH_KEYWORD, q)
        note_artifact("t03_app_search", lid, EntityType.APP_NAME, "Chrome")
        gt_relations.append(GtRelation("App Name-Search keyword", ("Chrome", q)))
    tables["t03_app_search"] = (["title", "DPath"], rows)

    # 4) MAC Address-App Name, 3 rows.
    macs = ["34:C7:31:F8:61:3B", "2C:6B:7D:1D:21:9A", "88:71:E5:CE:30:44"]
    rows = []
    for i, mac in enumerate(macs):
        rows.append((mac, _dpath("com.samsung.bluetooth")))
        lid = i + 1
        note_artifact("t04_mac_app", lid, EntityType.MAC_ADDRESS, mac)
        note_artifact("t04_mac_app", lid, EntityType.APP_NAME, "Bluetooth")
        gt_relations.append(GtRelation("MAC Address-App Name", (mac, "Bluetooth")))
    tables["t04_mac_app"] = (["address", "DPath"], rows)

    # 5) Timestamp-Email, 5 rows.
    rows = []
    for i in range(5):
        ms = _BASE_MS + (100 + i) * _DAY_MS
        email = f"contact{i}@example.org"
        rows.append((ms, email))
        ts = normalize_timestamp(ms, "ms", zone)
        lid = i + 1
        note_artifact("t05_ts_email", lid, EntityType.TIMESTAMP, ts)
        note_artifact("t05_ts_email", lid, EntityType.EMAIL, email)
        gt_relations.append(GtRelation("Timestamp-Email", (ts, email)))
    tables["t05_ts_email"] = (["ts", "sender_email"], rows)

    # 6) Timestamp-Search keyword, 13 rows.
    rows = []
    for i in range(13):
        ms = _BASE_MS + (200 + i) * _DAY_MS
        q = f"query history item {i + 1}"
        rows.append((ms, f"{q} - Google Search"))
        ts = normalize_timestamp(ms, "ms", zone)
        lid = i + 1
        note_artifact("t06_ts_search", lid, EntityType.TIMESTAMP, ts)
        note_artifact("t06_ts_search", lid, EntityType.SEARCH_KEYWORD, q)
        gt_relations.append(GtRelation("Timestamp-Search keyword", (ts, q)))
    tables["t06_ts_search"] = (["ts", "title"], rows)

    # 7) Timestamp-MAC Address, 3 rows.
    pair_macs = ["10:4F:A8:01:22:33", "5C:F3:70:9A:BB:01", "E4:5F:01:6D:20:7F"]
    rows = []
    for i, mac in enumerate(pair_macs):
        ms = _BASE_MS + (300 + i) * _DAY_MS
        rows.append((ms, mac))
        ts = normalize_timestamp(ms, "ms", zone)
        lid = i + 1
        note_artifact("t07_ts_mac", lid, EntityType.TIMESTAMP, ts)
        note_artifact("t07_ts_mac", lid, EntityType.MAC_ADDRESS, mac)
        gt_relations.append(GtRelation("Timestamp-MAC Address", (ts, mac)))
    tables["t07_ts_mac"] = (["ts", "address"], rows)

    # 8) Human Name-Timestamp, 2 rows.
    rows = []
    for i, name in enumerate(["Marsha Mellos", "Walter Hartwell"]):
        ms = _BASE_MS + (400 + i) * _DAY_MS
        rows.append(('{"f' + f'ull_name":"{name}","id":{i}' + "}", ms))
        ts = normalize_timestamp(ms, "ms", zone)
        lid = i + 1
        note_artifact("t08_name_ts", lid, EntityType.HUMAN_NAME, name)
        note_artifact("t08_name_ts", lid, EntityType.TIMESTAMP, ts)
        gt_relations.append(GtRelation("Human Name-Timestamp", (name, ts)))
    tables["t08_name_ts"] = (["Data", "ts"], rows)

    # 9) Human Name-App Name, 2 rows.
    rows = []
    for i, name in enumerate(["Skyler Lambert", "Jesse Margolis"]):
        pkg, app = _APPS[i]
        rows.append(('{"f' + f'ull_name":"{name}"' + "}", _dpath(pkg)))
        lid = i + 1
        note_artifact("t09_name_app", lid, EntityType.HUMAN_NAME, name)
        note_artifact("t09_name_app", lid, EntityType.APP_NAME, app)
        gt_relations.append(GtRelation("Human Name-App Name", (name, app)))
    tables["t09_name_app"] = (["Data", "DPath"], rows)

    # 10) Phone Number-App Name, 1 row.
    rows = [("+16506808040", _dpath("com.snapchat.android"))]
    note_artifact("t10_phone_app", 1, EntityType.PHONE_NUMBER, "+16506808040")
    note_artifact("t10_phone_app", 1, EntityType.APP_NAME, "Snapchat")
    gt_relations.append(GtRelation("Phone Number-App Name", ("+16506808040", "Snapchat")))
    tables["t10_phone_app"] = (["number", "DPath"], rows)

    # 11) Phone Number-Email, 1 row.
    rows = [("+14155550100", "pm.recovery@example.org")]
    note_artifact("t11_phone_email", 1, EntityType.PHONE_NUMBER, "+14155550100")
    note_artifact("t11_phone_email", 1, EntityType.EMAIL, "pm.recovery@example.org")
    gt_relations.append(
        GtRelation("Phone Number-Email", ("+14155550100", "pm.recovery@example.org"))
    )
    tables["t11_phone_email"] = (["number", "recovery_email"], rows)

    _write_db(db_file, tables)
    save_ground_truth(dest / "ground_truth.json", GroundTruth(gt_artifacts, gt_relations))
    return image
