"""Deterministic rule-table refinement engine.

Stands in for the remote engine in tests and offline runs. Every rule is a
pure function of the record text, so repeated runs over the same records
yield byte-identical artifact sets. Confidence scores are fixed per rule,
calibrated to the kinds of sources each pattern tends to appear in.
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional, Sequence

from ..flatten import FlatRecord
from .artifacts import EntityType, RefinedArtifact
from .timestamps import DEFAULT_ZONE, normalize_timestamp

ENGINE_NAME = "mock"

# Rendered blob escapes: backslash-x plus one or two hex digits.
_ESCAPE_RE = re.compile(r"\\x[0-9a-fA-F]{1,2}")

_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
_PHONE_RE = re.compile(r"\+(\d{8,15})(?!\d)")
_MAC_RE = re.compile(r"\b[0-9A-Fa-f]{2}(?::[0-9A-Fa-f]{2}){5}\b")
_EPOCH13_RE = re.compile(r"(?<![\d+])(\d{13})(?!\d)")
_EPOCH10_RE = re.compile(r"(?<![\d+])(\d{10})(?!\d)")
_PACKAGE_RE = re.compile(
    r"^(?:com|org|net|io|co|me|de|us|uk|edu|gov)(?:\.[a-z][a-z0-9_]*)+$"
)
_FULL_NAME_RE = re.compile(r'll_name"\s*:\s*"([^"]+)"')
_SEARCH_SUFFIX = " - Google Search"

# Known package ids to display names. Anything absent falls back to the
# capitalized last non-generic segment at reduced confidence.
PACKAGE_APP_NAMES: Dict[str, str] = {
    "com.whatsapp": "WhatsApp",
    "com.snapchat.android": "Snapchat",
    "com.instagram.android": "Instagram",
    "com.twitter.android": "Twitter",
    "com.android.chrome": "Chrome",
    "com.google.android.apps.docs": "Google Drive",
    "com.google.android.apps.maps": "Google Maps",
    "com.google.android.apps.photos": "Google Photos",
    "com.google.android.gm": "Gmail",
    "com.google.android.youtube": "YouTube",
    "com.facebook.katana": "Facebook",
    "com.facebook.orca": "Messenger",
    "org.telegram.messenger": "Telegram",
    "org.thoughtcrime.securesms": "Signal",
    "com.discord": "Discord",
    "com.spotify.music": "Spotify",
    "com.reddit.frontpage": "Reddit",
    "com.zhiliaoapp.musically": "TikTok",
    "com.microsoft.teams": "Teams",
    "com.sec.android.app.sbrowser": "Samsung Internet",
    "com.android.vending": "Play Store",
}

_GENERIC_SEGMENTS = frozenset(
    {
        "android", "app", "apps", "mobile", "client", "free", "lite", "beta",
        "pro", "plus", "google", "samsung", "sec", "com", "org", "net", "io",
        "co", "me", "de", "us", "uk", "edu", "gov",
    }
)

_CONFIDENCE = {
    "email": 9,
    "phone": 9,
    "mac": 10,
    "timestamp": 8,
    "app_mapped": 9,
    "app_fallback": 6,
    "search": 9,
    "human_name": 7,
    "username": 6,
    "coordinate": 6,
}


def strip_escapes(text: str) -> str:
    """Replace rendered blob escapes with spaces so patterns can anchor."""
    return _ESCAPE_RE.sub(" ", text)


def app_name_for_package(package: str) -> Optional[tuple]:
    """(display name, mapped?) for a reverse-domain package id, else None."""
    if package in PACKAGE_APP_NAMES:
        return PACKAGE_APP_NAMES[package], True
    parts = package.split(".")
    for seg in reversed(parts):
        if seg not in _GENERIC_SEGMENTS:
            return seg.capitalize(), False
    return None


def _package_segments(value: str) -> List[str]:
    found: List[str] = []
    for seg in value.split("/"):
        if _PACKAGE_RE.match(seg) and seg not in found:
            found.append(seg)
    return found


def _epoch_hits(text: str) -> List[tuple]:
    hits = []
    for m in _EPOCH13_RE.finditer(text):
        hits.append((m.start(), int(m.group(1)), "ms"))
    for m in _EPOCH10_RE.finditer(text):
        hits.append((m.start(), int(m.group(1)), "s"))
    hits.sort(key=lambda h: h[0])
    return hits


def mock_refine(record: FlatRecord, zone: str = DEFAULT_ZONE) -> List[RefinedArtifact]:
    """Apply the rule table to every column value of one record."""
    out: List[RefinedArtifact] = []
    seen = set()

    def emit(etype: EntityType, value: str, conf: int) -> None:
        key = (etype, value)
        if key in seen:
            return
        seen.add(key)
        out.append(
            RefinedArtifact(
                uid=record.uid,
                entity_type=etype,
                refined_value=value,
                confidence=conf,
                engine=ENGINE_NAME,
            )
        )

    for column, value in record.pairs.items():
        if not value:
            continue
        plain = strip_escapes(value)

        for m in _EMAIL_RE.finditer(plain):
            emit(EntityType.EMAIL, m.group(0), _CONFIDENCE["email"])

        for m in _PHONE_RE.finditer(plain):
            emit(EntityType.PHONE_NUMBER, "+" + m.group(1), _CONFIDENCE["phone"])

        for m in _MAC_RE.finditer(plain):
            emit(EntityType.MAC_ADDRESS, m.group(0).upper(), _CONFIDENCE["mac"])

        for _, epoch, unit in _epoch_hits(plain):
            try:
                text = normalize_timestamp(epoch, unit=unit, zone=zone)
            except Exception:
                continue
            year = int(text.split(" ")[2])
            if 2001 <= year <= 2030:
                emit(EntityType.TIMESTAMP, text, _CONFIDENCE["timestamp"])

        for package in _package_segments(value):
            named = app_name_for_package(package)
            if named is None:
                continue
            name, mapped = named
            conf = _CONFIDENCE["app_mapped"] if mapped else _CONFIDENCE["app_fallback"]
            emit(EntityType.APP_NAME, name, conf)

        if column.lower() == "title" and value.endswith(_SEARCH_SUFFIX):
            query = value[: -len(_SEARCH_SUFFIX)].strip()
            if query:
                emit(EntityType.SEARCH_KEYWORD, query, _CONFIDENCE["search"])

        for m in _FULL_NAME_RE.finditer(value):
            emit(EntityType.HUMAN_NAME, m.group(1), _CONFIDENCE["human_name"])

        if column.lower() == "username":
            token = value.strip()
            if token and " " not in token and len(token) <= 64:
                emit(EntityType.USERNAME, token, _CONFIDENCE["username"])

        if column.lower() in ("latitude", "longitude"):
            token = value.strip()
            try:
                coord = float(token)
            except ValueError:
                coord = None
            if coord is not None:
                limit = 90.0 if column.lower() == "latitude" else 180.0
                if abs(coord) <= limit:
                    etype = (
                        EntityType.LATITUDE
                        if column.lower() == "latitude"
                        else EntityType.LONGITUDE
                    )
                    emit(etype, token, _CONFIDENCE["coordinate"])

    return out


class MockEngine:
    """Batch adapter over the rule table."""

    name = ENGINE_NAME

    def __init__(self, zone: str = DEFAULT_ZONE):
        self.zone = zone

    def refine(self, batch: Sequence[FlatRecord]) -> List[RefinedArtifact]:
        artifacts: List[RefinedArtifact] = []
        for record in batch:
            artifacts.extend(mock_refine(record, zone=self.zone))
        return artifacts
