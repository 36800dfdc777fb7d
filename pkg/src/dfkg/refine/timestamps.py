"""Epoch-to-text timestamp normalization.

Output format is fixed: ``DD Month YYYY HH:MM:SS``, 24-hour clock, English
month names regardless of process locale. The zone is an IANA name and
defaults to America/New_York; runs can override it.
"""

from __future__ import annotations

from datetime import datetime
from zoneinfo import ZoneInfo

from ..errors import OutOfRangeEpoch

DEFAULT_ZONE = "America/New_York"

# Explicit names: strftime %B is locale-dependent and must not leak in.
_MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)


def normalize_timestamp(epoch: int, unit: str = "ms", zone: str = DEFAULT_ZONE) -> str:
    """Convert an integer epoch (``ms`` or ``s``) to canonical local time text."""
    if unit == "ms":
        seconds = epoch // 1000
    elif unit == "s":
        seconds = epoch
    else:
        raise ValueError(f"unit must be 'ms' or 's', got {unit!r}")
    try:
        dt = datetime.fromtimestamp(seconds, tz=ZoneInfo(zone))
    except (OverflowError, OSError, ValueError) as exc:
        raise OutOfRangeEpoch(f"epoch {epoch} ({unit}) not representable: {exc}") from exc
    return (
        f"{dt.day:02d} {_MONTHS[dt.month - 1]} {dt.year:04d} "
        f"{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d}"
    )
