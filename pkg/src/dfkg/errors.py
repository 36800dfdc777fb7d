"""Exception types shared across the pipeline stages."""


class DfkgError(Exception):
    """Base class for all pipeline errors."""


class RootNotFound(DfkgError):
    """Image root directory does not exist or is not readable."""


class CorruptDatabase(DfkgError):
    """Database file has a valid signature but an unreadable page structure."""


class TableNotFound(DfkgError):
    """Requested table does not exist in the database."""


class InvalidParts(DfkgError):
    """UID parts are unusable (empty component or non-positive row ordinal)."""


class EmptyBatch(DfkgError):
    """Refinement was asked to build a prompt for zero records."""


class DanglingUid(DfkgError):
    """A refined artifact references a UID with no matching flattened record."""


class OutOfRangeEpoch(DfkgError):
    """Epoch value cannot be represented as a calendar timestamp."""


class UnknownUid(DfkgError):
    """UID does not resolve to any record in the run."""


class UnknownEdge(DfkgError):
    """Verdict references an edge instance that is not in the graph."""


class IllegalTransition(DfkgError):
    """Verdict change violates the review state machine."""


class CustodyBreach(DfkgError):
    """Stored record no longer re-derives its own UID."""


class RunNotFound(DfkgError):
    """Run id does not exist under the data directory."""


class StageNotReady(DfkgError):
    """A pipeline stage was invoked before its upstream stage produced output."""


class EngineError(DfkgError):
    """Remote refinement engine failed after exhausting retries."""


class LockHeld(DfkgError):
    """Another process already holds the run-directory lock."""
