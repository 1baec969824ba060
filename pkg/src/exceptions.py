# SEPARABLE-RCA\src\exceptions.py

class RcaError(Exception):
    """
    Base class for every error raised by the anomaly detection pipeline.
    """


class DomainError(RcaError, ValueError):
    """
    Invalid argument to a math or model operation (bad domain, dimension mismatch,
    unknown class or zone, empty keyword set).
    """


class OrderingError(DomainError):
    """
    A training day was supplied out of date order.
    """


class InsufficientDataError(RcaError):
    """
    Not enough days (or score points) to train or to flag anomalies.
    """


class FormatError(RcaError, KeyError):
    """
    Malformed input: unreadable or incomplete CSVs and unparseable configuration values.
    """

    def __str__(self) -> str:
        # KeyError would otherwise quote the message
        return str(self.args[0]) if self.args else ""


class SnapshotError(RcaError):
    """
    A serialized model document has the wrong format tag or version.
    """


class NoRecordsError(RcaError):
    """
    Root cause analysis was requested for a (date, zone) without records.
    """
