# SEPARABLE-RCA\src\io_managers\ingest.py

import datetime as dt
import logging
import re
from collections import Counter
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, TextIO, Union

import pandas as pd

from src.bernoulli_nb import Vocabulary
from src.exceptions import DomainError, FormatError

logger = logging.getLogger(__name__)

COLUMNS = (
    "row_id",
    "date",
    "region",
    "project_name",
    "procedure_name",
    "error_detail",
    "err_cnt",
)

MISSING_PROCEDURE = "(none)"
MISSING_MARKERS = {"", "nan", "none", "null", MISSING_PROCEDURE}
SERIALIZED_MISSING = "NaN"

DEFAULT_MIN_DOC_FREQUENCY = 3

STOP_WORDS = frozenset({
    "the", "an", "of", "to", "in", "is", "at", "on", "by", "be", "has", "been",
    "and", "or", "for", "with", "was", "are", "it", "as", "from", "this", "that",
})

_TOKEN_PATTERN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class LogRecord:
    """
    One aggregated row of the error log: err_cnt errors with the same
    (date, region, project, procedure, message).
    """

    row_id: int
    date: dt.date
    region: str
    project_name: str
    procedure_name: str
    error_detail: str
    err_cnt: int


@dataclass(frozen=True)
class RejectedRow:
    """A CSV line that could not be parsed, with the reason."""

    row_number: int
    reason: str


@dataclass(frozen=True)
class ParseResult:
    records: List[LogRecord]
    rejected: List[RejectedRow]


def _parse_row(row: pd.Series) -> LogRecord:
    try:
        row_id = int(row["row_id"])
    except ValueError:
        raise ValueError(f"invalid row_id {row['row_id']!r}")
    try:
        date = dt.date.fromisoformat(row["date"].strip())
    except ValueError:
        raise ValueError(f"invalid date {row['date']!r}")
    try:
        err_cnt = int(row["err_cnt"])
    except ValueError:
        raise ValueError(f"invalid err_cnt {row['err_cnt']!r}")
    if err_cnt < 1:
        raise ValueError(f"err_cnt must be positive, got {err_cnt}")

    region = row["region"].strip()
    project = row["project_name"].strip()
    if not region:
        raise ValueError("missing region")
    if not project:
        raise ValueError("missing project_name")
    procedure = row["procedure_name"].strip()
    if procedure.lower() in MISSING_MARKERS:
        procedure = MISSING_PROCEDURE

    return LogRecord(
        row_id=row_id,
        date=date,
        region=region,
        project_name=project,
        procedure_name=procedure,
        error_detail=row["error_detail"],
        err_cnt=err_cnt,
    )


def parse_csv(stream: Union[TextIO, str]) -> ParseResult:
    """
    Parse an error log in the (row_id, date, region, project_name, procedure_name,
    error_detail, err_cnt) layout. Column order does not matter.

    Invalid rows are collected with their line number and a reason, never dropped
    silently.

    Args:
        stream: An open text stream or a path.

    Returns:
        ParseResult: Parsed records (file order) and rejected rows.

    Raises:
        FormatError: If the input is not a readable UTF-8 CSV or its header lacks a
            required column.
    """
    try:
        frame = pd.read_csv(stream, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise FormatError("Input has no header row; expected columns: " + ", ".join(COLUMNS))
    except pd.errors.ParserError as error:
        raise FormatError(f"Input is not a well-formed CSV: {error}")
    except UnicodeDecodeError as error:
        raise FormatError(f"Input is not valid UTF-8: {error.reason} at byte {error.start}")

    missing = [column for column in COLUMNS if column not in frame.columns]
    if missing:
        raise FormatError(f"Missing columns: {', '.join(missing)}")

    records, rejected = [], []
    for position, row in frame.iterrows():
        # header is line 1
        line_number = int(position) + 2
        try:
            records.append(_parse_row(row))
        except ValueError as error:
            rejected.append(RejectedRow(line_number, str(error)))

    if rejected:
        logger.warning(
            "Rejected %d of %d rows (first: line %d, %s).",
            len(rejected), len(frame), rejected[0].row_number, rejected[0].reason,
        )
    return ParseResult(records, rejected)


def records_to_frame(records: Sequence[LogRecord]) -> pd.DataFrame:
    """Lay records out in the ingest column order, ready for to_csv."""
    rows = [
        {
            "row_id": record.row_id,
            "date": record.date.isoformat(),
            "region": record.region,
            "project_name": record.project_name,
            "procedure_name": (
                SERIALIZED_MISSING if record.procedure_name == MISSING_PROCEDURE
                else record.procedure_name
            ),
            "error_detail": record.error_detail,
            "err_cnt": record.err_cnt,
        }
        for record in records
    ]
    return pd.DataFrame(rows, columns=list(COLUMNS))


def rejected_to_frame(rejected: Sequence[RejectedRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"row": r.row_number, "reason": r.reason} for r in rejected],
        columns=["row", "reason"],
    )


def tokenize(text: str, stop_words: Optional[Iterable[str]] = None) -> FrozenSet[str]:
    """
    Binarized bag of words: lowercase, split on non-alphanumeric runs, keep tokens of
    two or more characters, drop duplicates (and stop words when a list is given).
    """
    tokens = {token for token in _TOKEN_PATTERN.findall(text.lower()) if len(token) >= 2}
    if stop_words:
        tokens -= set(stop_words)
    return frozenset(tokens)


def build_vocabulary(documents: Iterable[Iterable[str]],
                     min_doc_frequency: int = DEFAULT_MIN_DOC_FREQUENCY,
                     weights: Optional[Iterable[int]] = None) -> Vocabulary:
    """
    Words present in at least min_doc_frequency documents, sorted lexicographically.

    Args:
        documents: Token sets, one per document.
        min_doc_frequency (int): Document frequency threshold (>= 1).
        weights: Optional document multiplicities.

    Raises:
        DomainError: If min_doc_frequency < 1.
    """
    if min_doc_frequency < 1:
        raise DomainError(f"min_doc_frequency must be >= 1, got {min_doc_frequency}.")
    frequency = Counter()
    documents = list(documents)
    multiplicities = list(weights) if weights is not None else [1] * len(documents)
    for tokens, weight in zip(documents, multiplicities):
        for token in set(tokens):
            frequency[token] += weight
    return Vocabulary(tuple(sorted(w for w, n in frequency.items() if n >= min_doc_frequency)))
