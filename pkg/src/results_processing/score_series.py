# SEPARABLE-RCA\src\results_processing\score_series.py

import datetime as dt
from typing import Any, Dict, List, Sequence

import numpy as np

from src.exceptions import DomainError

PROJECT_KIND = "project"
PROCEDURE_KIND = "procedure"
KINDS = (PROJECT_KIND, PROCEDURE_KIND)


class DailyScoreSeries:
    """
    Daily-averaged log-likelihoods of one zone for one submodel (project or procedure).
    """

    def __init__(self, zone: str, kind: str, dates: Sequence[dt.date], scores: Sequence[float]):
        """
        Initializes a DailyScoreSeries instance.

        Args:
            zone (str): Zone label.
            kind (str): Either "project" or "procedure".
            dates (Sequence[dt.date]): Strictly increasing dates.
            scores (Sequence[float]): One finite score per date.

        Raises:
            DomainError: If the kind is unknown, dates are not strictly increasing,
                lengths differ or a score is not finite.
        """
        if kind not in KINDS:
            raise DomainError(f"Unknown score kind {kind!r}; expected one of {KINDS}.")
        dates = tuple(dates)
        scores = np.asarray(scores, dtype=float)
        if scores.shape != (len(dates),):
            raise DomainError("A score series needs exactly one score per date.")
        if any(later <= earlier for earlier, later in zip(dates, dates[1:])):
            raise DomainError("Score series dates must be strictly increasing.")
        if not np.all(np.isfinite(scores)):
            raise DomainError("Score series values must be finite.")
        scores.setflags(write=False)
        self.zone = zone
        self.kind = kind
        self.dates = dates
        self.scores = scores

    def __len__(self) -> int:
        return len(self.dates)

    def score_on(self, date: dt.date) -> float:
        return float(self.scores[self.dates.index(date)])

    def to_rows(self) -> List[Dict[str, Any]]:
        """
        Returns:
            List[Dict[str, Any]]: (date, zone, kind, score) rows with ISO dates.
        """
        return [
            {"date": date.isoformat(), "zone": self.zone, "kind": self.kind, "score": float(score)}
            for date, score in zip(self.dates, self.scores)
        ]
