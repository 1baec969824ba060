# SEPARABLE-RCA\src\results_processing\results_processor.py

import logging
from typing import Any, Dict, Iterable, List, Sequence

import pandas as pd

from src.results_processing.rca_report import RcaReport
from src.results_processing.score_series import DailyScoreSeries

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ["date", "zone", "kind", "score"]
ANOMALY_COLUMNS = ["zone", "kind", "date", "score", "threshold"]
RANKING_COLUMNS = ["zone", "date", "kind", "rank", "label", "impact", "share"]


class ResultsProcessor:
    """
    Converts score series and RCA reports into pandas DataFrames and documents.
    """

    def series_frame(self, series: Iterable[DailyScoreSeries]) -> pd.DataFrame:
        """
        Stacks score series into one long table.

        Args:
            series (Iterable[DailyScoreSeries]): Series to export.

        Returns:
            pd.DataFrame: (date, zone, kind, score) rows ordered by zone, kind and date.
        """
        rows = [row for s in sorted(series, key=lambda s: (s.zone, s.kind)) for row in s.to_rows()]
        return pd.DataFrame(rows, columns=SCORE_COLUMNS)

    def anomalies_frame(self, flagged: Sequence[Dict[str, Any]]) -> pd.DataFrame:
        """
        Args:
            flagged (Sequence[Dict[str, Any]]): One entry per series with keys
                'series', 'threshold' and 'dates'.

        Returns:
            pd.DataFrame: (zone, kind, date, score, threshold), one row per flagged day.
        """
        rows = []
        for entry in flagged:
            series: DailyScoreSeries = entry["series"]
            for date in entry["dates"]:
                rows.append({
                    "zone": series.zone,
                    "kind": series.kind,
                    "date": date.isoformat(),
                    "score": series.score_on(date),
                    "threshold": entry["threshold"],
                })
        if not rows:
            logger.info("No anomalies flagged.")
        return pd.DataFrame(rows, columns=ANOMALY_COLUMNS)

    def ranking_frame(self, reports: Iterable[RcaReport]) -> pd.DataFrame:
        """Ranked explanation items of several reports in one table."""
        rows = []
        for report in reports:
            for rank, item in enumerate(report.ranked_items, start=1):
                rows.append({
                    "zone": report.zone,
                    "date": report.date.isoformat(),
                    "kind": report.kind,
                    "rank": rank,
                    "label": item.label,
                    "impact": item.impact,
                    "share": item.share,
                })
        return pd.DataFrame(rows, columns=RANKING_COLUMNS)

    def crosstab_frame(self, report: RcaReport) -> pd.DataFrame:
        """Keyword-hit cross-tab of a procedure report (empty without keywords)."""
        columns = ["procedure", "anomaly_day_hits", "reference_mean_hits"]
        if report.crosstab is None:
            return pd.DataFrame([], columns=columns)
        return pd.DataFrame(report.crosstab.to_rows(), columns=columns)

    def report_documents(self, reports: Iterable[RcaReport]) -> List[Dict[str, Any]]:
        return [report.to_dict() for report in reports]
