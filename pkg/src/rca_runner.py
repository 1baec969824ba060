# SEPARABLE-RCA\src\rca_runner.py

import datetime as dt
import logging
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

from src import detector
from src.exceptions import InsufficientDataError, NoRecordsError, OrderingError
from src.io_managers.configuration_validator import RunConfig
from src.io_managers.ingest import STOP_WORDS, LogRecord
from src.results_processing.rca_report import RcaReport
from src.results_processing.score_series import PROCEDURE_KIND, PROJECT_KIND, DailyScoreSeries
from src.tan_model import DayBatch, TanModel, day_scores, fit_increment, group_days

logger = logging.getLogger(__name__)

SeriesKey = Tuple[str, str]


class RcaRunner:
    """Runs the day-by-day pipeline: warm-up training, rolling scoring, flagging and RCA.

    Every day is scored with a model trained strictly on earlier days and only then
    folded into the model.

    Attributes:
        config (RunConfig): Run settings.
    """

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    def prepare_days(self, records: Sequence[LogRecord]) -> List[DayBatch]:
        """Group records into date-ordered day batches, removing stop words when configured."""
        stop_words = STOP_WORDS if self.config.use_stop_words else None
        return group_days(records, stop_words)

    def fit(self, days: Sequence[DayBatch], until: Optional[dt.date] = None) -> TanModel:
        """Train on the warm-up window, or on every day through `until`.

        Args:
            days (Sequence[DayBatch]): Date-ordered day batches.
            until (dt.date|None): Last training date; defaults to the warmup_days-th date.

        Returns:
            TanModel: The trained model.

        Raises:
            InsufficientDataError: If fewer than warmup_days dates are available.
        """
        warmup = self.config.warmup_days
        training = [day for day in days if until is None or day.date <= until]
        if len(training) < warmup:
            raise InsufficientDataError(
                f"{len(training)} days available for training; the warm-up needs {warmup}."
            )
        if until is None:
            training = training[:warmup]
        model = TanModel.fit(training, self.config.prior_scale, self.config.min_doc_frequency)
        logger.info("Trained on %d days through %s.", len(training), model.training_horizon)
        return model

    def roll(self, model: TanModel, days: Sequence[DayBatch],
             until: Optional[dt.date] = None) -> TanModel:
        """Fold every day after the model horizon (through `until` when given) into the model."""
        for day in days:
            if model.training_horizon is not None and day.date <= model.training_horizon:
                continue
            if until is not None and day.date > until:
                break
            model = fit_increment(model, day)
        return model

    def score(self, model: TanModel,
              days: Sequence[DayBatch]) -> Tuple[TanModel, Dict[SeriesKey, DailyScoreSeries]]:
        """Rolling protocol over all days after the model horizon.

        Returns:
            Tuple[TanModel, Dict[SeriesKey, DailyScoreSeries]]: The model trained through
            the last day, and one series per (zone, kind).

        Raises:
            OrderingError: If a day to score is not after the current horizon.
        """
        collected: Dict[SeriesKey, Tuple[List[dt.date], List[float]]] = defaultdict(lambda: ([], []))
        scored = 0
        for day in days:
            if model.training_horizon is not None and day.date <= model.training_horizon:
                continue
            if model.training_horizon is None:
                raise OrderingError("Scoring needs a model trained on at least one day.")
            for zone, zone_score in day_scores(model, day).items():
                for kind, value in ((PROJECT_KIND, zone_score.project_score),
                                    (PROCEDURE_KIND, zone_score.procedure_score)):
                    dates, scores = collected[(zone, kind)]
                    dates.append(day.date)
                    scores.append(value)
            model = fit_increment(model, day)
            scored += 1
        logger.info("Scored %d days; model now trained through %s.", scored, model.training_horizon)
        return model, {
            key: DailyScoreSeries(key[0], key[1], dates, scores)
            for key, (dates, scores) in sorted(collected.items())
        }

    def flag(self, series: Dict[SeriesKey, DailyScoreSeries]) -> List[dict]:
        """Flag anomalous days per series; series too short to judge are skipped with a warning."""
        flagged = []
        for key, values in series.items():
            try:
                dates = detector.flag_anomalies(values, self.config.sensitivity)
            except InsufficientDataError as error:
                logger.warning("Not flagging %s/%s: %s", key[0], key[1], error)
                continue
            threshold = detector.anomaly_threshold(values.scores, self.config.sensitivity)
            flagged.append({"series": values, "threshold": threshold, "dates": dates})
        return flagged

    def rca(self, model: TanModel, days: Sequence[DayBatch], date: dt.date,
            zone: str) -> Tuple[RcaReport, RcaReport]:
        """Explain one (date, zone): project and procedure reports.

        The model is rolled forward through the day before `date`; the trailing
        reference_days input days before `date` form the cross-tab reference.

        Raises:
            OrderingError: If the model is already trained on `date`.
            NoRecordsError: If the zone has no records on `date`.
        """
        if model.training_horizon is not None and model.training_horizon >= date:
            raise OrderingError(
                f"The model is trained through {model.training_horizon}; cannot explain {date}."
            )
        target = next((day for day in days if day.date == date), None)
        if target is None or zone not in target.zones:
            raise NoRecordsError(f"No records for zone {zone!r} on {date}.")
        model = self.roll(model, days, until=date - dt.timedelta(days=1))
        reference = [day for day in days if day.date < date][-self.config.reference_days:]

        project_report = detector.project_rca(model, target, zone, self.config.top_k_projects)
        procedure_report = detector.procedure_rca(
            model, target, zone, self.config.top_k_words, reference
        )
        return project_report, procedure_report
