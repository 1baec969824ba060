# SEPARABLE-RCA\src\detector.py

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src import bernoulli_nb, dirichlet_multinomial, numerics
from src.exceptions import DomainError, InsufficientDataError
from src.results_processing.rca_report import (
    NO_DEFICIENCY_NOTE,
    HitCrossTab,
    KeywordMessage,
    RankedItem,
    RcaReport,
)
from src.results_processing.score_series import PROCEDURE_KIND, PROJECT_KIND, DailyScoreSeries
from src.tan_model import DayBatch, DayRecord, TanModel

logger = logging.getLogger(__name__)

MAD_CONSISTENCY = 1.4826
DEFAULT_SENSITIVITY = 3.0
DEFAULT_MIN_POINTS = 14
MAD_ZERO_MARGIN = 1.0
DEFAULT_TOP_K = 5

IMPACT_METHODS = ("laplace", "multinomial")


def anomaly_threshold(scores: Sequence[float], sensitivity: float = DEFAULT_SENSITIVITY) -> float:
    """
    Lower robust bound median - sensitivity * 1.4826 * MAD, or median - 1 when MAD is 0.
    """
    values = np.asarray(scores, dtype=float)
    median = float(np.median(values))
    if np.isinf(sensitivity):
        return -np.inf
    mad = float(np.median(np.abs(values - median)))
    if mad == 0.0:
        return median - MAD_ZERO_MARGIN
    return median - sensitivity * MAD_CONSISTENCY * mad


def flag_anomalies(series: DailyScoreSeries, sensitivity: float = DEFAULT_SENSITIVITY,
                   min_points: int = DEFAULT_MIN_POINTS) -> List:
    """
    Dates whose score falls below the robust median/MAD threshold.

    Args:
        series (DailyScoreSeries): Scores to screen.
        sensitivity (float): Number of robust standard deviations (> 0, inf disables flags).
        min_points (int): Minimum series length.

    Returns:
        List[dt.date]: Flagged dates in series order.

    Raises:
        InsufficientDataError: If the series holds fewer than min_points scores.
        DomainError: If sensitivity is not positive.
    """
    if not sensitivity > 0:
        raise DomainError(f"sensitivity must be positive, got {sensitivity!r}.")
    if len(series) < min_points:
        raise InsufficientDataError(
            f"Series {series.zone}/{series.kind} has {len(series)} points; "
            f"at least {min_points} are needed."
        )
    threshold = anomaly_threshold(series.scores, sensitivity)
    return [date for date, score in zip(series.dates, series.scores) if score < threshold]


def _zone_day(day: DayBatch, zone: str):
    if zone not in day.zones:
        raise DomainError(f"Zone {zone!r} has no records on {day.date}.")
    return day.zones[zone]


def _shares(impacts: np.ndarray) -> np.ndarray:
    negative_mass = float(impacts[impacts < 0].sum())
    if negative_mass == 0.0:
        return np.zeros_like(impacts)
    return impacts / negative_mass


def _ranked(labels: Sequence[str], impacts: np.ndarray, top_k: int,
            negative_only: bool = False) -> Tuple[RankedItem, ...]:
    shares = _shares(impacts)
    order = sorted(range(len(labels)), key=lambda i: (impacts[i], labels[i]))
    if negative_only:
        order = [i for i in order if impacts[i] < 0]
    return tuple(
        RankedItem(labels[i], float(impacts[i]), float(shares[i])) for i in order[:top_k]
    )


def project_rca(model: TanModel, day: DayBatch, zone: str, top_k: int = DEFAULT_TOP_K,
                method: str = "laplace") -> RcaReport:
    """
    Rank the projects whose counts pull the day's likelihood furthest below the mode.

    Args:
        model (TanModel): Model trained strictly before day.date.
        day (DayBatch): The day to explain.
        zone (str): Zone to explain.
        top_k (int): Number of ranked projects (clamped to the category count).
        method (str): "laplace" for Dirichlet-Multinomial impacts, "multinomial" for
            the per-category -q ln(q/p) terms of the plain multinomial model.

    Returns:
        RcaReport: Report whose impacts cover every project of the extended posterior.

    Raises:
        DomainError: If the zone has no records that day, is unknown to the model, or
            method is not supported.
    """
    if method not in IMPACT_METHODS:
        raise DomainError(f"Unknown impact method {method!r}; expected one of {IMPACT_METHODS}.")
    zone_day = _zone_day(day, zone)
    snapshot = model.zone_snapshot(zone)
    counts = zone_day.project_counts
    posterior = snapshot.projects.extend(counts.category_ids, snapshot.prior_scale)
    counts = counts.reindex(posterior.category_ids)

    mode_log_likelihood = None
    if method == "laplace":
        result = dirichlet_multinomial.impacts(posterior, counts)
        values = result.impacts
        mode_log_likelihood = result.mode_log_likelihood
        deficiency = float(values.sum())
    else:
        observed, expected = counts.frequencies(), posterior.mode_frequencies()
        values = numerics.multinomial_impacts(observed, expected)
        deficiency = -numerics.kl_divergence(observed, expected)
    notes = () if deficiency < 0 else (NO_DEFICIENCY_NOTE,)
    return RcaReport(
        date=day.date,
        zone=zone,
        kind=PROJECT_KIND,
        deficiency=deficiency,
        ranked_items=_ranked(posterior.category_ids, values, top_k, negative_only=method == "multinomial"),
        impacts=dict(zip(posterior.category_ids, map(float, values))),
        mode_log_likelihood=mode_log_likelihood,
        notes=notes,
    )


def _hits(records: Iterable[DayRecord], keywords: frozenset) -> Dict[str, float]:
    hits: Dict[str, float] = defaultdict(float)
    for record in records:
        if record.tokens & keywords:
            hits[record.procedure] += record.err_cnt
    return hits


def keyword_hits_crosstab(day_records: Sequence[DayRecord],
                          reference: Sequence[Sequence[DayRecord]],
                          keywords: Iterable[str]) -> HitCrossTab:
    """
    err_cnt-weighted hits of a keyword set per procedure class.

    A hit is a message containing at least one keyword. The reference column is the
    mean daily hit count over the reference days (zero without reference days).

    Args:
        day_records: Records of the anomaly day.
        reference: Records of each reference day.
        keywords: The keyword set S.

    Raises:
        DomainError: If the keyword set is empty.
    """
    keywords = frozenset(keywords)
    if not keywords:
        raise DomainError("A keyword cross-tab needs at least one keyword.")
    anomaly = _hits(day_records, keywords)
    reference_totals: Dict[str, float] = defaultdict(float)
    for records in reference:
        for procedure, hits in _hits(records, keywords).items():
            reference_totals[procedure] += hits

    classes = {r.procedure for r in day_records}
    for records in reference:
        classes.update(r.procedure for r in records)
    n_reference = len(reference)
    rows = {
        procedure: (
            anomaly.get(procedure, 0.0),
            reference_totals.get(procedure, 0.0) / n_reference if n_reference else 0.0,
        )
        for procedure in sorted(classes)
    }
    return HitCrossTab(tuple(sorted(keywords)), rows, n_reference)


def keyword_messages(day_records: Sequence[DayRecord],
                     reference: Sequence[Sequence[DayRecord]],
                     keywords: Iterable[str]) -> List[KeywordMessage]:
    """
    Messages of the anomaly day or the reference window that contain a keyword, with
    their hits against the reference mean, largest increase first.

    Raises:
        DomainError: If the keyword set is empty.
    """
    keywords = frozenset(keywords)
    if not keywords:
        raise DomainError("Keyword messages need at least one keyword.")

    def per_message(records):
        hits: Dict[Tuple[str, str], float] = defaultdict(float)
        for record in records:
            if record.tokens & keywords:
                hits[(record.procedure, record.message)] += record.err_cnt
        return hits

    anomaly = per_message(day_records)
    reference_totals: Dict[Tuple[str, str], float] = defaultdict(float)
    for records in reference:
        for key, hits in per_message(records).items():
            reference_totals[key] += hits
    n_reference = len(reference)
    messages = [
        KeywordMessage(
            procedure=procedure,
            message=message,
            hits=anomaly.get((procedure, message), 0.0),
            reference_mean=reference_totals.get((procedure, message), 0.0) / n_reference
            if n_reference else 0.0,
        )
        for procedure, message in set(anomaly) | set(reference_totals)
    ]
    return sorted(messages, key=lambda m: (-m.shift, m.procedure, m.message))


def procedure_rca(model: TanModel, day: DayBatch, zone: str,
                  top_k_words: int = DEFAULT_TOP_K,
                  reference: Sequence[DayBatch] = ()) -> RcaReport:
    """
    Explain the day's procedure likelihood through the words of its messages.

    Each record's gap to its most likely procedure splits into a class prior term and
    one impact per vocabulary word. The day aggregates are err_cnt-weighted means, so
    deficiency = prior_term + sum of every word impact. The keyword set S holds the
    top_k_words most negative words.

    Args:
        model (TanModel): Model trained strictly before day.date.
        day (DayBatch): The day to explain.
        zone (str): Zone to explain.
        top_k_words (int): Size of S.
        reference (Sequence[DayBatch]): Reference days for the keyword cross-tab.

    Raises:
        DomainError: If the zone has no records that day or is unknown to the model.
    """
    zone_day = _zone_day(day, zone)
    snapshot = model.zone_snapshot(zone)
    words = snapshot.vocabulary.words

    volume = 0
    gap_total, prior_total = 0.0, 0.0
    impact_total = np.zeros(len(words))
    novel: Dict[str, float] = defaultdict(float)
    for record in zone_day.records:
        bnb = snapshot.model_for(record.project, record.procedure)
        report = bernoulli_nb.gap_and_impacts(bnb, snapshot.encode(record.tokens), record.procedure)
        weight = record.err_cnt
        volume += weight
        gap_total += weight * report.gap
        prior_total += weight * report.prior_term
        impact_total += weight * report.word_impacts
        for token in report.out_of_vocabulary:
            novel[token] += weight

    deficiency = gap_total / volume
    prior_term = prior_total / volume
    day_impacts = impact_total / volume
    ranked = _ranked(words, day_impacts, top_k_words, negative_only=True)
    keyword_set = tuple(item.label for item in ranked)

    notes = []
    crosstab, messages = None, ()
    if deficiency == 0.0 or not keyword_set:
        logger.warning("Procedure RCA for %s on %s: %s.", zone, day.date, NO_DEFICIENCY_NOTE)
        notes.append(NO_DEFICIENCY_NOTE)
    if keyword_set:
        reference_records = [
            ref.zones[zone].records if zone in ref.zones else () for ref in reference
        ]
        crosstab = keyword_hits_crosstab(zone_day.records, reference_records, keyword_set)
        messages = tuple(keyword_messages(zone_day.records, reference_records, keyword_set))

    return RcaReport(
        date=day.date,
        zone=zone,
        kind=PROCEDURE_KIND,
        deficiency=float(deficiency),
        ranked_items=ranked,
        impacts=dict(zip(words, map(float, day_impacts))),
        prior_term=float(prior_term),
        keyword_set=keyword_set,
        crosstab=crosstab,
        keyword_messages=messages,
        novel_tokens={t: novel[t] for t in sorted(novel, key=lambda t: (-novel[t], t))},
        notes=tuple(notes),
    )
