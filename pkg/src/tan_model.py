# SEPARABLE-RCA\src\tan_model.py

import datetime as dt
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src import bernoulli_nb, dirichlet_multinomial
from src.bernoulli_nb import BnbModel, BowVector, Vocabulary
from src.dirichlet_multinomial import CountVector, DirichletPosterior
from src.exceptions import DomainError, OrderingError, SnapshotError
from src.io_managers.ingest import (
    DEFAULT_MIN_DOC_FREQUENCY,
    MISSING_PROCEDURE,
    LogRecord,
    build_vocabulary,
    tokenize,
)

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "separable-rca-model"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class DayRecord:
    """
    A record reduced to what the model sees: labels, message tokens and error count.
    """

    project: str
    procedure: str
    tokens: FrozenSet[str]
    err_cnt: int
    message: str = ""


@dataclass(frozen=True)
class ZoneDay:
    project_counts: CountVector
    records: Tuple[DayRecord, ...]

    @property
    def volume(self) -> int:
        return sum(r.err_cnt for r in self.records)


@dataclass(frozen=True)
class DayBatch:
    """
    All records of one calendar day, grouped by zone.

    Project counts are err_cnt-weighted, so each zone's CountVector total equals the
    sum of err_cnt over its records.
    """

    date: dt.date
    zones: Dict[str, ZoneDay]

    @classmethod
    def from_records(cls, date: dt.date, records: Iterable[LogRecord],
                     stop_words: Optional[Iterable[str]] = None) -> "DayBatch":
        """
        Raises:
            DomainError: If a record belongs to another date.
        """
        grouped: Dict[str, List[DayRecord]] = defaultdict(list)
        for record in records:
            if record.date != date:
                raise DomainError(f"Record {record.row_id} is dated {record.date}, not {date}.")
            grouped[record.region].append(DayRecord(
                project=record.project_name,
                procedure=record.procedure_name,
                tokens=tokenize(record.error_detail, stop_words),
                err_cnt=record.err_cnt,
                message=record.error_detail,
            ))
        zones = {}
        for zone in sorted(grouped):
            zone_records = tuple(grouped[zone])
            totals: Dict[str, int] = defaultdict(int)
            for record in zone_records:
                totals[record.project] += record.err_cnt
            counts = CountVector.from_mapping({p: totals[p] for p in sorted(totals)})
            zones[zone] = ZoneDay(counts, zone_records)
        return cls(date, zones)

    @classmethod
    def empty(cls, date: dt.date) -> "DayBatch":
        return cls(date, {})


def group_days(records: Iterable[LogRecord],
               stop_words: Optional[Iterable[str]] = None) -> List[DayBatch]:
    """Split records into date-ordered day batches."""
    by_date: Dict[dt.date, List[LogRecord]] = defaultdict(list)
    for record in records:
        by_date[record.date].append(record)
    return [DayBatch.from_records(date, by_date[date], stop_words) for date in sorted(by_date)]


@dataclass(frozen=True)
class ZoneState:
    """
    Sufficient statistics of one zone: project and per-project procedure Dirichlet
    posteriors, and Bernoulli document counts per (token, procedure).

    Treated as immutable; fit_increment builds a new state.
    """

    projects: DirichletPosterior
    procedures: Dict[str, DirichletPosterior]
    class_docs: Dict[str, float]
    word_docs: Dict[str, Dict[str, float]]

    @classmethod
    def empty(cls) -> "ZoneState":
        return cls(DirichletPosterior((), np.zeros(0)), {}, {}, {})


@dataclass(frozen=True)
class ZoneSnapshot:
    """
    Scoring view of a zone: fixed vocabulary, BNB over all procedures seen in the zone.
    """

    zone: str
    projects: DirichletPosterior
    procedures: Dict[str, DirichletPosterior]
    bnb: BnbModel
    prior_scale: float
    project_models: Mapping[str, BnbModel] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        models = {
            project: self.bnb.with_class_log_prior(self.procedure_log_prior(project, self.bnb.classes))
            for project in sorted(self.procedures)
        }
        object.__setattr__(self, "project_models", MappingProxyType(models))

    @property
    def vocabulary(self) -> Vocabulary:
        return self.bnb.vocabulary

    def encode(self, tokens: Union[Iterable[str], BowVector]) -> BowVector:
        if isinstance(tokens, BowVector):
            return tokens
        return self.vocabulary.encode(tokens)

    def procedure_log_prior(self, project: str, classes: Sequence[str]) -> np.ndarray:
        """ln of the (zone, project) procedure posterior mean over the given classes."""
        posterior = self.procedures.get(project, DirichletPosterior((), np.zeros(0)))
        extended = posterior.extend(classes, self.prior_scale)
        lookup = extended.to_dict()
        alpha = np.array([lookup[c] for c in classes])
        return np.log(alpha) - np.log(alpha.sum())

    def model_for(self, project: str, procedure: str) -> BnbModel:
        """
        BNB model whose class prior is the project's procedure distribution; the
        procedure is added as an empty class when it was never seen in the zone.

        Known (project, procedure) pairs are served from project_models; other pairs
        are built on each call and not stored.
        """
        if project in self.project_models and procedure in self.bnb.classes:
            return self.project_models[project]
        model = self.bnb.extend_classes([procedure])
        return model.with_class_log_prior(self.procedure_log_prior(project, model.classes))


@dataclass(frozen=True)
class ZoneDayScore:
    project_score: float
    procedure_score: float


@dataclass(frozen=True)
class TanModel:
    """
    Tree-augmented network Zone -> Project -> Procedure -> Error words, one
    independent set of posteriors per zone.

    Project | Zone and Procedure | (Project, Zone) are Dirichlet-Multinomial with an
    add-one prior; error words | (Procedure, Zone) are Bernoulli Naive Bayes.
    """

    zones: Dict[str, ZoneState] = field(default_factory=dict)
    training_horizon: Optional[dt.date] = None
    prior_scale: float = dirichlet_multinomial.DEFAULT_PRIOR_SCALE
    min_doc_frequency: int = DEFAULT_MIN_DOC_FREQUENCY
    snapshots: Mapping[str, ZoneSnapshot] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        snapshots = {zone: self._build_snapshot(zone) for zone in sorted(self.zones)}
        object.__setattr__(self, "snapshots", MappingProxyType(snapshots))

    @classmethod
    def fit(cls, days: Iterable[DayBatch], prior_scale: float = dirichlet_multinomial.DEFAULT_PRIOR_SCALE,
            min_doc_frequency: int = DEFAULT_MIN_DOC_FREQUENCY) -> "TanModel":
        """
        Train on date-ordered days in one pass; scoring views are built once, at the end.

        Raises:
            OrderingError: If the days are not strictly increasing in date.
        """
        zones: Dict[str, ZoneState] = {}
        horizon = None
        for day in days:
            zones = _fit_day(zones, horizon, day, prior_scale)
            horizon = day.date
        return cls(zones, horizon, prior_scale, min_doc_frequency)

    def zone_snapshot(self, zone: str) -> ZoneSnapshot:
        """
        Raises:
            DomainError: If the zone was never seen in training.
        """
        if zone not in self.snapshots:
            raise DomainError(f"Unknown zone: {zone!r}")
        return self.snapshots[zone]

    def _build_snapshot(self, zone: str) -> ZoneSnapshot:
        state = self.zones[zone]
        tokens = list(state.word_docs)
        frequencies = [sum(state.word_docs[t].values()) for t in tokens]
        vocabulary = build_vocabulary(
            ([t] for t in tokens), self.min_doc_frequency, weights=frequencies
        )
        classes = sorted(state.class_docs)
        word_doc_count = np.zeros((len(classes), len(vocabulary)))
        position = {c: i for i, c in enumerate(classes)}
        for j, word in enumerate(vocabulary.words):
            for procedure, count in state.word_docs[word].items():
                word_doc_count[position[procedure], j] = count
        if not classes:
            # a zone with projects but no procedure documents still needs one class
            classes = [MISSING_PROCEDURE]
            word_doc_count = np.zeros((1, len(vocabulary)))
        doc_count = [state.class_docs.get(c, 0.0) for c in classes]
        bnb = BnbModel.from_counts(vocabulary, classes, doc_count, word_doc_count)
        return ZoneSnapshot(zone, state.projects, state.procedures, bnb, self.prior_scale)

    def to_document(self) -> dict:
        """Self-describing, JSON-ready model state."""
        return {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "horizon": self.training_horizon.isoformat() if self.training_horizon else None,
            "prior_scale": self.prior_scale,
            "min_doc_frequency": self.min_doc_frequency,
            "zones": {
                zone: {
                    "projects": state.projects.to_dict(),
                    "procedures": {p: post.to_dict() for p, post in state.procedures.items()},
                    "class_docs": dict(state.class_docs),
                    "word_docs": {t: dict(c) for t, c in state.word_docs.items()},
                }
                for zone, state in self.zones.items()
            },
        }

    @classmethod
    def from_document(cls, document: dict) -> "TanModel":
        """
        Raises:
            SnapshotError: If the document has another format tag or version, or is malformed.
        """
        if not isinstance(document, dict) or document.get("format") != SNAPSHOT_FORMAT:
            raise SnapshotError(f"Not a {SNAPSHOT_FORMAT} document.")
        if document.get("version") != SNAPSHOT_VERSION:
            raise SnapshotError(
                f"Snapshot version {document.get('version')!r} is not supported "
                f"(expected {SNAPSHOT_VERSION})."
            )
        try:
            horizon = document["horizon"]
            zones = {
                zone: ZoneState(
                    projects=DirichletPosterior.from_dict(body["projects"]),
                    procedures={
                        p: DirichletPosterior.from_dict(post) for p, post in body["procedures"].items()
                    },
                    class_docs={c: float(n) for c, n in body["class_docs"].items()},
                    word_docs={
                        t: {c: float(n) for c, n in counts.items()}
                        for t, counts in body["word_docs"].items()
                    },
                )
                for zone, body in document["zones"].items()
            }
            return cls(
                zones=zones,
                training_horizon=dt.date.fromisoformat(horizon) if horizon else None,
                prior_scale=float(document["prior_scale"]),
                min_doc_frequency=int(document["min_doc_frequency"]),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as error:
            raise SnapshotError(f"Malformed model snapshot: {error}")


def _fit_zone(state: ZoneState, zone_day: ZoneDay, prior_scale: float) -> ZoneState:
    projects = dirichlet_multinomial.update(state.projects, zone_day.project_counts, prior_scale)

    procedure_totals: Dict[str, Dict[str, int]] = defaultdict(lambda: defaultdict(int))
    class_docs = dict(state.class_docs)
    word_docs = dict(state.word_docs)
    touched = set()
    for record in zone_day.records:
        procedure_totals[record.project][record.procedure] += record.err_cnt
        class_docs[record.procedure] = class_docs.get(record.procedure, 0.0) + record.err_cnt
        for token in sorted(record.tokens):
            if token not in touched:
                word_docs[token] = dict(word_docs.get(token, {}))
                touched.add(token)
            word_docs[token][record.procedure] = word_docs[token].get(record.procedure, 0.0) + record.err_cnt

    procedures = dict(state.procedures)
    for project in sorted(procedure_totals):
        totals = procedure_totals[project]
        counts = CountVector.from_mapping({p: totals[p] for p in sorted(totals)})
        current = procedures.get(project, DirichletPosterior((), np.zeros(0)))
        procedures[project] = dirichlet_multinomial.update(current, counts, prior_scale)
    return ZoneState(projects, procedures, class_docs, word_docs)


def _fit_day(zones: Dict[str, ZoneState], horizon: Optional[dt.date], day: DayBatch,
             prior_scale: float) -> Dict[str, ZoneState]:
    if horizon is not None and day.date <= horizon:
        raise OrderingError(f"Day {day.date} does not follow the training horizon {horizon}.")
    zones = dict(zones)
    for zone, zone_day in day.zones.items():
        zones[zone] = _fit_zone(zones.get(zone, ZoneState.empty()), zone_day, prior_scale)
    logger.debug("Trained through %s (%d zones).", day.date, len(day.zones))
    return zones


def fit_increment(model: TanModel, day: DayBatch) -> TanModel:
    """
    Fold one day into every conditional posterior, err_cnt-weighted.

    Raises:
        OrderingError: If the day does not come strictly after the training horizon.
    """
    zones = _fit_day(model.zones, model.training_horizon, day, model.prior_scale)
    return TanModel(zones, day.date, model.prior_scale, model.min_doc_frequency)


def record_log_likelihood(model: TanModel, zone: str, project: str, procedure: str,
                          message: Union[Iterable[str], BowVector]) -> Tuple[float, Tuple[float, float, float]]:
    """
    Factorized log-likelihood of one record given its zone.

    Returns:
        (total, (project_part, procedure_part, words_part)) with total = sum of parts:
        ln P[Proj | Zone], ln P[Proc | Proj, Zone], ln P[words | Proc, Zone].

    Raises:
        DomainError: If the zone is unknown or the model is untrained.
    """
    if model.training_horizon is None:
        raise DomainError("The model has not been trained yet.")
    snapshot = model.zone_snapshot(zone)
    project_part = snapshot.projects.log_mean(project, model.prior_scale)
    bnb = snapshot.model_for(project, procedure)
    position = bnb.class_position(procedure)
    procedure_part = float(bnb.class_log_prior[position])
    bow = snapshot.encode(message)
    words_part = float(
        np.log(bnb.word_given_class[position, bow.present]).sum()
        + np.log1p(-bnb.word_given_class[position, ~bow.present]).sum()
    )
    parts = (project_part, procedure_part, words_part)
    return project_part + procedure_part + words_part, parts


def project_day_score(snapshot: ZoneSnapshot, zone_day: ZoneDay) -> float:
    """(1/k) times the exact DM log predictive of the day's project counts."""
    counts = zone_day.project_counts
    posterior = snapshot.projects.extend(counts.category_ids, snapshot.prior_scale)
    value = dirichlet_multinomial.exact_log_predictive(posterior, counts.reindex(posterior.category_ids))
    return value / counts.total


def procedure_day_score(snapshot: ZoneSnapshot, zone_day: ZoneDay) -> float:
    """err_cnt-weighted mean normalized log posterior of each record's actual procedure."""
    weighted, volume = 0.0, 0
    for record in zone_day.records:
        bnb = snapshot.model_for(record.project, record.procedure)
        log_posterior = bernoulli_nb.posterior_of(bnb, snapshot.encode(record.tokens), record.procedure)
        weighted += record.err_cnt * log_posterior
        volume += record.err_cnt
    return weighted / volume


def day_scores(model: TanModel, day: DayBatch) -> Dict[str, ZoneDayScore]:
    """
    Daily-averaged project and procedure log-likelihoods per zone.

    Zones without records, or never seen in training, get no score.
    """
    scores = {}
    for zone, zone_day in day.zones.items():
        if not zone_day.records:
            continue
        if zone not in model.zones:
            logger.warning("Zone %s on %s is unknown to the model; not scored.", zone, day.date)
            continue
        snapshot = model.zone_snapshot(zone)
        scores[zone] = ZoneDayScore(
            project_day_score(snapshot, zone_day),
            procedure_day_score(snapshot, zone_day),
        )
    return scores
