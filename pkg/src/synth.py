# SEPARABLE-RCA\src\synth.py

import datetime as dt
import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import DomainError
from src.io_managers.ingest import LogRecord

logger = logging.getLogger(__name__)

COMMON_WORDS = (
    "error", "exception", "failed", "request", "object", "reference", "timeout",
    "service", "channel", "connection", "invalid", "server",
)
_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"

RATE_SPIKE = "rate_spike"
MESSAGE_SWAP = "message_swap"
NEW_KEYWORD = "new_keyword"
INJECTION_KINDS = (RATE_SPIKE, MESSAGE_SWAP, NEW_KEYWORD)
DEFAULT_NEW_KEYWORD = "qxfault"

# SeedSequence spawn keys: latent parameters, per-day draws, per-day injections
_LATENT_STREAM = 0
_DAY_STREAM = 1
_INJECTION_STREAM = 2


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Parameters of the synthetic Zone -> Project -> Procedure -> message process.

    Daily volumes per zone are negative binomial (mean daily_volume, shape
    volume_dispersion); each day's project mix is Dirichlet(daily_concentration * p)
    around the latent probabilities p, which adds over-dispersion.

    Every procedure also emits the zone's shared_templates generic messages (built
    from common words only) with total weight shared_weight.
    """

    zones: int = 2
    projects_per_zone: int = 10
    procedures_per_project: int = 3
    vocabulary_size: int = 200
    templates_per_procedure: int = 3
    shared_templates: int = 2
    shared_weight: float = 0.3
    typical_words: int = 6
    min_message_words: int = 3
    max_message_words: int = 6
    daily_volume: float = 1000.0
    volume_dispersion: float = 50.0
    daily_concentration: float = 300.0
    days: int = 120
    start_date: dt.date = dt.date(2018, 4, 1)
    seed: int = 0

    def __post_init__(self):
        errors = []
        for name in ("zones", "projects_per_zone", "procedures_per_project", "vocabulary_size",
                     "templates_per_procedure", "typical_words", "min_message_words", "days"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be >= 1")
        if self.shared_templates < 0:
            errors.append("shared_templates must be >= 0")
        if not 0 <= self.shared_weight < 1:
            errors.append("shared_weight must be in [0, 1)")
        if self.max_message_words < self.min_message_words:
            errors.append("max_message_words must be >= min_message_words")
        if self.typical_words < self.max_message_words:
            errors.append("typical_words must be >= max_message_words")
        for name in ("daily_volume", "volume_dispersion", "daily_concentration"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be > 0")
        if not 0 <= self.seed < 2 ** 63:
            errors.append("seed must fit in 63 bits")
        if self.vocabulary_size < len(COMMON_WORDS) + self.typical_words:
            errors.append(
                f"vocabulary_size must be >= {len(COMMON_WORDS) + self.typical_words}"
            )
        if errors:
            raise DomainError("Invalid generator configuration: " + "; ".join(errors))

    def date_of(self, day: int) -> dt.date:
        return self.start_date + dt.timedelta(days=day)

    def to_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document["start_date"] = self.start_date.isoformat()
        return document


@dataclass(frozen=True)
class InjectionSpec:
    """
    One anomaly to plant on day `day` (0-based) of zone `zone`.

    targets: (project,) for rate_spike, (procedure_a, procedure_b) for message_swap,
    (procedure,) for new_keyword. magnitude is the spike factor, the swap fraction or
    the keyword insertion probability.
    """

    kind: str
    zone: str
    targets: Tuple[str, ...]
    day: int
    magnitude: float
    token: str = DEFAULT_NEW_KEYWORD

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.kind not in INJECTION_KINDS:
            raise DomainError(f"Unknown injection kind {self.kind!r}; expected one of {INJECTION_KINDS}.")
        expected = 2 if self.kind == MESSAGE_SWAP else 1
        if len(self.targets) != expected:
            raise DomainError(f"{self.kind} needs {expected} target(s), got {len(self.targets)}.")
        if not self.magnitude > 0:
            raise DomainError(f"Injection magnitude must be > 0, got {self.magnitude!r}.")
        if self.kind != RATE_SPIKE and self.magnitude > 1:
            raise DomainError(f"{self.kind} magnitude is a fraction and must be <= 1.")
        if self.day < 0:
            raise DomainError("Injection day must be >= 0.")

    def to_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document["targets"] = list(self.targets)
        if self.kind != NEW_KEYWORD:
            del document["token"]
        return document


@dataclass(frozen=True)
class ZoneTruth:
    """Latent parameters of one zone."""

    project_probabilities: Dict[str, float]
    procedure_probabilities: Dict[str, Dict[str, float]]
    templates: Dict[str, Tuple[Tuple[str, float], ...]]

    def project_of(self, procedure: str) -> str:
        for project, procedures in self.procedure_probabilities.items():
            if procedure in procedures:
                return project
        raise DomainError(f"Unknown procedure: {procedure!r}")

    def template_tokens(self, procedure: str) -> frozenset:
        return frozenset(
            word.lower() for message, _ in self.templates[procedure] for word in message.split()
        )


@dataclass(frozen=True)
class GroundTruth:
    config: GeneratorConfig
    vocabulary: Tuple[str, ...]
    zones: Dict[str, ZoneTruth]

    def expected_project_volume(self, zone: str, project: str) -> float:
        """Latent mean daily err_cnt total of a project."""
        return self.config.daily_volume * self.zones[zone].project_probabilities[project]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "vocabulary": list(self.vocabulary),
            "zones": {
                zone: {
                    "project_probabilities": truth.project_probabilities,
                    "procedure_probabilities": truth.procedure_probabilities,
                    "templates": {
                        procedure: [{"message": m, "weight": w} for m, w in templates]
                        for procedure, templates in truth.templates.items()
                    },
                }
                for zone, truth in self.zones.items()
            },
        }


@dataclass
class InjectionManifest:
    """
    What an injection changed: day-level err_cnt per (project, procedure, message)
    before and after, enough to rebuild the un-injected aggregates.
    """

    spec: InjectionSpec
    date: dt.date
    before: Dict[Tuple[str, str, str], int] = field(default_factory=dict)
    after: Dict[Tuple[str, str, str], int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        keys = sorted(set(self.before) | set(self.after))
        return {
            "injection": self.spec.to_dict(),
            "date": self.date.isoformat(),
            "changes": [
                {
                    "project": project,
                    "procedure": procedure,
                    "message": message,
                    "err_cnt_before": self.before.get((project, procedure, message), 0),
                    "err_cnt_after": self.after.get((project, procedure, message), 0),
                }
                for project, procedure, message in keys
                if self.before.get((project, procedure, message), 0)
                != self.after.get((project, procedure, message), 0)
            ],
        }


def _rng(seed: int, *spawn_key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn_key))


def _pseudo_words(count: int, rng: np.random.Generator) -> List[str]:
    syllables = [c + v for c in _CONSONANTS for v in _VOWELS]
    words = []
    length = 2
    while len(words) < count:
        n_words = len(syllables) ** length
        for index in rng.permutation(n_words)[: count - len(words)]:
            parts = []
            for _ in range(length):
                index, digit = divmod(int(index), len(syllables))
                parts.append(syllables[digit])
            words.append("".join(parts))
        length += 1
    return words


def _generic_messages(config: GeneratorConfig, rng: np.random.Generator) -> List[str]:
    messages: List[str] = []
    while len(messages) < config.shared_templates:
        length = int(rng.integers(3, 6))
        words = [COMMON_WORDS[int(i)] for i in rng.choice(len(COMMON_WORDS), size=length, replace=False)]
        message = " ".join([words[0].capitalize()] + words[1:])
        if message not in messages:
            messages.append(message)
    return messages


def _latent_parameters(config: GeneratorConfig) -> GroundTruth:
    rng = _rng(config.seed, _LATENT_STREAM)
    vocabulary = list(COMMON_WORDS) + _pseudo_words(config.vocabulary_size - len(COMMON_WORDS), rng)
    specific = vocabulary[len(COMMON_WORDS):]
    specific_weight = 1.0 - config.shared_weight if config.shared_templates else 1.0

    zones = {}
    for z in range(config.zones):
        zone = f"Zone{z + 1}"
        projects = [f"Project{p + 1:02d}" for p in range(config.projects_per_zone)]
        project_p = rng.dirichlet(np.ones(len(projects)))
        generic = _generic_messages(config, rng)
        procedure_p, templates = {}, {}
        for project in projects:
            procedures = [f"{project}.Proc{j + 1}" for j in range(config.procedures_per_project)]
            weights = rng.dirichlet(np.ones(len(procedures)))
            procedure_p[project] = {name: float(w) for name, w in zip(procedures, weights)}
            for procedure in procedures:
                pool = rng.choice(len(specific), size=config.typical_words, replace=False)
                template_weights = specific_weight * rng.dirichlet(np.ones(config.templates_per_procedure))
                procedure_templates = []
                for weight in template_weights:
                    length = int(rng.integers(config.min_message_words, config.max_message_words + 1))
                    words = [COMMON_WORDS[int(rng.integers(len(COMMON_WORDS)))].capitalize()]
                    words += [specific[i] for i in rng.choice(pool, size=length, replace=False)]
                    procedure_templates.append((" ".join(words), float(weight)))
                if generic:
                    generic_weights = (1.0 - specific_weight) * rng.dirichlet(np.ones(len(generic)))
                    procedure_templates += [(m, float(w)) for m, w in zip(generic, generic_weights)]
                templates[procedure] = tuple(procedure_templates)
        zones[zone] = ZoneTruth(
            {name: float(p) for name, p in zip(projects, project_p)}, procedure_p, templates
        )
    return GroundTruth(config, tuple(vocabulary), zones)


def _template_draws(rng: np.random.Generator, templates, n: int) -> np.ndarray:
    weights = np.array([w for _, w in templates])
    return rng.multinomial(n, weights / weights.sum())


def _generate_day(config: GeneratorConfig, truth: GroundTruth, day: int) -> List[LogRecord]:
    rng = _rng(config.seed, _DAY_STREAM, day)
    date = config.date_of(day)
    records = []
    for zone, zone_truth in truth.zones.items():
        shape = config.volume_dispersion
        total = int(rng.negative_binomial(shape, shape / (shape + config.daily_volume)))
        projects = list(zone_truth.project_probabilities)
        p = np.array([zone_truth.project_probabilities[name] for name in projects])
        mix = rng.dirichlet(config.daily_concentration * p)
        for project, n_project in zip(projects, rng.multinomial(total, mix)):
            procedures = zone_truth.procedure_probabilities[project]
            weights = np.array(list(procedures.values()))
            for procedure, n_procedure in zip(procedures, rng.multinomial(n_project, weights)):
                templates = zone_truth.templates[procedure]
                for (message, _), count in zip(templates, _template_draws(rng, templates, n_procedure)):
                    if count > 0:
                        records.append(LogRecord(0, date, zone, project, procedure, message, int(count)))
    return records


def _renumber(records: Sequence[LogRecord]) -> List[LogRecord]:
    return [replace(record, row_id=i) for i, record in enumerate(records, start=1)]


def generate(config: GeneratorConfig) -> Tuple[List[LogRecord], GroundTruth]:
    """
    Draw a synthetic error log from fixed latent parameters.

    Latent parameters come from SeedSequence(seed, spawn_key=(0,)) and day d from
    SeedSequence(seed, spawn_key=(1, d)), so any day can be regenerated on its own.

    Returns:
        Tuple[List[LogRecord], GroundTruth]: Records ordered by date, zone, project,
        procedure and template, with row ids 1..n, plus the latent parameters.
    """
    truth = _latent_parameters(config)
    records = []
    for day in range(config.days):
        records.extend(_generate_day(config, truth, day))
    logger.info("Generated %d records over %d days.", len(records), config.days)
    return _renumber(records), truth


def _day_aggregates(records: Sequence[LogRecord]) -> Dict[Tuple[str, str, str], int]:
    totals: Dict[Tuple[str, str, str], int] = defaultdict(int)
    for record in records:
        totals[(record.project_name, record.procedure_name, record.error_detail)] += record.err_cnt
    return dict(totals)


def _spike(rng, records, spec: InjectionSpec) -> List[LogRecord]:
    changed = []
    for record in records:
        if record.project_name != spec.targets[0]:
            changed.append(record)
            continue
        if spec.magnitude >= 1:
            count = record.err_cnt + int(rng.poisson((spec.magnitude - 1) * record.err_cnt))
        else:
            count = int(rng.binomial(record.err_cnt, spec.magnitude))
        if count > 0:
            changed.append(replace(record, err_cnt=count))
    return changed


def _swap(rng, records, spec: InjectionSpec, truth: ZoneTruth) -> List[LogRecord]:
    first, second = spec.targets
    partner = {first: second, second: first}
    changed = []
    for record in records:
        if record.procedure_name not in partner:
            changed.append(record)
            continue
        moved = int(rng.binomial(record.err_cnt, spec.magnitude))
        if record.err_cnt - moved > 0:
            changed.append(replace(record, err_cnt=record.err_cnt - moved))
        templates = truth.templates[partner[record.procedure_name]]
        for (message, _), count in zip(templates, _template_draws(rng, templates, moved)):
            if count > 0:
                changed.append(replace(record, error_detail=message, err_cnt=int(count)))
    return changed


def _new_keyword(rng, records, spec: InjectionSpec) -> List[LogRecord]:
    changed = []
    for record in records:
        if record.procedure_name != spec.targets[0]:
            changed.append(record)
            continue
        marked = int(rng.binomial(record.err_cnt, spec.magnitude))
        if record.err_cnt - marked > 0:
            changed.append(replace(record, err_cnt=record.err_cnt - marked))
        if marked > 0:
            changed.append(replace(record, error_detail=f"{record.error_detail} {spec.token}",
                                   err_cnt=marked))
    return changed


def inject(records: Sequence[LogRecord], spec: InjectionSpec, truth: GroundTruth,
           seed: Optional[int] = None) -> Tuple[List[LogRecord], InjectionManifest]:
    """
    Plant one anomaly into a generated stream.

    rate_spike scales every record of the target project that day by the factor
    (extra counts Poisson, or binomial thinning below 1); message_swap redraws the
    given fraction of each procedure's messages from the other's templates;
    new_keyword appends the token to that fraction of the procedure's messages.
    Draws come from SeedSequence(seed, spawn_key=(2, day)).

    Args:
        records: Stream from generate (or an earlier inject).
        spec (InjectionSpec): What to plant.
        truth (GroundTruth): Latent parameters of the stream.
        seed (int|None): Injection seed; defaults to the generator seed.

    Returns:
        Tuple[List[LogRecord], InjectionManifest]: Renumbered records and the manifest.

    Raises:
        DomainError: If the day, zone, project, procedure or token is not valid for
            the stream.
    """
    config = truth.config
    if spec.day >= config.days:
        raise DomainError(f"Injection day {spec.day} is outside the {config.days} generated days.")
    if spec.zone not in truth.zones:
        raise DomainError(f"Unknown zone: {spec.zone!r}")
    zone_truth = truth.zones[spec.zone]
    if spec.kind == RATE_SPIKE:
        if spec.targets[0] not in zone_truth.project_probabilities:
            raise DomainError(f"Unknown project: {spec.targets[0]!r}")
    else:
        for procedure in spec.targets:
            zone_truth.project_of(procedure)
    if spec.kind == NEW_KEYWORD and spec.token.lower() in truth.vocabulary:
        raise DomainError(f"Token {spec.token!r} is part of the generated vocabulary.")

    date = config.date_of(spec.day)
    rng = _rng(config.seed if seed is None else seed, _INJECTION_STREAM, spec.day)
    target = [r for r in records if r.date == date and r.region == spec.zone]
    if spec.kind == RATE_SPIKE:
        modified = _spike(rng, target, spec)
    elif spec.kind == MESSAGE_SWAP:
        modified = _swap(rng, target, spec, zone_truth)
    else:
        modified = _new_keyword(rng, target, spec)

    manifest = InjectionManifest(spec, date, _day_aggregates(target), _day_aggregates(modified))
    result, inserted = [], False
    for record in records:
        if record.date == date and record.region == spec.zone:
            if not inserted:
                result.extend(modified)
                inserted = True
            continue
        result.append(record)
    logger.info("Injected %s into %s on %s.", spec.kind, spec.zone, date)
    return _renumber(result), manifest
