# SEPARABLE-RCA\src\bernoulli_nb.py

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from src import numerics
from src.exceptions import DomainError


@dataclass(frozen=True)
class Vocabulary:
    """
    Ordered, duplicate-free list of words with a word -> position lookup.
    """

    words: Tuple[str, ...]
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        if len(set(words)) != len(words):
            raise DomainError("Vocabulary words must be unique.")
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "index", {w: i for i, w in enumerate(words)})

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def encode(self, tokens: Iterable[str]) -> "BowVector":
        """
        Binarize a token collection against this vocabulary.

        Duplicate tokens count once; unknown tokens are kept aside as out-of-vocabulary.
        """
        present = np.zeros(len(self.words), dtype=bool)
        out_of_vocabulary = []
        for token in dict.fromkeys(tokens):
            position = self.index.get(token)
            if position is None:
                out_of_vocabulary.append(token)
            else:
                present[position] = True
        return BowVector(present, tuple(sorted(out_of_vocabulary)))


@dataclass(frozen=True)
class BowVector:
    """
    Presence indicators of every vocabulary word in one message.
    """

    present: np.ndarray
    out_of_vocabulary: Tuple[str, ...] = ()

    def __post_init__(self):
        present = np.asarray(self.present, dtype=bool)
        present.setflags(write=False)
        object.__setattr__(self, "present", present)


@dataclass(frozen=True)
class WordImpactReport:
    """
    Exact decomposition gap = prior_term + sum(word_impacts) for one message.
    """

    actual_class: str
    mode_class: str
    gap: float
    prior_term: float
    word_impacts: np.ndarray
    words: Tuple[str, ...]
    out_of_vocabulary: Tuple[str, ...] = ()

    def as_dict(self) -> Dict[str, float]:
        return {w: float(i) for w, i in zip(self.words, self.word_impacts)}


def _normalize_log_prior(log_prior: np.ndarray) -> np.ndarray:
    return log_prior - numerics.log_sum_exp(log_prior)


@dataclass(frozen=True)
class BnbModel:
    """
    Bernoulli Naive Bayes with Beta(1, 1) smoothing.

    p_{w|c} = (n_{w,c} + 1) / (n_c + 2), the posterior mean after n_c documents of
    class c of which n_{w,c} contain w. Immutable once built.
    """

    vocabulary: Vocabulary
    classes: Tuple[str, ...]
    class_log_prior: np.ndarray
    doc_count: np.ndarray
    word_doc_count: np.ndarray
    word_given_class: np.ndarray = field(init=False, repr=False)
    _log_present: np.ndarray = field(init=False, repr=False, compare=False)
    _log_absent: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        classes = tuple(self.classes)
        if not classes:
            raise DomainError("A Bernoulli Naive Bayes model needs at least one class.")
        if len(set(classes)) != len(classes):
            raise DomainError("Class labels must be unique.")
        doc_count = np.asarray(self.doc_count, dtype=float)
        word_doc_count = np.asarray(self.word_doc_count, dtype=float).reshape(
            len(classes), len(self.vocabulary)
        )
        if doc_count.shape != (len(classes),):
            raise DomainError("doc_count must have one entry per class.")
        if np.any(word_doc_count < 0) or np.any(word_doc_count > doc_count[:, None]):
            raise DomainError("Word document counts must lie in [0, n_c].")
        log_prior = np.asarray(self.class_log_prior, dtype=float)
        if log_prior.shape != (len(classes),):
            raise DomainError("class_log_prior must have one entry per class.")

        probabilities = (word_doc_count + 1.0) / (doc_count[:, None] + 2.0)
        for name, value in (
            ("classes", classes),
            ("doc_count", doc_count),
            ("word_doc_count", word_doc_count),
            ("class_log_prior", _normalize_log_prior(log_prior)),
            ("word_given_class", probabilities),
            ("_log_present", np.log(probabilities)),
            ("_log_absent", np.log1p(-probabilities)),
        ):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_counts(cls, vocabulary: Vocabulary, classes: Sequence[str],
                    doc_count: Sequence[float], word_doc_count: np.ndarray,
                    class_log_prior: Optional[Sequence[float]] = None) -> "BnbModel":
        """Build a model from sufficient statistics; uniform class prior when none is given."""
        if class_log_prior is None:
            class_log_prior = np.zeros(len(classes))
        return cls(vocabulary, tuple(classes), np.asarray(class_log_prior, dtype=float),
                   np.asarray(doc_count, dtype=float), np.asarray(word_doc_count, dtype=float))

    def class_position(self, class_label: str) -> int:
        try:
            return self.classes.index(class_label)
        except ValueError:
            raise DomainError(f"Unknown class: {class_label!r}")

    def with_class_log_prior(self, class_log_prior: Union[Sequence[float], np.ndarray]) -> "BnbModel":
        """Same word statistics under a different (re-normalized) class prior."""
        return replace(self, class_log_prior=np.asarray(class_log_prior, dtype=float))

    def extend_classes(self, classes: Iterable[str]) -> "BnbModel":
        """
        Add classes without documents (p_{w|c} = 1/2 for every word).

        New classes enter the prior with the smallest existing prior weight.
        """
        new = [c for c in dict.fromkeys(classes) if c not in self.classes]
        if not new:
            return self
        floor = float(self.class_log_prior.min())
        return BnbModel(
            self.vocabulary,
            self.classes + tuple(new),
            np.concatenate([self.class_log_prior, np.full(len(new), floor)]),
            np.concatenate([self.doc_count, np.zeros(len(new))]),
            np.vstack([self.word_doc_count, np.zeros((len(new), len(self.vocabulary)))]),
        )


def fit(documents: Sequence[Tuple[BowVector, str]], vocabulary: Vocabulary,
        class_log_prior: Union[Dict[str, float], Sequence[str], None] = None,
        weights: Optional[Sequence[int]] = None) -> BnbModel:
    """
    Fit word-given-class Bernoulli posteriors from binarized documents.

    Args:
        documents: (message, class) pairs.
        vocabulary (Vocabulary): Fixed word order shared by all messages.
        class_log_prior: Either {class: log prior} (defines the class set) or a list of
            class labels with a uniform prior. Defaults to the classes seen in documents.
        weights: Optional document multiplicities (e.g. error counts).

    Returns:
        BnbModel: The fitted model.

    Raises:
        DomainError: If the class set is empty, a document class is outside it, or a
            message does not match the vocabulary size.
    """
    if isinstance(class_log_prior, dict):
        classes = list(class_log_prior.keys())
        log_prior = np.array([class_log_prior[c] for c in classes], dtype=float)
    else:
        classes = list(class_log_prior) if class_log_prior is not None else \
            sorted({label for _, label in documents})
        log_prior = np.zeros(len(classes))
    if not classes:
        raise DomainError("Cannot fit a model with an empty class set.")

    position = {c: i for i, c in enumerate(classes)}
    doc_count = np.zeros(len(classes))
    word_doc_count = np.zeros((len(classes), len(vocabulary)))
    multiplicities = weights if weights is not None else [1] * len(documents)
    for (message, label), weight in zip(documents, multiplicities):
        if label not in position:
            raise DomainError(f"Document class {label!r} is not in the class set.")
        if message.present.shape != (len(vocabulary),):
            raise DomainError("Message dimension does not match the vocabulary.")
        doc_count[position[label]] += weight
        word_doc_count[position[label]] += weight * message.present
    return BnbModel(vocabulary, tuple(classes), log_prior, doc_count, word_doc_count)


def _unnormalized_scores(model: BnbModel, message: BowVector) -> np.ndarray:
    if message.present.shape != (len(model.vocabulary),):
        raise DomainError(
            f"Message has {message.present.size} entries, vocabulary has {len(model.vocabulary)}."
        )
    present = message.present
    return (
        model.class_log_prior
        + model._log_present[:, present].sum(axis=1)
        + model._log_absent[:, ~present].sum(axis=1)
    )


def class_log_scores(model: BnbModel, message: BowVector) -> np.ndarray:
    """
    Normalized log posterior ln L(c | w) of every class, in model.classes order.

    Raises:
        DomainError: If the message dimension does not match the vocabulary.
    """
    scores = _unnormalized_scores(model, message)
    return scores - numerics.log_sum_exp(scores)


def gap_and_impacts(model: BnbModel, message: BowVector, actual_class: str) -> WordImpactReport:
    """
    Log-posterior gap of the actual class to the most likely class, split per word.

    gap = ln(p_c / p_c*) + sum_w I(w), where I(w) = ln(p_{w|c} / p_{w|c*}) for present
    words and ln((1 - p_{w|c}) / (1 - p_{w|c*})) for absent ones.

    Raises:
        DomainError: If actual_class is not a model class.
    """
    actual = model.class_position(actual_class)
    scores = class_log_scores(model, message)
    best = int(np.argmax(scores))
    present = message.present
    word_impacts = np.where(
        present,
        model._log_present[actual] - model._log_present[best],
        model._log_absent[actual] - model._log_absent[best],
    )
    return WordImpactReport(
        actual_class=actual_class,
        mode_class=model.classes[best],
        gap=float(scores[actual] - scores[best]),
        prior_term=float(model.class_log_prior[actual] - model.class_log_prior[best]),
        word_impacts=word_impacts,
        words=model.vocabulary.words,
        out_of_vocabulary=message.out_of_vocabulary,
    )


def posterior_of(model: BnbModel, message: BowVector, actual_class: str) -> float:
    """Normalized log posterior of one class."""
    return float(class_log_scores(model, message)[model.class_position(actual_class)])