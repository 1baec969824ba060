# SEPARABLE-RCA\src\dirichlet_multinomial.py

from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from src import numerics
from src.exceptions import DomainError
from src.numerics import ProbabilityVector

DEFAULT_PRIOR_SCALE = 1.0


def _unique_ids(category_ids: Iterable[str]) -> Tuple[str, ...]:
    ids = tuple(category_ids)
    if len(set(ids)) != len(ids):
        raise DomainError(f"Category ids must be unique: {ids!r}")
    return ids


@dataclass(frozen=True)
class CountVector:
    """
    Per-category event counts k_i of one (zone, day), in a fixed category order.
    """

    category_ids: Tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        ids = _unique_ids(self.category_ids)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(ids),):
            raise DomainError(
                f"{len(ids)} categories but {counts.size} counts were given."
            )
        if np.any(counts < 0):
            raise DomainError("Counts must be non-negative.")
        counts.setflags(write=False)
        object.__setattr__(self, "category_ids", ids)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_mapping(cls, counts: Dict[str, int]) -> "CountVector":
        """Build a count vector from a {category: count} mapping, keeping insertion order."""
        return cls(tuple(counts.keys()), np.array(list(counts.values()), dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> ProbabilityVector:
        """Observed frequencies q_i = k_i / k."""
        return ProbabilityVector.from_counts(self.counts)

    def as_dict(self) -> Dict[str, int]:
        return {cid: int(c) for cid, c in zip(self.category_ids, self.counts)}

    def reindex(self, category_ids: Sequence[str]) -> "CountVector":
        """
        Reorder onto category_ids, filling absent categories with zero.

        Raises:
            DomainError: If a category with counts is missing from category_ids.
        """
        lookup = self.as_dict()
        dropped = set(lookup) - set(category_ids)
        if dropped:
            raise DomainError(f"Categories {sorted(dropped)} are not in the target order.")
        return CountVector(
            tuple(category_ids),
            np.array([lookup.get(cid, 0) for cid in category_ids], dtype=np.int64),
        )


@dataclass(frozen=True)
class DirichletPosterior:
    """
    Dirichlet concentration vector alpha'_i over an ordered set of categories.

    Immutable: update() and extend() return new posteriors.
    """

    category_ids: Tuple[str, ...]
    alpha: np.ndarray

    def __post_init__(self):
        ids = _unique_ids(self.category_ids)
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.shape != (len(ids),):
            raise DomainError(
                f"{len(ids)} categories but {alpha.size} concentrations were given."
            )
        if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
            raise DomainError("Concentrations must be positive and finite.")
        alpha.setflags(write=False)
        object.__setattr__(self, "category_ids", ids)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(cls, category_ids: Sequence[str],
                prior_scale: float = DEFAULT_PRIOR_SCALE) -> "DirichletPosterior":
        """The add-one prior (scaled by prior_scale) over the given categories."""
        return cls(tuple(category_ids), np.full(len(category_ids), float(prior_scale)))

    @property
    def alpha_total(self) -> float:
        return float(self.alpha.sum())

    @property
    def dimension(self) -> int:
        return len(self.category_ids)

    def mode_frequencies(self) -> ProbabilityVector:
        """Posterior mean frequencies p_i = alpha'_i / alpha'."""
        return ProbabilityVector(self.alpha / self.alpha_total)

    def extend(self, category_ids: Iterable[str],
               prior_scale: float = DEFAULT_PRIOR_SCALE) -> "DirichletPosterior":
        """
        Add categories that are not yet known, each with concentration prior_scale.

        Known categories keep their position; new ones are appended in the given order.
        """
        known = set(self.category_ids)
        new_ids = [cid for cid in dict.fromkeys(category_ids) if cid not in known]
        if not new_ids:
            return self
        return DirichletPosterior(
            self.category_ids + tuple(new_ids),
            np.concatenate([self.alpha, np.full(len(new_ids), float(prior_scale))]),
        )

    def log_mean(self, category_id: str, prior_scale: float = DEFAULT_PRIOR_SCALE) -> float:
        """ln of the posterior mean probability of one category (unseen ones get prior_scale)."""
        extended = self.extend([category_id], prior_scale)
        index = extended.category_ids.index(category_id)
        return float(np.log(extended.alpha[index]) - np.log(extended.alpha_total))

    def to_dict(self) -> Dict[str, float]:
        return {cid: float(a) for cid, a in zip(self.category_ids, self.alpha)}

    @classmethod
    def from_dict(cls, concentrations: Dict[str, float]) -> "DirichletPosterior":
        return cls(tuple(concentrations.keys()), np.array(list(concentrations.values()), dtype=float))


@dataclass(frozen=True)
class ImpactVector:
    """
    Per-category impacts I(k_i) <= 0 and the exact log-likelihood at the mode.
    """

    category_ids: Tuple[str, ...]
    impacts: np.ndarray
    mode_log_likelihood: float

    @property
    def deficiency(self) -> float:
        return float(self.impacts.sum())

    def as_dict(self) -> Dict[str, float]:
        return {cid: float(i) for cid, i in zip(self.category_ids, self.impacts)}


CountsLike = Union[CountVector, Sequence[float], np.ndarray]


def _aligned_counts(posterior: DirichletPosterior, counts: CountsLike) -> np.ndarray:
    """
    Counts as a float array in the posterior's category order.

    A CountVector must cover exactly the posterior's categories; a bare array is taken
    as already aligned and may be real-valued (continuous relaxation).
    """
    if isinstance(counts, CountVector):
        if counts.category_ids == posterior.category_ids:
            return counts.counts.astype(float)
        if set(counts.category_ids) != set(posterior.category_ids):
            raise DomainError(
                f"Dimension mismatch: posterior has {posterior.dimension} categories, "
                f"counts have {len(counts.category_ids)}."
            )
        return counts.reindex(posterior.category_ids).counts.astype(float)
    values = np.asarray(counts, dtype=float)
    if values.shape != (posterior.dimension,):
        raise DomainError(
            f"Dimension mismatch: posterior has {posterior.dimension} categories, "
            f"counts have {values.size}."
        )
    if np.any(values < 0):
        raise DomainError("Counts must be non-negative.")
    return values


def update(posterior: DirichletPosterior, counts: CountVector,
           prior_scale: float = DEFAULT_PRIOR_SCALE) -> DirichletPosterior:
    """
    Conjugate update alpha'_i += k_i.

    Categories present in counts but unknown to the posterior are first added with
    concentration prior_scale.

    Raises:
        DomainError: If any count is negative.
    """
    if np.any(np.asarray(counts.counts) < 0):
        raise DomainError("Counts must be non-negative.")
    extended = posterior.extend(counts.category_ids, prior_scale)
    aligned = counts.reindex(extended.category_ids).counts
    return DirichletPosterior(extended.category_ids, extended.alpha + aligned)


def exact_log_predictive(posterior: DirichletPosterior, counts: CountsLike) -> float:
    """
    Exact Dirichlet-Multinomial log predictive probability of a count vector.

    ln[ Γ(k+1)/Π Γ(k_i+1) · Γ(α')/Π Γ(α'_i) · Π Γ(k_i+α'_i)/Γ(k+α') ]

    Args:
        posterior (DirichletPosterior): Concentrations alpha'.
        counts: A CountVector over the same categories, or an aligned real array.

    Returns:
        float: Log predictive probability.

    Raises:
        DomainError: On a dimension mismatch or negative counts.
    """
    values = _aligned_counts(posterior, counts)
    alpha = posterior.alpha
    total = values.sum()
    alpha_total = alpha.sum()
    multinomial_part = numerics.log_gamma(total + 1) - numerics.log_gamma(values + 1).sum()
    total_part = numerics.log_gamma(alpha_total) - numerics.log_gamma(total + alpha_total)
    category_part = (numerics.log_gamma(values + alpha) - numerics.log_gamma(alpha)).sum()
    return float(multinomial_part + total_part + category_part)


def stirling_log_predictive(posterior: DirichletPosterior, counts: CountsLike) -> float:
    """
    exact_log_predictive with every log-gamma replaced by its Stirling form,
    half-log corrections included. The error is O(1 / min k_i).

    Raises:
        DomainError: If any count is zero (use the exact form or add an offset).
    """
    values = _aligned_counts(posterior, counts)
    if np.any(values <= 0):
        raise DomainError("The Stirling form needs every count to be positive.")
    alpha = posterior.alpha
    total = values.sum()
    alpha_total = alpha.sum()
    log_factorial, log_gamma = numerics.stirling_log_factorial, numerics.stirling_log_gamma
    multinomial_part = log_factorial(total) - log_factorial(values).sum()
    total_part = log_gamma(alpha_total) - log_gamma(total + alpha_total)
    category_part = (log_gamma(values + alpha) - log_gamma(alpha)).sum()
    return float(multinomial_part + total_part + category_part)


def mode(posterior: DirichletPosterior, total: float) -> np.ndarray:
    """
    Real-valued mode k_i = (k / alpha') alpha'_i of the predictive for total k.

    Raises:
        DomainError: If total is not positive.
    """
    if total <= 0:
        raise DomainError(f"The mode needs a positive total, got {total!r}.")
    return total * posterior.alpha / posterior.alpha_total


def _shrinkage(posterior: DirichletPosterior, total: float) -> float:
    return posterior.alpha_total / (posterior.alpha_total + total)


def _quadratic_impacts(posterior: DirichletPosterior, values: np.ndarray) -> np.ndarray:
    total = values.sum()
    if total <= 0:
        raise DomainError("Impacts need a positive total count.")
    observed = values / total
    expected = posterior.alpha / posterior.alpha_total
    return -0.5 * _shrinkage(posterior, total) * total * (observed - expected) ** 2 / expected


def laplace_log_predictive(posterior: DirichletPosterior, counts: CountsLike) -> float:
    """
    Laplace (separable) approximation: exact value at the mode minus the diagonal
    quadratic form (1/2)(alpha'/(alpha'+k)) k sum_i (q_i - p_i)^2 / p_i.
    """
    values = _aligned_counts(posterior, counts)
    quadratic = _quadratic_impacts(posterior, values)
    mode_value = exact_log_predictive(posterior, mode(posterior, values.sum()))
    return mode_value + float(quadratic.sum())


def impacts(posterior: DirichletPosterior, counts: CountsLike) -> ImpactVector:
    """
    Per-category impacts of the separable approximation.

    I(k_i) = -(1/2)(alpha'/(alpha'+k)) k (q_i - p_i)^2 / p_i, always <= 0.

    Returns:
        ImpactVector: Impacts in the posterior's category order plus the exact
        log-likelihood at the mode.
    """
    values = _aligned_counts(posterior, counts)
    per_category = _quadratic_impacts(posterior, values)
    mode_value = exact_log_predictive(posterior, mode(posterior, values.sum()))
    return ImpactVector(posterior.category_ids, per_category, mode_value)


def mode_hessian(posterior: DirichletPosterior, total: float) -> np.ndarray:
    """
    Analytic Hessian of the continuous exact log predictive at the mode.

    Off-diagonal entries share the value psi'(k+1) - psi'(k+alpha'); the diagonal adds
    psi'(k_i+alpha'_i) - psi'(k_i+1).
    """
    at_mode = mode(posterior, total)
    alpha_total = posterior.alpha_total
    common = numerics.trigamma(total + 1) - numerics.trigamma(total + alpha_total)
    diagonal = numerics.trigamma(at_mode + posterior.alpha) - numerics.trigamma(at_mode + 1)
    return np.full((posterior.dimension, posterior.dimension), common) + np.diag(diagonal)
