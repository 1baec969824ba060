# SEPARABLE-RCA\src\results_processing\rca_report.py

import datetime as dt
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

NO_DEFICIENCY_NOTE = "no deficiency to explain"


@dataclass(frozen=True)
class RankedItem:
    """One explanation line: a project or word, its impact in nats and its share."""

    label: str
    impact: float
    share: float

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "impact": self.impact, "share": self.share}


@dataclass(frozen=True)
class HitCrossTab:
    """
    Keyword hits per procedure class: err_cnt-weighted messages matching at least one
    keyword, on the anomaly day and as a mean per reference day.
    """

    keywords: Tuple[str, ...]
    rows: Dict[str, Tuple[float, float]]
    reference_days: int = 0

    def anomaly_hits(self, procedure: str) -> float:
        return self.rows[procedure][0]

    def reference_mean(self, procedure: str) -> float:
        return self.rows[procedure][1]

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {"procedure": procedure, "anomaly_day_hits": hits, "reference_mean_hits": mean}
            for procedure, (hits, mean) in self.rows.items()
        ]


@dataclass(frozen=True)
class KeywordMessage:
    """A message carrying keywords, with its hits on the anomaly day against the reference."""

    procedure: str
    message: str
    hits: float
    reference_mean: float

    @property
    def shift(self) -> float:
        return self.hits - self.reference_mean

    def to_dict(self) -> Dict[str, Any]:
        return {
            "procedure": self.procedure,
            "message": self.message,
            "anomaly_day_hits": self.hits,
            "reference_mean_hits": self.reference_mean,
            "shift": self.shift,
        }


@dataclass(frozen=True)
class RcaReport:
    """
    Explanation of one (date, zone) for the project or procedure submodel.

    ranked_items run from the most negative impact upwards. For procedure reports the
    deficiency splits into prior_term plus the sum of all word impacts, and
    keyword_set holds the labels of ranked_items.
    """

    date: dt.date
    zone: str
    kind: str
    deficiency: float
    ranked_items: Tuple[RankedItem, ...]
    impacts: Dict[str, float]
    mode_log_likelihood: Optional[float] = None
    prior_term: Optional[float] = None
    keyword_set: Tuple[str, ...] = ()
    crosstab: Optional[HitCrossTab] = None
    keyword_messages: Tuple[KeywordMessage, ...] = ()
    novel_tokens: Dict[str, float] = field(default_factory=dict)
    notes: Tuple[str, ...] = ()

    @property
    def top_label(self) -> Optional[str]:
        return self.ranked_items[0].label if self.ranked_items else None

    def to_dict(self) -> Dict[str, Any]:
        """
        Structured document of the report; dates are ISO-8601 and impacts in nats.

        Returns:
            Dict[str, Any]: JSON-ready report.
        """
        document = {
            "date": self.date.isoformat(),
            "zone": self.zone,
            "kind": self.kind,
            "deficiency": self.deficiency,
            "ranked_items": [item.to_dict() for item in self.ranked_items],
            "impacts": dict(self.impacts),
            "notes": list(self.notes),
        }
        if self.mode_log_likelihood is not None:
            document["mode_log_likelihood"] = self.mode_log_likelihood
        if self.kind == "procedure":
            document["prior_term"] = self.prior_term
            document["keyword_set"] = list(self.keyword_set)
            document["crosstab"] = self.crosstab.to_rows() if self.crosstab else []
            document["keyword_messages"] = [m.to_dict() for m in self.keyword_messages]
            document["novel_tokens"] = dict(self.novel_tokens)
        return document

    def to_text(self) -> str:
        """Human-readable rendering."""
        lines = [
            f"{self.kind.capitalize()} RCA for zone {self.zone} on {self.date.isoformat()}",
            f"  deficiency: {self.deficiency:.6f} nats",
        ]
        if self.prior_term is not None:
            lines.append(f"  procedure prior term: {self.prior_term:.6f} nats")
        for note in self.notes:
            lines.append(f"  note: {note}")
        if self.ranked_items:
            lines.append("  most impacting:")
            for rank, item in enumerate(self.ranked_items, start=1):
                lines.append(f"    {rank}. {item.label}  impact {item.impact:.6f}  share {item.share:.1%}")
        if self.crosstab is not None:
            lines.append(
                f"  keyword hits for {{{', '.join(self.keyword_set)}}} "
                f"(reference mean over {self.crosstab.reference_days} days):"
            )
            for row in self.crosstab.to_rows():
                lines.append(
                    f"    {row['procedure']}: {row['anomaly_day_hits']:g} "
                    f"vs {row['reference_mean_hits']:.2f}"
                )
        if self.keyword_messages:
            lines.append("  messages with keywords:")
            for message in self.keyword_messages:
                lines.append(
                    f"    [{message.procedure}] {message.message!r}: {message.hits:g} "
                    f"vs {message.reference_mean:.2f}"
                )
        if self.novel_tokens:
            lines.append("  tokens never seen in training:")
            for token, hits in self.novel_tokens.items():
                lines.append(f"    {token}: {hits:g}")
        return "\n".join(lines) + "\n"
