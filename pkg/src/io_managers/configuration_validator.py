# SEPARABLE-RCA\src\io_managers\configuration_validator.py

import datetime as dt
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.exceptions import DomainError, FormatError
from src.synth import GeneratorConfig


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of one fit/score/rca run. Defaults are the documented ones.
    """

    input: Optional[Path] = None
    output_dir: Path = Path("results")
    model: Optional[Path] = None
    warmup_days: int = 14
    sensitivity: float = 3.0
    top_k_projects: int = 5
    top_k_words: int = 5
    min_doc_frequency: int = 3
    prior_scale: float = 1.0
    reference_days: int = 28
    use_stop_words: bool = False


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {value!r}")


_PARSERS = {
    int: lambda v: int(v.strip()),
    float: lambda v: float(v.strip()),
    bool: _parse_bool,
    Path: lambda v: Path(v.strip()),
    dt.date: lambda v: dt.date.fromisoformat(v.strip()),
}


class ConfigValidator:
    """
    Handles validation of flat key=value run and generator configurations.

    Keys are case-insensitive. Every problem (unknown key, unparseable value, value
    out of range) is collected and reported in a single FormatError.
    """

    RUN_KEYS = {
        "input": Path,
        "output_dir": Path,
        "model": Path,
        "warmup_days": int,
        "sensitivity": float,
        "top_k_projects": int,
        "top_k_words": int,
        "min_doc_frequency": int,
        "prior_scale": float,
        "reference_days": int,
        "use_stop_words": bool,
    }

    GENERATOR_KEYS = {
        "zones": int,
        "projects_per_zone": int,
        "procedures_per_project": int,
        "vocabulary_size": int,
        "templates_per_procedure": int,
        "shared_templates": int,
        "shared_weight": float,
        "typical_words": int,
        "min_message_words": int,
        "max_message_words": int,
        "daily_volume": float,
        "volume_dispersion": float,
        "daily_concentration": float,
        "days": int,
        "start_date": dt.date,
        "seed": int,
    }

    def validate_run_config(self, values: Mapping[str, Any],
                            base: Optional[RunConfig] = None) -> RunConfig:
        """
        Builds a RunConfig from raw values layered over base (defaults when None).

        Args:
            values (Mapping[str, Any]): Raw strings (from a config file) or typed values
                (from command-line flags); None values are ignored.
            base (RunConfig|None): Configuration the values override.

        Returns:
            RunConfig: The validated configuration.

        Raises:
            FormatError: If keys are unknown, values do not parse or are out of range.
        """
        parsed = self._parse(values, self.RUN_KEYS)
        config = replace(base or RunConfig(), **parsed)
        self._check_ranges(config)
        return config

    def validate_generator_config(self, values: Mapping[str, Any],
                                  base: Optional[GeneratorConfig] = None) -> GeneratorConfig:
        """
        Builds a GeneratorConfig from raw values layered over base.

        Raises:
            FormatError: If keys are unknown, values do not parse or the resulting
                configuration is invalid.
        """
        parsed = self._parse(values, self.GENERATOR_KEYS)
        try:
            return replace(base or GeneratorConfig(), **parsed)
        except DomainError as error:
            raise FormatError(str(error))

    def _parse(self, values: Mapping[str, Any], schema: Dict[str, type]) -> Dict[str, Any]:
        unknown_keys = []
        type_errors = []
        parsed = {}
        for raw_key, value in values.items():
            key = raw_key.strip().lower()
            if key not in schema:
                unknown_keys.append(raw_key)
                continue
            if value is None:
                continue
            expected_type = schema[key]
            if isinstance(value, str):
                try:
                    parsed[key] = _PARSERS[expected_type](value)
                except ValueError:
                    type_errors.append((key, value, expected_type.__name__))
            elif expected_type is Path and isinstance(value, Path):
                parsed[key] = value
            elif expected_type is float and isinstance(value, (int, float)) and not isinstance(value, bool):
                parsed[key] = float(value)
            elif isinstance(value, expected_type) and not (expected_type is int and isinstance(value, bool)):
                parsed[key] = value
            else:
                type_errors.append((key, value, expected_type.__name__))

        problems = []
        if unknown_keys:
            problems.append(f"Unknown keys: {', '.join(unknown_keys)}")
        if type_errors:
            problems.append("Type errors: " + ", ".join(
                f"{key} (found: {value!r}, expected: {expected})"
                for key, value, expected in type_errors
            ))
        if problems:
            raise FormatError("; ".join(problems))
        return parsed

    @staticmethod
    def _check_ranges(config: RunConfig) -> None:
        """
        Raises:
            FormatError: Naming every value outside its documented range.
        """
        errors = []
        for name in ("warmup_days", "top_k_projects", "top_k_words", "min_doc_frequency",
                     "reference_days"):
            if getattr(config, name) < 1:
                errors.append(f"{name} must be >= 1")
        if math.isnan(config.sensitivity) or config.sensitivity <= 0:
            errors.append("sensitivity must be > 0")
        if not (config.prior_scale > 0 and math.isfinite(config.prior_scale)):
            errors.append("prior_scale must be a positive finite number")
        if errors:
            raise FormatError("Configuration out of range: " + "; ".join(errors))
