# SEPARABLE-RCA\src\io_managers\io_manager.py

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.exceptions import FormatError, SnapshotError
from src.io_managers.configuration_validator import ConfigValidator, RunConfig
from src.io_managers.file_manager import FileManager
from src.io_managers.ingest import ParseResult, parse_csv
from src.synth import GeneratorConfig
from src.tan_model import TanModel
from src.utils.utils import resources_dir

logger = logging.getLogger(__name__)

DEFAULT_RESOURCES = resources_dir(__file__, 3)
DEFAULT_RUN_CONFIG = "default_run.env"


class IoManager:
    """
    Orchestrates reading configuration files and error logs, and reading/writing
    model snapshots.
    """

    def __init__(self, root_path: Path = DEFAULT_RESOURCES, config_path: str = "config"):
        self.file_manager = FileManager()
        self.config_validator = ConfigValidator()
        self.config_path = Path(root_path) / config_path

    def load_run_config(self, config_file: Optional[Path] = None,
                        overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
        """
        Layers flags over the config file over the defaults.

        Args:
            config_file (Path|None): Optional key=value file.
            overrides (Mapping|None): Typed values from flags; None entries are skipped.

        Raises:
            FormatError: If either layer is invalid.
            FileNotFoundError: If config_file does not exist.
        """
        config = RunConfig()
        if config_file is not None:
            config = self.config_validator.validate_run_config(
                self.file_manager.read_key_value_file(Path(config_file)), config
            )
        if overrides:
            config = self.config_validator.validate_run_config(overrides, config)
        return config

    def load_default_run_config(self) -> RunConfig:
        """Bundled configuration from resources/config."""
        return self.load_run_config(self.config_path / DEFAULT_RUN_CONFIG)

    def load_generator_config(self, config_file: Optional[Path] = None,
                              overrides: Optional[Mapping[str, Any]] = None) -> GeneratorConfig:
        config = GeneratorConfig()
        if config_file is not None:
            config = self.config_validator.validate_generator_config(
                self.file_manager.read_key_value_file(Path(config_file)), config
            )
        if overrides:
            config = self.config_validator.validate_generator_config(overrides, config)
        return config

    def load_records(self, input_path: Path) -> ParseResult:
        """
        Raises:
            FileNotFoundError: If the input does not exist.
            FormatError: If the CSV header is unusable.
        """
        input_path = Path(input_path)
        if not input_path.is_file():
            raise FileNotFoundError(f"File not found: {input_path}")
        with input_path.open("r", encoding="utf-8", newline="") as stream:
            result = parse_csv(stream)
        logger.info("Read %d records from %s.", len(result.records), input_path)
        return result

    def save_model(self, model: TanModel, filepath: Path) -> None:
        self.file_manager.write_json_file(model.to_document(), Path(filepath))
        logger.info("Model trained through %s written to %s.", model.training_horizon, filepath)

    def load_model(self, filepath: Path) -> TanModel:
        """
        Raises:
            SnapshotError: If the file is not a readable model snapshot.
        """
        try:
            document: Dict[str, Any] = self.file_manager.read_json_file(Path(filepath))
        except (FileNotFoundError, ValueError) as error:
            raise SnapshotError(str(error))
        return TanModel.from_document(document)


def require(value: Optional[Path], name: str) -> Path:
    """
    Raises:
        FormatError: If a required path setting is missing.
    """
    if value is None:
        raise FormatError(f"Missing setting: {name}")
    return Path(value)
