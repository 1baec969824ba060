# SEPARABLE-RCA\src\io_managers\file_manager.py

import json
from pathlib import Path
from typing import Any, Dict

import pandas as pd
from dotenv import dotenv_values


class FileManager:
    """
    Handles reading and writing of JSON documents, key=value configuration files,
    text reports and CSV tables.
    """

    @staticmethod
    def read_json_file(filepath: Path) -> dict:
        """
        Reads a JSON file and returns its content as a dictionary.

        Raises:
            FileNotFoundError: If the file is not found.
            ValueError: If the file is not valid JSON.
        """
        try:
            with filepath.open("r", encoding="utf-8") as file:
                return json.load(file)
        except FileNotFoundError:
            raise FileNotFoundError(f"File not found: {filepath}")
        except json.JSONDecodeError as e:
            raise ValueError(f"Error decoding JSON in '{filepath}': {e}")

    @staticmethod
    def write_json_file(document: Dict[str, Any], filepath: Path) -> None:
        """
        Writes a document as indented UTF-8 JSON with sorted keys, so equal documents
        give identical files.
        """
        filepath.parent.mkdir(parents=True, exist_ok=True)
        with filepath.open("w", encoding="utf-8") as file:
            json.dump(document, file, indent=2, sort_keys=True, ensure_ascii=False)
            file.write("\n")

    @staticmethod
    def read_key_value_file(filepath: Path) -> Dict[str, str]:
        """
        Reads a flat key=value file (# comments allowed) without touching os.environ.

        Raises:
            FileNotFoundError: If the file is not found.
        """
        if not filepath.is_file():
            raise FileNotFoundError(f"File not found: {filepath}")
        return {key: value for key, value in dotenv_values(filepath).items() if value is not None}

    @staticmethod
    def load_text_file(filepath: Path) -> str:
        """
        Reads a text file and returns its content as a string.

        Raises:
            FileNotFoundError: If the file is not found.
        """
        try:
            return filepath.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise FileNotFoundError(f"File not found: {filepath}")

    @staticmethod
    def save_text_file(text: str, filepath: Path) -> None:
        filepath.parent.mkdir(parents=True, exist_ok=True)
        filepath.write_text(text, encoding="utf-8")

    @staticmethod
    def save_results_csv(df: pd.DataFrame, filepath: Path) -> None:
        """
        Saves a DataFrame to a CSV file at the specified path.

        Args:
            df (pandas.DataFrame): DataFrame containing the results to save.
            filepath (Path): Path to the output CSV file.
        """
        filepath.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(filepath, index=False, lineterminator="\n")
