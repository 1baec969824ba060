# SEPARABLE-RCA\src\utils\utils.py

from pathlib import Path

RESOURCES_DIRNAME = "resources"


def get_project_root(path: Path, levels_up: int) -> Path:
    """Ancestor of path, levels_up directories above it."""
    for _ in range(levels_up):
        path = path.parent
    return path


def resources_dir(module_file: str, levels_up: int) -> Path:
    """The bundled resources directory, located relative to a module file."""
    return get_project_root(Path(module_file).resolve(), levels_up) / RESOURCES_DIRNAME
