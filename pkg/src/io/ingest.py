"""Input ingestion helpers for model and run files."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Optional

from ..chain.generator import AbsorbedGenerator
from ..models.birth_death import BDSpec
from ..models.multitype import MultiBDSpec
from ..neutron.transport import NeutronSpec


class UnsupportedFormatError(ValueError):
    """Raised when the user provides an unsupported file type."""


class ConfigError(ValueError):
    """Malformed configuration document; ``line``/``column`` point at the problem."""

    def __init__(self, message: str, *, path: Optional[Path] = None, line: Optional[int] = None, column: Optional[int] = None) -> None:
        location = ""
        if path is not None:
            location = f"{path}:"
        if line is not None:
            location += f"{line}:{column}:"
        super().__init__(f"{location} {message}".strip())
        self.path = path
        self.line = line
        self.column = column


SUPPORTED_EXTENSIONS = {".json"}


def validate_source(path: Path) -> Path:
    """Validate and normalise the provided ``path``."""

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix.lower() not in SUPPORTED_EXTENSIONS:
        raise UnsupportedFormatError(f"Unsupported input format: {path.suffix}")
    return path


def parse_document(text: str, *, path: Optional[Path] = None) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path=path, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(document, dict):
        raise ConfigError("top level must be a JSON object", path=path, line=1, column=1)
    return document


def load_document(path: Path) -> Dict[str, Any]:
    path = validate_source(path)
    return parse_document(path.read_text(encoding="utf-8"), path=path)


def _section(document: Dict[str, Any], key: str) -> Dict[str, Any]:
    section = document.get(key, document)
    if not isinstance(section, dict):
        raise ConfigError(f"'{key}' must be a JSON object")
    return section


def generator_from_document(document: Dict[str, Any]) -> AbsorbedGenerator:
    """``{"generator": {...}}`` or a bare generator object."""

    return AbsorbedGenerator.from_dict(_section(document, "generator"))


def bd_spec_from_document(document: Dict[str, Any]) -> BDSpec:
    return BDSpec.from_dict(_section(document, "bd"))


def multibd_spec_from_document(document: Dict[str, Any]) -> MultiBDSpec:
    return MultiBDSpec.from_dict(_section(document, "multibd"))


def neutron_spec_from_document(document: Dict[str, Any]) -> NeutronSpec:
    return NeutronSpec.from_dict(document)


def load_generator(path: Path) -> AbsorbedGenerator:
    return generator_from_document(load_document(path))


def load_bd_spec(path: Path) -> BDSpec:
    return bd_spec_from_document(load_document(path))


def load_multibd_spec(path: Path) -> MultiBDSpec:
    return multibd_spec_from_document(load_document(path))


def load_neutron_spec(path: Path) -> NeutronSpec:
    return neutron_spec_from_document(load_document(path))
