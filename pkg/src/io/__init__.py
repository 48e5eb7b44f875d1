"""Reading model files and writing result artifacts."""

from .export import format_float, read_json, write_csv, write_json, write_plot_script
from .ingest import (
    SUPPORTED_EXTENSIONS,
    ConfigError,
    UnsupportedFormatError,
    bd_spec_from_document,
    generator_from_document,
    load_bd_spec,
    load_document,
    load_generator,
    load_multibd_spec,
    load_neutron_spec,
    multibd_spec_from_document,
    neutron_spec_from_document,
    parse_document,
    validate_source,
)

__all__ = [
    "ConfigError",
    "SUPPORTED_EXTENSIONS",
    "UnsupportedFormatError",
    "bd_spec_from_document",
    "format_float",
    "generator_from_document",
    "load_bd_spec",
    "load_document",
    "load_generator",
    "load_multibd_spec",
    "load_neutron_spec",
    "multibd_spec_from_document",
    "neutron_spec_from_document",
    "parse_document",
    "read_json",
    "validate_source",
    "write_csv",
    "write_json",
    "write_plot_script",
]
