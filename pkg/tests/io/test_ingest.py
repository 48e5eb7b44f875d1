import numpy as np
import pytest

from src.io import (
    ConfigError,
    UnsupportedFormatError,
    generator_from_document,
    load_bd_spec,
    load_document,
    load_generator,
    load_neutron_spec,
    parse_document,
    validate_source,
)
from src.neutron import Disk


def test_validate_source_rejects_unknown_formats(tmp_path):
    config = tmp_path / "model.yaml"
    config.write_text("n: 2")
    with pytest.raises(UnsupportedFormatError):
        validate_source(config)
    with pytest.raises(FileNotFoundError):
        validate_source(tmp_path / "missing.json")


def test_malformed_document_reports_its_position(models_dir):
    path = models_dir / "malformed.json"
    with pytest.raises(ConfigError) as excinfo:
        load_document(path)
    assert excinfo.value.line == 2
    assert str(excinfo.value).startswith(f"{path}:2:")


def test_top_level_must_be_an_object():
    with pytest.raises(ConfigError):
        parse_document("[1, 2]")


def test_generator_documents(models_dir, t2_generator):
    assert load_generator(models_dir / "t2.json") == t2_generator
    assert generator_from_document(t2_generator.to_dict()) == t2_generator
    with pytest.raises(ConfigError):
        generator_from_document({"generator": [1, 2]})
    with pytest.raises(ValueError):
        generator_from_document({"generator": {"n": 2}})


def test_bd_and_neutron_documents(models_dir, logistic_spec):
    assert load_bd_spec(models_dir / "logistic_bd.json").to_dict() == logistic_spec.to_dict()
    spec = load_neutron_spec(models_dir / "unit_disk.json")
    assert spec.domain == Disk(center=(0.0, 0.0), radius=1.0)
    assert spec.lambda_jump == 1.0
    assert np.isclose(spec.domain.area, np.pi)
