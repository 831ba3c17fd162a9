import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from entsource.config import ConfigError, apply_overrides, default_config, validate_config  # noqa: E402

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "config.schema.json").read_text())


def schema_ok(raw):
    return jsonschema.Draft202012Validator(SCHEMA).is_valid(raw)


def test_schema_is_well_formed():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_default_config_matches_schema():
    assert schema_ok(default_config())


def test_minimal_cw_config_matches_schema():
    raw = apply_overrides(default_config(), {
        "pump.regime": "cw",
        "pump.bandwidth_fwhm": {"value": 0.0, "unit": "nm"},
        "filters": None,
    })
    for key in ("detection", "grid", "chip_geometry"):
        del raw[key]
    assert schema_ok(raw)
    validate_config(raw)


@pytest.mark.parametrize(
    "override",
    [
        {"splitter.t_h": 1.2},
        {"pump.regime": "laser"},
        {"pm_wg1.profile": "lorentzian"},
        {"filters.idler.shape": "triangle"},
        {"grid.points": 10},
        {"detection.seed": 1.5},
        {"pump.center_wavelength": 777.22},
    ],
)
def test_schema_and_validator_agree_on_rejections(override):
    raw = apply_overrides(default_config(), override)
    assert not schema_ok(raw)
    with pytest.raises(ConfigError):
        validate_config(raw)
