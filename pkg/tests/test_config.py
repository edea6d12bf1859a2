import pytest

from dtnlab.config import RunConfig, config_hash, parse_config, serialize_config
from dtnlab.errors import ConfigError


MINIMAL = '{"geometry": {"kind": "interval", "n": 4}}'


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.geometry == {"kind": "interval", "n": 4}
    assert cfg.coefficients == {"a": 1.0, "m": 1.0}
    assert cfg.pivot == {"gram": "default"}
    assert cfg.experiment["kind"] == "validate"
    assert cfg.output["seed"] == 42
    assert cfg.schema_version == "1"


def test_expression_coefficient_accepted():
    cfg = parse_config(
        '{"geometry": {"kind": "interval", "n": 4},'
        ' "coefficients": {"a": "2+sin(2*pi*x)", "m": 1.0}}'
    )
    assert cfg.coefficients["a"] == "2+sin(2*pi*x)"


def test_malformed_expression_reports_column():
    with pytest.raises(ConfigError) as err:
        parse_config(
            '{"geometry": {"kind": "interval", "n": 4},'
            ' "coefficients": {"a": "2+*3", "m": 1}}'
        )
    (path, message), = err.value.issues
    assert path == "coefficients.a"
    assert "column 3" in message


def test_invalid_json_reports_position():
    with pytest.raises(ConfigError) as err:
        parse_config('{"geometry": }')
    assert "line 1" in str(err.value)


def test_geometry_validation():
    with pytest.raises(ConfigError):
        parse_config('{"geometry": {"kind": "interval", "n": 0}}')
    with pytest.raises(ConfigError):
        parse_config('{"geometry": {"kind": "triangle"}}')
    with pytest.raises(ConfigError):
        parse_config('{"geometry": {"kind": "rectangle", "nx": 2}}')


def test_strict_mode_rejects_unknown_keys():
    text = '{"geometry": {"kind": "interval", "n": 4}, "extra": 1}'
    parse_config(text)  # tolerated by default
    with pytest.raises(ConfigError) as err:
        parse_config(text, strict=True)
    assert any(path == "extra" for path, _ in err.value.issues)


def test_experiment_kind_validation():
    with pytest.raises(ConfigError):
        parse_config(
            '{"geometry": {"kind": "interval", "n": 4},'
            ' "experiment": {"kind": "teleport"}}'
        )


def test_pivot_gram_validation():
    with pytest.raises(ConfigError):
        parse_config(
            '{"geometry": {"kind": "interval", "n": 4}, "pivot": {"gram": [1, -1]}}'
        )
    cfg = parse_config(
        '{"geometry": {"kind": "interval", "n": 4}, "pivot": {"gram": [2.0, 2.0]}}'
    )
    assert cfg.pivot["gram"] == [2.0, 2.0]


def test_round_trip_and_hash_stability():
    cfg = parse_config(
        '{"geometry": {"kind": "rectangle", "nx": 2, "ny": 3},'
        ' "coefficients": {"a": "1+x*y", "m": 2.0},'
        ' "experiment": {"kind": "dtn", "parameters": {}},'
        ' "output": {"csv_path": "out.csv", "seed": 7}}'
    )
    text = serialize_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert config_hash(cfg) == config_hash(again)
    assert len(config_hash(cfg)) == 12


def test_default_csv_path_follows_kind():
    cfg = parse_config(
        '{"geometry": {"kind": "interval", "n": 4}, "experiment": {"kind": "dtn"}}'
    )
    assert cfg.output["csv_path"] == "dtn.csv"
