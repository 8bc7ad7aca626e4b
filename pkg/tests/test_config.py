from pathlib import Path

import pytest
import tomli

from holopack.config import COMMANDS, PARAMS, ExperimentConfig, load, loads
from holopack.errors import ConfigError

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.toml"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_round_trip(path):
    cfg = load(path)
    again = loads(cfg.dumps())
    assert again == cfg
    assert tomli.loads(cfg.dumps()) == tomli.loads(path.read_text())


def test_every_criterion_has_a_config():
    names = {p.name for p in CONFIGS}
    for n in range(1, 11):
        assert f"acceptance_{n:02d}.toml" in names
        assert load(CONFIGS[0].parent / f"acceptance_{n:02d}.toml").param("criteria") == [n]


def test_defaults_and_digest():
    cfg = loads('command = "chain"\n')
    assert cfg.param("epsilon") == PARAMS["chain"]["epsilon"]
    assert cfg.digest() == ExperimentConfig("chain").digest()
    assert cfg.digest() != loads('command = "chain"\n[params]\nr0 = "1e-9"\n').digest()


def test_parse_error_position():
    with pytest.raises(ConfigError) as info:
        loads('command = "chain"\n[params\nr0 = 1\n')
    assert info.value.line == 2 and info.value.column is not None


def test_unknown_param_position():
    text = 'command = "chain"\n\n[params]\nepsilon = "1e-100"\nr00 = "1e-10"\n'
    with pytest.raises(ConfigError) as info:
        loads(text)
    assert "r00" in str(info.value)
    assert (info.value.line, info.value.column) == (5, 1)


@pytest.mark.parametrize("text,fragment", [
    ('command = "nope"\n', "command"),
    ('colour = 1\ncommand = "chain"\n', "colour"),
    ('command = "density"\n', "curve"),
    ('command = "chain"\n[curve]\nfamily = "x"\n', "curve"),
    ('command = "chain"\n[output]\nformat = "x"\n', "format"),
    ('command = "gap"\ncurves = 3\n', "curves"),
])
def test_schema_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        loads(text)


def test_commands_have_defaults():
    assert set(PARAMS) == set(COMMANDS)
