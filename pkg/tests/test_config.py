"""Settings module unit tests"""

import pytest

from torus_consensus.config import Settings
from torus_consensus.consts import SIM_EPS, SIM_T_MAX
from torus_consensus.enums import OutputFormat
from torus_consensus.errors import ConfigException


@pytest.fixture
def config_file(tmp_path):
    return tmp_path / "config.toml"


# ========== Test Cases ==========


def test_defaults():
    settings = Settings.load()

    assert settings.simulation.eps == SIM_EPS
    assert settings.simulation.t_max == SIM_T_MAX
    assert settings.spectra.fft_workers == 1
    assert settings.spectra.exhaustive is False
    assert settings.sweep.workers == 1
    assert settings.output.format == OutputFormat.CSV
    assert settings.output.precision == 17
    assert settings.observability.otel.enabled is False
    assert settings.log_file is None


def test_load_from_file(config_file):
    config_file.write_text(
        """
log_level = "debug"

[simulation]
eps = 1e-8
seed = 99

[spectra]
exhaustive = true

[output]
format = "json"
precision = 12
"""
    )

    settings = Settings.load(str(config_file))

    assert settings.log_level == "DEBUG"
    assert settings.simulation.eps == 1e-8
    assert settings.simulation.seed == 99
    assert settings.simulation.t_max == SIM_T_MAX
    assert settings.spectra.exhaustive is True
    assert settings.output.format == OutputFormat.JSON
    assert settings.output.precision == 12


def test_env_overrides_file(config_file, monkeypatch):
    config_file.write_text("[simulation]\neps = 1e-8\n")
    monkeypatch.setenv("TORUS_CONSENSUS_SIMULATION__EPS", "0.001")
    monkeypatch.setenv("TORUS_CONSENSUS_SWEEP__WORKERS", "4")

    settings = Settings.load_from_file(str(config_file))

    assert settings.simulation.eps == 0.001
    assert settings.sweep.workers == 4


def test_env_without_file(monkeypatch):
    monkeypatch.setenv("TORUS_CONSENSUS_OUTPUT__FORMAT", "json")

    assert Settings.load().output.format == OutputFormat.JSON


def test_missing_file(tmp_path):
    with pytest.raises(ConfigException, match="not found"):
        Settings.load(str(tmp_path / "missing.toml"))


@pytest.mark.parametrize(
    "content, location",
    [
        ("[simulation]\neps = 1.5\n", "simulation -> eps"),
        ("[simulation]\nfit_min_points = 1\n", "simulation -> fit_min_points"),
        ("[output]\nformat = \"xml\"\n", "output -> format"),
        ("[output]\nprecision = 18\n", "output -> precision"),
        ("[sweep]\nworkers = 0\n", "sweep -> workers"),
    ],
)
def test_invalid_values(config_file, content, location):
    config_file.write_text(content)

    with pytest.raises(ConfigException) as exc_info:
        Settings.load_from_file(str(config_file))

    message = str(exc_info.value)
    assert message.startswith("Configuration validation failed:")
    assert location in message


def test_invalid_toml(config_file):
    config_file.write_text("[simulation\neps = \n")

    with pytest.raises(ConfigException, match="Invalid TOML"):
        Settings.load_from_file(str(config_file))


def test_invalid_log_level(config_file):
    config_file.write_text('log_level = "chatty"\n')

    with pytest.raises(ConfigException, match="log_level"):
        Settings.load_from_file(str(config_file))


def test_empty_file_gives_defaults(config_file):
    config_file.write_text("")

    loaded = Settings.load_from_file(str(config_file))

    assert loaded.model_dump() == Settings().model_dump()
