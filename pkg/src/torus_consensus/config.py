"""Settings file loading and validation."""

import logging
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from .consts import (
    FLOAT_SIGNIFICANT_DIGITS,
    SIM_DIVERGENCE_FACTOR,
    SIM_EPS,
    SIM_FIT_FRACTION,
    SIM_FIT_MIN_POINTS,
    SIM_SEED,
    SIM_T_MAX,
)
from .enums import OutputFormat
from .errors import ConfigException

logger = logging.getLogger(__name__)

ENV_PREFIX = "TORUS_CONSENSUS_"


class SimulationConfig(BaseModel):
    """Consensus iteration settings."""

    eps: float = Field(
        default=SIM_EPS,
        gt=0.0,
        lt=1.0,
        description="Relative 2-norm error target: stop once e(t) <= eps * e(0).",
    )
    t_max: int = Field(
        default=SIM_T_MAX, ge=1, description="Iteration cap before NoConvergence."
    )
    seed: int = Field(
        default=SIM_SEED, ge=0, description="Seed of the generator drawing x(0)."
    )
    fit_fraction: float = Field(
        default=SIM_FIT_FRACTION,
        gt=0.0,
        le=1.0,
        description="Tail fraction of the error trace used to fit the contraction.",
    )
    fit_min_points: int = Field(
        default=SIM_FIT_MIN_POINTS,
        ge=2,
        description="Minimum number of trace points in the contraction fit window.",
    )
    divergence_factor: float = Field(
        default=SIM_DIVERGENCE_FACTOR,
        gt=1.0,
        description="Give up early once e(t) exceeds this multiple of e(0).",
    )


class SpectraConfig(BaseModel):
    """Eigenvalue enumeration settings."""

    fft_workers: int = Field(
        default=1,
        ge=1,
        description="Worker threads handed to scipy.fft for stencil DFTs.",
    )
    exhaustive: bool = Field(
        default=False,
        description=(
            "Force the full m-dimensional stencil DFT even for per-axis "
            "neighborhoods, whose spectrum is otherwise enumerated per axis."
        ),
    )


class SweepConfig(BaseModel):
    workers: int = Field(
        default=1,
        ge=1,
        description="Threads evaluating sweep and trade-off points; row order is fixed.",
    )


class OutputConfig(BaseModel):
    format: OutputFormat = Field(
        default=OutputFormat.CSV, description="Record format: 'csv' or 'json'."
    )
    precision: int = Field(
        default=FLOAT_SIGNIFICANT_DIGITS,
        ge=1,
        le=17,
        description="Significant digits written for floats in CSV output.",
    )


class OTelConfig(BaseModel):
    """OpenTelemetry infrastructure settings (traces + metrics to files)."""

    enabled: bool = Field(
        default=False,
        description="Enable OpenTelemetry traces/metrics export to JSON-Lines files.",
    )
    export_dir: str = Field(
        default="data/telemetry",
        description="Directory for traces.jsonl / metrics.jsonl (relative to cwd).",
    )
    traces: bool = Field(
        default=True,
        description="Export traces (spans) to export_dir/traces.jsonl.",
    )
    metrics: bool = Field(
        default=True,
        description="Export metrics to export_dir/metrics.jsonl.",
    )
    sampling_rate: float = Field(
        default=1.0,
        ge=0.0,
        le=1.0,
        description="Trace sampling ratio; 1.0 captures everything.",
    )


class BugsinkConfig(BaseModel):
    """Bugsink (Sentry-compatible) error-tracking settings."""

    dsn: str | None = Field(
        default=None,
        description="Bugsink DSN, e.g. http://key@host:port/project_id. Empty disables.",
        json_schema_extra={"format": "password", "writeOnly": True},
    )
    environment: str = Field(
        default="production",
        description="Deployment environment tag attached to error events.",
    )


class ObservabilityConfig(BaseModel):
    """Observability infrastructure (OpenTelemetry + Bugsink)."""

    otel: OTelConfig = Field(default_factory=OTelConfig)
    bugsink: BugsinkConfig = Field(default_factory=BugsinkConfig)


class Settings(BaseSettings):
    """Application settings."""

    log_file: str | None = Field(
        default=None, description="Rotating log file; unset logs to stderr only."
    )
    log_level: str = Field(default="INFO", description="Console log level.")

    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    spectra: SpectraConfig = Field(default_factory=SpectraConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    observability: ObservabilityConfig = Field(
        default_factory=ObservabilityConfig,
        description="Observability (OpenTelemetry + Bugsink) infrastructure settings.",
    )

    model_config = SettingsConfigDict(
        env_prefix=ENV_PREFIX,
        env_nested_delimiter="__",
        extra="ignore",
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = str(v).upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"Invalid log level: '{v}'")
        return level

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            TomlConfigSettingsSource(settings_cls),
        )

    @classmethod
    def load(cls, config_path: str | None = None) -> "Settings":
        """Load settings from ``config_path``, or from defaults and env when unset."""
        if config_path is None:
            try:
                return cls()
            except ValidationError as e:
                raise ConfigException(_format_errors(e)) from e
        return cls.load_from_file(config_path)

    @classmethod
    def load_from_file(cls, config_path: str) -> "Settings":
        """Load settings from specified path."""
        path = Path(config_path)
        if not path.exists():
            raise ConfigException(f"Configuration file not found: {config_path}")

        class _Settings(cls):
            model_config = SettingsConfigDict(
                toml_file=str(path),
                env_prefix=ENV_PREFIX,
                env_nested_delimiter="__",
            )

        try:
            return _Settings()
        except ValidationError as e:
            raise ConfigException(_format_errors(e)) from e
        except ValueError as e:
            # tomllib.TOMLDecodeError
            raise ConfigException(f"Invalid TOML in {config_path}: {e}") from e


def _format_errors(e: ValidationError) -> str:
    error_lines = ["Configuration validation failed:"]
    for error in e.errors():
        loc = " -> ".join(str(item) for item in error["loc"])
        error_lines.append(f"  - {loc}: {error['msg']}")
    return "\n".join(error_lines)
