import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from backend.src.analysis.classifier import ClassifierConfig
from backend.src.analysis.probabilities import best_partition
from backend.src.data_io.file_reader import FileReader
from backend.src.quantum.errors import ConfigError
from backend.src.quantum.instruments import MeasurementInstrument
from backend.src.seals.families import SealFamily
from backend.src.seals.schemes import MatrixSeal, ProductSeal, SealScheme, TiltedProductSeal
from backend.src.strategies.read_strategies import (
    default_partition_k,
    honest_full_readout,
    partition_readout,
    projective_decode,
    q_povm,
)

logger = logging.getLogger(__name__)

CONFIG_VERSION = 1

_DEFAULT_N_VALUES = [100, 1000, 10000]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SchemeBlock(_Block):
    kind: Literal["scheme_a", "tilted", "fixed_angle", "fourier", "matrix"] = "scheme_a"
    theta_cap: float = 0.3
    alpha: float = 0.25
    theta: float = 0.3
    angle_rule: Literal["extreme", "alternating"] = "extreme"
    N: Optional[int] = Field(default=None, ge=1, le=4096)
    lambda_path: Optional[str] = None

    @field_validator("theta_cap")
    @classmethod
    def _theta_cap_range(cls, v: float) -> float:
        if not 0.0 <= v < math.pi / 4:
            raise ValueError("theta_cap must be < π/4 (and >= 0)")
        return v

    @field_validator("theta")
    @classmethod
    def _theta_range(cls, v: float) -> float:
        if not abs(v) < math.pi / 4:
            raise ValueError("theta must satisfy |theta| < π/4")
        return v

    @field_validator("alpha")
    @classmethod
    def _alpha_positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("alpha must be positive")
        return v

    @model_validator(mode="after")
    def _kind_requirements(self) -> "SchemeBlock":
        if self.kind == "scheme_a" and not self.alpha < 0.5:
            raise ValueError("Scheme A requires alpha in (0, 1/2)")
        if self.kind == "fourier" and self.N is not None and self.N & (self.N - 1):
            raise ValueError("fourier N must be a power of two")
        if self.kind == "matrix" and not self.lambda_path:
            raise ValueError("matrix scheme needs lambda_path")
        return self


class StrategyBlock(_Block):
    kind: Optional[Literal["partition", "full", "q_povm", "projective"]] = None
    k: Union[Literal["auto"], int] = "auto"
    nu: float = Field(default=1.0, ge=0.0, le=1.0)

    @field_validator("k")
    @classmethod
    def _k_positive(cls, v: Union[str, int]) -> Union[str, int]:
        if isinstance(v, int) and v < 1:
            raise ValueError("k must be >= 1 or 'auto'")
        return v


class SweepBlock(_Block):
    n_values: Optional[List[int]] = None

    @field_validator("n_values")
    @classmethod
    def _n_positive(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is None:
            return v
        if not v:
            raise ValueError("n_values must not be empty")
        if any(n < 1 for n in v):
            raise ValueError("n_values must be positive")
        return sorted(set(v))


class ClassifierBlock(_Block):
    H_crit: float = Field(default=4.0, gt=0.0)
    ratio_eps: float = Field(default=0.05, gt=0.0, lt=1.0)
    threshold: float = Field(default=0.5, gt=0.0, lt=1.0)
    trend_window: int = Field(default=3, ge=1)
    info_ratio_min: float = Field(default=0.5, ge=0.0, le=1.0)


class OutputBlock(_Block):
    format: Literal["csv", "json"] = "csv"
    path: Optional[str] = None
    seed: int = Field(default=0, ge=0, lt=2 ** 64)


class ExperimentConfig(_Block):
    """
    One experiment: a seal family, a reading strategy, the n values to sweep,
    classifier thresholds and output settings.

    Blocks accept a bare string as shorthand for their `kind`
    (e.g. `scheme: fourier`, `strategy: projective`).
    """

    config_version: int = CONFIG_VERSION
    scheme: SchemeBlock = Field(default_factory=SchemeBlock)
    strategy: StrategyBlock = Field(default_factory=StrategyBlock)
    sweep: SweepBlock = Field(default_factory=SweepBlock)
    classifier: ClassifierBlock = Field(default_factory=ClassifierBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    @field_validator("config_version")
    @classmethod
    def _version_matches(cls, v: int) -> int:
        if v != CONFIG_VERSION:
            raise ValueError(f"unsupported config_version {v}; expected {CONFIG_VERSION}")
        return v

    @field_validator("scheme", "strategy", mode="before")
    @classmethod
    def _kind_shorthand(cls, v: Any) -> Any:
        return {"kind": v} if isinstance(v, str) else v

    @model_validator(mode="after")
    def _fill_defaults(self) -> "ExperimentConfig":
        if self.strategy.kind is None:
            product = self.scheme.kind in ("scheme_a", "tilted", "fixed_angle")
            self.strategy.kind = "partition" if product else "projective"
        if self.strategy.kind == "projective" and self.scheme.kind not in ("fourier", "matrix"):
            raise ValueError("projective strategy needs a fourier or matrix scheme")
        if self.scheme.kind == "fourier" and self.scheme.N and self.sweep.n_values is not None:
            if self.sweep.n_values != [int(math.log2(self.scheme.N))]:
                raise ValueError("fourier sweeps use N = 2**n; set scheme.N or sweep.n_values, not both")
        if self.sweep.n_values is None:
            if self.scheme.kind == "fourier":
                self.sweep.n_values = [int(math.log2(self.scheme.N)) if self.scheme.N else 3]
            elif self.scheme.kind == "matrix":
                self.sweep.n_values = [1]
            else:
                self.sweep.n_values = list(_DEFAULT_N_VALUES)
        return self

    def classifier_config(self) -> ClassifierConfig:
        c = self.classifier
        return ClassifierConfig(
            H_crit=c.H_crit,
            ratio_eps=c.ratio_eps,
            n_grid=tuple(self.sweep.n_values),
            trend_window=min(c.trend_window, len(self.sweep.n_values)),
            info_ratio_min=c.info_ratio_min,
            threshold=c.threshold,
        )


class EnvOverrides(BaseSettings):
    """QSEAL_SEED, QSEAL_OUTPUT_FORMAT, QSEAL_OUTPUT_PATH (also read from a local .env)."""

    model_config = SettingsConfigDict(env_prefix="QSEAL_", env_file=".env", extra="ignore")

    seed: Optional[int] = None
    output_format: Optional[Literal["csv", "json"]] = None
    output_path: Optional[str] = None


def _parse_file(path: Path) -> Dict[str, Any]:
    try:
        if path.suffix.lower() == ".json":
            data = FileReader.read_json(str(path))
        else:
            data = FileReader.read_yaml(str(path))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else "?"
        raise ConfigError(f"{path}: parse error at line {line}: {getattr(exc, 'problem', exc)}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping, got {type(data).__name__}")
    return data


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        field = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{field}: {err['msg']}")
    return "; ".join(parts)


def build_config(data: Dict[str, Any], source: str = "<dict>") -> ExperimentConfig:
    """Validate a raw mapping and apply environment overrides."""
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {_format_validation_error(exc)}") from exc

    try:
        env = EnvOverrides()
    except ValidationError as exc:
        raise ConfigError(f"environment: {_format_validation_error(exc)}") from exc
    if env.seed is not None:
        cfg.output.seed = env.seed
    if env.output_format is not None:
        cfg.output.format = env.output_format
    if env.output_path is not None:
        cfg.output.path = env.output_path
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """
    Load an experiment config with the following precedence:
      1) Environment variables (QSEAL_SEED, QSEAL_OUTPUT_FORMAT, QSEAL_OUTPUT_PATH)
      2) The YAML/JSON file at `path`
      3) Hard-coded defaults

    Raises:
      ConfigError: missing file, parse error (with line) or validation error (with field name).
    """
    cfg_path = Path(path)
    if not cfg_path.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = build_config(_parse_file(cfg_path), source=str(cfg_path))
    logger.info("[load_config] %s: scheme=%s strategy=%s n=%s", path, cfg.scheme.kind, cfg.strategy.kind, cfg.sweep.n_values)
    return cfg


def build_family(cfg: ExperimentConfig) -> SealFamily:
    s = cfg.scheme
    if s.kind == "scheme_a":
        return SealFamily.scheme_a(s.theta_cap, s.alpha, s.angle_rule)
    if s.kind == "tilted":
        return SealFamily.tilted(s.theta_cap, s.alpha, s.angle_rule)
    if s.kind == "fixed_angle":
        return SealFamily.fixed_angle(s.theta)
    if s.kind == "fourier":
        return SealFamily.fourier()
    if not Path(s.lambda_path).is_file():
        raise ConfigError(f"scheme.lambda_path: file not found: {s.lambda_path}")
    try:
        seal = MatrixSeal.from_csv(s.lambda_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"scheme.lambda_path {s.lambda_path}: {exc}") from exc
    return SealFamily.matrix(lambda n: seal, name=f"matrix({Path(s.lambda_path).name})")


def resolve_k(cfg: ExperimentConfig, scheme: SealScheme, n: int) -> Optional[int]:
    """
    Partition size the strategy reads. "auto" is ceil(n**(2 alpha)) for tilted
    seals and best_partition(threshold).k otherwise; full
    readout is k = n. None for non-product schemes.
    """
    if not isinstance(scheme, ProductSeal):
        return None
    strat = cfg.strategy
    if strat.kind == "full":
        return n
    if strat.k == "auto":
        if isinstance(scheme, TiltedProductSeal):
            return default_partition_k(n, scheme.alpha)
        return best_partition(scheme, cfg.classifier.threshold).k
    if not 1 <= strat.k <= n:
        raise ConfigError(f"strategy.k={strat.k} out of range [1, {n}] for n={n}")
    return int(strat.k)


def build_instrument(cfg: ExperimentConfig, scheme: SealScheme, n: int) -> MeasurementInstrument:
    kind = cfg.strategy.kind
    if kind == "projective":
        return projective_decode(scheme)
    if kind == "q_povm":
        return q_povm(scheme.dimension, cfg.strategy.nu)
    if kind == "full":
        return honest_full_readout(n)
    if not isinstance(scheme, ProductSeal):
        raise ConfigError(f"partition strategy needs a product scheme, got {cfg.scheme.kind}")
    return partition_readout(n, resolve_k(cfg, scheme, n))


if __name__ == "__main__":
    example = Path(__file__).resolve().parents[1] / "config" / "scheme_a_sweep.example.yaml"
    cfg = load_config(str(example))
    fam = build_family(cfg)
    print("[load_config]", cfg.model_dump())
    print("[resolve_k] n=10000:", resolve_k(cfg, fam.instantiate(10_000), 10_000))
