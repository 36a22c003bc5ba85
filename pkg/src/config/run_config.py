"""Strict run configuration shared by every pipeline stage.

All models reject unknown keys and are immutable once validated. Defaults
reproduce the reference experimental setup, so an empty JSON object is a
complete configuration.
"""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union, get_args, get_origin

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.config.settings import settings
from src.errors import ConfigError

DETECTOR_NAMES: Tuple[str, ...] = ("MF", "NMF", "AMF-SCM", "ANMF-SCM", "ANMF-FP", "D-RFM")

_STRICT = ConfigDict(extra="forbid", frozen=True)


class GaussianHomogeneous(BaseModel):
    """Homogeneous complex Gaussian clutter."""

    model_config = _STRICT

    kind: Literal["gaussian"] = "gaussian"


class CompoundGaussian(BaseModel):
    """Compound-Gaussian clutter with Gamma(mu, 1/mu) texture."""

    model_config = _STRICT

    kind: Literal["compound"] = "compound"
    mu: float = Field(1.0, gt=0, description="Gamma texture shape; the texture has unit mean")


ClutterKind = Annotated[Union[GaussianHomogeneous, CompoundGaussian], Field(discriminator="kind")]


class SnrMode(str, Enum):
    """How a requested SNR is turned into a target amplitude."""

    WHITENED = "whitened"
    PER_PULSE = "per_pulse"


class ScenarioConfig(BaseModel):
    """Synthetic clutter-plus-noise scenario."""

    model_config = _STRICT

    n_pulses: int = Field(16, ge=2, description="Number of pulses N (vector length)")
    rho: float = Field(0.5, ge=0.0, lt=1.0, description="Clutter correlation coefficient")
    clutter_kind: ClutterKind = Field(
        default_factory=GaussianHomogeneous, description="Clutter family (gaussian | compound)"
    )
    cnr: float = Field(1.0, gt=0.0, description="Clutter-to-noise ratio r = Tr(Sigma_c)/(N sigma^2)")
    seed: int = Field(0, ge=0, lt=2**64, description="Master 64-bit seed")
    snr_mode: SnrMode = Field(SnrMode.WHITENED, description="SNR calibration (whitened | per_pulse)")

    @property
    def noise_power(self) -> float:
        """Thermal noise power sigma^2; Sigma_c has unit diagonal so Tr = N."""
        return 1.0 / self.cnr

    @property
    def data_dim(self) -> int:
        return 2 * self.n_pulses

    @property
    def is_compound(self) -> bool:
        return isinstance(self.clutter_kind, CompoundGaussian)

    @property
    def label(self) -> str:
        return "cCGN+AWGN" if self.is_compound else "cGN+AWGN"

    def snapshot(self) -> Dict[str, Any]:
        """JSON-ready dump including the derived noise power."""
        data = self.model_dump(mode="json")
        data["noise_power"] = self.noise_power
        return data

    @classmethod
    def from_snapshot(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        data = dict(data)
        data.pop("noise_power", None)
        return cls.model_validate(data)


class NetArchitecture(BaseModel):
    """Fully connected velocity network layout."""

    model_config = _STRICT

    data_dim: int = Field(32, ge=2, description="Data dimension D = 2N")
    hidden_dims: List[int] = Field(
        default_factory=lambda: [256, 256], description="Hidden layer widths"
    )

    @model_validator(mode="after")
    def _check(self) -> "NetArchitecture":
        if self.data_dim % 2:
            raise ValueError("data_dim must be even (real and imaginary halves)")
        if any(width < 1 for width in self.hidden_dims):
            raise ValueError("hidden widths must be positive")
        return self

    @property
    def input_dim(self) -> int:
        return self.data_dim + 1

    @property
    def output_dim(self) -> int:
        return self.data_dim

    @property
    def layer_dims(self) -> List[Tuple[int, int]]:
        """(fan_in, fan_out) for every weight layer, input to output."""
        dims = [self.input_dim, *self.hidden_dims, self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


class TrainConfig(BaseModel):
    """Optimizer and schedule for flow training."""

    model_config = _STRICT

    learning_rate: float = Field(1e-3, gt=0, description="Adam learning rate")
    batch_size: int = Field(128, ge=1, description="Mini-batch size")
    epochs: int = Field(170, ge=1, description="Training epochs")
    seed: int = Field(0, ge=0, lt=2**64, description="Training seed (init, shuffling, x0, t)")


class IntegrationConfig(BaseModel):
    """Reverse-time integration of the learned velocity field."""

    model_config = _STRICT

    steps: int = Field(64, ge=1, description="Euler steps S from t=1 to t=0")
    scheme: Literal["euler"] = Field("euler", description="Integration scheme")


class SplitCounts(BaseModel):
    model_config = _STRICT

    train: int = Field(10000, ge=1, description="Training samples (H0)")
    val: int = Field(10000, ge=1, description="Validation samples used to fix thresholds")
    test: int = Field(5000, ge=1, description="Held-out H0 samples for Pfa checks")


class EvaluationConfig(BaseModel):
    """Monte Carlo evaluation grid."""

    model_config = _STRICT

    pfa: float = Field(1e-2, gt=0, lt=1, description="Target false-alarm probability")
    snr_min_db: float = Field(-20.0, description="First SNR grid point (dB)")
    snr_max_db: float = Field(19.0, description="Last SNR grid point (dB)")
    snr_step_db: float = Field(1.0, gt=0, description="SNR grid step (dB)")
    trials: int = Field(5000, ge=1, description="H1 trials per SNR point")
    doppler_bin: float = Field(0.0, description="Doppler bin d for Pd curves")
    doppler_bins: Optional[List[float]] = Field(
        None, description="Doppler bins for maps (default 0..N-1)"
    )
    k_secondary: Optional[int] = Field(None, ge=1, description="Secondary vectors K (default 2N)")
    resample_secondary: bool = Field(
        True, description="Draw fresh secondary data per trial instead of once per scenario"
    )
    tyler_tol: float = Field(1e-6, gt=0, description="Tyler relative Frobenius tolerance")
    tyler_max_iter: int = Field(100, ge=1, description="Tyler iteration budget")
    detectors: List[str] = Field(
        default_factory=lambda: list(DETECTOR_NAMES), description="Detectors to run"
    )
    bench_samples: int = Field(1000, ge=1, description="Timed samples per SNR point")
    bench_snr_min_db: float = Field(0.0, description="First timing SNR (dB)")
    bench_snr_max_db: float = Field(20.0, description="Last timing SNR (dB)")
    emit_svg: bool = Field(True, description="Write SVG plots next to the CSV files")

    @model_validator(mode="after")
    def _check(self) -> "EvaluationConfig":
        if not self.detectors:
            raise ValueError("at least one detector must be selected")
        unknown = [name for name in self.detectors if name not in DETECTOR_NAMES]
        if unknown:
            raise ValueError(f"unknown detectors {unknown}; choose from {list(DETECTOR_NAMES)}")
        if self.snr_max_db < self.snr_min_db or self.bench_snr_max_db < self.bench_snr_min_db:
            raise ValueError("SNR grid maximum is below its minimum")
        return self

    @property
    def snr_grid_db(self) -> List[float]:
        count = int(math.floor((self.snr_max_db - self.snr_min_db) / self.snr_step_db + 1e-9)) + 1
        return [self.snr_min_db + i * self.snr_step_db for i in range(count)]

    @property
    def bench_snr_db(self) -> List[float]:
        count = int(math.floor(self.bench_snr_max_db - self.bench_snr_min_db + 1e-9)) + 1
        return [self.bench_snr_min_db + i for i in range(count)]


class PathsConfig(BaseModel):
    model_config = _STRICT

    data_dir: str = Field("data", description="Dataset directory")
    checkpoint_dir: str = Field("checkpoints", description="Checkpoint directory")
    out_dir: str = Field("results", description="Result directory (env RFM_RADAR_OUT overrides)")


class RunConfig(BaseModel):
    """Complete configuration of one experiment."""

    model_config = _STRICT

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig, description="Scenario")
    train: TrainConfig = Field(default_factory=TrainConfig, description="Training")
    arch: NetArchitecture = Field(default_factory=NetArchitecture, description="Network")
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig, description="Integration")
    splits: SplitCounts = Field(default_factory=SplitCounts, description="Dataset sizes")
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig, description="Evaluation")
    paths: PathsConfig = Field(default_factory=PathsConfig, description="Paths")

    @model_validator(mode="before")
    @classmethod
    def _derive_data_dim(cls, data: Any) -> Any:
        if isinstance(data, dict):
            n_pulses = (data.get("scenario") or {}).get("n_pulses", 16)
            arch = dict(data.get("arch") or {})
            arch.setdefault("data_dim", 2 * n_pulses)
            data = {**data, "arch": arch}
        return data

    @model_validator(mode="after")
    def _check_dims(self) -> "RunConfig":
        if self.arch.data_dim != self.scenario.data_dim:
            raise ValueError(
                f"arch.data_dim={self.arch.data_dim} but scenario needs D=2N={self.scenario.data_dim}"
            )
        return self

    @property
    def k_secondary(self) -> int:
        return self.evaluation.k_secondary or 2 * self.scenario.n_pulses

    @property
    def doppler_bins(self) -> List[float]:
        if self.evaluation.doppler_bins is not None:
            return list(self.evaluation.doppler_bins)
        return [float(d) for d in range(self.scenario.n_pulses)]


def _set_dotted(data: Dict[str, Any], dotted: str, value: Any) -> None:
    node = data
    *parents, leaf = dotted.split(".")
    for key in parents:
        node = node.setdefault(key, {})
    node[leaf] = value


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Load, override and validate a run configuration.

    Args:
        path: JSON file; ``None`` means all defaults.
        overrides: Dotted-key overrides, e.g. ``{"train.epochs": 1}``.

    Returns:
        Validated RunConfig.

    Raises:
        ConfigError: Unreadable JSON or schema violation.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8") or "{}")
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"Config {path} must hold a JSON object")

    for dotted, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(raw, dotted, value)
    if settings.out_dir_override and (overrides or {}).get("paths.out_dir") is None:
        _set_dotted(raw, "paths.out_dir", settings.out_dir_override)

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration:\n{e}") from e


def _model_members(annotation: Any) -> List[type]:
    """BaseModel classes behind a plain or Union annotation."""
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return [annotation]
    if get_origin(annotation) is Annotated:
        return _model_members(get_args(annotation)[0])
    return [a for a in get_args(annotation) if isinstance(a, type) and issubclass(a, BaseModel)]


def describe_config_keys(model: type = RunConfig, prefix: str = "") -> List[Tuple[str, str, str]]:
    """List every config key with its default and description.

    Union fields (``scenario.clutter_kind``) get a row of their own, followed
    by the keys of every member model.

    Returns:
        ``(dotted_key, default_repr, description)`` triples in declaration order.
    """
    rows: List[Tuple[str, str, str]] = []
    for name, field in model.model_fields.items():
        key = f"{prefix}{name}"
        annotation = field.annotation
        members = _model_members(annotation)
        if len(members) == 1 and annotation is members[0]:
            rows.extend(describe_config_keys(annotation, prefix=f"{key}."))
            continue
        if field.default_factory is not None:
            default = field.default_factory()
        else:
            default = field.default
        if isinstance(default, BaseModel):
            default = default.model_dump(mode="json")
        elif isinstance(default, Enum):
            default = default.value
        rows.append((key, json.dumps(default), field.description or ""))
        seen = {row[0] for row in rows}
        for member in members:
            for row in describe_config_keys(member, prefix=f"{key}."):
                if row[0] not in seen:
                    seen.add(row[0])
                    rows.append(row)
    return rows
