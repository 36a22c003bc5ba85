"""Velocity-field MLP for rectified flow matching, trained from scratch in numpy.

The network maps ``[x; t]`` (length D+1) to a velocity in R^D through
fully connected layers with ReLU between them and an identity output. Weights
are stored as ``(fan_out, fan_in)`` and applied to row batches as ``h @ W.T``.
"""

import hashlib
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from src.config.run_config import NetArchitecture, TrainConfig
from src.errors import ArchitectureMismatch, DimensionMismatch, DomainError, EmptyInput
from src.scenario.generator import Dataset
from src.scenario.rng import stream

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
MOVING_AVERAGE_WINDOW = 10
PROBE_SIZE = 1024


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Per-layer weights (fan_out, fan_in) and biases (fan_out,), input to output."""

    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionMismatch("weights and biases must pair up, one per layer")
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise DimensionMismatch(f"layer shapes disagree: W{w.shape}, b{b.shape}")
        for prev, nxt in zip(self.weights[:-1], self.weights[1:]):
            if nxt.shape[1] != prev.shape[0]:
                raise DimensionMismatch(f"layer {prev.shape} cannot feed {nxt.shape}")
        if not all(np.all(np.isfinite(a)) for a in self.weights + self.biases):
            raise DomainError("network parameters hold non-finite values")

    @property
    def layer_dims(self) -> List[Tuple[int, int]]:
        return [(w.shape[1], w.shape[0]) for w in self.weights]

    @property
    def data_dim(self) -> int:
        return self.weights[-1].shape[0]

    def arrays(self) -> List[np.ndarray]:
        """Documented layer order: W1, b1, W2, b2, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()]).astype(np.float64)

    def digest(self) -> str:
        return hashlib.blake2b(self.flat().astype("<f8").tobytes(), digest_size=8).hexdigest()

    def map(self, fn: Callable[..., np.ndarray], *others: "MlpParams") -> "MlpParams":
        """Apply ``fn`` leaf-wise across this and ``others``."""
        for other in others:
            if other.layer_dims != self.layer_dims:
                raise DimensionMismatch("parameter trees have different shapes")
        weights = tuple(fn(w, *(o.weights[i] for o in others)) for i, w in enumerate(self.weights))
        biases = tuple(fn(b, *(o.biases[i] for o in others)) for i, b in enumerate(self.biases))
        return MlpParams(weights, biases)

    def matches(self, arch: NetArchitecture) -> bool:
        return self.layer_dims == arch.layer_dims

    @classmethod
    def zeros(cls, arch: NetArchitecture) -> "MlpParams":
        return cls(
            tuple(np.zeros((fan_out, fan_in)) for fan_in, fan_out in arch.layer_dims),
            tuple(np.zeros(fan_out) for _, fan_out in arch.layer_dims),
        )

    @classmethod
    def from_flat(cls, arch: NetArchitecture, values: np.ndarray) -> "MlpParams":
        values = np.asarray(values, dtype=np.float64)
        expected = sum(fan_in * fan_out + fan_out for fan_in, fan_out in arch.layer_dims)
        if values.size != expected:
            raise ArchitectureMismatch(f"{values.size} parameters for an architecture needing {expected}")
        weights, biases, offset = [], [], 0
        for fan_in, fan_out in arch.layer_dims:
            weights.append(values[offset : offset + fan_in * fan_out].reshape(fan_out, fan_in).copy())
            offset += fan_in * fan_out
            biases.append(values[offset : offset + fan_out].copy())
            offset += fan_out
        return cls(tuple(weights), tuple(biases))


@dataclass(frozen=True, eq=False)
class AdamState:
    m: MlpParams
    v: MlpParams
    step: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def fresh(cls, params: MlpParams) -> "AdamState":
        zeros = params.map(np.zeros_like)
        return cls(m=zeros, v=zeros)


@dataclass(frozen=True, eq=False)
class FlowBatch:
    """Latent draws x0, data x1 and per-row times t."""

    x0: np.ndarray
    x1: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        for name in ("x0", "x1", "t"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.x0.shape != self.x1.shape or self.x1.ndim != 2:
            raise DimensionMismatch(f"x0 {self.x0.shape} and x1 {self.x1.shape} must be equal (B, D)")
        if self.t.shape != (self.x1.shape[0],):
            raise DimensionMismatch(f"t must have one entry per row, got {self.t.shape}")
        if self.x1.shape[0] == 0:
            raise EmptyInput("empty training batch")

    def __len__(self) -> int:
        return self.x1.shape[0]

    @property
    def inputs(self) -> np.ndarray:
        return interpolate(self.x0, self.x1, self.t)

    @property
    def target(self) -> np.ndarray:
        return self.x1 - self.x0


@dataclass
class TrainReport:
    epoch_losses: List[float]
    params_digest: str
    moving_average: List[float] = field(default_factory=list)
    probe_loss_initial: float = float("nan")
    probe_loss_final: float = float("nan")
    wall_time_s: float = field(default=0.0, compare=False)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else float("nan")

    def losses_digest(self) -> str:
        data = np.asarray(self.epoch_losses, dtype="<f8").tobytes()
        return hashlib.blake2b(data, digest_size=8).hexdigest()

    def to_header(self) -> dict:
        """Checkpoint-header view; wall time stays out so reruns hash equal."""
        return {
            "epochs_run": len(self.epoch_losses),
            "epoch_losses": self.epoch_losses,
            "epoch_losses_digest": self.losses_digest(),
            "moving_average": self.moving_average,
            "probe_loss_initial": self.probe_loss_initial,
            "probe_loss_final": self.probe_loss_final,
            "params_digest": self.params_digest,
        }


def init_params(arch: NetArchitecture, rng: np.random.Generator) -> MlpParams:
    """He-normal weights ``N(0, 2/fan_in)``, zero biases."""
    weights = tuple(
        rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in) for fan_in, fan_out in arch.layer_dims
    )
    biases = tuple(np.zeros(fan_out) for _, fan_out in arch.layer_dims)
    return MlpParams(weights, biases)


def interpolate(x0: np.ndarray, x1: np.ndarray, t: Union[float, np.ndarray]) -> np.ndarray:
    """Straight path ``x_t = (1 - t) x0 + t x1``; ``t`` is a scalar or one value per row."""
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    if x0.shape != x1.shape:
        raise DimensionMismatch(f"x0 {x0.shape} and x1 {x1.shape} differ")
    t = np.asarray(t, dtype=np.float64)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("t must lie in [0, 1]")
    if t.ndim == 1 and x1.ndim == 2:
        t = t[:, None]
    return (1.0 - t) * x0 + t * x1


def _inputs(params: MlpParams, x: np.ndarray, t) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != params.data_dim or params.weights[0].shape[1] != x.shape[1] + 1:
        raise DimensionMismatch(f"input width {x.shape[1]} does not fit layers {params.layer_dims}")
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), (x.shape[0],))
    return np.concatenate([x, t[:, None]], axis=1), single


def _forward_trace(params: MlpParams, h: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Layer inputs and pre-activations, kept for backpropagation."""
    activations, pre = [h], []
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w.T + b
        pre.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        activations.append(h)
    return activations, pre


def forward(params: MlpParams, x: np.ndarray, t) -> np.ndarray:
    """Velocity ``v(x, t)`` for one vector or a (B, D) batch."""
    h, single = _inputs(params, x, t)
    out = _forward_trace(params, h)[0][-1]
    return out[0] if single else out


def rfm_loss(params: MlpParams, batch: FlowBatch) -> float:
    """Batch mean of ``||v(x_t, t) - (x1 - x0)||^2``."""
    residual = forward(params, batch.inputs, batch.t) - batch.target
    return float(np.mean(np.sum(residual**2, axis=1)))


def loss_and_gradients(params: MlpParams, batch: FlowBatch) -> Tuple[float, MlpParams]:
    """Loss plus its exact gradient; the ReLU derivative at 0 is taken as 0."""
    h, _ = _inputs(params, batch.inputs, batch.t)
    activations, pre = _forward_trace(params, h)
    residual = activations[-1] - batch.target
    loss = float(np.mean(np.sum(residual**2, axis=1)))

    delta = 2.0 * residual / len(batch)
    grad_w, grad_b = [], []
    for i in reversed(range(len(params.weights))):
        grad_w.append(delta.T @ activations[i])
        grad_b.append(delta.sum(axis=0))
        if i > 0:
            delta = (delta @ params.weights[i]) * (pre[i - 1] > 0)
    return loss, MlpParams(tuple(reversed(grad_w)), tuple(reversed(grad_b)))


def gradients(params: MlpParams, batch: FlowBatch) -> MlpParams:
    return loss_and_gradients(params, batch)[1]


def adam_step(
    params: MlpParams, grads: MlpParams, state: AdamState, lr: float
) -> Tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update.

    Returns:
        New parameters and state; inputs are left untouched.
    """
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m = state.m.map(lambda m_, g: b1 * m_ + (1.0 - b1) * g, grads)
    v = state.v.map(lambda v_, g: b2 * v_ + (1.0 - b2) * g * g, grads)
    c1 = 1.0 - b1**step
    c2 = 1.0 - b2**step
    new_params = params.map(
        lambda p, m_, v_: p - lr * (m_ / c1) / (np.sqrt(v_ / c2) + state.eps), m, v
    )
    return new_params, AdamState(m=m, v=v, step=step, beta1=b1, beta2=b2, eps=state.eps)


def moving_average(values: List[float], window: int = MOVING_AVERAGE_WINDOW) -> List[float]:
    """Trailing mean over up to ``window`` epochs."""
    out = []
    for i in range(len(values)):
        chunk = values[max(0, i - window + 1) : i + 1]
        out.append(float(np.mean(chunk)))
    return out


def _probe_batch(x: np.ndarray, seed: int) -> FlowBatch:
    rng = stream(seed, "train-probe")
    rows = rng.choice(x.shape[0], size=min(PROBE_SIZE, x.shape[0]), replace=False)
    x1 = x[np.sort(rows)]
    return FlowBatch(rng.standard_normal(x1.shape), x1, rng.uniform(0.0, 1.0, x1.shape[0]))


def train(
    train_set: Union[Dataset, np.ndarray],
    arch: NetArchitecture,
    cfg: TrainConfig,
    progress: Optional[bool] = None,
) -> Tuple[MlpParams, TrainReport]:
    """Fit the velocity field to H0 data by rectified flow matching.

    Each epoch shuffles the rows and walks them in batches of
    ``cfg.batch_size``; every batch gets fresh latent draws and one uniform
    time per row. The last batch may be short and uses its own mean.

    Args:
        train_set: Dataset or a raw (M, D) array of real-embedded samples.
        arch: Network layout; ``arch.data_dim`` must equal the column count.
        cfg: Optimizer settings and seed.
        progress: tqdm switch (None hides the bar off-TTY).

    Returns:
        Trained parameters and the training report.

    Raises:
        EmptyInput: no training rows.
        DimensionMismatch: column count differs from the architecture.
    """
    x = np.asarray(train_set.x if isinstance(train_set, Dataset) else train_set, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("training set is empty")
    if x.shape[1] != arch.data_dim:
        raise DimensionMismatch(f"dataset has D={x.shape[1]} but the network expects D={arch.data_dim}")

    started = time.perf_counter()
    params = init_params(arch, stream(cfg.seed, "train-init"))
    state = AdamState.fresh(params)
    probe = _probe_batch(x, cfg.seed)
    probe_initial = rfm_loss(params, probe)

    rows = x.shape[0]
    epoch_losses: List[float] = []
    bar = tqdm(range(cfg.epochs), desc="train", unit="epoch", disable=None if progress is None else not progress)
    for epoch in bar:
        rng = stream(cfg.seed, "train-epoch", epoch)
        order = rng.permutation(rows)
        total = 0.0
        for start in range(0, rows, cfg.batch_size):
            x1 = x[order[start : start + cfg.batch_size]]
            batch = FlowBatch(rng.standard_normal(x1.shape), x1, rng.uniform(0.0, 1.0, x1.shape[0]))
            loss, grads = loss_and_gradients(params, batch)
            params, state = adam_step(params, grads, state, cfg.learning_rate)
            total += loss * len(batch)
        epoch_losses.append(total / rows)
        bar.set_postfix(loss=f"{epoch_losses[-1]:.4f}")
        logger.debug("epoch %d/%d loss %.6f", epoch + 1, cfg.epochs, epoch_losses[-1])

    report = TrainReport(
        epoch_losses=epoch_losses,
        params_digest=params.digest(),
        moving_average=moving_average(epoch_losses),
        probe_loss_initial=probe_initial,
        probe_loss_final=rfm_loss(params, probe),
        wall_time_s=time.perf_counter() - started,
    )
    logger.info(
        "Trained %d epochs in %.1fs: loss %.4f, probe %.4f -> %.4f",
        cfg.epochs,
        report.wall_time_s,
        report.final_loss,
        report.probe_loss_initial,
        report.probe_loss_final,
    )
    return params, report
