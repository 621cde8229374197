"""Deterministic minibatch SGD training and top-1 evaluation.

Backpropagation is exact (verified against finite differences in the test
suite); gradients of the masked round weights are zeroed on the masked
entries and the mask is re-applied after every update, so structurally
absent connections stay at exactly zero through any training run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset, batch_iter
from .errors import NumericError, ShapeError
from .model import MlpModel, forward

SCHEDULES = ("cosine", "constant")
PRECISIONS = ("double", "single")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    lr_schedule: str = "cosine"
    seed: int = 0
    precision: str = "single"

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.momentum < 0 or self.weight_decay < 0:
            raise ValueError("momentum and weight_decay must be >= 0")
        if self.lr_schedule not in SCHEDULES:
            raise ValueError(f"lr_schedule must be one of {SCHEDULES}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {PRECISIONS}")

    @property
    def dtype(self):
        return np.float64 if self.precision == "double" else np.float32


@dataclass(frozen=True)
class EvalResult:
    top1_error_percent: float
    loss: float
    n_examples: int


@dataclass
class Grads:
    """Gradients mirroring MlpModel's parameter arrays."""

    input_w: np.ndarray
    input_b: np.ndarray
    round_w: list[np.ndarray]
    round_b: list[np.ndarray]
    output_w: np.ndarray
    output_b: np.ndarray


def _softmax_stats(logits: np.ndarray, labels: np.ndarray):
    """Per-example cross-entropy and softmax probabilities, via log-sum-exp."""
    m = logits.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
    losses = lse[:, 0] - logits[np.arange(logits.shape[0]), labels]
    probs = np.exp(logits - lse)
    return losses, probs


def loss_and_grads(model: MlpModel, batch_x, batch_y) -> tuple[float, Grads]:
    """Mean softmax cross-entropy and exact gradients for every parameter.

    Masked round-weight entries come back with gradient exactly 0.
    """
    y = np.asarray(batch_y)
    if y.size and (y.min() < 0 or y.max() >= model.out_dim):
        raise ShapeError(f"labels must lie in [0, {model.out_dim})")
    logits, cache = forward(model, batch_x)
    losses, probs = _softmax_stats(logits, y)
    loss = float(losses.mean())
    if not math.isfinite(loss):
        raise NumericError(f"non-finite loss {loss}")

    batch = logits.shape[0]
    dlogits = probs
    dlogits[np.arange(batch), y] -= 1.0
    dlogits /= batch

    d_output_w = cache.act[-1].T @ dlogits
    d_output_b = dlogits.sum(axis=0)
    dh = dlogits @ model.output_w.T

    rounds = model.rounds
    d_round_w: list[np.ndarray] = [None] * rounds  # type: ignore[list-item]
    d_round_b: list[np.ndarray] = [None] * rounds  # type: ignore[list-item]
    off = ~model.mask.matrix
    for r in range(rounds - 1, -1, -1):
        da = dh * (cache.pre[r + 1] > 0)
        dw = cache.act[r].T @ da
        dw[off] = 0.0
        d_round_w[r] = dw
        d_round_b[r] = da.sum(axis=0)
        dh = da @ model.round_w[r].T
    da = dh * (cache.pre[0] > 0)
    d_input_w = cache.x.T @ da
    d_input_b = da.sum(axis=0)

    return loss, Grads(
        input_w=d_input_w,
        input_b=d_input_b,
        round_w=d_round_w,
        round_b=d_round_b,
        output_w=d_output_w,
        output_b=d_output_b,
    )


@dataclass
class SgdState:
    """Momentum buffers, one per parameter array."""

    vel_w: list[np.ndarray] = field(default_factory=list)
    vel_b: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros(cls, model: MlpModel) -> "SgdState":
        return cls(
            vel_w=[np.zeros_like(w) for w in model.weight_arrays()],
            vel_b=[np.zeros_like(b) for b in model.bias_arrays()],
        )


def lr_at(config: TrainConfig, step: int, total_steps: int) -> float:
    """Learning rate at a 0-based step index; cosine anneals to zero."""
    if config.lr_schedule == "constant":
        return config.learning_rate
    return config.learning_rate * 0.5 * (1.0 + math.cos(math.pi * step / total_steps))


def sgd_step(
    model: MlpModel,
    grads: Grads,
    config: TrainConfig,
    step_index: int,
    state: SgdState,
    total_steps: int,
) -> None:
    """One in-place momentum-SGD update.

    v <- momentum*v + grad + weight_decay*w for weights (decay skips
    biases), then w <- w - lr(step)*v; the round-weight mask is re-applied
    afterwards.
    """
    lr = lr_at(config, step_index, total_steps)
    grad_w = [grads.input_w, *grads.round_w, grads.output_w]
    for w, g, v in zip(model.weight_arrays(), grad_w, state.vel_w):
        v *= config.momentum
        v += g
        if config.weight_decay:
            v += config.weight_decay * w
        w -= lr * v
    if model.use_bias:
        grad_b = [grads.input_b, *grads.round_b, grads.output_b]
        for b, g, v in zip(model.bias_arrays(), grad_b, state.vel_b):
            v *= config.momentum
            v += g
            b -= lr * v
    model.apply_mask()


def evaluate(model: MlpModel, dataset: Dataset, batch_size: int = 1000) -> EvalResult:
    """Top-1 error and mean loss; argmax ties resolve to the lowest class."""
    wrong = 0
    loss_sum = 0.0
    for start in range(0, dataset.n, batch_size):
        x = dataset.features[start : start + batch_size]
        y = dataset.labels[start : start + batch_size]
        logits, _ = forward(model, x)
        pred = np.argmax(logits, axis=1)
        wrong += int((pred != y).sum())
        losses, _ = _softmax_stats(logits, y)
        loss_sum += float(losses.sum())
    n = dataset.n
    return EvalResult(
        top1_error_percent=100.0 * wrong / n,
        loss=loss_sum / n,
        n_examples=n,
    )


def train(
    model: MlpModel,
    train_set: Dataset,
    test_set: Dataset,
    config: TrainConfig,
) -> tuple[EvalResult, list[dict]]:
    """Run the full schedule; returns the final test result and a per-epoch log.

    Log entries: {"epoch", "train_loss", "test_top1", "lr", "wall_ms"};
    "lr" is the rate used by the last step of the epoch. Runs are
    deterministic for a fixed config seed.
    """
    config.validate()
    if train_set.dim != model.in_dim or test_set.dim != model.in_dim:
        raise ShapeError(
            f"dataset dim {train_set.dim} vs model in_dim {model.in_dim}"
        )
    if train_set.n_classes > model.out_dim:
        raise ShapeError(
            f"{train_set.n_classes} classes exceed model out_dim {model.out_dim}"
        )
    steps_per_epoch = math.ceil(train_set.n / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    state = SgdState.zeros(model)
    log: list[dict] = []
    step = 0
    for epoch in range(config.epochs):
        tic = time.perf_counter()
        loss_sum = 0.0
        n_batches = 0
        last_lr = lr_at(config, step, total_steps)
        for x, y in batch_iter(train_set, config.batch_size, config.seed, epoch):
            try:
                loss, grads = loss_and_grads(model, x, y)
            except NumericError as exc:
                raise NumericError(
                    f"epoch {epoch}, step {step}: {exc}"
                ) from exc
            last_lr = lr_at(config, step, total_steps)
            sgd_step(model, grads, config, step, state, total_steps)
            loss_sum += loss
            n_batches += 1
            step += 1
        if not model.masked_entries_zero():
            raise NumericError(f"mask violated at epoch {epoch}")
        result = evaluate(model, test_set)
        log.append(
            {
                "epoch": epoch,
                "train_loss": loss_sum / n_batches,
                "test_top1": result.top1_error_percent,
                "lr": last_lr,
                "wall_ms": (time.perf_counter() - tic) * 1000.0,
            }
        )
    return result, log
