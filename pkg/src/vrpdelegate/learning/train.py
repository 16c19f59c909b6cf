"""Huber-loss regression training with Adam and cosine learning-rate decay."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..rng import stream
from .features import SubproblemData, pad_subproblems, summary_features_padded
from .models import RegressionModel, huber, init_model

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    kind: str = "mlp"
    lr: float = 1e-3
    schedule: str = "cosine"
    batch: int = 512
    steps: int = 2000
    seed: int = 0
    augment: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden: int = 64
    d_model: int = 32
    n_heads: int = 2
    n_layers: int = 2
    d_ff: int = 128
    log_every: int = 0


@dataclass
class TrainResult:
    model: RegressionModel
    losses: list[float] = field(default_factory=list)


class NonFiniteLoss(FloatingPointError):
    pass


def rotate_flip(xy: np.ndarray, theta: np.ndarray, flip: np.ndarray) -> np.ndarray:
    """Rotate each row's points ``(B, n, 2)`` by ``theta`` and then mirror x where ``flip``."""
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    x, y = xy[..., 0], xy[..., 1]
    out = np.stack([x * c - y * s, x * s + y * c], axis=-1)
    out[..., 0] *= np.where(flip, -1.0, 1.0)[:, None]
    return out


def augment_padded(xy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * math.pi, size=len(xy))
    flip = rng.random(len(xy)) < 0.5
    return rotate_flip(xy, theta, flip)


def augment(sp: SubproblemData, rng: np.random.Generator) -> SubproblemData:
    """Rotate the depot-relative cities by a uniform angle and mirror half the time."""
    return SubproblemData(augment_padded(sp.rel_xy[None], rng)[0], sp.load, sp.capacity)


def cosine_lr(base: float, step: int, total: int, schedule: str = "cosine") -> float:
    if schedule == "constant":
        return base
    return base * 0.5 * (1.0 + math.cos(math.pi * step / max(total, 1)))


class Adam:
    def __init__(self, params: dict[str, np.ndarray], beta1=0.9, beta2=0.999, eps=1e-8):
        self.b1, self.b2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads, lr: float) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(subproblems: Sequence[SubproblemData], targets: Sequence[float], config: TrainConfig) -> TrainResult:
    sps = list(subproblems)
    y = np.asarray(targets, dtype=np.float64)
    if not sps:
        raise ValueError("empty training set")
    if len(sps) != len(y):
        raise ValueError("subproblems and targets differ in length")
    model = init_model(config.kind, seed=config.seed, hidden=config.hidden, d_model=config.d_model,
                       n_heads=config.n_heads, n_layers=config.n_layers, d_ff=config.d_ff)
    model.target_mean = float(y.mean())
    model.target_std = float(y.std()) if y.std() > 0 else 1.0
    xy, q, mask = pad_subproblems(sps)
    sizes = mask.sum(1)
    if model.uses_summary:
        z = summary_features_padded(xy, q, mask)
        model.feat_mean = z.mean(0)
        std = z.std(0)
        model.feat_std = np.where(std > 1e-12, std, 1.0)
    y_norm = model.normalize_target(y)
    model.meta = {"train_size": len(sps), "config": dict(vars(config)), "target_normalization": "standardized"}

    rng = stream(config.seed, "train", 2)
    aug_rng = stream(config.seed, "augment")
    opt = Adam(model.params, config.beta1, config.beta2, config.eps)
    bs = min(config.batch, len(sps))
    losses = []
    for step in range(config.steps):
        idx = rng.choice(len(sps), size=bs, replace=False)
        width = int(sizes[idx].max())
        bxy = xy[idx, :width]
        if config.augment:
            bxy = augment_padded(bxy, aug_rng)
        batch = model.batch_from_padded(bxy, q[idx, :width], mask[idx, :width])
        loss, grads = model.loss_and_grad(batch, y_norm[idx])
        if not math.isfinite(loss):
            raise NonFiniteLoss(f"loss became {loss} at step {step}")
        losses.append(loss)
        opt.step(model.params, grads, cosine_lr(config.lr, step, config.steps, config.schedule))
        if config.log_every and step % config.log_every == 0:
            log.info("step %d loss %.5f", step, loss)
    return TrainResult(model, losses)


def evaluate_loss(model: RegressionModel, subproblems, targets) -> float:
    pred = model.forward(model.make_batch(list(subproblems)))
    return huber(pred, model.normalize_target(targets))[0]
