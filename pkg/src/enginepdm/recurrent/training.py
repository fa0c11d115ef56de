"""Mini-batch training with validation hold-out and early stopping."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .network import Network, NetworkSpec, bce_loss
from .optim import adam_step, init_moments

log = logging.getLogger(__name__)


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    epochs: int = 15
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    validation_split: float = 0.2
    patience: int = 3
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if not 0.0 < self.validation_split < 1.0:
            raise ValueError("validation_split must lie in (0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, epochs and patience must be positive")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    train_acc: float
    val_acc: float


@dataclass
class History:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    def __len__(self):
        return len(self.records)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss,train_acc,val_acc"]
        for r in self.records:
            lines.append(f"{r.epoch},{r.train_loss!r},{r.val_loss!r},{r.train_acc!r},{r.val_acc!r}")
        return "\n".join(lines) + "\n"


class RecurrentClassifier:
    """Trained network behind the common ``predict_proba`` interface."""

    threshold = 0.5

    def __init__(self, network: Network, family: str = "custom", seed: int = 0):
        self.network = network
        self.family = family
        self.seed = seed

    @property
    def spec(self) -> NetworkSpec:
        return self.network.spec

    def predict_proba(self, x) -> np.ndarray:
        return self.network.predict_proba(x)

    def predict(self, x) -> np.ndarray:
        return (self.predict_proba(x) >= self.threshold).astype(np.int64)


def _accuracy(p, y):
    return float(np.mean((p >= 0.5) == (y == 1))) if len(y) else float("nan")


def split_validation(n: int, fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Hold out the trailing ``fraction`` of rows, keeping at least one on each side."""
    n_val = min(max(1, int(round(n * fraction))), n - 1)
    return np.arange(n - n_val), np.arange(n - n_val, n)


def fit(spec: NetworkSpec, x, y, cfg: TrainConfig = TrainConfig(), family: str = "custom"):
    """Train a fresh network; returns ``(RecurrentClassifier, History)``.

    The validation set is the trailing ``validation_split`` fraction of the
    input order. Training stops once validation loss has not improved for
    ``patience`` epochs and the best-validation weights are restored.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise EmptyDataset("need at least two sequences (one for validation)")
    if len(x) != len(y):
        raise ValueError("x and y lengths differ")

    net = Network(spec, seed=cfg.seed, dtype=cfg.dtype)
    rng = np.random.default_rng([cfg.seed, 1])
    tr, va = split_validation(len(x), cfg.validation_split)
    weights = net.parameters()
    moments = init_moments(weights)
    history = History()
    best_loss, best_weights, wait, step = np.inf, None, 0, 0

    for epoch in range(1, cfg.epochs + 1):
        order = tr[rng.permutation(len(tr))]
        loss_sum, hits = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            p = net.forward(x[idx], train=True, rng=rng)
            loss_sum += bce_loss(p, y[idx]) * len(idx)
            hits += int(np.sum((p >= 0.5) == (y[idx] == 1)))
            grads = net.backward(p, y[idx])
            step += 1
            adam_step(weights, grads, moments, step, cfg.learning_rate,
                      cfg.beta1, cfg.beta2, cfg.epsilon)
        pv = net.predict_proba(x[va])
        rec = EpochRecord(epoch, loss_sum / len(tr), bce_loss(pv, y[va]), hits / len(tr),
                          _accuracy(pv, y[va]))
        history.records.append(rec)
        log.info("epoch %d: loss %.4f val_loss %.4f acc %.4f val_acc %.4f", epoch,
                 rec.train_loss, rec.val_loss, rec.train_acc, rec.val_acc)
        if rec.val_loss < best_loss:
            best_loss, wait = rec.val_loss, 0
            best_weights = {k: v.copy() for k, v in weights.items()}
            history.best_epoch = epoch
        else:
            wait += 1
            if wait >= cfg.patience:
                history.stopped_early = epoch < cfg.epochs
                log.info("early stop at epoch %d (best %d)", epoch, history.best_epoch)
                break

    net.set_parameters(best_weights)
    return RecurrentClassifier(net, family, cfg.seed), history
