"""Loss functions, analytic gradients, and the SGD training loop.

Gradients for the gated networks exploit the defining simplification of the
architecture: the gate stream contains no trainable weight, so gate values
enter the chain rule as constants.  The loss is therefore a polynomial in
the weights and backpropagation reduces to masked matrix products.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ParameterError, ShapeError
from .features import seeded_stream
from .network import ImplicitEnsembleNet, ReluNet, SemiRandomNet

LOSSES = ("squared", "softmax")


@dataclass
class TrainConfig:
    learning_rate: float = 5e-4
    momentum: float = 0.9
    batch_size: int = 500
    epochs: int = 100
    lr_decay_per_epoch: float = 1.0
    seed: int = 0
    loss: str = "squared"

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ParameterError("learning_rate must be >= 0")
        if not 0 <= self.momentum < 1:
            raise ParameterError("momentum must be in [0, 1)")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")
        if not 0 < self.lr_decay_per_epoch <= 1:
            raise ParameterError("lr_decay_per_epoch must be in (0, 1]")
        if self.loss not in LOSSES:
            raise ParameterError(f"loss must be one of {LOSSES}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    test_loss: float
    test_error: float
    seconds: float
    step: int  # cumulative mini-batch steps at the end of this epoch


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    CSV_HEADER = "epoch,train_loss,test_loss,test_error,seconds"

    def final(self) -> EpochRecord:
        if not self.records:
            raise ParameterError("history is empty")
        return self.records[-1]

    def to_csv(self, path, include_timing=False) -> None:
        """Write per-epoch rows.

        ``seconds`` is zeroed unless ``include_timing`` is set: wall time is
        inherently non-reproducible and would break byte-identical artifacts
        for repeated seeded runs.
        """
        lines = [self.CSV_HEADER]
        for r in self.records:
            secs = r.seconds if include_timing else 0.0
            lines.append(f"{r.epoch},{r.train_loss!r},{r.test_loss!r},"
                         f"{r.test_error!r},{secs!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def squared_loss(preds, targets) -> float:
    """Mean squared residual over all entries, halved: sum((y-p)^2) / (2m)."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise ShapeError(f"shape mismatch: {preds.shape} vs {targets.shape}")
    m = preds.shape[0] if preds.ndim > 0 else 1
    diff = preds - targets
    return float(np.sum(diff * diff) / (2 * m))


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(preds, targets) -> float:
    """Mean cross entropy of row-softmaxed predictions against one-hot rows."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise ShapeError(f"shape mismatch: {preds.shape} vs {targets.shape}")
    logp = preds - preds.max(axis=1, keepdims=True)
    logp = logp - np.log(np.exp(logp).sum(axis=1, keepdims=True))
    return float(-np.sum(targets * logp) / preds.shape[0])


def loss_value(preds, targets, loss="squared") -> float:
    if loss == "squared":
        return squared_loss(preds, targets)
    return softmax_cross_entropy(preds, targets)


def _loss_gradient(preds, targets, loss):
    m = preds.shape[0]
    if loss == "squared":
        return (preds - targets) / m
    return (_softmax(preds) - targets) / m


def gradients(model, X, Y, loss="squared"):
    """Exact gradients of the configured loss w.r.t. every weight matrix.

    Returned list is aligned with ``model.weights``.  Gate matrices never
    receive a gradient; for ``train_last_only`` models the unused entries
    are still returned (callers pick what to apply).
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if isinstance(model, ReluNet):
        return _relu_gradients(model, X, Y, loss)
    return _gated_gradients(model, X, Y, loss)


def _gated_gradients(model: SemiRandomNet, X, Y, loss):
    A, gate_vals, hidden_vals = model.streams(X)
    preds = hidden_vals[-1] @ model.weights[-1]
    upstream = _loss_gradient(preds, Y, loss)
    depth = len(model.gates)
    grads = [None] * (depth + 1)
    grads[depth] = hidden_vals[-1].T @ upstream
    upstream = upstream @ model.weights[-1].T
    for l in range(depth - 1, -1, -1):
        masked = upstream * gate_vals[l]
        below = hidden_vals[l - 1] if l > 0 else A
        grads[l] = below.T @ masked
        if l > 0:
            upstream = masked @ model.weights[l].T
    return grads


def _relu_gradients(model: ReluNet, X, Y, loss):
    inputs, preacts = model.streams(X)
    upstream = _loss_gradient(preacts[-1], Y, loss)
    grads = [None] * len(model.weights)
    for l in range(len(model.weights) - 1, -1, -1):
        grads[l] = inputs[l].T @ upstream
        if l > 0:
            upstream = upstream @ model.weights[l].T
            upstream = upstream[:, 1:]  # drop the augmented-ones column
            upstream = upstream * (preacts[l - 1] > 0)
    return grads


def sgd_momentum_step(param, grad, velocity, lr, momentum) -> None:
    """Classical heavy-ball update, in place: v = mu*v - lr*g; p += v."""
    if param.shape != grad.shape or param.shape != velocity.shape:
        raise ShapeError("param, grad, and velocity must share shapes")
    velocity *= momentum
    velocity -= lr * grad
    param += velocity


def lr_schedule(initial, epoch, decay) -> float:
    """Staircase schedule: constant within an epoch, times ``decay`` after each."""
    if not 0 < decay <= 1:
        raise ParameterError("decay must be in (0, 1]")
    return initial * decay ** epoch


def evaluate(model, dataset, loss="squared"):
    """(loss, top-1 error rate) on a dataset; error is NaN for regression.

    Ensembles are evaluated in test mode (bank-averaged raw outputs).
    """
    preds = model.forward_test(dataset.X) if isinstance(model, ImplicitEnsembleNet) \
        else model.forward(dataset.X)
    value = loss_value(preds, dataset.Y, loss)
    if dataset.classification:
        mismatch = np.argmax(preds, axis=1) != np.argmax(dataset.Y, axis=1)
        return value, float(np.mean(mismatch))
    return value, float("nan")


def train(model, train_ds, config: TrainConfig, test_ds=None) -> TrainHistory:
    """Mini-batch SGD with momentum; returns the per-epoch history.

    Each epoch reshuffles with its own seeded stream and walks the
    permutation in batches, keeping the final short batch.  Ensembles draw
    the active bank per step from a second, independent stream, so a
    one-bank ensemble consumes exactly the same shuffle sequence as a plain
    net and ends with bit-identical weights.  A non-finite epoch loss
    aborts with :class:`DivergenceError`.
    """
    shuffle_rng = seeded_stream(config.seed, "shuffle")
    bank_rng = seeded_stream(config.seed, "bank")
    ensemble = isinstance(model, ImplicitEnsembleNet)
    trainable = model.trainable_indices()
    velocity = {i: np.zeros_like(model.weights[i]) for i in trainable}
    m = train_ds.X.shape[0]
    history = TrainHistory()
    step = 0
    for epoch in range(config.epochs):
        tic = time.perf_counter()
        lr = lr_schedule(config.learning_rate, epoch, config.lr_decay_per_epoch)
        order = shuffle_rng.permutation(m)
        for start in range(0, m, config.batch_size):
            idx = order[start:start + config.batch_size]
            net = model.bank_net(int(bank_rng.integers(model.num_banks))) if ensemble else model
            grads = gradients(net, train_ds.X[idx], train_ds.Y[idx], config.loss)
            for i in trainable:
                sgd_momentum_step(net.weights[i], grads[i], velocity[i], lr, config.momentum)
            step += 1
        train_loss, _ = evaluate(model, train_ds, config.loss)
        if not np.isfinite(train_loss):
            raise DivergenceError(f"non-finite training loss at epoch {epoch + 1} "
                                  f"(lr={lr:g}); try a smaller learning rate")
        if test_ds is not None:
            test_loss, test_error = evaluate(model, test_ds, config.loss)
        else:
            test_loss, test_error = float("nan"), float("nan")
        history.records.append(EpochRecord(
            epoch=epoch + 1, train_loss=train_loss, test_loss=test_loss,
            test_error=test_error, seconds=time.perf_counter() - tic, step=step))
    return history
