"""Randomized verification sweeps shared by the CLI and the test suite.

Three checks, each driven by a seeded generator so the sweeps are exactly
repeatable:

* analytic gradients against central finite differences, on models whose
  gate preactivations all sit safely away from the switching threshold;
* the path-tensor expansion against the recursive forward pass;
* full-batch gradient descent against the closed-form optimum, over a
  batch of random one-hidden-layer instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import activation, seeded_stream
from .network import ReluNet, SemiRandomNet, augment
from .oracle import (
    GdConfig,
    LandscapeReport,
    oracle_report,
    path_tensors,
    random_instance,
    shallow_net,
    verify_landscape,
)
from .training import gradients, loss_value, squared_loss

GATE_SAFE_MARGIN = 1e-3
FD_STEP = 1e-6


def finite_difference_gradients(model, X, Y, loss="squared", step=FD_STEP):
    """Central-difference gradient of the loss w.r.t. every weight matrix."""
    grads = []
    for w in model.weights:
        g = np.zeros_like(w)
        for i in range(w.size):  # .flat writes through regardless of layout
            keep = w.flat[i]
            w.flat[i] = keep + step
            up = loss_value(model.forward(X), Y, loss)
            w.flat[i] = keep - step
            down = loss_value(model.forward(X), Y, loss)
            w.flat[i] = keep
            g.flat[i] = (up - down) / (2 * step)
        grads.append(g)
    return grads


def gate_preactivations(model, X):
    """All gate (or rectifier) preactivation values the forward pass visits.

    Returns ``[inf]`` for models without any switching layer, so distance
    checks degenerate to always-safe.
    """
    if isinstance(model, ReluNet):
        _, preacts = model.streams(X)
        hidden = preacts[:-1]
        if not hidden:
            return np.array([np.inf])
        return np.concatenate([z.ravel() for z in hidden])
    X2 = np.atleast_2d(np.asarray(X, dtype=np.float64))
    state = augment(X2)
    values = []
    for l in range(model.depth):
        z = state @ model.gates[l]
        values.append(z.ravel())
        state = activation(model.order, z)
    return np.concatenate(values)


def _gate_safe_batch(model, rng, m, margin=GATE_SAFE_MARGIN, tries=200):
    """Random inputs whose gate preactivations all clear the margin."""
    for _ in range(tries):
        X = rng.standard_normal((m, model.in_dim))
        if np.min(np.abs(gate_preactivations(model, X))) >= margin:
            return X
    raise RuntimeError("could not find a gate-safe batch; loosen the margin")


@dataclass
class CheckResult:
    count: int
    worst: float
    failures: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _relative_gradient_error(analytic, numeric):
    worst = 0.0
    for ga, gn in zip(analytic, numeric):
        denom = max(np.linalg.norm(ga), np.linalg.norm(gn), 1e-12)
        worst = max(worst, float(np.linalg.norm(ga - gn) / denom))
    return worst


def gradient_check_sweep(count: int = 100, tol: float = 1e-4, seed: int = 0,
                         include_relu: bool = False) -> CheckResult:
    """Compare analytic and finite-difference gradients on random models.

    Models mix one- and two-hidden-layer gated nets with orders 0 and 1
    (optionally plain rectifier nets), each probed at a gate-safe batch so
    the loss is smooth around the evaluation point.
    """
    rng = seeded_stream(seed, "gradcheck")
    worst = 0.0
    failures = 0
    for trial in range(count):
        d = int(rng.integers(1, 4))
        depth = int(rng.integers(1, 3))
        widths = [int(rng.integers(1, 5)) for _ in range(depth)]
        c = int(rng.integers(1, 3))
        loss = "squared" if rng.random() < 0.7 else "softmax"
        if loss == "softmax" and c == 1:
            c = 2
        if include_relu and trial % 5 == 4:
            model = ReluNet.create(d, widths, c, seed=int(rng.integers(1 << 31)))
        else:
            order = int(rng.integers(0, 2))
            model = SemiRandomNet.create(d, widths, c, order=order,
                                         seed=int(rng.integers(1 << 31)),
                                         radius=2.0)
        m = int(rng.integers(2, 7))
        X = _gate_safe_batch(model, rng, m)
        if loss == "softmax":
            Y = np.zeros((m, c))
            Y[np.arange(m), rng.integers(0, c, size=m)] = 1.0
        else:
            Y = rng.standard_normal((m, c))
        err = _relative_gradient_error(gradients(model, X, Y, loss),
                                       finite_difference_gradients(model, X, Y, loss))
        worst = max(worst, err)
        failures += err > tol
    return CheckResult(count=count, worst=worst, failures=failures, tolerance=tol)


def path_check_sweep(count: int = 100, tol: float = 1e-10, seed: int = 0) -> CheckResult:
    """Compare the path-tensor inner product with the forward pass."""
    rng = seeded_stream(seed, "pathcheck")
    worst = 0.0
    failures = 0
    for _ in range(count):
        d = int(rng.integers(1, 4))
        depth = int(rng.integers(1, 4))
        widths = [int(rng.integers(1, 5)) for _ in range(depth)]
        order = int(rng.integers(0, 3))
        model = SemiRandomNet.create(d, widths, 1, order=order,
                                     seed=int(rng.integers(1 << 31)), radius=2.0)
        x = rng.standard_normal(d)
        expanded = path_tensors(model, x).inner()
        direct = float(model.forward(x)[0])
        rel = abs(expanded - direct) / max(abs(direct), 1e-12)
        worst = max(worst, rel)
        failures += rel > tol
    return CheckResult(count=count, worst=worst, failures=failures, tolerance=tol)


@dataclass
class LandscapeRow:
    instance_id: int
    m: int
    d: int
    n: int
    order: int
    report: LandscapeReport


def landscape_sweep(count: int = 50, seed: int = 0,
                    gd_config: GdConfig | None = None) -> list[LandscapeRow]:
    """Run the descent-vs-optimum check over random instances."""
    rng = seeded_stream(seed, "oracle-check")
    rows = []
    for i in range(count):
        instance = random_instance(rng)
        cfg = gd_config if gd_config is not None else GdConfig(seed=seed + i)
        report = verify_landscape(instance, cfg)
        rows.append(LandscapeRow(instance_id=i, m=instance.m, d=instance.d,
                                 n=instance.n, order=instance.order, report=report))
    return rows


def self_consistency_sweep(count: int = 50, seed: int = 0, tol: float = 1e-8):
    """Closed-form optimum vs the loss its recovered weights actually attain.

    Returns (worst relative mismatch, failure count).  The recovered weights
    are pushed through the real network forward pass, so the check couples
    the linear-algebra route with the model route.
    """
    rng = seeded_stream(seed, "oracle-consistency")
    worst = 0.0
    failures = 0
    for _ in range(count):
        instance = random_instance(rng)
        report = oracle_report(instance)
        net = shallow_net(instance, report.recovered_w1, report.recovered_w2)
        attained = squared_loss(net.forward(instance.X)[:, 0], instance.y)
        scale = max(report.global_min_loss, 1e-12)
        mismatch = abs(attained - report.global_min_loss) / scale
        worst = max(worst, mismatch)
        failures += mismatch > tol
    return worst, failures
