"""Closed-form optima and landscape checks for one-hidden-layer models.

A one-hidden-layer gated model is linear in the per-unit composite weights,
so its squared loss has a closed-form minimum: stack the gated augmented
inputs into a design matrix, project the targets onto its column space, and
read the minimal loss off the residual.  This module builds that design
matrix, recovers a weight setting that attains the optimum, and checks
empirically that plain gradient descent reaches the same value.  It also
expands a deep model into its path tensors, whose inner product reproduces
the forward pass, and counts trainable parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError
from .features import activation, sample_first_layer_gates, seeded_stream
from .linalg import least_squares, matrix_rank
from .network import SemiRandomNet, augment

PATH_TENSOR_GUARD = 1_000_000


@dataclass
class ShallowInstance:
    """A least-squares problem for a one-hidden-layer gated model."""

    X: np.ndarray          # (m, d) raw inputs
    y: np.ndarray          # (m,) targets
    gates: np.ndarray      # (d+1, n) frozen gate matrix, first column e1
    order: int

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.gates.shape[1]


@dataclass
class OracleReport:
    design_shape: tuple[int, int]
    global_min_loss: float
    projected_predictions: np.ndarray
    recovered_w1: np.ndarray
    recovered_w2: np.ndarray
    rank: int


@dataclass
class GdConfig:
    learning_rates: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    max_iterations: int = 100_000  # total budget across step-size trials
    rel_tol: float = 1e-3
    abs_tol: float = 1e-6
    init_scale: float = 0.1
    seed: int = 0
    momentum: float = 0.99


@dataclass
class LandscapeReport:
    final_loss: float
    global_min_loss: float
    gap: float
    rel_gap: float
    converged: bool
    diverged: bool
    iterations: int
    learning_rate: float


def design_from_gates(features: np.ndarray, gate_values: np.ndarray) -> np.ndarray:
    """Stack gated copies of the feature rows: block (i, j) = gate[i,j] * features[i].

    Result has shape (m, n*p) for features (m, p) and gates (m, n); block j
    occupies columns [j*p, (j+1)*p).
    """
    if features.shape[0] != gate_values.shape[0]:
        raise ShapeError("features and gate values need the same number of rows")
    m, p = features.shape
    n = gate_values.shape[1]
    return (gate_values[:, :, None] * features[:, None, :]).reshape(m, n * p)


def build_design(X, gates, order: int) -> np.ndarray:
    """Design matrix of gated augmented inputs, shape (m, n*(d+1)).

    Row i holds, for each unit j, the augmented input of sample i scaled by
    that unit's gate value.  The augmented copy (leading 1) is used because
    the per-unit weights include a bias entry the design must expose.
    """
    X = np.asarray(X, dtype=np.float64)
    gates = np.asarray(gates, dtype=np.float64)
    A = augment(X)
    if gates.shape[0] != A.shape[1]:
        raise ShapeError(f"gate matrix rows {gates.shape[0]} vs augmented dim {A.shape[1]}")
    G = activation(order, A @ gates)
    return design_from_gates(A, G)


def global_min_loss(design, y) -> float:
    """Minimal attainable squared loss: least-squares residual over 2m."""
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _, residual_sq = least_squares(design, y)
    return residual_sq / (2 * design.shape[0])


def recover_optimal_weights(design, y, input_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Factor the minimum-norm composite solution into per-layer weights.

    The design's columns group into blocks of size ``input_dim + 1``; the
    minimum-norm solution restricted to block k becomes the k-th first-layer
    column, and every output weight is set to 1 (any nonzero choice works,
    and ones keep the output layer nondegenerate).
    """
    design = np.asarray(design, dtype=np.float64)
    block = input_dim + 1
    if design.shape[1] % block != 0:
        raise ShapeError(f"{design.shape[1]} columns do not split into blocks of {block}")
    n = design.shape[1] // block
    solution, _ = least_squares(design, y)
    w1 = solution.reshape(n, block).T.copy()
    w2 = np.ones(n)
    return w1, w2


def shallow_net(instance: ShallowInstance, w1, w2) -> SemiRandomNet:
    """Wrap explicit weights into a one-hidden-layer net for this instance."""
    w2 = np.asarray(w2, dtype=np.float64).reshape(-1, 1)
    return SemiRandomNet(instance.order, [instance.gates], [np.asarray(w1, dtype=np.float64), w2])


def oracle_report(instance: ShallowInstance) -> OracleReport:
    """Closed-form optimum of an instance: loss, projections, and weights."""
    design = build_design(instance.X, instance.gates, instance.order)
    solution, residual_sq = least_squares(design, instance.y)
    w1, w2 = recover_optimal_weights(design, instance.y, instance.d)
    return OracleReport(
        design_shape=design.shape,
        global_min_loss=residual_sq / (2 * instance.m),
        projected_predictions=design @ solution,
        recovered_w1=w1,
        recovered_w2=w2,
        rank=matrix_rank(design),
    )


def random_instance(rng: np.random.Generator, m_range=(5, 40), d_range=(1, 4),
                    n_range=(1, 6), orders=(0, 1)) -> ShallowInstance:
    """Sample a generic instance: standard-normal inputs and targets."""
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    order = int(rng.choice(orders))
    X = rng.standard_normal((m, d))
    y = rng.standard_normal(m)
    radius = float(np.max(np.linalg.norm(X, axis=1)))
    gates = sample_first_layer_gates(d, n, max(radius, 1e-6), rng)
    return ShallowInstance(X=X, y=y, gates=gates, order=order)


def _gap_converged(loss, opt, rel_tol, abs_tol):
    gap = loss - opt
    if opt < 1e-12:
        return gap, gap / max(opt, 1e-300), gap <= abs_tol
    rel = gap / opt
    return gap, rel, rel <= rel_tol


def _run_gd(A, G, y, state, lr, momentum, max_iters, opt, rel_tol, abs_tol):
    """Full-batch heavy-ball descent on (first-layer, readout) weights.

    The gate values G are constants of the optimization, so each step is a
    handful of small matrix products.  Stops early on convergence to the
    known optimum, on divergence, or when the loss has stopped moving.
    Returns the updated state so a later phase can resume the descent.
    """
    m = A.shape[0]
    w1, w2, v1, v2 = (arr.copy() for arr in state)
    prev_check = np.inf
    loss = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        masked = G * (A @ w1)
        resid = masked @ w2 - y
        loss = (resid @ resid) / (2 * m)
        if not np.isfinite(loss) or loss > 1e12:
            return loss, it, (w1, w2, v1, v2), True
        _, _, ok = _gap_converged(loss, opt, rel_tol, abs_tol)
        if ok:
            return loss, it, (w1, w2, v1, v2), False
        if it % 500 == 0:
            # Plateau: relative progress below float resolution.
            if abs(prev_check - loss) <= 1e-15 * max(1.0, loss):
                return loss, it, (w1, w2, v1, v2), False
            prev_check = loss
        grad_w2 = masked.T @ resid / m
        grad_masked = np.outer(resid, w2) / m
        grad_w1 = A.T @ (G * grad_masked)
        v1 = momentum * v1 - lr * grad_w1
        v2 = momentum * v2 - lr * grad_w2
        w1 += v1
        w2 += v2
    return loss, it, (w1, w2, v1, v2), False


def verify_landscape(instance: ShallowInstance, config: GdConfig = GdConfig(),
                     w1_init=None, w2_init=None) -> LandscapeReport:
    """Check that first-order descent reaches the closed-form optimum.

    Screens the candidate step sizes with short heavy-ball descents from
    one shared initialisation (half the iteration budget, split evenly),
    then spends the rest of the budget continuing the most promising run.
    The total number of descent iterations never exceeds the configured
    budget.  The default initialisation keeps every readout weight at 1;
    callers may pass explicit starts, including degenerate ones with zero
    readout weights, whose stalls are reported rather than raised.
    """
    A = augment(instance.X)
    G = activation(instance.order, A @ instance.gates)
    design = design_from_gates(A, G)
    opt = global_min_loss(design, instance.y)

    rng = seeded_stream(config.seed, "landscape-init")
    if w1_init is None:
        w1_init = config.init_scale * rng.standard_normal((instance.d + 1, instance.n))
    else:
        w1_init = np.asarray(w1_init, dtype=np.float64)
    if w2_init is None:
        w2_init = np.ones(instance.n)
    else:
        w2_init = np.asarray(w2_init, dtype=np.float64)
    start = (w1_init, w2_init, np.zeros_like(w1_init), np.zeros_like(w2_init))

    screen_iters = max(config.max_iterations // (2 * len(config.learning_rates)), 1)
    best = None
    total_iters = 0
    converged_early = False
    for lr in config.learning_rates:
        loss, used, state, diverged = _run_gd(
            A, G, instance.y, start, lr, config.momentum, screen_iters,
            opt, config.rel_tol, config.abs_tol)
        total_iters += used
        if not diverged and (best is None or loss < best[0]):
            best = (loss, lr, state)
        _, _, ok = _gap_converged(loss, opt, config.rel_tol, config.abs_tol)
        if not diverged and ok:
            converged_early = True
            break
    if best is None:  # every step size diverged
        gap, rel_gap, _ = _gap_converged(float("inf"), opt, config.rel_tol, config.abs_tol)
        return LandscapeReport(
            final_loss=float("inf"), global_min_loss=float(opt), gap=float(gap),
            rel_gap=float(rel_gap), converged=False, diverged=True,
            iterations=total_iters, learning_rate=config.learning_rates[-1])
    final_loss, lr_used, state = best
    remaining = config.max_iterations - total_iters
    if not converged_early and remaining > 0:
        loss, used, state, diverged = _run_gd(
            A, G, instance.y, state, lr_used, config.momentum, remaining,
            opt, config.rel_tol, config.abs_tol)
        total_iters += used
        if not diverged and loss < final_loss:
            final_loss = loss
    gap, rel_gap, converged = _gap_converged(final_loss, opt, config.rel_tol, config.abs_tol)
    return LandscapeReport(
        final_loss=float(final_loss), global_min_loss=float(opt), gap=float(gap),
        rel_gap=float(rel_gap), converged=bool(converged), diverged=False,
        iterations=total_iters, learning_rate=lr_used)


@dataclass
class PathTensors:
    """Flattened path expansion of a single-output deep model.

    ``feature_vec`` holds, per path, the product of every gate value along
    the path times the input coordinate that starts it; ``weight_vec`` holds
    the product of the traversed weight entries.  Their inner product equals
    the model output at the expanded input.
    """

    feature_vec: np.ndarray = field(repr=False)
    weight_vec: np.ndarray = field(repr=False)

    def inner(self) -> float:
        return float(self.feature_vec @ self.weight_vec)


def path_tensors(model: SemiRandomNet, x_raw) -> PathTensors:
    """Expand a single-output model into its full set of paths.

    Gate values factor across layers (the gate stream never mixes with the
    trainable stream), so the feature tensor is an outer product of the
    augmented input with each layer's gate vector.  The weight tensor chains
    the weight matrices entry-wise along every index path.  Size is capped
    at ``PATH_TENSOR_GUARD`` entries.
    """
    if model.out_dim != 1:
        raise ParameterError("path expansion is defined for single-output models")
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim != 1:
        raise ShapeError("expected a single raw input vector")
    size = (model.in_dim + 1) * int(np.prod(model.widths))
    if size > PATH_TENSOR_GUARD:
        raise ParameterError(f"path expansion would hold {size} entries "
                             f"(guard is {PATH_TENSOR_GUARD})")
    A, gate_vals, _ = model.streams(x_raw)
    feature = A[0]
    for g in gate_vals:
        feature = np.multiply.outer(feature, g[0])
    weight = model.weights[0]
    for l in range(1, model.depth):
        weight = weight[..., None] * model.weights[l]
    weight = weight * model.weights[model.depth][:, 0]
    return PathTensors(feature_vec=feature.ravel(), weight_vec=weight.ravel())


def param_count(d: int, widths, c: int = 1) -> int:
    """Trainable scalars of a gated net: first layer, inner chain, readout."""
    widths = list(widths)
    if not widths:
        raise ParameterError("need at least one hidden layer")
    total = (d + 1) * widths[0] + c * widths[-1]
    total += sum(widths[l - 1] * widths[l] for l in range(1, len(widths)))
    return int(total)
