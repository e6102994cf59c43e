"""Capacity bound calculators.

Two families of closed-form quantities:

* a high-probability generalization gap for models whose composite weight
  tensor and gated feature tensor have bounded Euclidean norms (the same
  expression covers one-hidden-layer and deep gated models, because a deep
  model is linear in its flattened path-weight tensor);
* lower bounds on the best achievable approximation error over the class
  of targets with bounded first-moment Fourier spectrum, for adaptive
  gated models and for frozen-feature models.

Also included: the empirical norm measurements that feed the first family,
and the inverse sphere-area / ball-volume densities used when comparing
importance-weighted feature sampling schemes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .linalg import least_squares
from .network import ImplicitEnsembleNet, SemiRandomNet
from .oracle import build_design, path_tensors

# Universal constant of the approximation lower bounds: 1 / (8 pi e^(pi-1)).
KAPPA = 1.0 / (8.0 * math.pi * math.exp(math.pi - 1.0))


@dataclass
class BoundInputs:
    """Constants feeding the generalization-gap formula.

    ``target_bound`` caps |y|, ``weight_norm`` the flattened composite
    weight tensor, ``feature_norm`` the flattened gated feature tensor.
    ``smoothness`` (optional) is the Fourier first-moment budget used only
    by the approximation bounds.
    """

    target_bound: float        # C_Y
    weight_norm: float         # C_W
    feature_norm: float        # C_sigma_x
    samples: int               # m
    delta: float = 0.05
    smoothness: float | None = None
    dim: int | None = None
    widths: tuple[int, ...] | None = None

    def __post_init__(self):
        for name in ("target_bound", "weight_norm", "feature_norm"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")
        if self.samples < 1:
            raise ParameterError("samples must be >= 1")
        if not 0 < self.delta <= 1:
            raise ParameterError("delta must be in (0, 1]")

    @property
    def prediction_bound(self) -> float:
        """Cauchy-Schwarz cap on |model output|: weight_norm * feature_norm."""
        return self.weight_norm * self.feature_norm


def generalization_bound(inputs: BoundInputs) -> float:
    """High-probability bound on expected-minus-empirical squared risk.

    With ``B = target_bound`` and ``P = weight_norm * feature_norm``::

        (B^2 + P^2) * sqrt(log(1/delta) / (2m)) + 2 (B + P) P / sqrt(m)

    Monotone decreasing in m and in delta, increasing in each norm.
    """
    b = inputs.target_bound
    p = inputs.prediction_bound
    m = inputs.samples
    first = (b * b + p * p) * math.sqrt(math.log(1.0 / inputs.delta) / (2.0 * m))
    second = 2.0 * (b + p) * p / math.sqrt(m)
    return first + second


def approx_lower_bound(smoothness: float, dim: int, widths) -> float:
    """Worst-case approximation floor for an adaptive gated model.

    ``KAPPA * smoothness / dim^2 * (prod(widths)) ** (-1/dim)``: the floor
    shrinks with the product of the layer widths, so depth helps
    exponentially at fixed width.
    """
    widths = tuple(int(n) for n in widths)
    if dim < 1:
        raise ParameterError("dim must be >= 1")
    if not widths or any(n < 1 for n in widths):
        raise ParameterError("widths must be a nonempty sequence of positive ints")
    product = 1.0
    for n in widths:
        product *= n
    return KAPPA * smoothness / dim ** 2 * product ** (-1.0 / dim)


def random_feature_lower_bound(smoothness: float, dim: int, last_width: int) -> float:
    """Worst-case approximation floor when only the readout layer adapts.

    Identical to :func:`approx_lower_bound` with a single width: frozen
    features only ever span what the last layer exposes, so depth buys
    nothing here.
    """
    return approx_lower_bound(smoothness, dim, (last_width,))


def importance_constants(dim: int, weight_radius: float) -> tuple[float, float]:
    """Densities of the uniform gate and weight sampling distributions.

    Returns ``(q0, q1)``: the inverse hyper-surface area of the unit sphere
    in ``dim`` dimensions, ``Gamma(dim/2) / (2 pi^(dim/2))``, and the
    inverse volume of the ball of radius ``weight_radius``,
    ``Gamma(dim/2 + 1) / (pi^(dim/2) * weight_radius^dim)``.
    """
    if dim < 1:
        raise ParameterError("dim must be >= 1")
    if weight_radius <= 0:
        raise ParameterError("weight_radius must be positive")
    half = dim / 2.0
    q0 = math.gamma(half) / (2.0 * math.pi ** half)
    q1 = math.gamma(half + 1.0) / (math.pi ** half * weight_radius ** dim)
    return q0, q1


def empirical_bound_inputs(dataset, model_or_design, delta: float = 0.05) -> BoundInputs:
    """Measure the norm constants of a model (or design matrix) on a dataset.

    For a one-hidden-layer model, or a precomputed design matrix, the
    feature norm is the largest design row norm and the weight norm is that
    of the minimum-norm solution attaining the closed-form optimum (so the
    bound covers the best model reachable on this data).  Deeper models use
    their current flattened path tensors per sample, which keeps the
    measurement under the path-expansion size guard.
    """
    if isinstance(model_or_design, ImplicitEnsembleNet):
        raise ParameterError("measure one bank at a time for ensembles")
    if dataset.Y.shape[1] != 1:
        raise ParameterError("empirical constants need a single-output dataset")
    y = dataset.Y[:, 0]
    target_bound = float(np.max(np.abs(y))) if y.size else 0.0
    dim = None
    widths = None
    if isinstance(model_or_design, np.ndarray):
        design = model_or_design
        if design.shape[0] != dataset.X.shape[0]:
            raise ParameterError("design matrix rows must match the dataset")
        feature_norm = float(np.max(np.linalg.norm(design, axis=1)))
        solution, _ = least_squares(design, y)
        weight_norm = float(np.linalg.norm(solution))
    elif isinstance(model_or_design, SemiRandomNet):
        dim = model_or_design.in_dim
        widths = tuple(model_or_design.widths)
        if model_or_design.depth == 1:
            design = build_design(dataset.X, model_or_design.gates[0],
                                  model_or_design.order)
            feature_norm = float(np.max(np.linalg.norm(design, axis=1)))
            solution, _ = least_squares(design, y)
            weight_norm = float(np.linalg.norm(solution))
        else:
            norms = [np.linalg.norm(path_tensors(model_or_design, x).feature_vec)
                     for x in dataset.X]
            feature_norm = float(max(norms))
            weight_norm = float(np.linalg.norm(
                path_tensors(model_or_design, dataset.X[0]).weight_vec))
    else:
        raise ParameterError("empirical constants are defined for gated models "
                             "or design matrices")
    return BoundInputs(
        target_bound=target_bound, weight_norm=weight_norm,
        feature_norm=feature_norm, samples=dataset.X.shape[0], delta=delta,
        dim=dim, widths=widths)


def expected_risk_bound(design, y, inputs: BoundInputs) -> float:
    """High-probability cap on the expected squared risk at a good optimum.

    Sum of the best attainable empirical residual term, ``||y - proj||^2 /
    m`` (no extra 1/2, matching the printed combination), and the
    generalization gap of :func:`generalization_bound`.
    """
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _, residual_sq = least_squares(design, y)
    return residual_sq / design.shape[0] + generalization_bound(inputs)
