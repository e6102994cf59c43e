"""Gated feature primitives.

A single feature multiplies a trainable affine response by a frozen gate:
the gate applies ``z**s`` on the strictly positive half-line and zero
elsewhere, with ``z`` the inner product of the input against a randomly
sampled direction plus a random offset.  Order ``s=0`` gives a hard 0/1
switch, ``s=1`` a ramp, and higher orders polynomial ramps.  Only the
affine response is ever trained; the gate parameters stay fixed after
sampling.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError


def seeded_stream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for one sampling purpose.

    Streams are keyed by ``(seed, crc32(label))`` so that, for example,
    weight initialisation and epoch shuffling never share state and each is
    reproducible on its own.
    """
    if seed < 0:
        raise ParameterError("seed must be non-negative")
    return np.random.default_rng([seed, zlib.crc32(label.encode("ascii"))])


def activation(order: int, z):
    """Evaluate ``z**order`` gated to the strictly positive half-line.

    The gate is closed at exactly zero for every order (``activation(0, 0)``
    is 0, not 1), which sidesteps the ``0**0`` ambiguity.  Accepts scalars
    or arrays; arrays are processed elementwise.
    """
    if order < 0:
        raise ParameterError("activation order must be >= 0")
    arr = np.asarray(z, dtype=np.float64)
    positive = arr > 0
    if order == 0:
        out = positive.astype(np.float64)
    else:
        out = np.where(positive, arr, 0.0) ** order
    if arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RandomDirection:
    """Frozen gate parameter: scalar offset plus a unit direction."""

    offset: float
    direction: np.ndarray

    def preactivation(self, x_raw) -> float:
        x_raw = np.asarray(x_raw, dtype=np.float64)
        if x_raw.shape != self.direction.shape:
            raise ShapeError(
                f"input dim {x_raw.shape} vs direction {self.direction.shape}"
            )
        return float(self.offset + self.direction @ x_raw)


def sample_direction(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a vector uniformly from the unit sphere in ``dim`` dimensions."""
    if dim < 1:
        raise ParameterError("dim must be >= 1")
    while True:
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
        if norm > 0:
            return v / norm


def sample_first_layer_gates(
    d: int, n: int, radius: float, rng: np.random.Generator
) -> np.ndarray:
    """Sample the frozen first-layer gate matrix, shape ``(d+1, n)``.

    Column 0 is pinned to the first standard basis vector so the unit it
    drives is always open (its preactivation is the constant 1 carried by
    the augmented input).  Every other column stacks an offset drawn
    uniformly from ``[-radius, radius]`` on top of a uniform unit direction.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if radius <= 0:
        raise ParameterError("radius must be positive")
    gates = np.zeros((d + 1, n))
    gates[0, 0] = 1.0
    for k in range(1, n):
        gates[0, k] = rng.uniform(-radius, radius)
        gates[1:, k] = sample_direction(d, rng)
    return gates


def sample_inner_gates(n_prev: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a deeper-layer gate matrix, shape ``(n_prev, n)``.

    Column 0 is again the first standard basis vector; the remaining
    columns are uniform unit directions with no extra offset coordinate
    (the always-open unit of the previous layer already carries the
    constant path).
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    gates = np.zeros((n_prev, n))
    gates[0, 0] = 1.0
    for k in range(1, n):
        gates[:, k] = sample_direction(n_prev, rng)
    return gates


def semi_random_feature(x_raw, direction: RandomDirection, w, order: int) -> float:
    """One gated feature: ``activation(order, gate preact) * (w0 + w.x)``.

    ``w`` has length ``d+1``; its leading entry is the bias of the affine
    response.  Linear in ``w`` for fixed input and gate.
    """
    x_raw = np.asarray(x_raw, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (x_raw.shape[0] + 1,):
        raise ShapeError(f"weights shape {w.shape} vs input dim {x_raw.shape[0]}")
    gate = activation(order, direction.preactivation(x_raw))
    return float(gate * (w[0] + w[1:] @ x_raw))
