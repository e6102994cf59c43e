"""Gated feedforward networks and baselines.

Three model families share one forward convention:

* ``SemiRandomNet`` — frozen random gate matrices paired with trainable
  linear weights.  The gate stream is a pure random network: it is computed
  from the frozen matrices alone and never sees a trainable weight.
* ``ImplicitEnsembleNet`` — several frozen gate banks sharing one set of
  trainable weights; one bank is active per training step, and evaluation
  averages the raw outputs across banks.
* ``ReluNet`` — a standard fully-connected baseline with max(0, z) units.

Raw inputs are augmented with a leading constant 1, so the first row of
any first-layer matrix carries the bias.  The first column of every gate
matrix is pinned to the first standard basis vector, which gives each
layer one always-open unit (its gate preactivation is identically 1).
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParameterError, ShapeError
from .features import (
    activation,
    sample_first_layer_gates,
    sample_inner_gates,
    seeded_stream,
)
from .linalg import hadamard, matmul

FORMAT_VERSION = 1


def augment(X) -> np.ndarray:
    """Prepend a column of ones: (m, d) -> (m, d+1)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError("augment expects a 2-D array")
    return np.hstack([np.ones((X.shape[0], 1)), X])


def parse_arch(text: str) -> tuple[int, list[int], int]:
    """Parse an architecture string ``d-n1-...-nH-c`` into (d, widths, c)."""
    parts = text.split("-")
    if len(parts) < 3:
        raise ParameterError(f"architecture needs at least d-n-c, got {text!r}")
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise ParameterError(f"bad architecture string {text!r}") from exc
    if any(v < 1 for v in values):
        raise ParameterError("architecture entries must be >= 1")
    return values[0], values[1:-1], values[-1]


def _as_rows(X) -> tuple[np.ndarray, bool]:
    """Promote a single sample to a one-row batch; report if promoted."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        return X[None, :], True
    if X.ndim != 2:
        raise ShapeError("input must be a vector or a matrix of row samples")
    return X, False


def _check_gate_matrix(gates: np.ndarray, rows: int, layer: int) -> np.ndarray:
    gates = np.asarray(gates, dtype=np.float64)
    if gates.ndim != 2 or gates.shape[0] != rows:
        raise ShapeError(f"gate matrix {layer} has shape {gates.shape}, expected {rows} rows")
    e1 = np.zeros(rows)
    e1[0] = 1.0
    if not np.array_equal(gates[:, 0], e1):
        raise ParameterError(f"gate matrix {layer} must have e1 as its first column")
    return gates


def _init_weight(rows: int, cols: int, rng: np.random.Generator, scale: float | None) -> np.ndarray:
    if scale is None:
        scale = 1.0 / np.sqrt(rows)
    return scale * rng.standard_normal((rows, cols))


class SemiRandomNet:
    """Gated network with frozen gate matrices and trainable weights.

    ``gates[l]`` and ``weights[l]`` share shapes layer by layer; an extra
    last weight matrix maps the final hidden layer to the outputs.  Orders
    above 1 are supported but numerically fragile in deep stacks, since the
    gate stream feeds its own powers forward.
    """

    kind = "semi-random"

    def __init__(self, order, gates, weights, train_last_only=False, meta=None):
        if order < 0:
            raise ParameterError("order must be >= 0")
        if len(gates) < 1:
            raise ShapeError("need at least one gate matrix")
        if len(weights) != len(gates) + 1:
            raise ShapeError("need exactly one more weight matrix than gate matrices")
        self.order = int(order)
        self.gates = []
        rows = gates[0].shape[0]
        for l, g in enumerate(gates):
            g = _check_gate_matrix(g, rows, l + 1)
            self.gates.append(g)
            rows = g.shape[1]
        # asarray keeps array identity, so ensemble banks can share weights.
        self.weights = []
        for l, w in enumerate(weights):
            w = np.asarray(w, dtype=np.float64)
            expected_rows = self.gates[l].shape[0] if l < len(gates) else self.gates[-1].shape[1]
            expected_cols = self.gates[l].shape[1] if l < len(gates) else w.shape[1]
            if w.shape[0] != expected_rows or (l < len(gates) and w.shape[1] != expected_cols):
                raise ShapeError(f"weight matrix {l + 1} has shape {w.shape}")
            if not np.all(np.isfinite(w)):
                raise ValueError(f"weight matrix {l + 1} contains non-finite entries")
            self.weights.append(w)
        self.train_last_only = bool(train_last_only)
        self.meta = meta

    @classmethod
    def create(cls, d, widths, c=1, order=0, seed=0, radius=1.0,
               init_scale=None, train_last_only=False, bank=0):
        """Build a freshly sampled network.

        Gate matrices come from per-layer streams keyed by ``(seed, layer,
        bank)``; trainable weights from streams keyed by ``(seed, layer)``
        only, so every ensemble bank shares one weight initialisation.
        Default weight scale is ``1/sqrt(fan_in)`` unless overridden.
        """
        if not widths:
            raise ParameterError("need at least one hidden layer")
        gates = [sample_first_layer_gates(d, widths[0], radius,
                                          seeded_stream(seed, f"gates.1.{bank}"))]
        for l in range(1, len(widths)):
            gates.append(sample_inner_gates(widths[l - 1], widths[l],
                                            seeded_stream(seed, f"gates.{l + 1}.{bank}")))
        dims = [d + 1] + list(widths) + [c]
        weights = [_init_weight(dims[l], dims[l + 1],
                                seeded_stream(seed, f"weights.{l + 1}"), init_scale)
                   for l in range(len(dims) - 1)]
        meta = {"kind": "rf" if train_last_only else "semi-random",
                "order": order, "d": d, "widths": list(widths), "c": c,
                "seed": seed, "radius": radius, "init_scale": init_scale,
                "bank": bank}
        return cls(order, gates, weights, train_last_only=train_last_only, meta=meta)

    @property
    def depth(self) -> int:
        return len(self.gates)

    @property
    def in_dim(self) -> int:
        return self.gates[0].shape[0] - 1

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def widths(self) -> list[int]:
        return [g.shape[1] for g in self.gates]

    def param_count(self) -> int:
        """Total number of weight scalars (frozen gate entries excluded)."""
        return int(sum(w.size for w in self.weights))

    def trainable_indices(self) -> list[int]:
        if self.train_last_only:
            return [len(self.weights) - 1]
        return list(range(len(self.weights)))

    def streams(self, X):
        """Run both streams; returns (augmented X, gate values, hidden values).

        The gate values depend only on the frozen matrices and the input;
        perturbing any weight leaves them bit-identical.
        """
        X, _ = _as_rows(X)
        if X.shape[1] != self.in_dim:
            raise ShapeError(f"input dim {X.shape[1]}, model expects {self.in_dim}")
        A = augment(X)
        gate_vals = []
        hidden_vals = []
        gate_state = A
        hidden_state = A
        for l in range(self.depth):
            gate_state = activation(self.order, matmul(gate_state, self.gates[l]))
            hidden_state = hadamard(gate_state, matmul(hidden_state, self.weights[l]))
            gate_vals.append(gate_state)
            hidden_vals.append(hidden_state)
        return A, gate_vals, hidden_vals

    def forward(self, X) -> np.ndarray:
        X2, single = _as_rows(X)
        _, _, hidden = self.streams(X2)
        out = matmul(hidden[-1], self.weights[-1])
        return out[0] if single else out


class ImplicitEnsembleNet:
    """Several frozen gate banks sharing one set of trainable weights.

    During training a single bank is active per step; at evaluation time the
    raw outputs (before any loss nonlinearity) are averaged over the banks.
    """

    kind = "lsr-ie"

    def __init__(self, order, gate_banks, weights, meta=None):
        if len(gate_banks) < 1:
            raise ParameterError("need at least one gate bank")
        shapes = [tuple(g.shape for g in bank) for bank in gate_banks]
        if any(s != shapes[0] for s in shapes):
            raise ShapeError("all gate banks must share shapes")
        # Bank nets share the weight list, so an update through any bank is
        # an update to the ensemble.
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self._banks = [SemiRandomNet(order, bank, self.weights) for bank in gate_banks]
        self.order = int(order)
        self.meta = meta

    @classmethod
    def create(cls, d, widths, c=1, order=0, num_banks=2, seed=0, radius=1.0,
               init_scale=None):
        if num_banks < 1:
            raise ParameterError("num_banks must be >= 1")
        first = SemiRandomNet.create(d, widths, c, order=order, seed=seed,
                                     radius=radius, init_scale=init_scale, bank=0)
        gate_banks = [first.gates]
        for k in range(1, num_banks):
            other = SemiRandomNet.create(d, widths, c, order=order, seed=seed,
                                         radius=radius, init_scale=init_scale, bank=k)
            gate_banks.append(other.gates)
        meta = {"kind": "lsr-ie", "order": order, "d": d, "widths": list(widths),
                "c": c, "seed": seed, "radius": radius, "init_scale": init_scale,
                "num_banks": num_banks}
        return cls(order, gate_banks, first.weights, meta=meta)

    @property
    def num_banks(self) -> int:
        return len(self._banks)

    @property
    def in_dim(self) -> int:
        return self._banks[0].in_dim

    @property
    def out_dim(self) -> int:
        return self._banks[0].out_dim

    @property
    def widths(self) -> list[int]:
        return self._banks[0].widths

    def param_count(self) -> int:
        return self._banks[0].param_count()

    def trainable_indices(self) -> list[int]:
        return list(range(len(self.weights)))

    def bank_net(self, k: int) -> SemiRandomNet:
        """The k-th bank as a plain net sharing this ensemble's weights."""
        if not 0 <= k < self.num_banks:
            raise ParameterError(f"bank index {k} out of range [0, {self.num_banks})")
        return self._banks[k]

    def forward_train(self, X, k: int) -> np.ndarray:
        return self.bank_net(k).forward(X)

    def forward_test(self, X) -> np.ndarray:
        out = self._banks[0].forward(X)
        for bank in self._banks[1:]:
            out = out + bank.forward(X)
        return out / self.num_banks

    def forward(self, X) -> np.ndarray:
        return self.forward_test(X)


class ReluNet:
    """Fully-connected max(0, z) baseline; bias via augmented input everywhere."""

    kind = "relu"

    def __init__(self, weights, meta=None):
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        for l in range(len(self.weights) - 1):
            if self.weights[l].shape[1] + 1 != self.weights[l + 1].shape[0]:
                raise ShapeError(f"weight matrices {l + 1} and {l + 2} do not chain")
        self.meta = meta

    @classmethod
    def create(cls, d, widths, c=1, seed=0, init_scale=None):
        dims = [d] + list(widths) + [c]
        weights = [_init_weight(dims[l] + 1, dims[l + 1],
                                seeded_stream(seed, f"weights.{l + 1}"), init_scale)
                   for l in range(len(dims) - 1)]
        meta = {"kind": "relu", "d": d, "widths": list(widths), "c": c,
                "seed": seed, "init_scale": init_scale}
        return cls(weights, meta=meta)

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0] - 1

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def param_count(self) -> int:
        return int(sum(w.size for w in self.weights))

    def trainable_indices(self) -> list[int]:
        return list(range(len(self.weights)))

    def streams(self, X):
        """Returns (augmented layer inputs, preactivations) for backprop."""
        X, _ = _as_rows(X)
        if X.shape[1] != self.in_dim:
            raise ShapeError(f"input dim {X.shape[1]}, model expects {self.in_dim}")
        inputs = []
        preacts = []
        state = X
        for l, w in enumerate(self.weights):
            a = augment(state)
            z = matmul(a, w)
            inputs.append(a)
            preacts.append(z)
            state = np.maximum(z, 0.0) if l < len(self.weights) - 1 else z
        return inputs, preacts

    def forward(self, X) -> np.ndarray:
        X2, single = _as_rows(X)
        _, preacts = self.streams(X2)
        out = preacts[-1]
        return out[0] if single else out


def save_model(path, model) -> None:
    """Serialize a seed-created model to an ``.npz`` container.

    The file stores a JSON header (kind, order, architecture, seed, radius,
    number of banks) plus the trainable weight matrices.  Gate matrices are
    not stored: they are resampled from the recorded seed on load, which
    reproduces them exactly.
    """
    if model.meta is None:
        raise ParameterError("only models built via create() can be serialized")
    header = dict(model.meta)
    header["format_version"] = FORMAT_VERSION
    arrays = {f"weight_{l + 1}": w for l, w in enumerate(model.weights)}
    if getattr(model, "train_last_only", False):
        header["kind"] = "rf"
    np.savez(path, header=np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8),
             **arrays)


def load_model(path):
    """Rebuild a model saved by :func:`save_model`."""
    with np.load(path) as blob:
        header = json.loads(bytes(blob["header"]).decode("utf-8"))
        n_weights = sum(1 for k in blob.files if k.startswith("weight_"))
        weights = [blob[f"weight_{l + 1}"] for l in range(n_weights)]
    kind = header["kind"]
    d, widths, c = header["d"], header["widths"], header["c"]
    if kind == "relu":
        model = ReluNet.create(d, widths, c, seed=header["seed"],
                               init_scale=header["init_scale"])
    elif kind == "lsr-ie":
        model = ImplicitEnsembleNet.create(d, widths, c, order=header["order"],
                                           num_banks=header["num_banks"],
                                           seed=header["seed"], radius=header["radius"],
                                           init_scale=header["init_scale"])
    else:
        model = SemiRandomNet.create(d, widths, c, order=header["order"],
                                     seed=header["seed"], radius=header["radius"],
                                     init_scale=header["init_scale"],
                                     train_last_only=(kind == "rf"),
                                     bank=header.get("bank", 0))
    if len(weights) != len(model.weights):
        raise ParameterError(f"container holds {len(weights)} weight matrices, "
                             f"model expects {len(model.weights)}")
    for slot, w in zip(model.weights, weights):
        if slot.shape != w.shape:
            raise ShapeError(f"stored weight shape {w.shape} vs expected {slot.shape}")
        slot[...] = w
    return model
