"""Dense feedforward networks with flat parameter storage and named views.

A network is ``score(x) = w_out . act(... act(x @ W_1 + b_1) ...) + b_out``.
All weight matrices are stored as (in_dim, out_dim) and applied on the right
of the activations, one bias per layer. Parameters live in a single flat
float64 vector; a Layout maps names like "W1" or "bout" to views into it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ACTIVATIONS",
    "NetworkSpec",
    "Layout",
    "base_layout",
    "param_count",
    "forward",
    "forward_batch",
    "forward_batch_cached",
    "backprop_scores",
]

ACTIVATIONS = ("relu", "leaky_relu", "tanh", "sigmoid")
SMOOTH_ACTIVATIONS = ("tanh", "sigmoid")

# Desk-scale guards: dense Hessians downstream need small parameter vectors.
MAX_INPUT_DIM = 32
MAX_PARAM_COUNT = 5000


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture of a base network: input dim, hidden widths, activation."""

    input_dim: int
    layer_widths: tuple[int, ...] = ()
    activation: str = "tanh"
    leaky_slope: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.input_dim > MAX_INPUT_DIM:
            raise ValueError(f"input_dim {self.input_dim} exceeds desk-scale limit {MAX_INPUT_DIM}")
        if any(w < 1 for w in self.layer_widths):
            raise ValueError(f"layer widths must be positive, got {self.layer_widths}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        if param_count(self) > MAX_PARAM_COUNT:
            raise ValueError(f"parameter count {param_count(self)} exceeds limit {MAX_PARAM_COUNT}")

    @property
    def depth(self) -> int:
        return len(self.layer_widths)

    @property
    def smooth(self) -> bool:
        return self.activation in SMOOTH_ACTIVATIONS

    def dims(self) -> tuple[int, ...]:
        """(d, M_1, ..., M_L)."""
        return (self.input_dim, *self.layer_widths)


def activate(spec: NetworkSpec, z: np.ndarray) -> np.ndarray:
    if spec.activation == "relu":
        return np.maximum(z, 0.0)
    if spec.activation == "leaky_relu":
        return np.where(z > 0.0, z, spec.leaky_slope * z)
    if spec.activation == "tanh":
        return np.tanh(z)
    return 1.0 / (1.0 + np.exp(-z))  # sigmoid


def activate_deriv(spec: NetworkSpec, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Derivative of the activation; `a` is the already-computed activation.

    The kink of relu/leaky_relu at exactly 0 takes the left branch
    (derivative 0 resp. slope), the standard subgradient convention.
    """
    if spec.activation == "relu":
        return (z > 0.0).astype(float)
    if spec.activation == "leaky_relu":
        return np.where(z > 0.0, 1.0, spec.leaky_slope)
    if spec.activation == "tanh":
        return 1.0 - a * a
    return a * (1.0 - a)  # sigmoid


def activate_second_deriv(spec: NetworkSpec, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Second derivative of the activation (zero for the piecewise-linear ones)."""
    if spec.activation in ("relu", "leaky_relu"):
        return np.zeros_like(z)
    if spec.activation == "tanh":
        return -2.0 * a * (1.0 - a * a)
    return a * (1.0 - a) * (1.0 - 2.0 * a)  # sigmoid


class Layout:
    """Named, non-overlapping views into a flat parameter vector.

    The entry shapes partition the vector exactly, so view <-> flat
    round-trips are lossless.
    """

    def __init__(self, entries: list[tuple[str, tuple[int, ...]]]):
        self._shapes: dict[str, tuple[int, ...]] = {}
        self._slices: dict[str, slice] = {}
        offset = 0
        for name, shape in entries:
            if name in self._shapes:
                raise ValueError(f"duplicate layout entry {name!r}")
            size = int(np.prod(shape, dtype=int)) if shape else 1
            self._shapes[name] = tuple(shape)
            self._slices[name] = slice(offset, offset + size)
            offset += size
        self._size = offset

    @property
    def size(self) -> int:
        return self._size

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._shapes)

    def shape(self, name: str) -> tuple[int, ...]:
        return self._shapes[name]

    def slice(self, name: str) -> slice:
        return self._slices[name]

    def view(self, flat: np.ndarray, name: str) -> np.ndarray:
        """A reshaped view (no copy) of one named block."""
        self._check(flat)
        return flat[self._slices[name]].reshape(self._shapes[name])

    def unpack(self, flat: np.ndarray) -> dict[str, np.ndarray]:
        return {name: self.view(flat, name) for name in self._shapes}

    def pack(self, blocks: dict[str, np.ndarray]) -> np.ndarray:
        flat = np.zeros(self._size)
        for name, shape in self._shapes.items():
            block = np.asarray(blocks[name], dtype=float)
            if block.shape != shape:
                raise ValueError(f"block {name!r} has shape {block.shape}, expected {shape}")
            flat[self._slices[name]] = block.ravel()
        return flat

    def zeros(self) -> np.ndarray:
        return np.zeros(self._size)

    def _check(self, flat: np.ndarray) -> None:
        if flat.shape != (self._size,):
            raise ValueError(f"parameter vector has shape {flat.shape}, layout needs ({self._size},)")


@lru_cache(maxsize=None)
def base_layout(spec: NetworkSpec) -> Layout:
    dims = spec.dims()
    entries: list[tuple[str, tuple[int, ...]]] = []
    for l in range(1, spec.depth + 1):
        entries.append((f"W{l}", (dims[l - 1], dims[l])))
        entries.append((f"b{l}", (dims[l],)))
    entries.append(("Wout", (dims[-1],)))
    entries.append(("bout", (1,)))
    return Layout(entries)


def param_count(spec: NetworkSpec) -> int:
    """Total number of parameters: sum_l (M_{l-1} M_l + M_l) + M_L + 1."""
    dims = spec.dims()
    count = sum(dims[l - 1] * dims[l] + dims[l] for l in range(1, len(dims)))
    return count + dims[-1] + 1


def _check_input(spec: NetworkSpec, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.input_dim:
        raise ValueError(f"input has shape {X.shape}, expected (n, {spec.input_dim})")
    return X


def forward_batch_cached(spec: NetworkSpec, params: np.ndarray, X: np.ndarray):
    """Scores plus the per-layer pre-activations and activations.

    The cache is what backprop_scores consumes.
    """
    layout = base_layout(spec)
    layout._check(params)
    X = _check_input(spec, X)
    zs: list[np.ndarray] = []
    acts: list[np.ndarray] = [X]
    a = X
    for l in range(1, spec.depth + 1):
        z = a @ layout.view(params, f"W{l}") + layout.view(params, f"b{l}")
        a = activate(spec, z)
        zs.append(z)
        acts.append(a)
    scores = a @ layout.view(params, "Wout") + layout.view(params, "bout")[0]
    return scores, (zs, acts)


def forward_batch(spec: NetworkSpec, params: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Row-wise network scores for an (n, d) batch."""
    scores, _ = forward_batch_cached(spec, params, X)
    return scores


def forward(spec: NetworkSpec, params: np.ndarray, x: np.ndarray) -> float:
    """Score of a single input vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a single input vector, got shape {x.shape}")
    return float(forward_batch(spec, params, x[None, :])[0])


def backprop_scores(
    spec: NetworkSpec,
    params: np.ndarray,
    X: np.ndarray,
    dscores: np.ndarray,
    cache,
) -> np.ndarray:
    """Gradient of sum_i dscores_i * score_i with respect to the flat params."""
    layout = base_layout(spec)
    zs, acts = cache
    grad = layout.zeros()
    w_out = layout.view(params, "Wout")
    layout.view(grad, "Wout")[:] = acts[-1].T @ dscores
    layout.view(grad, "bout")[0] = dscores.sum()
    da = dscores[:, None] * w_out[None, :]
    for l in range(spec.depth, 0, -1):
        dz = da * activate_deriv(spec, zs[l - 1], acts[l])
        layout.view(grad, f"W{l}")[:] = acts[l - 1].T @ dz
        layout.view(grad, f"b{l}")[:] = dz.sum(axis=0)
        if l > 1:
            da = dz @ layout.view(params, f"W{l}").T
    return grad
