"""Factored symmetric tensors sum_i c_i x_i^(k) and the zero-tensor test.

The rank-1 (injective) norm of a symmetric tensor equals its maximum over
a single repeated unit argument, so |sum_i c_i (u.x_i)^k| maximized over
unit u decides whether the tensor vanishes. The maximizer is found by
projected gradient ascent on the sphere with seeded restarts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightedPointTensor",
    "lift_points",
    "eval_rank1",
    "sym_max",
    "is_zero_tensor",
    "dense_materialize",
    "tensor_scale",
]

MAX_DENSE_ELEMENTS = 10**6
DEFAULT_RESTARTS = 32
_START_SEED = 20240 + 813  # fixed; restart starts must be reproducible


@dataclass(frozen=True)
class WeightedPointTensor:
    """order-k symmetric tensor sum_i coeffs[i] * points[i]^(tensor power k)."""

    order: int
    coeffs: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        if self.order < 0:
            raise ValueError(f"tensor order must be >= 0, got {self.order}")
        if self.coeffs.ndim != 1 or self.points.ndim != 2:
            raise ValueError("coeffs must be (n,), points must be (n, d)")
        if self.coeffs.shape[0] != self.points.shape[0]:
            raise ValueError(
                f"{self.coeffs.shape[0]} coefficients vs {self.points.shape[0]} points"
            )

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def lift_points(X: np.ndarray) -> np.ndarray:
    """Append a final coordinate of exactly 1 to every point.

    (u.x + v)^p moments become homogeneous moments of the lifted points
    under the normalization |u|^2 + v^2 = 1.
    """
    X = np.asarray(X, dtype=float)
    return np.hstack([X, np.ones((X.shape[0], 1))])


def eval_rank1(tensor: WeightedPointTensor, u: np.ndarray) -> float:
    """sum_i c_i (u.x_i)^k for a unit vector u."""
    u = np.asarray(u, dtype=float)
    if u.shape != (tensor.dim,):
        raise ValueError(f"u has shape {u.shape}, expected ({tensor.dim},)")
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError(f"u must be a unit vector, got norm {np.linalg.norm(u)!r}")
    return float(tensor.coeffs @ (tensor.points @ u) ** tensor.order)


def tensor_scale(tensor: WeightedPointTensor) -> float:
    """sum_i |c_i| * max(1, |x_i|)^k, a natural magnitude for tolerances."""
    norms = np.maximum(1.0, np.linalg.norm(tensor.points, axis=1))
    return float(np.abs(tensor.coeffs) @ norms ** tensor.order)


def _ascend(tensor: WeightedPointTensor, u: np.ndarray, max_iters: int, floor: float) -> tuple[float, np.ndarray]:
    """Maximize (sum_i c_i (u.x_i)^k)^2 on the unit sphere from one start."""
    c, X, k = tensor.coeffs, tensor.points, tensor.order
    t = X @ u
    val = float(c @ t**k)
    step = 1.0
    for _ in range(max_iters):
        # euclidean gradient of g(u)^2 is 2 g(u) k sum_i c_i (u.x_i)^(k-1) x_i
        euclid = (2.0 * val * k) * ((c * t ** (k - 1)) @ X)
        tangent = euclid - (euclid @ u) * u
        tn2 = float(tangent @ tangent)
        if tn2 <= (floor * 1e-13) ** 2:
            break
        moved = False
        while step > 1e-20:
            cand = u + step * tangent
            cand /= np.linalg.norm(cand)
            tc = X @ cand
            cval = float(c @ tc**k)
            if cval * cval >= val * val + 1e-4 * step * tn2:
                u, t, val = cand, tc, cval
                step *= 2.0
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    return abs(val), u


def sym_max(
    tensor: WeightedPointTensor,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = 600,
) -> tuple[float, np.ndarray]:
    """Approximate max over unit u of |sum_i c_i (u.x_i)^k| and its argmax.

    Symmetry makes the single-argument restriction lossless, but the sphere
    problem is nonconvex; `restarts` seeded random starts plus the canonical
    basis directions bound the risk of missing the global basin at desk
    scale. Ties keep the earliest start.
    """
    if tensor.order < 1:
        raise ValueError("sym_max needs order >= 1; order 0 is just the coefficient sum")
    if tensor.n < 1 or restarts < 1:
        raise ValueError("need at least one point and one restart")
    d = tensor.dim
    floor = max(tensor_scale(tensor), np.finfo(float).tiny)
    rng = np.random.default_rng(_START_SEED)
    starts = rng.standard_normal((restarts, d))
    starts /= np.maximum(np.linalg.norm(starts, axis=1, keepdims=True), 1e-300)
    starts = np.vstack([starts, np.eye(d)])
    best_val, best_u = -1.0, None
    for u0 in starts:
        val, u = _ascend(tensor, u0.copy(), max_iters, floor)
        if val > best_val:
            best_val, best_u = val, u
    return best_val, best_u


def is_zero_tensor(tensor: WeightedPointTensor, tol: float, restarts: int = DEFAULT_RESTARTS) -> bool:
    """True when the rank-1 maximum certifies the tensor to be 0 within tol."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if tensor.order == 0:
        return abs(float(tensor.coeffs.sum())) <= tol
    value, _ = sym_max(tensor, restarts=restarts)
    return value <= tol


def dense_materialize(tensor: WeightedPointTensor) -> np.ndarray:
    """The explicit k-dimensional array sum_i c_i x_i^(tensor power k)."""
    d, k = tensor.dim, tensor.order
    if d**k > MAX_DENSE_ELEMENTS:
        raise ValueError(f"dense tensor would have {d**k} elements (limit {MAX_DENSE_ELEMENTS})")
    out = tensor.coeffs.copy()
    for _ in range(k):
        out = out[..., None] * tensor.points.reshape(tensor.n, *(1,) * (out.ndim - 1), d)
    return out.sum(axis=0)
