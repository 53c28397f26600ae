"""Gradients, Hessian-vector products and finite-difference oracles.

A "loss function" here is any object with ``value(params) -> float`` and a
reverse-mode ``grad(params) -> ndarray`` (AugmentedLoss is the main one;
FunctionLoss adapts plain callables). Gradients are flat vectors aligned
with the parameter layout. Hessian-vector products use central differences
of the analytic gradient; the dense Hessian is assembled from basis HVPs
and symmetrized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "FunctionLoss",
    "grad",
    "value_and_grad",
    "hvp",
    "dense_hessian",
    "min_eigenvalue",
    "fd_grad",
    "fd_hessian",
]

MAX_DENSE_HESSIAN_DIM = 600


@dataclass(frozen=True)
class FunctionLoss:
    """Adapter turning a (value, gradient) pair of callables into a loss object."""

    value_fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    smooth: bool = True

    def value(self, params: np.ndarray) -> float:
        return float(self.value_fn(params))

    def grad(self, params: np.ndarray) -> np.ndarray:
        return np.asarray(self.grad_fn(params), dtype=float)

    def value_and_grad(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        return self.value(params), self.grad(params)


def grad(lossfn, params: np.ndarray) -> np.ndarray:
    """Reverse-mode gradient of the scalar loss at params."""
    g = np.asarray(lossfn.grad(np.asarray(params, dtype=float)), dtype=float)
    if g.shape != np.shape(params):
        raise ValueError(f"gradient shape {g.shape} does not match params {np.shape(params)}")
    return g


def value_and_grad(lossfn, params: np.ndarray) -> tuple[float, np.ndarray]:
    if hasattr(lossfn, "value_and_grad"):
        v, g = lossfn.value_and_grad(np.asarray(params, dtype=float))
        return float(v), np.asarray(g, dtype=float)
    return float(lossfn.value(params)), grad(lossfn, params)


def _fd_steps(params: np.ndarray, scale: float) -> np.ndarray:
    # scale-aware central-difference step per coordinate
    return scale * np.maximum(1.0, np.abs(params))


def fd_grad(value_fn: Callable[[np.ndarray], float], params: np.ndarray, scale: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    params = np.asarray(params, dtype=float)
    steps = _fd_steps(params, scale)
    out = np.zeros_like(params)
    for i in range(params.size):
        e = np.zeros_like(params)
        e[i] = steps[i]
        out[i] = (value_fn(params + e) - value_fn(params - e)) / (2.0 * steps[i])
    return out


def hvp(lossfn, params: np.ndarray, direction: np.ndarray, scale: float = 1e-6) -> np.ndarray:
    """Hessian-vector product.

    Uses the loss's exact forward-over-reverse operator when it provides
    one, otherwise central differences of the gradient.
    """
    params = np.asarray(params, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if direction.shape != params.shape:
        raise ValueError(f"direction shape {direction.shape} does not match params {params.shape}")
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        return np.zeros_like(params)
    if hasattr(lossfn, "hvp_operator"):
        return lossfn.hvp_operator(params)(direction)
    h = scale * max(1.0, float(np.linalg.norm(params))) / norm
    gp = grad(lossfn, params + h * direction)
    gm = grad(lossfn, params - h * direction)
    return (gp - gm) / (2.0 * h)


def dense_hessian(lossfn, params: np.ndarray) -> np.ndarray:
    """Symmetric dense Hessian assembled from basis Hessian-vector products."""
    params = np.asarray(params, dtype=float)
    n = params.size
    if n > MAX_DENSE_HESSIAN_DIM:
        raise ValueError(f"dense Hessian limited to {MAX_DENSE_HESSIAN_DIM} parameters, got {n}")
    H = np.zeros((n, n))
    if hasattr(lossfn, "hvp_operator"):
        operator = lossfn.hvp_operator(params)
        basis = np.eye(n)
        for i in range(n):
            H[:, i] = operator(basis[i])
    else:
        basis = np.eye(n)
        for i in range(n):
            H[:, i] = hvp(lossfn, params, basis[i])
    return 0.5 * (H + H.T)


def min_eigenvalue(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(H)[0])


def fd_hessian(value_fn: Callable[[np.ndarray], float], params: np.ndarray, scale: float = 1e-4) -> np.ndarray:
    """Second-difference Hessian oracle built only from loss values."""
    params = np.asarray(params, dtype=float)
    n = params.size
    steps = _fd_steps(params, scale)
    H = np.zeros((n, n))
    f0 = value_fn(params)
    for i in range(n):
        ei = np.zeros_like(params)
        ei[i] = steps[i]
        H[i, i] = (value_fn(params + ei) - 2.0 * f0 + value_fn(params - ei)) / steps[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros_like(params)
            ej[j] = steps[j]
            fpp = value_fn(params + ei + ej)
            fpm = value_fn(params + ei - ej)
            fmp = value_fn(params - ei + ej)
            fmm = value_fn(params - ei - ej)
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j])
    return H
