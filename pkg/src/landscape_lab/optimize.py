"""Gradient descent with backtracking line search and strict-saddle escape.

The landscape theory concerns local minima; plain descent can stall at
strict saddles, so whenever the gradient gets small the dense Hessian is
probed and, on meaningful negative curvature, the iterate is nudged along
the most negative eigenvector and descent resumes. A run only counts as
converged when the gradient norm is at or below tolerance and, for smooth
activations, the smallest Hessian eigenvalue is not meaningfully negative.
Everything is deterministic given (seed, config, dataset).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import ExpOverflowError, augmented_layout
from .autodiff import dense_hessian, value_and_grad
from .losses import Augmentation
from .networks import NetworkSpec, base_layout

__all__ = [
    "OptimizerConfig",
    "PerturbationEvent",
    "RunResult",
    "random_init",
    "minimize",
    "multi_start",
]

_MIN_STEP = 1e-20
_MAX_STEP = 1e12
_HESSIAN_DIM_LIMIT = 600


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 20000
    grad_tol: float = 1e-8
    init_scale: float = 0.01
    perturbation_radius: float = 1e-3
    patience: int = 25  # iterations between curvature probes near stationarity
    max_perturbations: int = 10
    armijo_c: float = 1e-4
    hessian_tol: float = 1e-4
    newton_gate: float = 0.1  # switch to damped Newton below this gradient norm; 0 disables
    record_history: bool = False

    def __post_init__(self):
        if self.grad_tol <= 0 or self.hessian_tol <= 0 or self.perturbation_radius <= 0:
            raise ValueError("tolerances and perturbation radius must be positive")
        if self.max_iters < 0 or self.patience < 1:
            raise ValueError("max_iters must be >= 0 and patience >= 1")
        if self.newton_gate < 0:
            raise ValueError("newton_gate must be non-negative")


@dataclass(frozen=True)
class PerturbationEvent:
    iteration: int
    pre_loss: float
    post_loss: float
    radius: float


@dataclass(frozen=True)
class RunResult:
    params: np.ndarray
    loss: float
    grad_norm: float
    iterations: int
    reason: str  # converged | max_iters | overflow
    seed: int | None = None
    perturbations: tuple[PerturbationEvent, ...] = ()
    history: tuple[float, ...] = ()

    @property
    def converged(self) -> bool:
        return self.reason == "converged"


def random_init(spec: NetworkSpec, augmentation: Augmentation, scale: float, seed: int) -> np.ndarray:
    """I.i.d. uniform(-scale, scale) parameters with inactive special neurons.

    The base-network entries are drawn first, in base-layout order, so two
    runs with the same seed share the base portion across augmentation
    modes. The skip output weight a, and every exponential exit weight in
    per-layer mode, start at exactly 0.
    """
    if scale < 0:
        raise ValueError(f"init scale must be non-negative, got {scale}")
    rng = np.random.default_rng(seed)
    layout = augmented_layout(spec, augmentation)
    params = layout.zeros()
    base = base_layout(spec)
    base_draw = rng.uniform(-scale, scale, base.size)

    if augmentation.kind in ("none", "skip_exp", "skip_monomial"):
        params[: base.size] = base_draw
        if augmentation.kind != "none":
            layout.view(params, "w")[:] = rng.uniform(-scale, scale, spec.input_dim)
            layout.view(params, "b")[0] = rng.uniform(-scale, scale)
        return params

    # per-layer: scatter base entries into the extended blocks, then draw the
    # weights feeding each exponential neuron; exit rows stay at 0.
    dims = spec.dims()
    for l in range(1, spec.depth + 1):
        in_dim = dims[l - 1]
        layout.view(params, f"Wt{l}")[:in_dim, : dims[l]] = base.view(base_draw, f"W{l}")
        layout.view(params, f"bt{l}")[: dims[l]] = base.view(base_draw, f"b{l}")
    layout.view(params, "Wtout")[: dims[-1]] = base.view(base_draw, "Wout")
    layout.view(params, "btout")[:] = base.view(base_draw, "bout")
    for l in range(1, spec.depth + 1):
        in_dim = dims[0] if l == 1 else dims[l - 1]
        layout.view(params, f"Wt{l}")[:in_dim, dims[l]] = rng.uniform(-scale, scale, in_dim)
        layout.view(params, f"bt{l}")[dims[l]] = rng.uniform(-scale, scale)
    return params


def _eig_decomposition(lossfn, params):
    H = dense_hessian(lossfn, params)
    vals, vecs = np.linalg.eigh(H)
    return vals, vecs


def _newton_direction(eigvals, eigvecs, g):
    """Ridge-regularized Newton direction -(H + mu I)^-1 g, or None.

    The ridge lifts the spectrum just past zero so the solve is stable on
    the singular flat-region Hessians; the caller still Armijo-guards the
    step, so an occasional bad direction only costs a fallback.
    """
    scale = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    mu = max(0.0, -float(eigvals[0])) + 1e-10 * max(1.0, scale)
    coeffs = (eigvecs.T @ g) / (eigvals + mu)
    direction = -(eigvecs @ coeffs)
    if float(direction @ g) < 0.0:
        return direction
    return None


def minimize(lossfn, init: np.ndarray, cfg: OptimizerConfig, seed: int | None = None) -> RunResult:
    """Backtracking descent until certified stationarity.

    Far from stationarity the direction is the negative gradient with the
    step warm-started at twice the previous accepted value. Once the
    gradient is small the direction switches to a ridge-regularized Newton
    step: the polynomial hinge's curvature vanishes at the flat-region
    boundary, where first-order steps decay only polynomially but Newton
    contracts geometrically. Every accepted step satisfies the Armijo
    condition, so the loss never increases.
    """
    params = np.asarray(init, dtype=float).copy()
    small = params.size <= _HESSIAN_DIM_LIMIT
    use_checks = bool(getattr(lossfn, "smooth", True)) and small
    use_newton = small and cfg.newton_gate > 0.0
    history: list[float] = []
    events: list[PerturbationEvent] = []

    try:
        val, g = value_and_grad(lossfn, params)
    except ExpOverflowError:
        return RunResult(params, np.nan, np.nan, 0, "overflow", seed)
    if cfg.record_history:
        history.append(val)

    step = 1.0
    iterations = 0
    descent_target = np.inf  # after a perturbation, must get below the pre-perturbation loss
    last_probe = -np.inf
    reason = "max_iters"

    while True:
        grad_norm = float(np.linalg.norm(g))
        eig = None  # (eigvals, eigvecs) at the current iterate, computed at most once

        if grad_norm <= cfg.grad_tol or (
            use_checks
            and grad_norm < 10.0 * cfg.grad_tol
            and len(events) < cfg.max_perturbations
            and iterations - last_probe >= cfg.patience
        ):
            at_tolerance = grad_norm <= cfg.grad_tol
            if not use_checks:
                if at_tolerance:
                    reason = "converged"
                    break
            else:
                last_probe = iterations
                eig = _eig_decomposition(lossfn, params)
                min_eig = float(eig[0][0])
                if min_eig < -cfg.hessian_tol and len(events) < cfg.max_perturbations:
                    pre = val
                    radius = cfg.perturbation_radius
                    direction = eig[1][:, 0]
                    best = None
                    for sign in (1.0, -1.0):
                        cand = params + sign * radius * direction
                        try:
                            cval = lossfn.value(cand)
                        except ExpOverflowError:
                            continue
                        if best is None or cval < best[0]:
                            best = (cval, cand)
                    if best is None:
                        reason = "overflow"
                        break
                    val, params = best
                    try:
                        val, g = value_and_grad(lossfn, params)
                    except ExpOverflowError:
                        reason = "overflow"
                        break
                    events.append(PerturbationEvent(iterations, pre, val, radius))
                    descent_target = min(descent_target, pre)
                    if cfg.record_history:
                        history.append(val)
                    step = 1.0
                    continue
                if at_tolerance:
                    if min_eig >= -cfg.hessian_tol and val < descent_target:
                        reason = "converged"
                    break

        if iterations >= cfg.max_iters:
            break

        # pick a direction: damped Newton near stationarity, else steepest descent
        direction = None
        if use_newton and grad_norm < cfg.newton_gate:
            if eig is None:
                try:
                    eig = _eig_decomposition(lossfn, params)
                except ExpOverflowError:
                    reason = "overflow"
                    break
            direction = _newton_direction(eig[0], eig[1], g)
        newton = direction is not None
        if not newton:
            direction = -g
        slope = float(direction @ g)  # negative by construction

        trial = 1.0 if newton else min(step * 2.0, _MAX_STEP)
        accepted = False
        tiny_overflow = False
        while trial >= _MIN_STEP:
            cand = params + trial * direction
            try:
                cval = lossfn.value(cand)
            except ExpOverflowError:
                tiny_overflow = trial < 1e-12
                trial *= 0.5
                continue
            if cval <= val + cfg.armijo_c * trial * slope:
                accepted = True
                break
            trial *= 0.5
        if not accepted and newton:
            # fall back to a gradient step before giving up
            direction = -g
            slope = -grad_norm * grad_norm
            trial = min(step * 2.0, _MAX_STEP)
            while trial >= _MIN_STEP:
                cand = params + trial * direction
                try:
                    cval = lossfn.value(cand)
                except ExpOverflowError:
                    tiny_overflow = trial < 1e-12
                    trial *= 0.5
                    continue
                if cval <= val + cfg.armijo_c * trial * slope:
                    accepted = True
                    break
                trial *= 0.5
        if not accepted:
            reason = "overflow" if tiny_overflow else "max_iters"
            break
        params = cand
        if not newton:
            step = trial
        try:
            val, g = value_and_grad(lossfn, params)
        except ExpOverflowError:
            reason = "overflow"
            iterations += 1
            break
        iterations += 1
        if cfg.record_history:
            history.append(val)

    return RunResult(
        params,
        val,
        float(np.linalg.norm(g)),
        iterations,
        reason,
        seed,
        tuple(events),
        tuple(history),
    )


def multi_start(lossfn, spec: NetworkSpec, n_seeds: int, cfg: OptimizerConfig, seed_offset: int = 0):
    """Independent minimize runs from seeds seed_offset..seed_offset+n_seeds-1."""
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be >= 1, got {n_seeds}")
    augmentation = lossfn.cfg.augmentation if hasattr(lossfn, "cfg") else Augmentation.none()
    results = []
    for s in range(n_seeds):
        seed = seed_offset + s
        init = random_init(spec, augmentation, cfg.init_scale, seed)
        results.append(minimize(lossfn, init, cfg, seed=seed))
    return results
