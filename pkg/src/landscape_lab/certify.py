"""Numerical certificates for converged points of augmented losses.

A certificate checks, at declared tolerances, everything the landscape
theory promises about a local minimum of an augmented loss:

* stationarity: small gradient and, for smooth activations, no meaningfully
  negative Hessian eigenvalue;
* inactivity: the special neuron's output weight (skip modes) or every
  exponential exit weight (per-layer mode) vanishes;
* vanishing weighted moments: the tensors sum_i c_i x_i^(p) with
  c_i = l'(-y_i f(x_i)) y_i e^(w.x_i + b) are zero up to order P for the
  skip-exponential mode, and the affine-lifted analogue without the
  positive exponential factor for the other modes;
* optimality: the train error of the stripped base network equals the
  majority-vote lower bound of the dataset.

Verdicts: "certified-global" when everything passes, "stationary-only"
when the point is stationary and inactive but a globality check fails, and
"failed" when stationarity or inactivity fails (a point with an active
special neuron cannot be a local minimum at all).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import AugmentedLoss, augmented_layout, exp_exit_values, extract_base_params
from .autodiff import dense_hessian, min_eigenvalue
from .losses import EmpiricalLossConfig, HingeLoss, misclassification_rate
from .networks import NetworkSpec, forward_batch
from .optimize import RunResult
from .tensors import WeightedPointTensor, lift_points, sym_max, tensor_scale

__all__ = [
    "CertificateThresholds",
    "Certificate",
    "StationarityOrder",
    "inactivity_check",
    "moment_residuals",
    "affine_moment_residuals",
    "majority_vote_oracle",
    "kth_order_probe",
    "full_certificate",
]


@dataclass(frozen=True)
class CertificateThresholds:
    """Tolerances of the certificate; all scale-aware where it matters."""

    grad_tol: float = 1e-8
    hessian_tol: float = 1e-4
    inactivity_tol: float = 1e-3
    tensor_rel_tol: float = 1e-4  # residual_p <= rel * sum_i |c_i| max(1, |x_i|)^p
    max_order: int = 4
    restarts: int = 32


@dataclass(frozen=True)
class Certificate:
    grad_norm: float
    min_hessian_eig: float | None  # None when Hessian checks are skipped
    nonsmooth: bool
    inactivity: float
    tensor_residuals: tuple[float, ...]
    tensor_scales: tuple[float, ...]
    train_error: float
    oracle_error: float
    verdict: str
    failing: tuple[str, ...]

    @property
    def max_residual_ratio(self) -> float:
        ratios = [
            r / s if s > 0 else (0.0 if r == 0.0 else np.inf)
            for r, s in zip(self.tensor_residuals, self.tensor_scales)
        ]
        return max(ratios) if ratios else 0.0


@dataclass(frozen=True)
class StationarityOrder:
    """Result of probing the k-th order stationarity inequality."""

    order: int
    constant: float
    radius: float
    passed: bool
    worst_margin: float  # most negative value of L(theta) - L(theta0) + C d^(k+1)


def inactivity_check(spec: NetworkSpec, cfg: EmpiricalLossConfig, params: np.ndarray, tol: float):
    """(magnitude, passed): how active the special neurons still are.

    Skip modes report |a|; per-layer reports the largest exponential exit
    weight in absolute value. The unaugmented mode is vacuously inactive.
    """
    kind = cfg.augmentation.kind
    if kind == "none":
        magnitude = 0.0
    elif kind in ("skip_exp", "skip_monomial"):
        layout = augmented_layout(spec, cfg.augmentation)
        magnitude = abs(float(layout.view(np.asarray(params, dtype=float), "a")[0]))
    elif kind == "per_layer_exp":
        magnitude = float(np.max(np.abs(exp_exit_values(spec, params))))
    else:  # pragma: no cover
        raise ValueError(f"unknown augmentation kind {kind!r}")
    return magnitude, magnitude <= tol


def _residuals(coeffs: np.ndarray, points: np.ndarray, max_order: int, restarts: int):
    residuals, scales = [], []
    for p in range(max_order + 1):
        tensor = WeightedPointTensor(p, coeffs, points)
        if p == 0:
            residuals.append(abs(float(coeffs.sum())))
        else:
            residuals.append(sym_max(tensor, restarts=restarts)[0])
        scales.append(tensor_scale(tensor))
    return np.array(residuals), np.array(scales)


def moment_residuals(
    dataset,
    base_scores: np.ndarray,
    w: np.ndarray,
    b: float,
    hinge: HingeLoss,
    max_order: int = 4,
    restarts: int = 32,
):
    """Rank-1 maxima of the weighted moment tensors, orders 0..max_order.

    Weights are c_i = l'(-y_i score_i) y_i exp(w.x_i + b); at a local
    minimum of the skip-exponential loss every order vanishes.
    """
    X = np.asarray(dataset.features, dtype=float)
    y = np.asarray(dataset.labels, dtype=float)
    coeffs = hinge.grad(-y * base_scores) * y * np.exp(X @ np.asarray(w, dtype=float) + b)
    return _residuals(coeffs, X, max_order, restarts)


def affine_moment_residuals(
    dataset,
    scores: np.ndarray,
    hinge: HingeLoss,
    max_order: int = 4,
    restarts: int = 32,
):
    """Moment residuals on lifted points (x, 1) with weights l'(-y s) y.

    The positive per-sample exponential factor is dropped: the certified
    conclusion is l' = 0 sample by sample, so any positive reweighting is
    certificate-equivalent. Used for monomial, per-layer and unaugmented
    modes, where the first-order conditions live in affine form.
    """
    X = lift_points(np.asarray(dataset.features, dtype=float))
    y = np.asarray(dataset.labels, dtype=float)
    coeffs = hinge.grad(-y * scores) * y
    return _residuals(coeffs, X, max_order, restarts)


def majority_vote_oracle(dataset) -> float:
    """Minimum misclassification rate achievable by any deterministic classifier.

    Samples are grouped by exact feature equality; each group's minority
    count is unavoidable, and nothing else is (distinct features can always
    be interpolated).
    """
    X = np.asarray(dataset.features, dtype=float)
    y = np.asarray(dataset.labels)
    groups: dict[bytes, list[int]] = {}
    for i in range(X.shape[0]):
        groups.setdefault(X[i].tobytes(), []).append(i)
    minority = 0
    for idx in groups.values():
        pos = int(np.sum(y[idx] == 1))
        minority += min(pos, len(idx) - pos)
    return minority / X.shape[0]


def kth_order_probe(
    lossfn,
    params: np.ndarray,
    k: int,
    constant: float = 10.0,
    radius: float = 0.1,
    n_dirs: int = 32,
    seed: int = 0,
) -> StationarityOrder:
    """Sample the inequality L(theta) >= L(theta0) - C |theta - theta0|^(k+1).

    Random unit directions, eight log-spaced magnitudes up to `radius`.
    The constant is existentially quantified in the definition, so the
    worst observed margin is reported for sensitivity checks.
    """
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    if not 0.0 < radius < 1.0:
        raise ValueError(f"radius must be in (0, 1), got {radius}")
    if n_dirs < 1:
        raise ValueError(f"n_dirs must be >= 1, got {n_dirs}")
    params = np.asarray(params, dtype=float)
    rng = np.random.default_rng(seed)
    base = lossfn.value(params)
    magnitudes = np.geomspace(radius * 1e-3, radius, 8)
    worst = np.inf
    for _ in range(n_dirs):
        u = rng.standard_normal(params.size)
        u /= np.linalg.norm(u)
        for m in magnitudes:
            margin = lossfn.value(params + m * u) - base + constant * m ** (k + 1)
            worst = min(worst, margin)
    return StationarityOrder(k, constant, radius, bool(worst >= 0.0), float(worst))


def full_certificate(
    dataset,
    spec: NetworkSpec,
    cfg: EmpiricalLossConfig,
    run: RunResult,
    thresholds: CertificateThresholds = CertificateThresholds(),
) -> Certificate:
    """Assemble every check for one converged run and pronounce a verdict."""
    lossfn = AugmentedLoss(dataset, spec, cfg)
    params = np.asarray(run.params, dtype=float)
    y = dataset.labels

    grad_norm = float(np.linalg.norm(lossfn.grad(params)))
    nonsmooth = not spec.smooth
    min_eig = None
    if not nonsmooth and params.size <= 600:
        min_eig = min_eigenvalue(dense_hessian(lossfn, params))

    inactivity, inactive_ok = inactivity_check(spec, cfg, params, thresholds.inactivity_tol)

    base_params = extract_base_params(spec, cfg.augmentation, params)
    base_scores = forward_batch(spec, base_params, lossfn.X)
    kind = cfg.augmentation.kind
    if kind == "skip_exp":
        w = lossfn.layout.view(params, "w")
        b = float(lossfn.layout.view(params, "b")[0])
        residuals, scales = moment_residuals(
            dataset, base_scores, w, b, cfg.base_loss, thresholds.max_order, thresholds.restarts
        )
    elif kind == "per_layer_exp":
        residuals, scales = affine_moment_residuals(
            dataset, lossfn.scores(params), cfg.base_loss, thresholds.max_order, thresholds.restarts
        )
    else:  # skip_monomial and none use the affine form on base scores
        residuals, scales = affine_moment_residuals(
            dataset, base_scores, cfg.base_loss, thresholds.max_order, thresholds.restarts
        )

    train_error = misclassification_rate(base_scores, y)
    oracle_error = majority_vote_oracle(dataset)

    failing: list[str] = []
    if grad_norm > thresholds.grad_tol:
        failing.append("grad_norm")
    if min_eig is not None and min_eig < -thresholds.hessian_tol:
        failing.append("min_hessian_eig")
    if not inactive_ok:
        failing.append("inactivity")
    tol = thresholds.tensor_rel_tol * scales
    if np.any(residuals > tol):
        failing.append("tensor_residuals")
    if train_error != oracle_error:
        failing.append("train_error")

    if not failing:
        verdict = "certified-global"
    elif {"grad_norm", "min_hessian_eig", "inactivity"} & set(failing):
        verdict = "failed"
    else:
        verdict = "stationary-only"

    return Certificate(
        grad_norm=grad_norm,
        min_hessian_eig=min_eig,
        nonsmooth=nonsmooth,
        inactivity=inactivity,
        tensor_residuals=tuple(float(r) for r in residuals),
        tensor_scales=tuple(float(s) for s in scales),
        train_error=train_error,
        oracle_error=oracle_error,
        verdict=verdict,
        failing=tuple(failing),
    )
