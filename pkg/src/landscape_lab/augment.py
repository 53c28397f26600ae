"""Special-neuron augmentations and their regularized empirical losses.

Three augmentations of a base network score f(x):

* skip exponential:  f(x) + a * exp(w.x + b), regularizer lam * a^2 / 2
* skip monomial:     f(x) + a * (w.x + b)^p,  regularizer lam * a^2 / 2
* per-layer exponential: one extra exp neuron appended to every hidden
  layer (the first one reads the raw input), with the 2L-norm regularizer
  (lam/2) * sum over exit rows of ||w_exit||_{2L}^{2L}, where an exit row
  collects the weights leaving one exponential neuron.

AugmentedLoss bundles a dataset, architecture and loss config into a single
objective over a flat parameter vector, with analytic reverse-mode
gradients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .losses import Augmentation, EmpiricalLossConfig, empirical_loss
from .networks import (
    Layout,
    NetworkSpec,
    activate,
    activate_deriv,
    activate_second_deriv,
    backprop_scores,
    base_layout,
    forward_batch,
    forward_batch_cached,
)

__all__ = [
    "EXP_ARG_LIMIT",
    "ExpOverflowError",
    "SkipAugmentation",
    "skip_forward",
    "skip_regularized_loss",
    "per_layer_forward",
    "per_layer_forward_batch",
    "per_layer_regularizer",
    "exp_exit_values",
    "augmented_layout",
    "extract_base_params",
    "total_augmented_loss",
    "AugmentedLoss",
]

# Desk-scale floats cannot follow the theory's unbounded exponents; beyond
# this argument magnitude an exponential neuron raises instead of silently
# overflowing or underflowing to a useless constant.
EXP_ARG_LIMIT = 40.0


class ExpOverflowError(FloatingPointError):
    """An exponential neuron saw an argument outside the representable window."""

    def __init__(self, argument: float, sample: int):
        self.argument = float(argument)
        self.sample = int(sample)
        super().__init__(
            f"exp-overflow: |argument| {abs(argument):.3g} > {EXP_ARG_LIMIT:g} at sample {sample}"
        )


def _guarded_exp(t: np.ndarray) -> np.ndarray:
    flat = np.asarray(t, dtype=float).ravel()
    bad = np.abs(flat) > EXP_ARG_LIMIT
    if bad.any():
        i = int(np.argmax(bad))
        raise ExpOverflowError(flat[i], i)
    return np.exp(t)


@dataclass(frozen=True)
class SkipAugmentation:
    """Concrete parameters of one skip special neuron."""

    a: float
    w: np.ndarray
    b: float
    kind: str = "exponential"  # or "monomial"
    degree: int = 1

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if self.kind not in ("exponential", "monomial"):
            raise ValueError(f"unknown skip neuron kind {self.kind!r}")
        if self.kind == "monomial" and (not isinstance(self.degree, (int, np.integer)) or self.degree < 1):
            raise ValueError("monomial degree must be a positive integer")

    def response(self, X: np.ndarray) -> np.ndarray:
        """phi(x) for a batch of inputs, without the output weight a."""
        X = np.asarray(X, dtype=float)
        t = X @ self.w + self.b
        if self.kind == "exponential":
            return _guarded_exp(t)
        return t ** self.degree


def skip_forward(base_score: float, aug: SkipAugmentation, x: np.ndarray) -> float:
    """base_score + a * phi(x) for one input."""
    x = np.asarray(x, dtype=float)
    if x.shape != aug.w.shape:
        raise ValueError(f"input has shape {x.shape}, expected {aug.w.shape}")
    return float(base_score + aug.a * aug.response(x[None, :])[0])


# ---------------------------------------------------------------------------
# parameter layouts
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def augmented_layout(spec: NetworkSpec, augmentation: Augmentation) -> Layout:
    """Flat layout for a base network under the given augmentation.

    Skip modes append (a, w, b) after the base entries, so the base slice
    of the flat vector is exactly the unaugmented layout. The per-layer
    mode is its own network shape with extended matrices Wt_l and the
    exponential neuron at the last index of every hidden layer.
    """
    if augmentation.kind == "none":
        return base_layout(spec)
    if augmentation.kind in ("skip_exp", "skip_monomial"):
        base = base_layout(spec)
        entries = [(name, base.shape(name)) for name in base.names]
        entries += [("a", (1,)), ("w", (spec.input_dim,)), ("b", (1,))]
        return Layout(entries)
    # per_layer_exp
    if spec.depth < 1:
        raise ValueError("per-layer augmentation needs at least one hidden layer")
    dims = spec.dims()
    entries = []
    for l in range(1, spec.depth + 1):
        in_dim = dims[0] if l == 1 else dims[l - 1] + 1
        entries.append((f"Wt{l}", (in_dim, dims[l] + 1)))
        entries.append((f"bt{l}", (dims[l] + 1,)))
    entries.append(("Wtout", (dims[-1] + 1,)))
    entries.append(("btout", (1,)))
    return Layout(entries)


def exp_exit_values(spec: NetworkSpec, params: np.ndarray) -> np.ndarray:
    """All weights leaving exponential neurons, concatenated.

    Row M_{l-1} of Wt_l for l = 2..L (the exit row of layer l-1's
    exponential neuron) followed by the last output weight (the exit of
    the final exponential neuron).
    """
    layout = augmented_layout(spec, Augmentation.per_layer_exp())
    dims = spec.dims()
    rows = [layout.view(params, f"Wt{l}")[dims[l - 1], :] for l in range(2, spec.depth + 1)]
    rows.append(layout.view(params, "Wtout")[-1:])
    return np.concatenate(rows) if rows else np.zeros(0)


def extract_base_params(spec: NetworkSpec, augmentation: Augmentation, params: np.ndarray) -> np.ndarray:
    """The base network's parameters embedded in an augmented vector."""
    if augmentation.kind == "none":
        return params.copy()
    if augmentation.kind in ("skip_exp", "skip_monomial"):
        return params[: base_layout(spec).size].copy()
    layout = augmented_layout(spec, augmentation)
    base = base_layout(spec)
    dims = spec.dims()
    out = base.zeros()
    for l in range(1, spec.depth + 1):
        in_dim = dims[l - 1]
        base.view(out, f"W{l}")[:] = layout.view(params, f"Wt{l}")[:in_dim, : dims[l]]
        base.view(out, f"b{l}")[:] = layout.view(params, f"bt{l}")[: dims[l]]
    base.view(out, "Wout")[:] = layout.view(params, "Wtout")[: dims[-1]]
    base.view(out, "bout")[:] = layout.view(params, "btout")
    return out


# ---------------------------------------------------------------------------
# per-layer forward / backward
# ---------------------------------------------------------------------------


def _per_layer_forward_cached(spec: NetworkSpec, params: np.ndarray, X: np.ndarray):
    layout = augmented_layout(spec, Augmentation.per_layer_exp())
    layout._check(params)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.input_dim:
        raise ValueError(f"input has shape {X.shape}, expected (n, {spec.input_dim})")
    zs, acts = [], [X]
    a = X
    for l in range(1, spec.depth + 1):
        z = a @ layout.view(params, f"Wt{l}") + layout.view(params, f"bt{l}")
        a = activate(spec, z)
        a[:, -1] = _guarded_exp(z[:, -1])
        zs.append(z)
        acts.append(a)
    scores = a @ layout.view(params, "Wtout") + layout.view(params, "btout")[0]
    return scores, (zs, acts)


def per_layer_forward_batch(spec: NetworkSpec, params: np.ndarray, X: np.ndarray) -> np.ndarray:
    scores, _ = _per_layer_forward_cached(spec, params, X)
    return scores


def per_layer_forward(spec: NetworkSpec, params: np.ndarray, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a single input vector, got shape {x.shape}")
    return float(per_layer_forward_batch(spec, params, x[None, :])[0])


def per_layer_regularizer(spec: NetworkSpec, params: np.ndarray, lam: float) -> float:
    """(lam/2) * sum over exit rows of the 2L-th powers of their entries."""
    if lam <= 0:
        raise ValueError(f"regularizer weight must be positive, got {lam}")
    exponent = 2 * spec.depth
    return 0.5 * lam * float(np.sum(exp_exit_values(spec, params) ** exponent))


def _per_layer_backprop(spec: NetworkSpec, params: np.ndarray, dscores: np.ndarray, cache) -> np.ndarray:
    layout = augmented_layout(spec, Augmentation.per_layer_exp())
    zs, acts = cache
    grad = layout.zeros()
    w_out = layout.view(params, "Wtout")
    layout.view(grad, "Wtout")[:] = acts[-1].T @ dscores
    layout.view(grad, "btout")[0] = dscores.sum()
    da = dscores[:, None] * w_out[None, :]
    for l in range(spec.depth, 0, -1):
        deriv = activate_deriv(spec, zs[l - 1], acts[l])
        deriv[:, -1] = acts[l][:, -1]  # d exp = exp
        dz = da * deriv
        layout.view(grad, f"Wt{l}")[:] = acts[l - 1].T @ dz
        layout.view(grad, f"bt{l}")[:] = dz.sum(axis=0)
        if l > 1:
            da = dz @ layout.view(params, f"Wt{l}").T
    return grad


def _add_per_layer_reg_grad(spec: NetworkSpec, params: np.ndarray, lam: float, grad: np.ndarray) -> None:
    layout = augmented_layout(spec, Augmentation.per_layer_exp())
    dims = spec.dims()
    exponent = 2 * spec.depth
    for l in range(2, spec.depth + 1):
        row = layout.view(params, f"Wt{l}")[dims[l - 1], :]
        layout.view(grad, f"Wt{l}")[dims[l - 1], :] += lam * spec.depth * row ** (exponent - 1)
    a_exit = layout.view(params, "Wtout")[-1]
    layout.view(grad, "Wtout")[-1] += lam * spec.depth * a_exit ** (exponent - 1)


# ---------------------------------------------------------------------------
# loss assembly
# ---------------------------------------------------------------------------


class AugmentedLoss:
    """Regularized empirical loss over a flat parameter vector.

    value(p) = sum_i l(-y_i * f~(x_i; p)) + regularizer(p), where f~ is the
    base network under cfg.augmentation. Gradients are exact reverse-mode
    backprop, accumulated sample-index ascending for reproducibility.
    """

    def __init__(self, dataset, spec: NetworkSpec, cfg: EmpiricalLossConfig):
        self.X = np.asarray(dataset.features, dtype=float)
        self.y = np.asarray(dataset.labels, dtype=float)
        if self.X.ndim != 2 or self.X.shape[1] != spec.input_dim:
            raise ValueError(
                f"dataset features have shape {self.X.shape}, network expects (n, {spec.input_dim})"
            )
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("feature/label length mismatch")
        self.spec = spec
        self.cfg = cfg
        self.layout = augmented_layout(spec, cfg.augmentation)

    @property
    def mode(self) -> str:
        return self.cfg.augmentation.kind

    @property
    def dim(self) -> int:
        return self.layout.size

    @property
    def smooth(self) -> bool:
        return self.spec.smooth

    # -- scores ------------------------------------------------------------

    def base_scores(self, params: np.ndarray) -> np.ndarray:
        """Scores of the bare network, special neurons stripped."""
        base = extract_base_params(self.spec, self.cfg.augmentation, params)
        return forward_batch(self.spec, base, self.X)

    def scores(self, params: np.ndarray) -> np.ndarray:
        """Scores of the augmented network f~."""
        if self.mode == "none":
            return forward_batch(self.spec, params, self.X)
        if self.mode == "per_layer_exp":
            return per_layer_forward_batch(self.spec, params, self.X)
        base = forward_batch(self.spec, params[: base_layout(self.spec).size], self.X)
        a, phi, _ = self._skip_parts(params)
        return base + a * phi

    def _skip_parts(self, params):
        a = self.layout.view(params, "a")[0]
        w = self.layout.view(params, "w")
        b = self.layout.view(params, "b")[0]
        t = self.X @ w + b
        if self.mode == "skip_exp":
            phi = _guarded_exp(t)
            dphi = phi
        else:
            p = self.cfg.augmentation.degree
            phi = t ** p
            dphi = p * t ** (p - 1)
        return a, phi, (t, dphi)

    def _regularizer(self, params) -> float:
        if self.mode == "none":
            return 0.0
        if self.mode == "per_layer_exp":
            return per_layer_regularizer(self.spec, params, self.cfg.lam)
        a = self.layout.view(params, "a")[0]
        return 0.5 * self.cfg.lam * a * a

    # -- objective ----------------------------------------------------------

    def value(self, params: np.ndarray) -> float:
        scores = self.scores(params)
        return empirical_loss(scores, self.y, self.cfg) + self._regularizer(params)

    def value_and_grad(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        hinge = self.cfg.base_loss
        lam = self.cfg.lam
        if self.mode == "per_layer_exp":
            scores, cache = _per_layer_forward_cached(self.spec, params, self.X)
            margins = -self.y * scores
            dscores = hinge.grad(margins) * (-self.y)
            grad = _per_layer_backprop(self.spec, params, dscores, cache)
            _add_per_layer_reg_grad(self.spec, params, lam, grad)
            value = float(np.sum(hinge.value(margins))) + per_layer_regularizer(self.spec, params, lam)
            return value, grad

        base_size = base_layout(self.spec).size
        base_scores, cache = forward_batch_cached(self.spec, params[:base_size], self.X)
        if self.mode == "none":
            margins = -self.y * base_scores
            dscores = hinge.grad(margins) * (-self.y)
            grad = backprop_scores(self.spec, params, self.X, dscores, cache)
            return float(np.sum(hinge.value(margins))), grad

        a, phi, (t, dphi) = self._skip_parts(params)
        scores = base_scores + a * phi
        margins = -self.y * scores
        dscores = hinge.grad(margins) * (-self.y)
        grad = self.layout.zeros()
        grad[:base_size] = backprop_scores(self.spec, params[:base_size], self.X, dscores, cache)
        self.layout.view(grad, "a")[0] = dscores @ phi + lam * a
        dt = dscores * (a * dphi)
        self.layout.view(grad, "w")[:] = self.X.T @ dt
        self.layout.view(grad, "b")[0] = dt.sum()
        value = float(np.sum(hinge.value(margins))) + 0.5 * lam * a * a
        return value, grad

    def grad(self, params: np.ndarray) -> np.ndarray:
        return self.value_and_grad(params)[1]

    # -- exact second order --------------------------------------------------

    def hvp_operator(self, params: np.ndarray):
        """Exact Hessian-vector products by forward-over-reverse tangents.

        The primal forward and backward passes are cached once; each call of
        the returned function propagates one direction through the tangent of
        both passes. Exact at the evaluation point, so flat hinge regions
        yield exactly the regularizer curvature with no finite-difference
        kink artifacts.
        """
        params = np.asarray(params, dtype=float)
        if self.mode == "per_layer_exp":
            return self._per_layer_hvp_operator(params)
        return self._skip_hvp_operator(params)

    def _skip_hvp_operator(self, params: np.ndarray):
        spec, X, y = self.spec, self.X, self.y
        hinge, lam = self.cfg.base_loss, self.cfg.lam
        layout = self.layout
        base = base_layout(spec)
        depth = spec.depth
        bp = params[: base.size]
        scores, (zs, acts) = forward_batch_cached(spec, bp, X)

        skip = self.mode in ("skip_exp", "skip_monomial")
        if skip:
            a, phi, (t, dphi) = self._skip_parts(params)
            if self.mode == "skip_exp":
                ddphi = phi
            else:
                p = self.cfg.augmentation.degree
                ddphi = p * (p - 1) * t ** (p - 2) if p >= 2 else np.zeros_like(t)
            total = scores + a * phi
        else:
            total = scores
        margins = -y * total
        lp = hinge.grad(margins)
        lpp = hinge.hess(margins)
        g = lp * (-y)

        w_out = base.view(bp, "Wout")
        weights = [base.view(bp, f"W{l}") for l in range(1, depth + 1)]
        sig1 = [activate_deriv(spec, zs[l], acts[l + 1]) for l in range(depth)]
        sig2 = [activate_second_deriv(spec, zs[l], acts[l + 1]) for l in range(depth)]
        dA = [None] * (depth + 1)
        dZ = [None] * (depth + 1)
        cur = g[:, None] * w_out[None, :]
        for l in range(depth, 0, -1):
            dA[l] = cur
            dZ[l] = cur * sig1[l - 1]
            if l > 1:
                cur = dZ[l] @ weights[l - 1].T

        def apply(delta: np.ndarray) -> np.ndarray:
            delta = np.asarray(delta, dtype=float)
            if delta.shape != (layout.size,):
                raise ValueError(f"direction has shape {delta.shape}, expected ({layout.size},)")
            delta_base = delta[: base.size]
            dW = [base.view(delta_base, f"W{l}") for l in range(1, depth + 1)]
            db = [base.view(delta_base, f"b{l}") for l in range(1, depth + 1)]
            dwout = base.view(delta_base, "Wout")
            dbout = base.view(delta_base, "bout")

            zdots, adots = [], []
            adot = None  # tangent of the input is zero
            for l in range(depth):
                zdot = acts[l] @ dW[l] + db[l]
                if adot is not None:
                    zdot = zdot + adot @ weights[l]
                adot = sig1[l] * zdot
                zdots.append(zdot)
                adots.append(adot)
            sdot = acts[-1] @ dwout + dbout[0]
            if adot is not None:
                sdot = sdot + adot @ w_out
            if skip:
                adelta = layout.view(delta, "a")[0]
                wdelta = layout.view(delta, "w")
                bdelta = layout.view(delta, "b")[0]
                tdot = X @ wdelta + bdelta
                phidot = dphi * tdot
                sdot = sdot + adelta * phi + a * phidot
            gdot = lpp * sdot  # (-y)^2 = 1

            out = layout.zeros()
            out_base = out[: base.size]
            base.view(out_base, "Wout")[:] = acts[-1].T @ gdot + (
                adots[-1].T @ g if depth else 0.0
            )
            base.view(out_base, "bout")[0] = gdot.sum()
            curdot = gdot[:, None] * w_out[None, :] + g[:, None] * dwout[None, :]
            for l in range(depth, 0, -1):
                dzdot = curdot * sig1[l - 1] + dA[l] * sig2[l - 1] * zdots[l - 1]
                prev_adot = adots[l - 2] if l >= 2 else None
                contrib = acts[l - 1].T @ dzdot
                if prev_adot is not None:
                    contrib = contrib + prev_adot.T @ dZ[l]
                base.view(out_base, f"W{l}")[:] = contrib
                base.view(out_base, f"b{l}")[:] = dzdot.sum(axis=0)
                if l > 1:
                    curdot = dzdot @ weights[l - 1].T + dZ[l] @ dW[l - 1].T
            if skip:
                layout.view(out, "a")[0] = gdot @ phi + g @ phidot + lam * adelta
                qdot = gdot * (a * dphi) + g * (adelta * dphi) + g * (a * ddphi * tdot)
                layout.view(out, "w")[:] = X.T @ qdot
                layout.view(out, "b")[0] = qdot.sum()
            return out

        return apply

    def _per_layer_hvp_operator(self, params: np.ndarray):
        spec, X, y = self.spec, self.X, self.y
        hinge, lam = self.cfg.base_loss, self.cfg.lam
        layout = self.layout
        depth = spec.depth
        dims = spec.dims()
        exponent = 2 * depth
        scores, (zs, acts) = _per_layer_forward_cached(spec, params, X)
        margins = -y * scores
        lp = hinge.grad(margins)
        lpp = hinge.hess(margins)
        g = lp * (-y)

        w_out = layout.view(params, "Wtout")
        weights = [layout.view(params, f"Wt{l}") for l in range(1, depth + 1)]
        sig1, sig2 = [], []
        for l in range(depth):
            s1 = activate_deriv(spec, zs[l], acts[l + 1])
            s1[:, -1] = acts[l + 1][:, -1]
            s2 = activate_second_deriv(spec, zs[l], acts[l + 1])
            s2[:, -1] = acts[l + 1][:, -1]
            sig1.append(s1)
            sig2.append(s2)
        dA = [None] * (depth + 1)
        dZ = [None] * (depth + 1)
        cur = g[:, None] * w_out[None, :]
        for l in range(depth, 0, -1):
            dA[l] = cur
            dZ[l] = cur * sig1[l - 1]
            if l > 1:
                cur = dZ[l] @ weights[l - 1].T

        def apply(delta: np.ndarray) -> np.ndarray:
            delta = np.asarray(delta, dtype=float)
            if delta.shape != (layout.size,):
                raise ValueError(f"direction has shape {delta.shape}, expected ({layout.size},)")
            dW = [layout.view(delta, f"Wt{l}") for l in range(1, depth + 1)]
            db = [layout.view(delta, f"bt{l}") for l in range(1, depth + 1)]
            dwout = layout.view(delta, "Wtout")
            dbout = layout.view(delta, "btout")

            zdots, adots = [], []
            adot = None
            for l in range(depth):
                zdot = acts[l] @ dW[l] + db[l]
                if adot is not None:
                    zdot = zdot + adot @ weights[l]
                adot = sig1[l] * zdot
                zdots.append(zdot)
                adots.append(adot)
            sdot = acts[-1] @ dwout + dbout[0] + adots[-1] @ w_out
            gdot = lpp * sdot

            out = layout.zeros()
            layout.view(out, "Wtout")[:] = acts[-1].T @ gdot + adots[-1].T @ g
            layout.view(out, "btout")[0] = gdot.sum()
            curdot = gdot[:, None] * w_out[None, :] + g[:, None] * dwout[None, :]
            for l in range(depth, 0, -1):
                dzdot = curdot * sig1[l - 1] + dA[l] * sig2[l - 1] * zdots[l - 1]
                prev_adot = adots[l - 2] if l >= 2 else None
                contrib = acts[l - 1].T @ dzdot
                if prev_adot is not None:
                    contrib = contrib + prev_adot.T @ dZ[l]
                layout.view(out, f"Wt{l}")[:] = contrib
                layout.view(out, f"bt{l}")[:] = dzdot.sum(axis=0)
                if l > 1:
                    curdot = dzdot @ weights[l - 1].T + dZ[l] @ dW[l - 1].T

            # regularizer curvature on the exponential exit rows
            factor = lam * depth * max(exponent - 1, 1)
            for l in range(2, depth + 1):
                row = weights[l - 1][dims[l - 1], :]
                drow = dW[l - 1][dims[l - 1], :]
                layout.view(out, f"Wt{l}")[dims[l - 1], :] += factor * row ** (exponent - 2) * drow
            a_exit = w_out[-1]
            layout.view(out, "Wtout")[-1] += factor * a_exit ** (exponent - 2) * dwout[-1]
            return out

        return apply


def skip_regularized_loss(dataset, spec: NetworkSpec, params: np.ndarray, cfg: EmpiricalLossConfig) -> float:
    """sum_i l(-y_i (f(x_i) + a phi(x_i))) + lam a^2 / 2."""
    if cfg.augmentation.kind not in ("skip_exp", "skip_monomial"):
        raise ValueError(f"skip_regularized_loss needs a skip augmentation, got {cfg.augmentation.kind!r}")
    return AugmentedLoss(dataset, spec, cfg).value(params)


def total_augmented_loss(dataset, spec: NetworkSpec, params: np.ndarray, cfg: EmpiricalLossConfig) -> float:
    """Dispatch to the mode-appropriate regularized empirical loss."""
    return AugmentedLoss(dataset, spec, cfg).value(params)
