"""Polynomial hinge losses, empirical loss and misclassification rate.

The scalar loss family is ``l(z) = max(z + 1, 0)**p`` with integer power
``p >= 3``: flat (exactly zero) for z <= -1, twice continuously
differentiable everywhere, monotonically non-decreasing, and convex.
Every critical point is a global minimum and all global minima sit at
negative z, which is what the landscape certificates downstream rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HingeLoss",
    "Augmentation",
    "EmpiricalLossConfig",
    "hinge_value",
    "hinge_grad",
    "hinge_hess",
    "empirical_loss",
    "misclassification_rate",
]


def _check_power(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
        raise ValueError(f"hinge power must be an integer, got {p!r}")
    if p < 3:
        raise ValueError(
            f"hinge power must be >= 3 for twice differentiability, got {p}"
        )


def hinge_value(z, p: int):
    """max(z + 1, 0)**p, elementwise on arrays."""
    _check_power(p)
    return np.maximum(np.asarray(z, dtype=float) + 1.0, 0.0) ** p


def hinge_grad(z, p: int):
    """First derivative p * max(z + 1, 0)**(p - 1); zero for z <= -1."""
    _check_power(p)
    return p * np.maximum(np.asarray(z, dtype=float) + 1.0, 0.0) ** (p - 1)


def hinge_hess(z, p: int):
    """Second derivative p(p-1) * max(z + 1, 0)**(p - 2); zero for z <= -1."""
    _check_power(p)
    return p * (p - 1) * np.maximum(np.asarray(z, dtype=float) + 1.0, 0.0) ** (p - 2)


@dataclass(frozen=True)
class HingeLoss:
    """Polynomial hinge loss of a given power (default 3, the smallest valid)."""

    power: int = 3

    def __post_init__(self):
        _check_power(self.power)

    def value(self, z):
        return hinge_value(z, self.power)

    def grad(self, z):
        return hinge_grad(z, self.power)

    def hess(self, z):
        return hinge_hess(z, self.power)


_AUGMENT_KINDS = ("none", "skip_exp", "per_layer_exp", "skip_monomial")


@dataclass(frozen=True)
class Augmentation:
    """Which special-neuron augmentation a loss uses.

    ``skip_monomial`` carries the monomial degree; the other kinds do not.
    """

    kind: str = "none"
    degree: int | None = None

    def __post_init__(self):
        if self.kind not in _AUGMENT_KINDS:
            raise ValueError(
                f"unknown augmentation kind {self.kind!r}; expected one of {_AUGMENT_KINDS}"
            )
        if self.kind == "skip_monomial":
            if not isinstance(self.degree, (int, np.integer)) or self.degree < 1:
                raise ValueError("skip_monomial needs a positive integer degree")
        elif self.degree is not None:
            raise ValueError(f"degree is only meaningful for skip_monomial, got kind {self.kind!r}")

    @classmethod
    def none(cls) -> "Augmentation":
        return cls("none")

    @classmethod
    def skip_exp(cls) -> "Augmentation":
        return cls("skip_exp")

    @classmethod
    def per_layer_exp(cls) -> "Augmentation":
        return cls("per_layer_exp")

    @classmethod
    def skip_monomial(cls, degree: int) -> "Augmentation":
        return cls("skip_monomial", degree)


@dataclass(frozen=True)
class EmpiricalLossConfig:
    """Hinge power, regularizer weight and augmentation mode of a training loss."""

    base_loss: HingeLoss
    lam: float = 0.0
    augmentation: Augmentation = Augmentation("none")

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"regularizer weight must be non-negative, got {self.lam}")
        if self.augmentation.kind != "none" and self.lam <= 0:
            raise ValueError("augmented losses require a strictly positive regularizer weight")


def _check_lengths(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.ndim != 1 or labels.ndim != 1:
        raise ValueError("scores and labels must be 1-d")
    if scores.shape[0] != labels.shape[0]:
        raise ValueError(
            f"length mismatch: {scores.shape[0]} scores vs {labels.shape[0]} labels"
        )
    if scores.shape[0] < 1:
        raise ValueError("need at least one sample")
    return scores, labels.astype(float)


def empirical_loss(scores, labels, cfg: EmpiricalLossConfig) -> float:
    """Sum of per-sample hinge losses l(-y_i * score_i).

    A plain sum, not an average, so that regularizer weights in the
    augmented losses keep their meaning. Regularizer terms are added by
    the augment module, never here.
    """
    scores, y = _check_lengths(scores, labels)
    return float(np.sum(cfg.base_loss.value(-y * scores)))


def misclassification_rate(scores, labels) -> float:
    """Fraction of samples whose label differs from sign(score).

    sign(0) counts as +1 so the rate is total on all score vectors.
    """
    scores, y = _check_lengths(scores, labels)
    predictions = np.where(scores >= 0.0, 1.0, -1.0)
    return float(np.mean(predictions != y))
