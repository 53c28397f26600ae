"""Loss-landscape laboratory for special-neuron augmented binary classifiers.

Augment any dense binary classifier with one exponential (or monomial)
neuron plus a small regularizer, run seeded gradient-descent experiments,
and numerically certify that converged points are inactive, moment-free
and globally optimal.
"""

from .augment import (
    AugmentedLoss,
    ExpOverflowError,
    SkipAugmentation,
    augmented_layout,
    per_layer_forward,
    per_layer_forward_batch,
    per_layer_regularizer,
    skip_forward,
    skip_regularized_loss,
    total_augmented_loss,
)
from .certify import (
    Certificate,
    CertificateThresholds,
    StationarityOrder,
    affine_moment_residuals,
    full_certificate,
    inactivity_check,
    kth_order_probe,
    majority_vote_oracle,
    moment_residuals,
)
from .datasets import (
    Dataset,
    DatasetMetadata,
    Polynomial,
    gen_circles,
    gen_conflicting,
    gen_linearly_separable,
    gen_poly_separable,
    gen_xor,
)
from .losses import (
    Augmentation,
    EmpiricalLossConfig,
    HingeLoss,
    empirical_loss,
    hinge_grad,
    hinge_hess,
    hinge_value,
    misclassification_rate,
)
from .networks import NetworkSpec, forward, forward_batch, param_count
from .optimize import OptimizerConfig, RunResult, minimize, multi_start, random_init
from .tensors import (
    WeightedPointTensor,
    dense_materialize,
    eval_rank1,
    is_zero_tensor,
    lift_points,
    sym_max,
)

__version__ = "0.1.0"
