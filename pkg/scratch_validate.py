"""Scratch validation: FD gradient checks + XOR prototype. Not part of the package."""
import time

import numpy as np

from landscape_lab import (
    Augmentation, AugmentedLoss, EmpiricalLossConfig, HingeLoss, NetworkSpec,
    OptimizerConfig, gen_xor, minimize, random_init, multi_start,
)
from landscape_lab.autodiff import fd_grad, dense_hessian, fd_hessian, min_eigenvalue

rng = np.random.default_rng(0)


def check_mode(kind, degree=None, activation="tanh", widths=(3, 2), d=2, n=5):
    class Data:
        features = rng.uniform(-2, 2, (n, d))
        labels = rng.choice([-1.0, 1.0], n)
    spec = NetworkSpec(d, widths, activation)
    aug = Augmentation(kind, degree)
    cfg = EmpiricalLossConfig(HingeLoss(3), 0.1 if kind != "none" else 0.0, aug)
    loss = AugmentedLoss(Data(), spec, cfg)
    params = rng.uniform(-0.5, 0.5, loss.dim)
    g = loss.grad(params)
    g_fd = fd_grad(loss.value, params)
    denom = np.maximum(np.abs(g_fd), 1e-8)
    rel = np.max(np.abs(g - g_fd) / denom)
    print(f"{kind:15s} act={activation:6s} dim={loss.dim:3d} max rel grad err = {rel:.3e}")
    return rel


for kind, deg in [("none", None), ("skip_exp", None), ("skip_monomial", 2), ("per_layer_exp", None)]:
    for act in ["tanh", "sigmoid"]:
        r = check_mode(kind, deg, act)
        assert r < 1e-6, f"FAIL {kind} {act}"

# Hessian sanity
class D2:
    features = rng.uniform(-2, 2, (4, 2))
    labels = np.array([1.0, -1.0, 1.0, -1.0])
spec = NetworkSpec(2, (2,), "tanh")
cfg = EmpiricalLossConfig(HingeLoss(3), 0.1, Augmentation.skip_exp())
loss = AugmentedLoss(D2(), spec, cfg)
p = rng.uniform(-0.5, 0.5, loss.dim)
H = dense_hessian(loss, p)
Hfd = fd_hessian(loss.value, p)
print("hessian asym:", np.max(np.abs(H - H.T)), " vs fd mineig diff:",
      abs(min_eigenvalue(H) - min_eigenvalue(Hfd)))

# --- XOR prototype ---
xor = gen_xor()
spec = NetworkSpec(2, (2,), "tanh")
for lam in (0.01, 0.1):
    cfg = EmpiricalLossConfig(HingeLoss(3), lam, Augmentation.skip_exp())
    loss = AugmentedLoss(xor, spec, cfg)
    ocfg = OptimizerConfig(max_iters=20000)
    t0 = time.time()
    results = multi_start(loss, spec, 30, ocfg)
    dt = time.time() - t0
    conv = [r for r in results if r.converged]
    iters = np.array([r.iterations for r in results])
    from landscape_lab.losses import misclassification_rate
    from landscape_lab.augment import extract_base_params
    from landscape_lab.networks import forward_batch
    errs = []
    amags = []
    for r in conv:
        base = extract_base_params(spec, cfg.augmentation, r.params)
        sc = forward_batch(spec, base, xor.features)
        errs.append(misclassification_rate(sc, xor.labels))
        amags.append(abs(loss.layout.view(r.params, "a")[0]))
    print(f"lam={lam}: {len(conv)}/képes{len(results)} converged in {dt:.1f}s; "
          f"iters median {np.median(iters):.0f} max {iters.max()}; "
          f"train errs {sorted(set(errs))}; max|a| {max(amags) if amags else float('nan'):.2e}; "
          f"reasons {set(r.reason for r in results)}")
