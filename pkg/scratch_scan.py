import sys
import time

import numpy as np

from landscape_lab import (
    Augmentation, AugmentedLoss, EmpiricalLossConfig, HingeLoss, NetworkSpec,
    OptimizerConfig, gen_xor, multi_start,
)
from landscape_lab.augment import extract_base_params
from landscape_lab.networks import forward_batch
from landscape_lab.losses import misclassification_rate

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 40
max_iters = int(sys.argv[2]) if len(sys.argv) > 2 else 2000

xor = gen_xor()
spec = NetworkSpec(2, (2,), "tanh")
for lam in (0.01, 0.1):
    cfg = EmpiricalLossConfig(HingeLoss(3), lam, Augmentation.skip_exp())
    loss = AugmentedLoss(xor, spec, cfg)
    ocfg = OptimizerConfig(max_iters=max_iters)
    t0 = time.time()
    results = multi_start(loss, spec, n_seeds, ocfg)
    dt = time.time() - t0
    conv = [r for r in results if r.converged]
    errs = []
    for r in conv:
        base = extract_base_params(spec, cfg.augmentation, r.params)
        sc = forward_batch(spec, base, xor.features)
        errs.append(misclassification_rate(sc, xor.labels))
    bad_certified = sum(1 for e in errs if e > 0)
    it_conv = [r.iterations for r in conv]
    print(f"lam={lam}: converged {len(conv)}/{n_seeds} ({dt:.1f}s) "
          f"median iters {np.median(it_conv) if it_conv else float('nan'):.0f}; "
          f"certified-with-error>0: {bad_certified}; "
          f"stall reasons: {sorted(set(r.reason for r in results if not r.converged))}")
