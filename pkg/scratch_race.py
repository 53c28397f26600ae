import sys
import time
import numpy as np
from landscape_lab import (
    Augmentation, AugmentedLoss, EmpiricalLossConfig, HingeLoss, NetworkSpec,
    OptimizerConfig, gen_xor, minimize, random_init,
)
from landscape_lab.losses import misclassification_rate

xor = gen_xor()
spec = NetworkSpec(2, (2,), "tanh")
n_seeds = 32

# (a) base-only dynamics: how often does width-2 tanh learn XOR to the flat region?
cfg0 = EmpiricalLossConfig(HingeLoss(3), 0.0, Augmentation.none())
loss0 = AugmentedLoss(xor, spec, cfg0)
for gate in (0.0, 0.1):
    ocfg = OptimizerConfig(max_iters=4000, newton_gate=gate)
    wins = 0
    t0 = time.time()
    for seed in range(n_seeds):
        r = minimize(loss0, random_init(spec, Augmentation.none(), 0.01, seed), ocfg, seed=seed)
        err = misclassification_rate(loss0.scores(r.params), xor.labels)
        if r.converged and err == 0.0:
            wins += 1
    print(f"base-only gate={gate}: {wins}/{n_seeds} reach certified zero-error ({time.time()-t0:.0f}s)")

# (b) augmented trap rate vs newton gate at larger budget
for lam in (0.01, 0.1):
    cfg = EmpiricalLossConfig(HingeLoss(3), lam, Augmentation.skip_exp())
    loss = AugmentedLoss(xor, spec, cfg)
    for gate in (0.0, 0.1):
        ocfg = OptimizerConfig(max_iters=8000, newton_gate=gate)
        conv = 0
        t0 = time.time()
        for seed in range(n_seeds):
            r = minimize(loss, random_init(spec, cfg.augmentation, 0.01, seed), ocfg, seed=seed)
            if r.converged:
                conv += 1
        print(f"aug lam={lam} gate={gate}: converged {conv}/{n_seeds} ({time.time()-t0:.0f}s)")
