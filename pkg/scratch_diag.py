import numpy as np
from landscape_lab import (
    Augmentation, AugmentedLoss, EmpiricalLossConfig, HingeLoss, NetworkSpec,
    OptimizerConfig, gen_xor, minimize, random_init,
)

xor = gen_xor()
spec = NetworkSpec(2, (2,), "tanh")
for lam in (0.01, 0.1):
    cfg = EmpiricalLossConfig(HingeLoss(3), lam, Augmentation.skip_exp())
    loss = AugmentedLoss(xor, spec, cfg)
    ocfg = OptimizerConfig(max_iters=2000)
    stalled = []
    for seed in range(24):
        r = minimize(loss, random_init(spec, cfg.augmentation, 0.01, seed), ocfg, seed=seed)
        if not r.converged:
            a = loss.layout.view(r.params, "a")[0]
            w = loss.layout.view(r.params, "w")
            b = loss.layout.view(r.params, "b")[0]
            margins = xor.labels * loss.scores(r.params)
            bmargins = xor.labels * loss.base_scores(r.params)
            stalled.append((seed, r.loss, r.grad_norm, a, margins.min(), bmargins.min(),
                            np.max(xor.features @ w + b), len(r.perturbations)))
    print(f"lam={lam}: {len(stalled)} stalled of 24")
    for s in stalled:
        print(f"  seed {s[0]:2d} loss={s[1]:.2e} gn={s[2]:.2e} a={s[3]:+.2e} "
              f"min_margin={s[4]:+.3f} min_base_margin={s[5]:+.3f} max_exparg={s[6]:+.1f} pert={s[7]}")
