import numpy as np
from landscape_lab import (
    Augmentation, AugmentedLoss, EmpiricalLossConfig, HingeLoss, NetworkSpec,
    OptimizerConfig, gen_xor, minimize, random_init,
)
from landscape_lab.autodiff import dense_hessian, min_eigenvalue

xor = gen_xor()
spec = NetworkSpec(2, (2,), "tanh")
cfg = EmpiricalLossConfig(HingeLoss(3), 0.01, Augmentation.skip_exp())
loss = AugmentedLoss(xor, spec, cfg)
ocfg = OptimizerConfig(max_iters=20000, record_history=True)

for seed in range(4):
    init = random_init(spec, cfg.augmentation, 0.01, seed)
    r = minimize(loss, init, ocfg, seed=seed)
    h = np.array(r.history)
    checkpoints = [0, 100, 1000, 5000, 10000, len(h) - 1]
    vals = " ".join(f"{i}:{h[min(i, len(h)-1)]:.3e}" for i in checkpoints)
    g = loss.grad(r.params)
    H = dense_hessian(loss, r.params)
    eig = min_eigenvalue(H)
    a = loss.layout.view(r.params, "a")[0]
    sc = loss.scores(r.params)
    margins = xor.labels * sc
    print(f"seed {seed}: reason={r.reason} iters={r.iterations} loss={r.loss:.3e} "
          f"gn={r.grad_norm:.2e} eig={eig:.2e} a={a:.2e} perturbs={len(r.perturbations)}")
    print(f"   loss trace {vals}")
    print(f"   margins {np.array2string(margins, precision=3)}")
