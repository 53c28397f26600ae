import numpy as np
from landscape_lab import (
    Augmentation, AugmentedLoss, EmpiricalLossConfig, HingeLoss, NetworkSpec,
    OptimizerConfig, gen_xor, minimize, random_init,
)
from landscape_lab.autodiff import dense_hessian, value_and_grad
from landscape_lab.optimize import _eig_decomposition, _newton_direction

xor = gen_xor()
spec = NetworkSpec(2, (2,), "tanh")
cfg = EmpiricalLossConfig(HingeLoss(3), 0.01, Augmentation.skip_exp())
loss = AugmentedLoss(xor, spec, cfg)

init = random_init(spec, cfg.augmentation, 0.01, 1)
r = minimize(loss, init, OptimizerConfig(max_iters=2000), seed=1)
p = r.params.copy()
w = loss.layout.view(p, "w"); b = loss.layout.view(p, "b")[0]; a = loss.layout.view(p, "a")[0]
print("a", a, "w", w, "b", b)
print("exp args:", xor.features @ w + b)
print("exp vals:", np.exp(xor.features @ w + b))
print("margins:", xor.labels * loss.scores(p))
print("base margins:", xor.labels * loss.base_scores(p))
val, g = value_and_grad(loss, p)
print("val", val, "gn", np.linalg.norm(g))
eigvals, eigvecs = _eig_decomposition(loss, p)
print("eigvals:", np.array2string(eigvals, precision=3))
d = _newton_direction(eigvals, eigvecs, g)
print("newton dir none?", d is None)
if d is not None:
    print("slope", d @ g, "|d|", np.linalg.norm(d))
    for t in [1.0, 0.5, 0.1]:
        print("  t", t, "dloss", loss.value(p + t * d) - val)
# what if we simply zero a?
p2 = p.copy(); loss.layout.view(p2, "a")[0] = 0.0
print("loss with a=0:", loss.value(p2), "vs", val)
v2, g2 = value_and_grad(loss, p2)
print("grad norm with a=0:", np.linalg.norm(g2))
