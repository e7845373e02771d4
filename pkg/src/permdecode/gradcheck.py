"""Central-difference check of the analytic MLP gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .neural import MlpSpec, init_weights, loss_and_grad

# Gradients below this magnitude are compared on an absolute scale: a central
# difference with step 1e-5 carries roughly 1e-10 of rounding error.
REL_FLOOR = 1e-5


@dataclass
class GradCheckResult:
    spec: MlpSpec
    max_rel_error: float
    worst_param: str
    checked: int


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), REL_FLOOR)
    return np.abs(analytic - numeric) / scale


def random_config(rng: np.random.Generator, max_hidden: int = 16):
    """A small random spec, perturbed weights, a batch of inputs and targets."""
    n = int(rng.integers(3, 6))
    h = int(rng.integers(2, max_hidden + 1))
    rate = float(rng.choice([0.0, 0.1, 0.3]))
    if rng.random() < 0.5:
        spec = MlpSpec.rm(n, h, embed_dim=int(rng.integers(2, n + 2)), dropout_rate=rate)
    else:
        spec = MlpSpec.plc(n, n + int(rng.integers(0, 4)), h, dropout_rate=rate)
    w = init_weights(spec, int(rng.integers(2**31)))
    for p in w.params.values():
        p += rng.normal(0.0, 0.3, p.shape)
    batch = int(rng.integers(1, 5))
    if spec.embedded:
        x = rng.integers(1, n + 1, size=(batch, n))
    else:
        x = rng.integers(0, 2, size=(batch, n, spec.width))
    t = np.array([rng.permutation(n) + 1 for _ in range(batch)])
    return w, x, t


def check_gradients(w, x, t, step: float = 1e-5, dropout_seed: int | None = 0) -> GradCheckResult:
    """Compare every analytic partial derivative with a central difference.

    With ``dropout_seed`` set the network runs in train mode, and each loss
    evaluation reuses the same dropout mask.
    """
    train = dropout_seed is not None

    def evaluate():
        rng = np.random.default_rng(dropout_seed) if train else None
        return loss_and_grad(w, x, t, train=train, rng=rng)

    _, grads = evaluate()
    worst, worst_name, checked = 0.0, "", 0
    for name, p in w.params.items():
        numeric = np.empty_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + step
            up = evaluate()[0]
            p[idx] = old - step
            down = evaluate()[0]
            p[idx] = old
            numeric[idx] = (up - down) / (2 * step)
        err = relative_error(grads[name], numeric)
        checked += err.size
        if err.size and err.max() > worst:
            worst, worst_name = float(err.max()), name
    return GradCheckResult(w.spec, worst, worst_name, checked)


def run_gradcheck(configs: int = 20, seed: int = 0) -> list[GradCheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(configs):
        w, x, t = random_config(rng)
        results.append(check_gradients(w, x, t, dropout_seed=int(rng.integers(2**31))))
    return results
