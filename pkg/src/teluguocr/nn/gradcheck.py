"""Central finite-difference gradient checking on a float64 shadow net."""

from __future__ import annotations

import numpy as np

from .network import Network, NetworkSpec


def finite_difference_check(
    spec: NetworkSpec,
    x: np.ndarray,
    y: np.ndarray,
    seed: int = 0,
    h: float = 1e-5,
    max_entries_per_tensor: int = 24,
    entry_rng_seed: int = 0,
) -> float:
    """Max relative error between analytic and numeric parameter gradients.

    The network runs in float64; the dropout seed is held fixed so both
    gradient evaluations see identical masks.  For large tensors a seeded
    subset of entries is probed.
    """
    net = Network(spec, seed=seed, dtype=np.float64)
    _, grads = net.loss_and_grad(x, y, seed=seed)
    rng = np.random.default_rng(entry_rng_seed)
    worst = 0.0
    for p, g in zip(net.params, grads):
        flat_p = p.ravel()
        flat_g = g.ravel()
        if p.size <= max_entries_per_tensor:
            entries = np.arange(p.size)
        else:
            entries = rng.choice(p.size, size=max_entries_per_tensor, replace=False)
        for k in entries:
            orig = flat_p[k]
            flat_p[k] = orig + h
            lo_plus, _ = net.loss_and_grad(x, y, seed=seed)
            flat_p[k] = orig - h
            lo_minus, _ = net.loss_and_grad(x, y, seed=seed)
            flat_p[k] = orig
            numeric = (lo_plus - lo_minus) / (2 * h)
            # the difference quotient carries rounding noise of order
            # eps * |loss| / h; entries whose true gradient sits below that
            # floor cannot be resolved and must not dominate the check
            noise = 64.0 * np.finfo(np.float64).eps * max(abs(lo_plus), 1.0) / h
            denom = max(abs(numeric) + abs(flat_g[k]), 1e-8)
            err = max(abs(numeric - flat_g[k]) - noise, 0.0)
            worst = max(worst, err / denom)
    return worst
