"""The regularised aggregation kernel K_eps."""
import numpy as np


def k_eps(x, a: float, eps: float):
    """K_eps(x) = x / |x|^a for |x| >= eps, eps^{-a} x inside the ball.

    ``x`` has its components on the last axis. ``eps = 0`` gives the bare
    kernel with K(0) = 0.
    """
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1, keepdims=True))
    if eps > 0:
        scale = np.maximum(r, eps) ** (-a)
    else:
        with np.errstate(divide="ignore"):
            scale = np.where(r > 0, r ** (-a), 0.0)
    return x * scale
