"""Independent numerical oracles. Nothing here imports isp_qos."""

import numpy as np
from scipy import optimize


def simpson(f, a, b, panels=10_000):
    """Composite Simpson rule; ``panels`` is rounded up to an even count."""
    n = panels + panels % 2
    x = np.linspace(a, b, n + 1)
    y = np.asarray(f(x), dtype=float)
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return (b - a) / (3 * n) * float(w @ y)


def grid_argmax(f, lo, hi, step):
    x = np.arange(lo, hi + step / 2, step)
    return float(x[np.argmax(f(x))])


def bisect_root(f, lo, hi):
    return optimize.bisect(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def central_diff(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)
