"""Central finite-difference stencils (5-point) used wherever no analytic derivative exists."""

from __future__ import annotations

import numpy as np

# per-order default steps: truncation vs roundoff balance
H1 = 1e-6
H2 = 1e-5
H3 = 1e-3


def d1(f, x, h: float = H1):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def d2(f, x, h: float = H2):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def d3(f, x, h: float = H3):
    return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)


def derivative(f, x, order: int, h: float | None = None):
    """Derivative of ``f`` at ``x`` of the given order (0..3); ``f`` may be vector valued."""
    if order == 0:
        return f(x)
    if order == 1:
        return d1(f, x, H1 if h is None else h)
    if order == 2:
        return d2(f, x, H2 if h is None else h)
    if order == 3:
        # third derivative always uses the wide step; smaller h amplifies roundoff
        return d3(f, x, H3)
    raise ValueError(f"derivative order must be 0..3, got {order}")


def as_float_array(v) -> np.ndarray:
    return np.asarray(v, dtype=float)
