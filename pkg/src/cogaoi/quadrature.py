"""Adaptive Simpson quadrature."""
from __future__ import annotations

import math
from typing import Callable


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     rel_tol: float = 1e-9, abs_tol: float = 1e-300,
                     max_depth: int = 40) -> float:
    """Integrate ``f`` over ``[a, b]`` by recursive Simpson bisection.

    Subintervals are accepted by the Lyness criterion ``|S2 - S1| <= 15 eps``
    with Richardson correction.  The tolerance ``eps`` is
    ``max(abs_tol, rel_tol * |I0|)`` where ``I0`` is a 64-panel composite
    Simpson estimate of the whole integral, so ``rel_tol`` is relative to the
    integral rather than to each piece.

    Raises QuadratureError if a subinterval still fails the test at
    ``max_depth`` bisections or if ``f`` returns a non-finite value.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, rel_tol, abs_tol, max_depth)

    n = 64
    h = (b - a) / n
    xs = [a + i * h for i in range(n + 1)]
    fs = [f(x) for x in xs]
    if not all(math.isfinite(v) for v in fs):
        raise QuadratureError("integrand is not finite on the sampling grid")
    rough = h / 3.0 * (fs[0] + fs[-1] + 4.0 * sum(fs[1:-1:2]) + 2.0 * sum(fs[2:-1:2]))
    eps = max(abs_tol, rel_tol * abs(rough))

    total = 0.0
    # each coarse panel pair is refined independently; eps is split by width
    for i in range(0, n, 2):
        x0, x2 = xs[i], xs[i + 2]
        whole = (x2 - x0) / 6.0 * (fs[i] + 4.0 * fs[i + 1] + fs[i + 2])
        total += _refine(f, x0, x2, fs[i], fs[i + 1], fs[i + 2], whole,
                         eps * (x2 - x0) / (b - a), max_depth)
    return total


def _refine(f, a, b, fa, fm, fb, whole, eps, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    if not (math.isfinite(flm) and math.isfinite(frm)):
        raise QuadratureError(f"integrand is not finite near x={m}")
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * eps:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(f"no convergence on [{a}, {b}] at maximum depth")
    return (_refine(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + _refine(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1))
