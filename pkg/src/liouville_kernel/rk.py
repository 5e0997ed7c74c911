"""Adaptive Runge-Kutta-Fehlberg 7(8) integration in multiprecision.

The tableau is kept as exact fractions and converted to ``gmpy2.mpfr`` at
the working precision, so the order conditions hold to that precision and
not merely to double rounding.  The 8th-order solution is propagated (local
extrapolation); the error estimate is the difference to the 7th-order one.

References
----------
E. Fehlberg, "Classical fifth-, sixth-, seventh-, and eighth-order
Runge-Kutta formulas with stepsize control", NASA TR R-287 (1968).
"""
from __future__ import annotations

import math
from fractions import Fraction as F
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpfr

from .exceptions import StepFailure

__all__ = ["NODES", "MATRIX", "WEIGHTS_7", "WEIGHTS_8", "precision_for", "integrate"]

NODES = [F(0), F(2, 27), F(1, 9), F(1, 6), F(5, 12), F(1, 2), F(5, 6), F(1, 6), F(2, 3), F(1, 3), F(1), F(0), F(1)]

MATRIX = [
    [],
    [F(2, 27)],
    [F(1, 36), F(1, 12)],
    [F(1, 24), 0, F(1, 8)],
    [F(5, 12), 0, F(-25, 16), F(25, 16)],
    [F(1, 20), 0, 0, F(1, 4), F(1, 5)],
    [F(-25, 108), 0, 0, F(125, 108), F(-65, 27), F(125, 54)],
    [F(31, 300), 0, 0, 0, F(61, 225), F(-2, 9), F(13, 900)],
    [F(2), 0, 0, F(-53, 6), F(704, 45), F(-107, 9), F(67, 90), F(3)],
    [F(-91, 108), 0, 0, F(23, 108), F(-976, 135), F(311, 54), F(-19, 60), F(17, 6), F(-1, 12)],
    [F(2383, 4100), 0, 0, F(-341, 164), F(4496, 1025), F(-301, 82), F(2133, 4100), F(45, 82), F(45, 164), F(18, 41)],
    [F(3, 205), 0, 0, 0, 0, F(-6, 41), F(-3, 205), F(-3, 41), F(3, 41), F(6, 41), 0],
    [F(-1777, 4100), 0, 0, F(-341, 164), F(4496, 1025), F(-289, 82), F(2193, 4100), F(51, 82), F(33, 164), F(12, 41), 0, 1],
]

WEIGHTS_7 = [F(41, 840), 0, 0, 0, 0, F(34, 105), F(9, 35), F(9, 35), F(9, 280), F(9, 280), F(41, 840), 0, 0]
WEIGHTS_8 = [0, 0, 0, 0, 0, F(34, 105), F(9, 35), F(9, 35), F(9, 280), F(9, 280), 0, F(41, 840), F(41, 840)]

_SAFETY = 0.9
_GROW_MAX = 5.0
_SHRINK_MIN = 0.2


def precision_for(tol: float) -> int:
    """Working precision in bits for a given local tolerance."""
    return max(64, math.ceil(-math.log2(tol)) + 40)


def _to_mp(x) -> mpfr:
    x = F(x)
    return mpfr(x.numerator) / x.denominator


def integrate(
    rhs: Callable[[mpfr, list], list],
    s0: float,
    s1: float,
    y0: Sequence,
    tol: float,
    stops: Sequence[float] = (),
    h0: float = 1e-2,
    h_max: float = 0.25,
    max_steps: int = 2_000_000,
    on_accept: Callable[[mpfr, list], list] | None = None,
) -> dict:
    """Integrate y' = rhs(s, y) from ``s0`` to ``s1`` (``s1 > s0``).

    Must be called inside a ``gmpy2`` context of the desired precision.
    The step controller keeps max_i |err_i| <= tol * max_i |y_i| (pure
    relative control on the state norm).  Every value in ``stops`` is hit
    exactly and the state there is returned in ``result["stops"]``.
    Steps are capped at ``h_max``: the embedded estimate only samples four
    stages and can vanish by accident while the solution is nearly flat,
    which would otherwise let the step jump over the region where the
    right-hand side switches on.  ``on_accept`` may rescale the state after each accepted step and returns
    the (possibly rescaled) state.
    """
    a = [[(j, _to_mp(v)) for j, v in enumerate(row) if v] for row in MATRIX]
    c = [_to_mp(v) for v in NODES]
    b8 = [(j, _to_mp(v)) for j, v in enumerate(WEIGHTS_8) if v]
    err_w = _to_mp(F(41, 840))

    s = mpfr(s0)
    end = mpfr(s1)
    targets = sorted({mpfr(t) for t in stops if s0 < t <= s1} | {end})
    y = [mpfr(v) for v in y0]
    dim = len(y)
    h = mpfr(h0)
    tol_mp = mpfr(tol)
    hmin = mpfr(2) ** (-(gmpy2.get_context().precision // 2))
    out = {}
    n_acc = n_rej = 0
    ti = 0

    while ti < len(targets):
        target = targets[ti]
        hh = min(h, target - s)
        ks = []
        for i in range(13):
            if i == 0:
                yi = y
            else:
                yi = [y[d] + hh * sum(aij * ks[j][d] for j, aij in a[i]) for d in range(dim)]
            ks.append(rhs(s + c[i] * hh, yi))
        err = max(abs(hh * err_w * (ks[0][d] + ks[10][d] - ks[11][d] - ks[12][d])) for d in range(dim))
        scale = max(abs(v) for v in y)
        ratio = err / (tol_mp * scale) if scale > 0 else mpfr(0)
        if ratio <= 1:
            y = [y[d] + hh * sum(bj * ks[j][d] for j, bj in b8) for d in range(dim)]
            s = target if hh == target - s else s + hh
            n_acc += 1
            if on_accept is not None:
                y = on_accept(s, y)
            if s == target:
                out[float(target)] = list(y)
                ti += 1
        else:
            n_rej += 1
        fac = _SAFETY * float(ratio) ** (-1.0 / 8.0) if ratio > 0 else _GROW_MAX
        h = min(hh * mpfr(min(_GROW_MAX, max(_SHRINK_MIN, fac))), mpfr(h_max))
        if h < hmin * max(1, abs(s)):
            raise StepFailure(f"step size underflow at s={float(s):.6g}")
        if n_acc + n_rej > max_steps:
            raise StepFailure(f"more than {max_steps} steps")
    return {"y": y, "stops": out, "accepted": n_acc, "rejected": n_rej}
