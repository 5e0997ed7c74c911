"""Mode-by-mode boundedness classification for the radial potential (c = 0).

With c = 0 the potential is radial and L separates in Fourier modes.  The
mode-k radial equation

    w'' + w'/r - k^2 w / r^2 + V(r) w = 0

has a regular singular point at r = 0; its regular (Frobenius) branch starts
like r^k.  Integrating that branch outward and reading off the growth rate at
large r tells whether the mode contributes a bounded kernel element.

Integration is done in s = log r on u = w / r^k, for which the equation is

    u'' + 2k u' + r^2 V(r) u = 0.

Starting data come from the Frobenius series u = 1 + a t + O(t^2) with
t = r^(2N+2) and a = -2(N+1)/(N+1+k); dropping the a t term would seed the
second (log r or r^-2k) branch at relative size t0.  For
k = N+1 the regular branch is the decaying one at infinity, which forward
integration can only follow if round-off is far below the r^(2k)
amplification of the growing branch; hence the multiprecision integrator.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .core import ProblemParams
from .rk import integrate, precision_for

__all__ = [
    "RadialMode",
    "Verdict",
    "GrowthClassification",
    "radial_potential",
    "closed_form_mode",
    "shoot_mode",
    "bounded_mode_set",
    "shooting_vs_closed_form",
    "CHECKPOINTS",
]

BOUNDED_SLOPE = 0.1
CHECKPOINTS = (1.0, 2.0, 5.0, 10.0)
_N_FIT = 11
_RENORM = mpfr(1e8)


@dataclass(frozen=True)
class RadialMode:
    k: int
    params: ProblemParams

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("mode index must be non-negative")
        if self.params.c != 0:
            raise ValueError("radial mode decomposition requires c = 0")


class Verdict(enum.Enum):
    BOUNDED = "bounded"
    GROWS = "grows"


@dataclass
class GrowthClassification:
    verdict: Verdict
    fitted_exponent: float
    terminal_value: float
    radii: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    steps: int = 0


def radial_potential(params: ProblemParams, r):
    """V at c = 0: 8 (N+1)^2 r^(2N) / (1 + r^(2N+2))^2."""
    if params.c != 0:
        raise ValueError("radial_potential requires c = 0")
    r = np.asarray(r, dtype=float)
    n1 = params.order
    v = 8.0 * n1 * n1 * r ** (2 * params.N) / (1.0 + r ** (2 * n1)) ** 2
    return v if v.ndim else float(v)


def closed_form_mode(params: ProblemParams, k: int, r):
    """Radial profile of phi_k at c = 0.

    w_k(r) = r^k ((k-N-1)/(N+1) + 2 / (1 + r^(2N+2))); the bracket is written
    so that the k = N+1 case (pure decay) carries no cancellation.
    """
    if params.c != 0:
        raise ValueError("closed_form_mode requires c = 0")
    r = np.asarray(r, dtype=float)
    n1 = params.order
    w = r**k * ((k - n1) / n1 + 2.0 / (1.0 + r ** (2 * n1)))
    return w if w.ndim else float(w)


@lru_cache(maxsize=512)
def _shoot(N: int, k: int, r0: float, r_max: float, tol: float, stops: tuple):
    n1 = N + 1
    with gmpy2.context(gmpy2.get_context(), precision=precision_for(tol)):
        coef = mpfr(8 * n1 * n1)
        two_k = mpfr(2 * k)
        two_n1 = 2 * n1

        def rhs(s, y):
            t = gmpy2.exp(two_n1 * s)
            return [y[1], -two_k * y[1] - coef * t / (1 + t) ** 2 * y[0]]

        log_scale = [0.0]

        def renorm(s, y):
            if abs(y[0]) > _RENORM:
                m = abs(y[0])
                log_scale[0] += float(gmpy2.log(m))
                return [y[0] / m, y[1] / m]
            return y

        # renormalization is logged per accepted step; stops record the
        # accumulated scale at the moment they are hit
        scales = {}

        def on_accept(s, y):
            y = renorm(s, y)
            scales[float(s)] = log_scale[0]
            return y

        t0 = mpfr(r0) ** two_n1
        a1 = mpfr(-two_n1) / (n1 + k)
        res = integrate(
            rhs,
            math.log(r0),
            math.log(r_max),
            [1 + a1 * t0, two_n1 * a1 * t0],
            tol,
            stops=[math.log(r) for r in stops],
            on_accept=on_accept,
        )
        out = []
        for r in stops:
            key = math.log(r)
            u = res["stops"][key][0]
            # log|w| = k log r + log|u| + accumulated renormalization
            sign = 1.0 if u >= 0 else -1.0
            logabs = k * key + (float(gmpy2.log(abs(u))) if u != 0 else -math.inf) + scales[key]
            out.append((sign, logabs))
    return tuple(out), res["accepted"]


def _stops(r_max: float) -> tuple:
    fit = np.geomspace(r_max / 10.0, r_max, _N_FIT)
    pts = sorted({*CHECKPOINTS, *(float(x) for x in fit), float(r_max)})
    return tuple(p for p in pts if p <= r_max)


def shoot_mode(
    mode: RadialMode, r0: float = 1e-6, r_max: float = 50.0, tol: float = 1e-20
) -> GrowthClassification:
    """Integrate the regular branch of mode ``k`` outward and classify it.

    The growth exponent is the least-squares slope of log|w| against log r
    over the last decade [r_max/10, r_max]; slopes below 0.1 are Bounded.
    """
    if not 0 < r0 < 1e-2:
        raise ValueError("r0 must be small and positive")
    if r_max < 50:
        raise ValueError("r_max must be at least 50")
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    stops = _stops(r_max)
    samples, steps = _shoot(mode.params.N, mode.k, float(r0), float(r_max), float(tol), stops)
    radii = np.array(stops)
    sign = np.array([s for s, _ in samples])
    logabs = np.array([la for _, la in samples])
    fit = radii >= r_max / 10.0 * (1 - 1e-12)
    slope = float(np.polyfit(np.log(radii[fit]), logabs[fit], 1)[0])
    values = sign * np.exp(logabs)
    return GrowthClassification(
        verdict=Verdict.BOUNDED if slope < BOUNDED_SLOPE else Verdict.GROWS,
        fitted_exponent=slope,
        terminal_value=float(values[-1]),
        radii=radii,
        values=values,
        steps=steps,
    )


def bounded_mode_set(params: ProblemParams, K_max: int, **shoot_kw) -> set[int]:
    """Modes k <= K_max whose regular radial solution stays bounded."""
    if K_max < params.N + 2:
        raise ValueError("K_max must be at least N+2")
    return {
        k
        for k in range(K_max + 1)
        if shoot_mode(RadialMode(k, params), **shoot_kw).verdict is Verdict.BOUNDED
    }


def shooting_vs_closed_form(
    mode: RadialMode, r_max: float = 50.0, r0: float = 1e-6, tol: float = 1e-20
) -> float:
    """Max relative deviation of the shot solution from alpha * w_k.

    alpha is fixed by the Frobenius normalization w ~ r^k at the origin,
    alpha = (N+1)/(N+1+k); checkpoints are r = 1, 2, 5, 10, r_max.
    """
    res = shoot_mode(mode, r0=r0, r_max=r_max, tol=tol)
    k, p = mode.k, mode.params
    n1 = p.order
    alpha = n1 / (n1 + k)
    worst = 0.0
    for r in (*CHECKPOINTS, r_max):
        i = int(np.argmin(np.abs(res.radii - r)))
        exact = alpha * closed_form_mode(p, k, r)
        worst = max(worst, abs(res.values[i] - exact) / max(abs(exact), 1e-8))
    return worst
