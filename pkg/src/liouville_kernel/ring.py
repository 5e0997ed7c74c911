"""Small-ring completeness of the mode functions.

On the circle |z| = rho the functions phi_0 and rho^-k phi_k^{1,2} are close
to the trigonometric basis 1, cos(k theta), sin(k theta).  This module builds
the truncated operator T pairing the two families, measures how far it is
from the identity as rho shrinks, and uses it to expand ring data in the
mode functions.

Coefficient vectors are ordered (const, cos 1, sin 1, ..., cos K, sin K).
Row functionals are normalized so the leading part of T is exactly the
identity: (1/2pi) int . dtheta for the constant slot, (1/pi) int . dtheta for
the others.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ModeFunction, Part, ProblemParams, loglog_slope, phi_mode
from .exceptions import NotDiagonallyDominant

__all__ = [
    "PolarRing",
    "Parity",
    "TMatrix",
    "RingReconstruction",
    "default_n_theta",
    "ring_project",
    "trig_basis",
    "mode_basis",
    "t_matrix",
    "t_deviation_scaling",
    "ring_reconstruct",
    "raw_projections",
]


def default_n_theta(K: int) -> int:
    """max(256, 16K) rounded up to a power of two."""
    n = max(256, 16 * K)
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class PolarRing:
    rho: float
    n_theta: int = 256

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        n = self.n_theta
        if n < 64 or n & (n - 1):
            raise ValueError("n_theta must be a power of two >= 64")

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def z(self) -> np.ndarray:
        return self.rho * np.exp(1j * self.theta)


class Parity(enum.Enum):
    CONST = "const"
    COS = "cos"
    SIN = "sin"


def _values(f, ring: PolarRing) -> np.ndarray:
    if callable(f):
        return np.asarray(f(ring.z), dtype=float)
    vals = np.asarray(f, dtype=float)
    if vals.shape != (ring.n_theta,):
        raise ValueError("sampled ring data must have one value per quadrature node")
    return vals


def ring_project(f, ring: PolarRing, mode: int = 0, parity: Parity = Parity.CONST) -> float:
    """Normalized trapezoidal projection of ring data onto 1, cos or sin.

    ``f`` is either a callable of the complex ring points or an array of
    values at the quadrature nodes.
    """
    vals = _values(f, ring)
    if parity is Parity.CONST:
        return float(vals.mean())
    if mode < 1:
        raise ValueError("cos/sin projections need mode >= 1")
    trig = np.cos if parity is Parity.COS else np.sin
    return float(2.0 * np.mean(vals * trig(mode * ring.theta)))


def _normalization(K: int) -> np.ndarray:
    n = np.full(2 * K + 1, 1.0 / np.pi)
    n[0] = 1.0 / (2.0 * np.pi)
    return n


def trig_basis(theta: np.ndarray, K: int) -> np.ndarray:
    """Columns 1, cos(theta), sin(theta), ..., cos(K theta), sin(K theta)."""
    cols = [np.ones_like(theta)]
    for k in range(1, K + 1):
        cols += [np.cos(k * theta), np.sin(k * theta)]
    return np.stack(cols, axis=1)


def mode_basis(params: ProblemParams, z: np.ndarray, K: int, rho: float) -> np.ndarray:
    """Columns phi_0, rho^-k phi_k^1, rho^-k phi_k^2 for k = 1..K."""
    cols = [phi_mode(params, ModeFunction(0, Part.REAL), z)]
    for k in range(1, K + 1):
        cols.append(phi_mode(params, ModeFunction(k, Part.REAL), z, rescale=rho))
        cols.append(phi_mode(params, ModeFunction(k, Part.IMAG), z, rescale=rho))
    return np.stack(cols, axis=1)


def _spectral_norm(a: np.ndarray, iterations: int = 20) -> float:
    x = np.ones(a.shape[1]) / np.sqrt(a.shape[1])
    est = 0.0
    for _ in range(iterations):
        y = a.T @ (a @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        est = np.sqrt(nrm)
    return float(est)


@dataclass
class TMatrix:
    K: int
    rho: float
    entries: np.ndarray
    dev: float
    dev_spectral: float

    @property
    def deviation(self) -> np.ndarray:
        return self.entries - np.eye(self.entries.shape[0])


def t_matrix(
    params: ProblemParams, rho: float, K: int, n_theta: int | None = None
) -> TMatrix:
    """Entry (r, s): normalized pairing of mode function r with trig function s.

    ``dev`` is the max absolute row sum of T - I (an l-infinity operator
    norm); ``dev_spectral`` is a 20-step power-iteration estimate of the
    2-norm of the same matrix.
    """
    if rho ** params.order * (1.0 + abs(params.c)) >= 0.5:
        raise ValueError(f"rho={rho} is outside the small-ring regime")
    if K < params.N + 2:
        raise ValueError("K must be at least N+2")
    ring = PolarRing(rho, n_theta or default_n_theta(K))
    weights = 2.0 * np.pi / ring.n_theta
    modes = mode_basis(params, ring.z, K, rho)
    trig = trig_basis(ring.theta, K)
    entries = _normalization(K)[:, None] * (modes.T @ trig) * weights
    dev = entries - np.eye(2 * K + 1)
    return TMatrix(
        K=K,
        rho=rho,
        entries=entries,
        dev=float(np.abs(dev).sum(axis=1).max()),
        dev_spectral=_spectral_norm(dev),
    )


def t_deviation_scaling(params: ProblemParams, rhos, K: int, n_theta: int | None = None) -> float:
    """Log-log slope of ||T - I|| against rho; close to N+1 for c != 0."""
    rhos = np.asarray(rhos, dtype=float)
    devs = [t_matrix(params, r, K, n_theta).dev for r in rhos]
    return loglog_slope(rhos, devs)


@dataclass
class RingReconstruction:
    a: np.ndarray  # coefficients of phi_0, phi_1^1, ..., phi_K^1
    b: np.ndarray  # coefficients of phi_1^2, ..., phi_K^2 (b[0] unused, set to 0)
    scaled: np.ndarray  # coefficients in the rescaled basis, interleaved ordering
    error: float


def ring_reconstruct(
    params: ProblemParams,
    psi: Callable | np.ndarray,
    rho: float,
    K: int,
    n_theta: int | None = None,
) -> RingReconstruction:
    """Expand ring data in phi_0, phi_k^1, phi_k^2 (k <= K).

    If psi = sum_s x_s Phi_s in the rescaled mode basis, its normalized
    Fourier coefficients are f = G x with G = D T^t D^-1, D the diagonal of
    projection normalizations.  G inherits the distance from the identity of
    T, so the truncated system is solved directly.  ``error`` is the sup
    over a fresh, denser set of ring angles of psi minus the expansion.
    """
    tm = t_matrix(params, rho, K, n_theta)
    if tm.dev >= 0.5:
        raise NotDiagonallyDominant(f"||T - I|| = {tm.dev:.3g} >= 1/2 at rho={rho}")
    ring = PolarRing(rho, n_theta or default_n_theta(K))
    vals = _values(psi, ring)
    norm = _normalization(K)
    f = norm * (trig_basis(ring.theta, K).T @ vals) * (2.0 * np.pi / ring.n_theta)
    gram = norm[:, None] * tm.entries.T / norm[None, :]
    x = np.linalg.solve(gram, f)

    k = np.arange(1, K + 1)
    unscale = rho ** (-k.astype(float))
    a = np.concatenate([[x[0]], x[1::2] * unscale])
    b = np.concatenate([[0.0], x[2::2] * unscale])

    check = PolarRing(rho, 4 * ring.n_theta)
    offset = np.pi / check.n_theta
    zc = rho * np.exp(1j * (check.theta + offset))
    psi_c = np.asarray(psi(zc), dtype=float) if callable(psi) else None
    if psi_c is None:
        # sampled data: compare on the original nodes
        zc, psi_c = ring.z, vals
    approx = mode_basis(params, zc, K, rho) @ x
    return RingReconstruction(a=a, b=b, scaled=x, error=float(np.abs(psi_c - approx).max()))


def raw_projections(params: ProblemParams, rho: float, K: int, n_theta: int | None = None):
    """Unnormalized ring integrals against the unrescaled mode functions.

    Returns a dict with

    * ``"phi0"``: int phi_0 dtheta, int cos(k.) phi_0, int sin(k.) phi_0
      as a (2K+1,) array in the interleaved ordering;
    * ``"cos"``/``"sin"``: (K, K) arrays with [k-1, j-1] = int cos(k.) phi_j^i
      (resp. sin) for i = 1 (``"cos"``) and i = 2 (``"sin"``);
    * ``"cross_cos"``/``"cross_sin"``: int sin(k.) phi_j^1 and int cos(k.) phi_j^2.

    These are the integrals whose leading values are 2pi (constant slot),
    and pi rho^j delta_kj.
    """
    ring = PolarRing(rho, n_theta or default_n_theta(K))
    wts = 2.0 * np.pi / ring.n_theta
    z = ring.z
    th = ring.theta
    trig = trig_basis(th, K)
    phi0 = phi_mode(params, ModeFunction(0, Part.REAL), z)
    ones = {
        "phi0": trig.T @ phi0 * wts,
    }
    p1 = np.stack([phi_mode(params, ModeFunction(j, Part.REAL), z) for j in range(1, K + 1)], axis=1)
    p2 = np.stack([phi_mode(params, ModeFunction(j, Part.IMAG), z) for j in range(1, K + 1)], axis=1)
    cos_k = trig[:, 1::2]
    sin_k = trig[:, 2::2]
    ones["cos"] = cos_k.T @ p1 * wts
    ones["sin"] = sin_k.T @ p2 * wts
    ones["cross_cos"] = sin_k.T @ p1 * wts
    ones["cross_sin"] = cos_k.T @ p2 * wts
    return ones
