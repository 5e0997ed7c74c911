"""Closed-form building blocks of the linearized singular Liouville problem.

Everything here is a pure function of a :class:`ProblemParams` instance and
complex evaluation points.  All functions accept numpy arrays of points and
broadcast; scalars in, scalars out.

Notation used throughout the package::

    w(z)      = z**(N+1) - c
    V(z)      = 8 (N+1)^2 |z|^(2N) / (1 + |w|^2)^2          (potential)
    L(phi)    = Laplacian(phi) + V phi
    phi_k(z)  = z^k ((N+1+k)/(N+1) - 2 z^(N+1) conj(w) / (1 + |w|^2))
    Z0, Z1, Z2 = (1-|w|^2)/(1+|w|^2), Re w/(1+|w|^2), Im w/(1+|w|^2)
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateFit, SingularPoint

__all__ = [
    "ProblemParams",
    "ComplexSample",
    "Part",
    "ModeFunction",
    "KernelBasisValue",
    "BasisChangeMatrix",
    "ipow",
    "potential",
    "solution_u",
    "phi_mode",
    "kernel_basis",
    "basis_change_matrix",
    "asymptotic_decay_fit",
    "loglog_slope",
]


@dataclass(frozen=True)
class ProblemParams:
    """The vortex multiplicity ``N`` and the complex translation ``c``."""

    N: int
    c: complex = 0j

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ValueError(f"N must be an integer, got {self.N!r}")
        if self.N < 0:
            raise ValueError(f"N must be non-negative, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "c", complex(self.c))

    @property
    def c1(self) -> float:
        return self.c.real

    @property
    def c2(self) -> float:
        return self.c.imag

    @property
    def order(self) -> int:
        """The exponent N+1 of the holomorphic map z -> z^(N+1) - c."""
        return self.N + 1

    def w(self, z):
        return ipow(z, self.order) - self.c


@dataclass(frozen=True)
class ComplexSample:
    """An evaluation point together with its cached ``w = z^(N+1) - c``."""

    params: ProblemParams
    z: complex
    w: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "w", complex(self.params.w(complex(self.z))))

    def rebind(self, params: ProblemParams) -> "ComplexSample":
        return ComplexSample(params, self.z)


class Part(enum.Enum):
    COMPLEX = "complex"
    REAL = "real"
    IMAG = "imag"


@dataclass(frozen=True)
class ModeFunction:
    """Selects phi_k, or its normalized real or imaginary part."""

    k: int
    part: Part = Part.COMPLEX

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("mode index k must be non-negative")
        if self.part is Part.IMAG and self.k == 0:
            raise ValueError("the imaginary part is only a kernel candidate for k >= 1")

    def normalization(self, params: ProblemParams) -> float:
        if self.part is Part.COMPLEX:
            return 1.0
        return params.order / (params.order + self.k)


@dataclass(frozen=True)
class KernelBasisValue:
    Z0: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([np.asarray(self.Z0), np.asarray(self.Z1), np.asarray(self.Z2)])


@dataclass(frozen=True)
class BasisChangeMatrix:
    entries: np.ndarray
    det: float


def ipow(z, n: int):
    """Integer power by binary exponentiation (no log/exp branch cut)."""
    if n < 0:
        raise ValueError("negative exponent")
    z = np.asarray(z, dtype=complex)
    result = np.ones_like(z)
    base = z
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result if result.ndim else complex(result)


def _abs2(x):
    return x.real * x.real + x.imag * x.imag


def potential(params: ProblemParams, z):
    """V(z) = 8 (N+1)^2 |z|^(2N) / (1 + |z^(N+1) - c|^2)^2."""
    z = np.asarray(z, dtype=complex)
    n1 = params.order
    weight = _abs2(z) ** params.N
    v = 8.0 * n1 * n1 * weight / (1.0 + _abs2(params.w(z))) ** 2
    return v if v.ndim else float(v)


def solution_u(params: ProblemParams, tau: complex, k: int, z):
    """Member U_{tau,k} of the explicit solution family of Lap U + |z|^(2N) e^U = 0.

    Raises :class:`SingularPoint` where 1 + tau (N+1+k)/(N+1) z^k vanishes.
    """
    z = np.asarray(z, dtype=complex)
    n1 = params.order
    zk = ipow(z, k)
    g = 1.0 + tau * (n1 + k) / n1 * zk
    g2 = _abs2(g)
    if np.any(g2 == 0.0):
        raise SingularPoint(f"1 + tau*(N+1+k)/(N+1)*z^k vanishes (tau={tau}, k={k})")
    f = ipow(z, n1) * (1.0 + tau * zk) - params.c
    u = np.log(8.0 * n1 * n1 * g2) - 2.0 * np.log1p(_abs2(f))
    return u if u.ndim else float(u)


def _pull(params: ProblemParams, z):
    """2 z^(N+1) conj(w) / (1 + |w|^2), the common nonlinear factor of every mode."""
    zn = ipow(z, params.order)
    w = zn - params.c
    return 2.0 * zn * np.conj(w) / (1.0 + _abs2(w))


def phi_mode(params: ProblemParams, mode: ModeFunction, z, rescale: float | None = None):
    """Evaluate phi_k (or its normalized real/imaginary part).

    With ``rescale=rho`` the value is divided by ``rho**k``; the power is
    formed as ``(z/rho)**k`` so it stays finite for large ``k`` on small rings.
    """
    z = np.asarray(z, dtype=complex)
    k = mode.k
    zk = ipow(z / rescale, k) if rescale is not None else ipow(z, k)
    n1 = params.order
    val = zk * ((n1 + k) / n1 - _pull(params, z))
    if mode.part is Part.COMPLEX:
        out = val
        return out if np.ndim(out) else complex(out)
    scale = mode.normalization(params)
    out = scale * (val.real if mode.part is Part.REAL else val.imag)
    return out if np.ndim(out) else float(out)


def kernel_basis(params: ProblemParams, z) -> KernelBasisValue:
    """The three bounded kernel functions (Z0, Z1, Z2) at ``z``."""
    z = np.asarray(z, dtype=complex)
    w = params.w(z)
    den = 1.0 + _abs2(w)
    z0 = (1.0 - _abs2(w)) / den
    z1 = w.real / den
    z2 = w.imag / den
    if np.ndim(z0) == 0:
        return KernelBasisValue(float(z0), float(z1), float(z2))
    return KernelBasisValue(z0, z1, z2)


def basis_change_matrix(params: ProblemParams) -> BasisChangeMatrix:
    """M(c) with (phi_0, phi_{N+1}^1, phi_{N+1}^2) = M(c) (Z0, Z1, Z2) pointwise."""
    c1, c2 = params.c1, params.c2
    m = np.array(
        [
            [1.0, -2.0 * c1, -2.0 * c2],
            [c1, 1.0 - c1 * c1 + c2 * c2, -2.0 * c1 * c2],
            [c2, -2.0 * c1 * c2, 1.0 + c1 * c1 - c2 * c2],
        ]
    )
    return BasisChangeMatrix(entries=m, det=float(np.linalg.det(m)))


def loglog_slope(x, y) -> float:
    """Least-squares slope of log|y| against log x."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if x.size < 3:
        raise DegenerateFit(f"need at least 3 points for a slope fit, got {x.size}")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def asymptotic_decay_fit(params: ProblemParams, radii, n_angles: int = 64) -> float:
    """Log-log slope of sup_theta |z^(N+1) conj(w)/(1+|w|^2) - 1| over ``radii``.

    The factor tends to 1 like |z|^-(N+1) (faster when c = 0), which is what
    makes phi_k ~ ((k-N-1)/(N+1)) z^k at infinity.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3:
        raise DegenerateFit("asymptotic_decay_fit needs at least 3 radii")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if radii[0] ** params.order <= 2.0 * (1.0 + abs(params.c)):
        raise ValueError("smallest radius is not in the asymptotic regime")
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    z = radii[:, None] * np.exp(1j * theta)[None, :]
    dev = np.abs(0.5 * _pull(params, z) - 1.0).max(axis=1)
    return loglog_slope(radii, dev)
