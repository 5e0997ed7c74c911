"""Polar-Fourier discretization of L = Lap + V on a large disk.

Unknowns are the coefficients of u(r_i, .) in the real orthonormal angular
basis 1/sqrt(2pi), cos(m theta)/sqrt(pi), sin(m theta)/sqrt(pi), m = 1..M,
at staggered radial nodes r_i = (i - 1/2) h.  With this placement the radial
flux r u_r is sampled at r_(i+1/2) = i h, so the first flux sits exactly at
the origin where it vanishes and no special origin closure is needed; node
n_r lands on r = R and carries the Dirichlet data.

The assembled matrix represents -L.  Writing the finite-volume form as
S u = r (-L_h u), the stored matrix is A = D^-1/2 S D^-1/2 with D = diag(r_i),
which is exactly symmetric.  A vector y of A corresponds to the field
u = y / sqrt(r h), so unit Euclidean norm of y is unit discrete L2(r dr dtheta)
norm of u.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import optimize, special

from .core import ProblemParams, kernel_basis, potential
from .exceptions import FactorizationSingular, InvalidGrid, SingularTruncation
from .shooting import radial_potential

__all__ = [
    "BoundaryCondition",
    "DiskGrid",
    "DiscreteOperator",
    "EigenReport",
    "angular_potential_coefficients",
    "assemble_operator",
    "assemble_radial",
    "near_kernel",
    "near_kernel_retry",
    "dirichlet_extension_check",
    "bessel_j01",
    "uniqueness_gap",
    "uniqueness_threshold",
]

GAP_FACTOR = 10.0
_SHIFT_RETRIES = 3


class BoundaryCondition(enum.Enum):
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class DiskGrid:
    R: float
    n_r: int
    M: int
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET
    n_theta: int | None = None

    def __post_init__(self):
        if self.R < 20:
            raise InvalidGrid(f"R must be at least 20, got {self.R}")
        if self.n_r < 64:
            raise InvalidGrid(f"n_r must be at least 64, got {self.n_r}")
        if self.M < 1:
            raise InvalidGrid("M must be positive")
        if self.n_theta is not None and self.n_theta < 8 * self.M:
            raise InvalidGrid("n_theta must be at least 8M")

    @property
    def h(self) -> float:
        return self.R / (self.n_r - 0.5)

    @property
    def radii(self) -> np.ndarray:
        """Interior (unknown) radial nodes; the boundary node r = R is excluded."""
        return (np.arange(1, self.n_r) - 0.5) * self.h

    @property
    def angles(self) -> int:
        if self.n_theta is not None:
            return self.n_theta
        n = max(256, 16 * self.M)
        return 1 << (n - 1).bit_length()

    def perturbed(self, factor: float) -> "DiskGrid":
        return DiskGrid(self.R * factor, self.n_r, self.M, self.bc, self.n_theta)


def _angular_basis(theta: np.ndarray, M: int) -> np.ndarray:
    cols = [np.full_like(theta, 1.0 / np.sqrt(2.0 * np.pi))]
    for m in range(1, M + 1):
        cols += [np.cos(m * theta) / np.sqrt(np.pi), np.sin(m * theta) / np.sqrt(np.pi)]
    return np.stack(cols, axis=1)


def _mode_numbers(M: int) -> np.ndarray:
    return np.array([0] + [m for m in range(1, M + 1) for _ in (0, 1)])


def angular_potential_coefficients(params: ProblemParams, r, M: int, n_theta: int) -> np.ndarray:
    """V_m(r) = (1/2pi) int V(r e^(i theta)) e^(-i m theta) dtheta for m = -M..M.

    Returns an array of shape (..., 2M+1) with m = -M at index 0.
    Coefficients below the quadrature noise floor (64 eps times the largest
    sample) are set to zero, so that a radial potential gives exactly
    decoupled modes.
    """
    if n_theta < 8 * M:
        raise ValueError("n_theta must be at least 8M")
    r = np.asarray(r, dtype=float)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = r[..., None] * np.exp(1j * theta)
    vals = potential(params, z)
    coef = np.fft.fft(vals, axis=-1) / n_theta
    floor = 64.0 * np.finfo(float).eps * max(float(np.abs(vals).max()), 1e-300)
    coef.real[np.abs(coef.real) < floor] = 0.0
    coef.imag[np.abs(coef.imag) < floor] = 0.0
    idx = np.arange(-M, M + 1) % n_theta
    return coef[..., idx]


def _coupling(vm: np.ndarray, M: int) -> np.ndarray:
    """Matrix of int V e_a e_b dtheta per radius, from V_m with |m| <= 2M.

    ``vm`` has shape (n, 4M+1) with m = -2M at index 0.
    """
    n = vm.shape[0]
    nb = 2 * M + 1

    def V(m):
        return vm[:, m + 2 * M]

    s2 = np.sqrt(2.0)
    W = np.zeros((n, nb, nb))
    W[:, 0, 0] = V(0).real
    for m in range(1, M + 1):
        ca, sa = 2 * m - 1, 2 * m
        W[:, 0, ca] = W[:, ca, 0] = s2 * V(m).real
        W[:, 0, sa] = W[:, sa, 0] = -s2 * V(m).imag
        for q in range(1, M + 1):
            cb, sb = 2 * q - 1, 2 * q
            if q >= m:
                cc = V(m - q).real + V(m + q).real
                ss = V(m - q).real - V(m + q).real
                W[:, ca, cb] = W[:, cb, ca] = cc
                W[:, sa, sb] = W[:, sb, sa] = ss
            cs = -V(m + q).imag - V(q - m).imag
            W[:, ca, sb] = W[:, sb, ca] = cs
    return W


@dataclass
class DiscreteOperator:
    """Assembled -L together with what is needed to move between fields and vectors."""

    matrix: sp.csc_matrix
    params: ProblemParams
    grid: DiskGrid
    modes: np.ndarray  # angular mode number of each basis slot

    @property
    def radii(self) -> np.ndarray:
        return self.grid.radii

    @property
    def theta(self) -> np.ndarray:
        n = self.grid.angles
        return 2.0 * np.pi * np.arange(n) / n

    @property
    def basis(self) -> np.ndarray:
        return _angular_basis(self.theta, self.grid.M)

    @property
    def weights(self) -> np.ndarray:
        """sqrt(r h) per unknown: y = weights * (angular coefficients of u)."""
        nb = 2 * self.grid.M + 1
        return np.repeat(np.sqrt(self.radii * self.grid.h), nb)

    def angular_coefficients(self, f, r) -> np.ndarray:
        """Angular coefficients of f(z) on circles of radii ``r``, shape (len(r), 2M+1)."""
        z = np.asarray(r)[:, None] * np.exp(1j * self.theta)[None, :]
        vals = np.asarray(f(z), dtype=float)
        return vals @ self.basis * (2.0 * np.pi / self.theta.size)

    def vector(self, f) -> np.ndarray:
        """Weighted coefficient vector of a real function f(z)."""
        return self.angular_coefficients(f, self.radii).ravel() * self.weights

    def field(self, y: np.ndarray) -> np.ndarray:
        """Values of the field with vector ``y`` on the (radius, angle) grid."""
        nb = 2 * self.grid.M + 1
        coef = (y / self.weights).reshape(-1, nb)
        return coef @ self.basis.T

    def block(self, slot: int) -> sp.csc_matrix:
        """Sub-matrix of a single angular slot (exact for radial potentials)."""
        nb = 2 * self.grid.M + 1
        idx = np.arange(slot, self.matrix.shape[0], nb)
        return self.matrix[idx][:, idx].tocsc()


def _tridiagonal(r: np.ndarray, h: float):
    rp = r + 0.5 * h
    rm = r - 0.5 * h
    diag = (rp + rm) / (h * h * r)
    off = -rp[:-1] / (h * h * np.sqrt(r[:-1] * r[1:]))
    return diag, off


def assemble_operator(params: ProblemParams, grid: DiskGrid, potential_on: bool = True) -> DiscreteOperator:
    """Assemble the symmetric matrix of -L on the disk of radius ``grid.R``.

    ``potential_on=False`` drops V (pure -Laplacian, used as a sanity hook).
    """
    if grid.M < params.N + 3:
        raise InvalidGrid(f"M must be at least N+3 = {params.N + 3}, got {grid.M}")
    M = grid.M
    nb = 2 * M + 1
    r = grid.radii
    n = r.size
    h = grid.h
    ms = _mode_numbers(M)

    if potential_on:
        vm = angular_potential_coefficients(params, r, 2 * M, grid.angles)
        W = _coupling(vm, M)
    else:
        W = np.zeros((n, nb, nb))
    diag, off = _tridiagonal(r, h)
    blocks = -W
    blocks[:, np.arange(nb), np.arange(nb)] += diag[:, None] + ms[None, :] ** 2 / r[:, None] ** 2

    base = np.arange(n)[:, None, None] * nb
    rows = np.broadcast_to(base + np.arange(nb)[None, :, None], blocks.shape)
    cols = np.broadcast_to(base + np.arange(nb)[None, None, :], blocks.shape)
    keep = blocks != 0.0
    r_idx = [rows[keep]]
    c_idx = [cols[keep]]
    v_all = [blocks[keep]]

    lower = (np.arange(n - 1)[:, None] * nb + np.arange(nb)[None, :]).ravel()
    offv = np.repeat(off, nb)
    r_idx += [lower, lower + nb]
    c_idx += [lower + nb, lower]
    v_all += [offv, offv]
    size = n * nb
    A = sp.csc_matrix(
        (np.concatenate(v_all), (np.concatenate(r_idx), np.concatenate(c_idx))),
        shape=(size, size),
    )
    return DiscreteOperator(matrix=A, params=params, grid=grid, modes=ms)


def assemble_radial(params: ProblemParams, R: float, n_r: int, m: int) -> sp.csc_matrix:
    """Same stencil for the single radial equation of angular mode ``m`` (c = 0)."""
    grid = DiskGrid(R, n_r, max(m, params.N + 3))
    r = grid.radii
    diag, off = _tridiagonal(r, grid.h)
    diag = diag + m * m / r**2 - radial_potential(params, r)
    return sp.diags([off, diag, off], [-1, 0, 1], format="csc")


@dataclass
class EigenReport:
    eigenvalues: np.ndarray  # sorted by |lambda|
    near_zero_count: int
    alignment: np.ndarray  # relative residual of each vector off span{Z1, Z2}
    gap_tol: float
    vectors: np.ndarray | None = None
    shift: float = 0.0


def _factor(matrix, shift: float):
    shifted = matrix - shift * sp.identity(matrix.shape[0], format="csc")
    try:
        return spla.splu(shifted.tocsc())
    except RuntimeError as exc:
        raise FactorizationSingular(str(exc)) from exc


def _cluster(eigs: np.ndarray) -> tuple[int, float]:
    mags = np.abs(eigs)
    for j in range(1, mags.size):
        if mags[j] >= GAP_FACTOR * mags[j - 1]:
            return j, float(mags[j] / GAP_FACTOR)
    return 0, 0.0


def _span_z12(op: DiscreteOperator) -> np.ndarray:
    p = op.params
    cols = [op.vector(lambda z, i=i: kernel_basis(p, z).as_array()[i]) for i in (1, 2)]
    q, _ = np.linalg.qr(np.stack(cols, axis=1))
    return q


def near_kernel(op: DiscreteOperator, n_eigs: int = 4, shift: float = 0.0, seed: int = 0) -> EigenReport:
    """The ``n_eigs`` eigenvalues of -L closest to ``shift``.

    Shift-invert Lanczos (ARPACK) with a sparse LU of the shifted matrix as
    the inner solver.  ``near_zero_count`` is the size of the leading
    cluster: the eigenvalues before the first factor-10 jump in |lambda|.
    """
    if not 1 <= n_eigs <= 10:
        raise ValueError("n_eigs must lie in 1..10")
    A = op.matrix
    lu = _factor(A, shift)
    opinv = spla.LinearOperator(A.shape, matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(A.shape[0])
    lam, vec = spla.eigsh(A, k=n_eigs, sigma=shift, OPinv=opinv, which="LM", tol=1e-8, v0=v0)
    order = np.argsort(np.abs(lam))
    lam, vec = lam[order], vec[:, order]
    vec = vec / np.linalg.norm(vec, axis=0)
    q = _span_z12(op)
    align = np.linalg.norm(vec - q @ (q.T @ vec), axis=0)
    count, gap_tol = _cluster(lam)
    return EigenReport(
        eigenvalues=lam,
        near_zero_count=count,
        alignment=align,
        gap_tol=gap_tol,
        vectors=vec,
        shift=shift,
    )


def near_kernel_retry(op: DiscreteOperator, n_eigs: int = 4, shift: float = 0.0, seed: int = 0) -> EigenReport:
    """near_kernel, moving the shift by 1e-6 after a singular factorization."""
    for attempt in range(_SHIFT_RETRIES + 1):
        try:
            return near_kernel(op, n_eigs, shift + 1e-6 * attempt, seed)
        except FactorizationSingular:
            if attempt == _SHIFT_RETRIES:
                raise
    raise AssertionError("unreachable")


@lru_cache(maxsize=2)
def _extension_setup(params: ProblemParams, grid: DiskGrid):
    op = assemble_operator(params, grid)
    lu = _factor(op.matrix, 0.0)
    rep = near_kernel(op, 4)
    best = np.argsort(rep.alignment)[:2]
    return op, lu, rep.vectors[:, best]


def _extension_error(params: ProblemParams, grid: DiskGrid, which: str, deflate: bool) -> float:
    idx = {"Z0": 0, "Z1": 1, "Z2": 2}[which]

    def f(z):
        return kernel_basis(params, z).as_array()[idx]

    op, lu, defl = _extension_setup(params, grid)
    if not deflate:
        defl = np.zeros((op.matrix.shape[0], 0))
    g = op.angular_coefficients(f, np.array([grid.R]))[0]
    r_last = op.radii[-1]
    rhs = np.zeros(op.matrix.shape[0])
    nb = 2 * grid.M + 1
    # boundary neighbour moved to the right-hand side, then D^-1/2 scaling
    rhs[-nb:] = (r_last + 0.5 * grid.h) / grid.h**2 * g / np.sqrt(r_last)
    # vectors here are scaled by sqrt(r); convert from the sqrt(r h) weights
    exact = op.vector(f) / np.sqrt(grid.h)
    defect = op.matrix @ exact - rhs
    defect -= defl @ (defl.T @ defect)
    err = -lu.solve(defect)
    err -= defl @ (defl.T @ err)
    err_field = op.field(err * np.sqrt(grid.h))
    z = op.radii[:, None] * np.exp(1j * op.theta)[None, :]
    return float(np.abs(err_field).max() / np.abs(f(z)).max())


def dirichlet_extension_check(
    params: ProblemParams, grid: DiskGrid, which: str = "Z0", deflate: bool = True
) -> float:
    """Relative interior error of the discrete Dirichlet extension of a kernel function.

    The discrete problem -L_h u = 0, u = Z on r = R is solved for the error
    e = u - Z, which satisfies -L_h e = -(truncation defect of Z).  The
    truncated operator has two eigenvalues of order h^2 whose vectors
    approximate Z1, Z2; since the defect is itself O(h^2), the plain solve
    amplifies it to O(1) along those two directions.  With ``deflate=True``
    the error equation is solved on their orthogonal complement, which is
    the well-posed part of the extension problem.

    A singular factorization triggers one retry with R enlarged by 1%.
    """
    if which not in ("Z0", "Z1", "Z2"):
        raise ValueError("which must be Z0, Z1 or Z2")
    try:
        return _extension_error(params, grid, which, deflate)
    except FactorizationSingular:
        try:
            return _extension_error(params, grid.perturbed(1.01), which, deflate)
        except FactorizationSingular as exc:
            raise SingularTruncation(f"singular truncation at R={grid.R} and R={1.01 * grid.R}") from exc


@lru_cache(maxsize=1)
def bessel_j01() -> float:
    """First positive zero of J0, bisected on [2, 3] to 1e-12."""
    return float(optimize.bisect(special.j0, 2.0, 3.0, xtol=1e-12))


def _sup_potential(params: ProblemParams, rho: float) -> float:
    n = 100
    r = np.linspace(0.0, rho, n)
    th = 2.0 * np.pi * np.arange(n) / n
    z = r[:, None] * np.exp(1j * th)[None, :]
    vals = potential(params, z)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    best = float(vals[i, j])
    if params.c == 0 and params.N > 0:
        # radial maximum where r^(2N+2) = N/(N+2)
        rs = (params.N / (params.N + 2)) ** (1.0 / (2 * params.order))
        if rs <= rho:
            best = max(best, float(radial_potential(params, rs)))

    def neg(x):
        return -potential(params, complex(x[0], x[1]))

    def inside(x):
        return rho - np.hypot(x[0], x[1])

    z0 = z[i, j]
    res = optimize.minimize(
        neg, [z0.real, z0.imag], method="COBYLA", constraints=[{"type": "ineq", "fun": inside}]
    )
    if res.success and inside(res.x) >= -1e-12:
        best = max(best, -float(res.fun))
    return best


def uniqueness_gap(params: ProblemParams, rho: float) -> tuple[float, float, bool]:
    """(sup of V on B_rho, first Dirichlet eigenvalue of B_rho, sup V < lambda1)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    sup_v = _sup_potential(params, rho)
    lam1 = bessel_j01() ** 2 / rho**2
    return sup_v, lam1, sup_v < lam1


def uniqueness_threshold(params: ProblemParams, rho_small: float, rho_large: float, xtol: float = 1e-6) -> float:
    """Radius where the sup V < lambda1 comparison flips, by bisection."""
    ok_small = uniqueness_gap(params, rho_small)[2]
    ok_large = uniqueness_gap(params, rho_large)[2]
    if not ok_small or ok_large:
        raise ValueError("comparison must hold at rho_small and fail at rho_large")
    lo, hi = rho_small, rho_large
    while hi - lo > xtol * hi:
        mid = 0.5 * (lo + hi)
        if uniqueness_gap(params, mid)[2]:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
