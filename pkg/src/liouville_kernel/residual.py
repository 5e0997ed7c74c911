"""Finite-difference checks that the closed forms solve their PDEs.

Every check evaluates a field on a square Cartesian grid, applies the
five-point Laplacian at interior nodes and records the residual on a ladder
of mesh sizes h, h/2, h/4.  Exact identities show up as residuals that
shrink like h^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    ModeFunction,
    Part,
    ProblemParams,
    kernel_basis,
    loglog_slope,
    phi_mode,
    potential,
    solution_u,
)
from .exceptions import BoundaryNode, SingularPoint

__all__ = [
    "CartesianGrid",
    "ResidualReport",
    "fd_laplacian",
    "laplacian_interior",
    "liouville_residual",
    "linearized_residual",
    "resolve_field",
    "tau_derivative_check",
    "tau_derivative_order",
]

# reports with a larger fraction of skipped nodes are rejected
MAX_EXCLUDED_FRACTION = 0.01


@dataclass(frozen=True)
class CartesianGrid:
    center: complex
    half_width: float
    n: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.n < 5 or self.n % 2 == 0:
            raise ValueError("n must be an odd integer >= 5")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    def nodes(self) -> np.ndarray:
        """Complex node coordinates, indexed [iy, ix]."""
        t = self.axis()
        return complex(self.center) + t[None, :] + 1j * t[:, None]

    def node(self, index) -> complex:
        iy, ix = index
        t = self.axis()
        return complex(self.center) + t[ix] + 1j * t[iy]

    def refined(self) -> "CartesianGrid":
        """Same square, half the spacing; the center stays a node."""
        return CartesianGrid(self.center, self.half_width, 2 * self.n - 1)


@dataclass
class ResidualReport:
    mesh_ladder: list[tuple[float, float, float]]
    fitted_order: float
    excluded_nodes: int = 0
    scale: float = 1.0
    total_nodes: int = 0

    @property
    def h(self) -> np.ndarray:
        return np.array([rung[0] for rung in self.mesh_ladder])

    @property
    def sup(self) -> np.ndarray:
        return np.array([rung[1] for rung in self.mesh_ladder])

    @property
    def l2(self) -> np.ndarray:
        return np.array([rung[2] for rung in self.mesh_ladder])


def fd_laplacian(field: Callable, grid: CartesianGrid, node) -> float:
    """Five-point Laplacian of ``field`` at one interior node of ``grid``."""
    iy, ix = node
    if not (0 < iy < grid.n - 1 and 0 < ix < grid.n - 1):
        raise BoundaryNode(f"node {node} is not interior to an {grid.n}x{grid.n} grid")
    z = grid.node(node)
    h = grid.h
    pts = np.array([z + h, z - h, z + 1j * h, z - 1j * h, z])
    f = np.asarray(field(pts), dtype=float)
    return float((f[0] + f[1] + f[2] + f[3] - 4.0 * f[4]) / (h * h))


def laplacian_interior(values: np.ndarray, h: float) -> np.ndarray:
    """Five-point Laplacian of a full grid of samples, interior nodes only."""
    v = values
    return (v[1:-1, 2:] + v[1:-1, :-2] + v[2:, 1:-1] + v[:-2, 1:-1] - 4.0 * v[1:-1, 1:-1]) / (h * h)


def _report(ladder, excluded=0, scale=1.0, total=0) -> ResidualReport:
    hs = [r[0] for r in ladder]
    sups = [r[1] for r in ladder]
    return ResidualReport(
        mesh_ladder=ladder,
        fitted_order=loglog_slope(hs, sups),
        excluded_nodes=excluded,
        scale=scale,
        total_nodes=total,
    )


def _ladder(grid: CartesianGrid, levels: int):
    g = grid
    for _ in range(levels):
        yield g
        g = g.refined()


def _singular_points(params: ProblemParams, tau: complex, k: int, weighted: bool) -> np.ndarray:
    pts = []
    if tau != 0 and k >= 1:
        # roots of 1 + tau*(N+1+k)/(N+1) z^k
        n1 = params.order
        a = -1.0 / (tau * (n1 + k) / n1)
        pts.extend(np.roots([1.0] + [0.0] * (k - 1) + [-a]))
    if not weighted and params.N > 0:
        pts.append(0.0)
    return np.asarray(pts, dtype=complex)


def liouville_residual(
    params: ProblemParams,
    tau: complex,
    k: int,
    grid: CartesianGrid,
    weighted: bool = True,
    levels: int = 3,
) -> ResidualReport:
    """Residual of Lap U + |z|^(2N) e^U for U = U_{tau,k} (``weighted=True``).

    With ``weighted=False`` the unweighted Liouville equation Lap U + e^U = 0
    is checked for U + 2N log|z|, which is the holomorphic-representation
    form of the same solution and is singular at the origin when N > 0.
    Nodes whose stencil comes within one spacing of a singular point are
    skipped and counted; more than 1% skipped raises :class:`SingularPoint`.
    """
    sing = _singular_points(params, tau, k, weighted)
    ladder = []
    excluded = total = 0
    for g in _ladder(grid, levels):
        z = g.nodes()
        inner = z[1:-1, 1:-1]
        mask = np.ones(inner.shape, dtype=bool)
        if sing.size:
            dist = np.abs(inner[..., None] - sing[None, None, :]).min(axis=-1)
            mask = dist > 1.5 * g.h
            zs = np.where(np.abs(z[..., None] - sing).min(axis=-1) < 0.5 * g.h, z + 0.25 * g.h, z)
        else:
            zs = z
        if (~mask).sum() > MAX_EXCLUDED_FRACTION * mask.size:
            raise SingularPoint(
                f"{(~mask).sum()} of {mask.size} nodes sit next to a singular point of U"
            )
        u = solution_u(params, tau, k, zs)
        if weighted:
            src = np.abs(inner) ** (2 * params.N) * np.exp(u[1:-1, 1:-1])
        else:
            if params.N > 0:
                u = u + 2 * params.N * np.log(np.abs(zs))
            src = np.exp(u[1:-1, 1:-1])
        if not np.all(np.isfinite(src[mask])):
            raise SingularPoint("e^U overflowed on the grid")
        res = (laplacian_interior(u, g.h) + src)[mask]
        ladder.append((g.h, float(np.abs(res).max()), float(np.sqrt(np.sum(res**2)) * g.h)))
        excluded += int((~mask).sum())
        total += mask.size
    return _report(ladder, excluded=excluded, total=total)


def resolve_field(params: ProblemParams, phi) -> Callable:
    """Turn a kernel tag into a real-valued callable of z.

    Accepted tags: ``"Z0"``, ``"Z1"``, ``"Z2"``, a :class:`ModeFunction`
    with a real or imaginary part, or any callable (used as-is).
    """
    if callable(phi):
        return phi
    if isinstance(phi, ModeFunction):
        if phi.part is Part.COMPLEX:
            raise ValueError("linearized_residual needs a real-valued field")
        return lambda z: phi_mode(params, phi, z)
    if phi in ("Z0", "Z1", "Z2"):
        idx = int(phi[1])
        return lambda z: kernel_basis(params, z).as_array()[idx]
    raise ValueError(f"unknown field tag {phi!r}")


def linearized_residual(
    params: ProblemParams, phi, grid: CartesianGrid, levels: int = 3
) -> ResidualReport:
    """Residual of L(phi) = Lap phi + V phi on a mesh ladder.

    ``scale`` in the report is max(1, sup |V phi|) on the finest rung, the
    size of the terms that must cancel.
    """
    f = resolve_field(params, phi)
    ladder = []
    total = 0
    scale = 1.0
    for g in _ladder(grid, levels):
        z = g.nodes()
        vals = np.asarray(f(z), dtype=float)
        vphi = potential(params, z[1:-1, 1:-1]) * vals[1:-1, 1:-1]
        res = laplacian_interior(vals, g.h) + vphi
        ladder.append((g.h, float(np.abs(res).max()), float(np.sqrt(np.sum(res**2)) * g.h)))
        total += res.size
        scale = max(1.0, float(np.abs(vphi).max()))
    return _report(ladder, scale=scale, total=total)


def tau_derivative_check(params: ProblemParams, k: int, z: complex, dtau: float):
    """Central-difference check of d/dtau U_{tau,k} at tau = 0.

    Along real tau the derivative is 2 Re phi_k; along imaginary tau it is
    -2 Im phi_k.  Returns the two absolute errors, both O(dtau^2).
    """
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    phi = phi_mode(params, ModeFunction(k), z)
    d_re = (solution_u(params, dtau, k, z) - solution_u(params, -dtau, k, z)) / (2 * dtau)
    d_im = (solution_u(params, 1j * dtau, k, z) - solution_u(params, -1j * dtau, k, z)) / (2 * dtau)
    return abs(d_re - 2.0 * phi.real), abs(d_im + 2.0 * phi.imag)


def tau_derivative_order(params: ProblemParams, k: int, z: complex, dtaus) -> tuple[float, float]:
    """Fitted convergence orders of both tau_derivative_check errors."""
    errs = np.array([tau_derivative_check(params, k, z, d) for d in dtaus])
    return loglog_slope(dtaus, errs[:, 0]), loglog_slope(dtaus, errs[:, 1])
