import numpy as np
import pytest

from liouville_kernel.core import ModeFunction, Part, ProblemParams, kernel_basis
from liouville_kernel.exceptions import BoundaryNode, SingularPoint
from liouville_kernel.residual import (
    CartesianGrid,
    fd_laplacian,
    linearized_residual,
    liouville_residual,
    tau_derivative_check,
    tau_derivative_order,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        CartesianGrid(0, 1.0, 4)
    with pytest.raises(ValueError):
        CartesianGrid(0, -1.0, 5)
    g = CartesianGrid(1j, 1.0, 5)
    assert g.h == 0.5
    assert g.node((2, 2)) == 1j
    assert g.refined().n == 9


def test_fd_laplacian_quadratic_and_constant():
    g = CartesianGrid(0.3, 1.0, 11)
    for node in [(1, 1), (5, 5), (9, 3)]:
        assert fd_laplacian(lambda z: np.real(z) ** 2, g, node) == pytest.approx(2.0, abs=1e-10)
        assert fd_laplacian(lambda z: np.full(np.shape(z), 7.0), g, node) == 0.0


def test_fd_laplacian_log_at_origin():
    g = CartesianGrid(0, 0.05, 11)  # h = 1e-2
    val = fd_laplacian(lambda z: np.log1p(np.abs(z) ** 2), g, (5, 5))
    assert val == pytest.approx(4.0, abs=1e-3)


def test_fd_laplacian_boundary():
    with pytest.raises(BoundaryNode):
        fd_laplacian(np.real, CartesianGrid(0, 1.0, 5), (0, 2))


def test_fd_laplacian_linear():
    g = CartesianGrid(0.1 + 0.2j, 0.5, 7)
    f = lambda z: np.sin(np.real(z)) * np.exp(np.imag(z))
    h = lambda z: np.abs(z) ** 3
    lhs = fd_laplacian(lambda z: 2 * f(z) - 3 * h(z), g, (3, 4))
    rhs = 2 * fd_laplacian(f, g, (3, 4)) - 3 * fd_laplacian(h, g, (3, 4))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize(
    "params, tau, k, center, weighted",
    [
        (ProblemParams(0), 0.0, 0, 0.0, True),
        (ProblemParams(1, 0.5 + 0.3j), 0.0, 0, 0.0, True),
        (ProblemParams(1), 0.1, 2, 1.0, True),
        (ProblemParams(0, 0.2), 0.1, 1, 0.5, False),
    ],
)
def test_liouville_order(params, tau, k, center, weighted):
    rep = liouville_residual(params, tau, k, CartesianGrid(center, 0.5, 101), weighted=weighted)
    assert 1.8 <= rep.fitted_order <= 2.2
    assert len(rep.mesh_ladder) == 3
    assert np.all(np.diff(rep.h) < 0)


def test_liouville_small_residual():
    rep = liouville_residual(ProblemParams(0), 0.0, 0, CartesianGrid(0, 0.5, 101))
    assert rep.h[0] == pytest.approx(1e-2)
    assert rep.sup[0] < 1e-3


def test_liouville_unweighted_skips_origin():
    rep = liouville_residual(ProblemParams(1), 0.0, 0, CartesianGrid(0.05, 1.0, 201), weighted=False)
    assert rep.excluded_nodes > 0
    assert rep.excluded_nodes <= 0.01 * rep.total_nodes


def test_liouville_too_many_singular_nodes():
    # singular ring of |z| = 1/sqrt(2) cuts through a coarse grid
    with pytest.raises(SingularPoint):
        liouville_residual(ProblemParams(0), -1.0, 2, CartesianGrid(0, 1.0, 21))


def test_linearized_mode_function():
    rep = linearized_residual(ProblemParams(1, 1 - 0.5j), ModeFunction(3, Part.REAL), CartesianGrid(0.2, 0.5, 51))
    assert 1.8 <= rep.fitted_order <= 2.2


def test_linearized_Z0():
    rep = linearized_residual(ProblemParams(0), "Z0", CartesianGrid(0, 0.5, 51))
    assert rep.fitted_order == pytest.approx(2.0, abs=0.2)


def test_negative_controls():
    g = CartesianGrid(0.3, 0.5, 51)
    p = ProblemParams(1, 0.5 + 0.3j)
    one = linearized_residual(p, lambda z: np.ones(np.shape(z)), g)
    assert one.sup[-1] > 0.5 * one.sup[0] > 0

    def product(z):
        v = kernel_basis(p, z)
        return v.Z0 * v.Z1

    prod = linearized_residual(p, product, g)
    assert prod.sup[-1] > 0.5 * prod.sup[0] > 0


def test_unknown_tag():
    with pytest.raises(ValueError):
        linearized_residual(ProblemParams(0), "Z3", CartesianGrid(0, 0.5, 11))


def test_tau_check_at_origin():
    e_re, e_im = tau_derivative_check(ProblemParams(0), 2, 0.0, 1e-3)
    assert e_re < 1e-12 and e_im < 1e-12


def test_tau_check_small_error():
    errs = tau_derivative_check(ProblemParams(2, 0.4j), 0, 0.5 + 0.5j, 1e-3)
    assert max(errs) < 1e-5


def test_tau_order_real_axis_point():
    p = ProblemParams(0)
    dtaus = [1e-2, 5e-3, 2.5e-3]
    errs = np.array([tau_derivative_check(p, 1, 1.0, d) for d in dtaus])
    # along imaginary tau the point z = 1 is a symmetry point: the central
    # difference is exact, so only the real direction has an order to fit
    assert np.all(errs[:, 1] < 1e-12)
    o_re = np.polyfit(np.log(dtaus), np.log(errs[:, 0]), 1)[0]
    assert o_re == pytest.approx(2.0, abs=0.2)


def test_tau_order_generic_point():
    o_re, o_im = tau_derivative_order(ProblemParams(0), 1, 0.7 + 0.4j, [1e-2, 5e-3, 2.5e-3])
    assert o_re == pytest.approx(2.0, abs=0.2)
    assert o_im == pytest.approx(2.0, abs=0.2)


def test_tau_convention_factor_two():
    # with the other normalization (Re phi instead of 2 Re phi) the error stays O(1)
    from liouville_kernel.core import phi_mode, solution_u

    p, z, d = ProblemParams(1), 0.6 + 0.2j, 1e-4
    fd = (solution_u(p, d, 1, z) - solution_u(p, -d, 1, z)) / (2 * d)
    phi = phi_mode(p, ModeFunction(1), z)
    assert abs(fd - 2 * phi.real) < 1e-6
    assert abs(fd - phi.real) > 1e-2
