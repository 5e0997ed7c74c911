"""Numerical verification of the bounded kernel of the linearized singular
Liouville operator L = Lap + 8 (N+1)^2 |z|^(2N) / (1 + |z^(N+1) - c|^2)^2."""
from .core import (
    BasisChangeMatrix,
    ComplexSample,
    KernelBasisValue,
    ModeFunction,
    Part,
    ProblemParams,
    asymptotic_decay_fit,
    basis_change_matrix,
    kernel_basis,
    phi_mode,
    potential,
    solution_u,
)
from .exceptions import (
    BoundaryNode,
    DegenerateFit,
    FactorizationSingular,
    InvalidGrid,
    NotDiagonallyDominant,
    SingularPoint,
    SingularTruncation,
    StepFailure,
    VerificationError,
)
from .residual import CartesianGrid, linearized_residual, liouville_residual, tau_derivative_check
from .ring import PolarRing, ring_reconstruct, t_deviation_scaling, t_matrix
from .shooting import RadialMode, Verdict, bounded_mode_set, closed_form_mode, shoot_mode
from .spectral import (
    DiskGrid,
    assemble_operator,
    dirichlet_extension_check,
    near_kernel,
    uniqueness_gap,
)

__version__ = "0.1.0"
