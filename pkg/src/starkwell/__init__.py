"""Spectra and eigenfunctions of -d^2/dx^2 + F x on [-L, L] for every self-adjoint boundary condition."""

from ._jit import backend_name
from .airy import AiryDomainError, AiryEval, airy_eval, airy_second
from .eigenfunctions import (
    Eigenfunction,
    coefficient_vector,
    eigenfunctions,
    evaluate,
    inner_product,
    normalize,
    peak_position,
    sample_grid,
    trace,
)
from .extension import (
    NonUnitaryError,
    StarkProblem,
    UnitaryBC,
    boundary_form,
    characteristic,
    make_unitary,
    parse_bc,
    preset,
    reduced_characteristic,
    scaled_endpoints,
)
from .solver import (
    ConvergenceError,
    Eigenvalue,
    SpectrumRequest,
    bracket_scan,
    detect_degeneracy,
    refine_root,
    solve_generic,
    solve_spectrum,
)

__version__ = "0.1.0"
