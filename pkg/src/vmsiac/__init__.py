"""Discontinuous Galerkin solvers for reduced Vlasov-Ampere and
Vlasov-Maxwell systems with SIAC post-processing."""
from __future__ import annotations

__version__ = "0.1.0"

from .cases import BenchmarkParams, RunConfig, landau_ic, two_stream_ic, weibel_ic
from .dg import Basis, DGField, l2_error, l2_project, linf_error
from .diagnostics import ConvergenceTable, ErrorReport, conserved_quantities, convergence_orders
from .errors import ConfigurationError, DivergenceError, DomainError, InputError, UsageError
from .experiments import reversibility_experiment, run, run_convergence_study
from .integrator import TimeControls, select_dt, ssp_rk3_step
from .kernels import BACKEND
from .kinetic import (SimulationState, SystemKind, compute_moments, maxwell_rhs, reflect_velocity,
                      vlasov_rhs)
from .mesh import AxisSpec, Mesh, build_mesh
from .siac import SiacKernel, kernel_coefficients, postprocess_field, postprocess_point

__all__ = [
    "AxisSpec", "BACKEND", "Basis", "BenchmarkParams", "ConfigurationError", "ConvergenceTable",
    "DGField", "DivergenceError", "DomainError", "ErrorReport", "InputError", "Mesh", "RunConfig",
    "SiacKernel", "SimulationState", "SystemKind", "TimeControls", "UsageError", "build_mesh",
    "compute_moments", "conserved_quantities", "convergence_orders", "kernel_coefficients",
    "l2_error", "l2_project", "landau_ic", "linf_error", "maxwell_rhs", "postprocess_field",
    "postprocess_point", "reflect_velocity", "reversibility_experiment", "run",
    "run_convergence_study", "select_dt", "ssp_rk3_step", "two_stream_ic", "vlasov_rhs",
    "weibel_ic",
]
