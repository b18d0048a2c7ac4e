"""Finite-volume solvers for LWR traffic models with non-local flux."""
from ._backend import HAVE_COMPILED
from .errors import (CflViolation, ConfigError, DegenerateModel, IncompatibleGrids, InvalidKernel,
                     KernelGridMismatch, NonDivisibleEta, NonlocalError, NonUnimodalFlux, OutOfRange)
from .grid import Grid1D, GridState, PiecewiseConstant, Profile, plateau, project_initial, total_mass
from .kernel import DiscreteKernel, KernelSpec, lxf_point_weights, quadrature_weights
from .model import FluxGFn, ModelNorms, ModelSpec, VelocityFn, compute_norms, validate_hypotheses
from .scheme import (RunReport, SchemeConfig, StepContext, cfl_lambda_godunov, cfl_lambda_local,
                     cfl_lambda_lxf, convolve_velocity, godunov_flux, run, step_godunov,
                     step_local_godunov, step_lxf)

__version__ = "0.1.0"
