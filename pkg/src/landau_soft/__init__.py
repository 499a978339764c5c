"""Deterministic solver for the homogeneous Landau equation with soft potentials,
with numerical checks of its a-priori estimates and functional inequalities."""

from .bench import TestFunctionFamily, run_bench
from .cli import main
from .coercivity import CoercivityCertificate, coercivity_constant, entropy_majorant, small_set_eta, verify_coercivity
from .grid import VelocityGrid, build_grid, convolve, divergence, gradient, integrate
from .harness import CheckReport, ConstantsLedger, TrapParameters
from .kernel import KernelSpec, eval_a, eval_b, eval_c, tabulate_kernels
from .solver import CollisionCoefficients, LandauOperator, SolverConfig, Trajectory
from .config import RunConfig, parse_config
from .state import DistributionState, maxwellian, mixture, moments, weighted_H1_seminorm, weighted_L1, weighted_L2

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "CoercivityCertificate",
    "CollisionCoefficients",
    "ConstantsLedger",
    "DistributionState",
    "KernelSpec",
    "LandauOperator",
    "RunConfig",
    "SolverConfig",
    "TestFunctionFamily",
    "Trajectory",
    "TrapParameters",
    "VelocityGrid",
    "build_grid",
    "coercivity_constant",
    "convolve",
    "divergence",
    "entropy_majorant",
    "eval_a",
    "eval_b",
    "eval_c",
    "gradient",
    "integrate",
    "main",
    "maxwellian",
    "mixture",
    "moments",
    "parse_config",
    "run_bench",
    "small_set_eta",
    "tabulate_kernels",
    "verify_coercivity",
    "weighted_H1_seminorm",
    "weighted_L1",
    "weighted_L2",
]
