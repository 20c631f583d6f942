"""Convex optimization over quaternion variables.

Quaternion arrays, widely affine maps, GHR gradients, KKT diagnostics, a
quaternion ADMM solver and two applications: constrained widely linear least
squares and pure-quaternion basis pursuit denoising.
"""

from .admm import ADMMConfig, ADMMProblem, ADMMResult, ADMMState, ConvergenceTrace, Coupling, solve, step
from .affine import WidelyAffineMap
from .ghr import WLQuadratic, conj_gradient, gradient_descent, is_stationary
from .kkt import ConvexProblem, KKTReport, LagrangePoint, kkt_report
from .linalg import QArray, qeye, qrandn, qzeros
from .prox import project_nonneg_parts, project_soc, prox_l1
from .quaternion import Quaternion
from .solvers import BPDNProblem, WLLSProblem, bpdn_solve, make_pure_instance, wlls_solve

__version__ = "0.1.0"
