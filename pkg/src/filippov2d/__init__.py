"""Planar Filippov systems: switching-curve analysis, hybrid simulation and
omega-limit classification."""

from .chaos import (LambdaRegion, chaos_conditions, circuit_region, construct_lambda,
                    linear_chaos_conditions, minimality_probe, theorem2_probes)
from .curves import SwitchingCurve
from .errors import *  # noqa: F401,F403
from .hybrid import Trajectory, branch_tree, check_legality, simulate
from .io import RunConfig, load_system, save_system
from .limitset import OmegaReport, classify_omega, return_sequence
from .policy import Choice, Policy
from .poly import Poly2, PolyField
from .scenarios import load_scenario, run_scenario
from .sigma import (Region, classify_point, extend_filippov, filippov_field, partition_sigma,
                    pseudo_equilibria, sliding_speed)
from .svg import emit_svg
from .system import (LinearSpec, PiecewiseSystem, as_linear, contact_order, from_linear,
                     from_relay)
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"
