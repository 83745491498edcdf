"""LP-relaxation based matheuristic for tri-objective binary integer programs."""

__version__ = "0.1.0"

from .front import Front, dominates, filter_nondominated
from .indicators import assess, hypervolume, unary_epsilon
from .lbset import BoundSet, compute_lb_set
from .model import Instance, evaluate, is_feasible, load_instance
from .oracle import exact_front
from .search import Params, lpbm

__all__ = [
    "BoundSet", "Front", "Instance", "Params", "assess", "compute_lb_set", "dominates",
    "evaluate", "exact_front", "filter_nondominated", "hypervolume", "is_feasible",
    "load_instance", "lpbm", "unary_epsilon",
]
