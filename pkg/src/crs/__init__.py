"""Co-radiant sets, nonlinear cone separation and approximate efficiency."""

from .errors import *  # noqa: F401,F403
from .space import NormKind, Space, dual_norm, evaluate, norm, p_sublinear, sample_sphere  # noqa: F401

__version__ = "0.1.0"
