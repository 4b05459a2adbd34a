"""Sub-Riemannian calculus for surfaces in the Heisenberg group.

H-mean curvature, horizontal perimeter and its variations, instability
certificates for graphical strips, the reduction of H-minimal graphs to
strips, and vertical cylinders in higher Heisenberg groups.
"""

from .bernstein import ReductionError, classify_seed, extract_strip, seed_trace
from .gexpr import ExprSyntaxError, builtin, parse
from .hcalc import frame_from_defining, frame_from_patch, hmean, hmean_defining
from .instability import certify_instability, find_k0, reverse_inequality_sides
from .quadrature import QuadratureError, QuadratureSpec
from .surfaces import (
    NotApplicable,
    graph_xy_new,
    graph_yt_new,
    strip_new,
    type2_xygraph,
    vertical_plane,
)

__version__ = "0.1.0"

__all__ = [
    "NotApplicable",
    "QuadratureError",
    "QuadratureSpec",
    "ReductionError",
    "ExprSyntaxError",
    "builtin",
    "certify_instability",
    "classify_seed",
    "extract_strip",
    "find_k0",
    "frame_from_defining",
    "frame_from_patch",
    "graph_xy_new",
    "graph_yt_new",
    "hmean",
    "hmean_defining",
    "parse",
    "reverse_inequality_sides",
    "seed_trace",
    "strip_new",
    "type2_xygraph",
    "vertical_plane",
]
