"""Tropical compactifications of the moduli of curves and abelian varieties."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

try:  # pragma: no cover - installed metadata
    __version__ = version("tropical-collapse")
except PackageNotFoundError:  # pragma: no cover - source checkout
    __version__ = "0.0.0"

from .config import Config
from .errors import TropicalError
from .models import POINT, FlatTorus, GHInterval, MetricGraph
from .graph_moduli import census, cell_complex, rational_betti
from .curve_collapse import collapse_curve
from .lattice_torus import covering_radius, lattice_isometric, rescale_torus
from .siegel_av import SiegelFamily, diameter_fixed_limit
from .tropical_jacobian import jacobian, torelli
from .gh_metric import gh_interval
from .homotopy_joins import phi, psi
from .reporting import ReportBuilder
from .runner import Runner

__all__ = [
    "__version__",
    "Config",
    "TropicalError",
    "POINT",
    "FlatTorus",
    "GHInterval",
    "MetricGraph",
    "census",
    "cell_complex",
    "rational_betti",
    "collapse_curve",
    "covering_radius",
    "lattice_isometric",
    "rescale_torus",
    "SiegelFamily",
    "diameter_fixed_limit",
    "jacobian",
    "torelli",
    "gh_interval",
    "phi",
    "psi",
    "ReportBuilder",
    "Runner",
]
