"""High level orchestration behind the command line."""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Union

import numpy as np
from dotenv import load_dotenv

from .config import Config
from .curve_collapse import PinchingSchedule, StableDualGraph, collapse_curve
from .errors import BadParameter, InvalidInput
from .gh_metric import Space, gh_interval
from .graph_moduli import (
    boundary_squares_vanish,
    cell_complex,
    chain_complex,
    euler_characteristic,
    rational_betti,
)
from .homotopy_joins import join_stratum, phi_path, psi_path
from .lattice_torus import rescale_torus
from .logging_utils import setup_logging
from .metric_graph import rescale, to_dot
from .models import POINT, FlatTorus, MetricGraph
from .reporting import Report
from .siegel_av import (
    PeriodPoint,
    SiegelFamily,
    diameter_fixed_limit,
    injrad_fixed_limit,
    reduce_g1,
    semi_reduce,
    volume_fixed_limit,
)
from .tropical_jacobian import cycle_basis, jacobian, torelli


def load_document(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON object; missing files surface as ``OSError``."""
    text = Path(path).expanduser().read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise InvalidInput(f"{path}: expected a JSON object")
    return payload


def load_space(payload: Mapping[str, Any]) -> Space:
    if payload.get("point"):
        return POINT
    if "gram" in payload:
        return FlatTorus.from_dict(payload)
    if "edges" in payload:
        return MetricGraph.from_dict(payload)
    raise InvalidInput("space document must hold a graph, a torus or {\"point\": true}")


def _gram_rows(torus: FlatTorus) -> List[Dict[str, Any]]:
    return [
        {"i": i, "j": j, "value": value}
        for i, row in enumerate(torus.gram)
        for j, value in enumerate(row)
    ]


def plot_convergence(
    family: SiegelFamily,
    indices: Iterable[float],
    spacing: Optional[float] = None,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[Config] = None,
) -> List[Dict[str, float]]:
    """GH interval between the rescaled member at each index and the diameter-fixed limit."""
    limit = diameter_fixed_limit(family, config=config).limit
    rows = []
    for i in indices:
        member = family.member_torus(i, config)
        interval = gh_interval(member, limit, spacing, budget, seed, config)
        rows.append({"i": float(i), "lb": interval.lb, "ub": interval.ub})
    return rows


class Runner:
    def __init__(self, overrides: Optional[Dict] = None, config: Optional[Config] = None) -> None:
        load_dotenv()
        self.config = config or Config.from_environment(overrides or {})
        self.logger = setup_logging(self.config.log_level, self.config.log_file)
        self._handlers: Dict[str, Callable[[Mapping[str, Any]], Report]] = {
            "census": self.census,
            "homology": self.homology,
            "collapse-curve": self.collapse_curve,
            "collapse-av": self.collapse_av,
            "jacobian": self.jacobian,
            "torelli": self.torelli,
            "ghdist": self.ghdist,
            "reduce": self.reduce,
            "homotopy": self.homotopy,
            "plot-convergence": self.plot_convergence,
        }

    @property
    def commands(self) -> List[str]:
        return sorted(self._handlers)

    def execute(self, command: str, options: Mapping[str, Any]) -> Report:
        try:
            handler = self._handlers[command]
        except KeyError as exc:
            raise InvalidInput(f"unknown command {command!r}") from exc
        self.logger.startup(command)
        self.logger.config_loaded()
        report = handler(options)
        self.logger.result_ready(report.kind, len(report.rows) or None)
        self.logger.completion()
        return report

    def _genus(self, options: Mapping[str, Any]) -> int:
        genus = int(options["genus"])
        if not 1 <= genus <= self.config.max_genus:
            raise BadParameter(f"genus must lie in 1..{self.config.max_genus}, got {genus}")
        return genus

    # ------------------------------------------------------------------
    # moduli of graphs
    # ------------------------------------------------------------------

    def census(self, options: Mapping[str, Any]) -> Report:
        genus = self._genus(options)
        self.logger.stage(f"census of S_{genus}")
        complex_ = cell_complex(genus, self.config)
        payload = complex_.to_dict()
        counts = Counter(t.dimension for t in complex_.types)
        payload["counts_by_dimension"] = {str(d): counts[d] for d in sorted(counts)}
        rows = [
            {k: v for k, v in t.to_dict().items() if k != "graph"} for t in complex_.types
        ]
        dot = "\n".join(to_dot(t.graph, name=f'"{t.name}"') for t in complex_.types)
        columns = ("dimension", "name", "v1", "b1", "edges", "vertices", "aut_order", "orientable")
        return Report("census", payload, rows, columns, dot)

    def homology(self, options: Mapping[str, Any]) -> Report:
        genus = self._genus(options)
        max_degree = options.get("max_degree")
        self.logger.stage(f"cellular homology of S_{genus}")
        betti = rational_betti(genus, max_degree, self.config)
        chains = chain_complex(genus, self.config)
        payload = {
            "genus": genus,
            "betti": list(betti),
            "generators": {str(d): chains.rank(d) for d in sorted(chains.generators) if d >= 0},
            "euler_characteristic": euler_characteristic(genus, self.config),
            "boundary_squares_vanish": boundary_squares_vanish(genus, self.config),
        }
        rows = [{"degree": d, "betti": b} for d, b in enumerate(betti)]
        return Report("homology", payload, rows, ("degree", "betti"))

    # ------------------------------------------------------------------
    # collapse of curves and abelian varieties
    # ------------------------------------------------------------------

    def collapse_curve(self, options: Mapping[str, Any]) -> Report:
        document = load_document(options["input"])
        try:
            dual = StableDualGraph.from_dict(document["dual"])
            schedule = PinchingSchedule.from_dict(document["rates"])
        except KeyError as exc:
            raise InvalidInput(f"collapse document is missing {exc}") from exc
        self.logger.stage("curve collapse")
        result = collapse_curve(dual, schedule)
        payload = result.to_dict()
        payload["dm_limit"]["dual_graph"] = result.dm_limit.dual_graph().to_dict()
        limit = result.gh_limit
        dot = to_dot(limit, name="limit") if isinstance(limit, MetricGraph) else None
        return Report("collapse-curve", payload, dot=dot)

    def collapse_av(self, options: Mapping[str, Any]) -> Report:
        family = SiegelFamily.from_dict(load_document(options["input"]))
        mode = options.get("rescale") or "diameter"
        self.logger.stage(f"{mode}-fixed limit of a genus {family.g} family")
        if mode == "diameter":
            result = diameter_fixed_limit(family, config=self.config)
            return Report("collapse-av", result.to_dict(), _gram_rows(result.limit), ("i", "j", "value"))
        if mode == "volume":
            return Report("collapse-av", volume_fixed_limit(family).to_dict())
        if mode == "injrad":
            return Report("collapse-av", injrad_fixed_limit(family).to_dict())
        raise BadParameter(f"unknown rescale mode {mode!r}")

    # ------------------------------------------------------------------
    # Jacobians
    # ------------------------------------------------------------------

    def _graph(self, options: Mapping[str, Any]) -> MetricGraph:
        return MetricGraph.from_dict(load_document(options["input"]))

    def jacobian(self, options: Mapping[str, Any]) -> Report:
        graph = self._graph(options)
        self.logger.stage("tropical Jacobian")
        torus = jacobian(graph)
        payload = torus.to_dict()
        payload["cycle_basis"] = cycle_basis(graph).to_dict()
        return Report("jacobian", payload, _gram_rows(torus), ("i", "j", "value"))

    def torelli(self, options: Mapping[str, Any]) -> Report:
        graph = self._graph(options)
        self.logger.stage("tropical Torelli image")
        torus = torelli(graph, config=self.config)
        return Report("torelli", torus.to_dict(), _gram_rows(torus), ("i", "j", "value"))

    # ------------------------------------------------------------------
    # Gromov-Hausdorff distances
    # ------------------------------------------------------------------

    def ghdist(self, options: Mapping[str, Any]) -> Report:
        space_a = load_space(load_document(options["a"]))
        space_b = load_space(load_document(options["b"]))
        self.logger.stage("Gromov-Hausdorff interval")
        interval = gh_interval(
            space_a,
            space_b,
            self.config.spacing,
            self.config.budget,
            self.config.seed,
            self.config,
        )
        payload = interval.to_dict()
        return Report("ghdist", payload, [payload], ("lb", "ub", "mesh_a", "mesh_b"))

    def reduce(self, options: Mapping[str, Any]) -> Report:
        if options.get("tau"):
            point = PeriodPoint.from_dict({"tau": options["tau"]})
        elif options.get("input"):
            point = PeriodPoint.from_dict(load_document(options["input"]))
        else:
            raise InvalidInput("reduce needs --input or --tau")
        self.logger.stage(f"reduction in genus {point.g}")
        if point.g == 1:
            tau, gamma = reduce_g1(point.tau, config=self.config)
            payload = {
                "tau": [tau.real, tau.imag],
                "gamma": gamma.astype(int).tolist(),
                "point": PeriodPoint.from_tau(tau).to_dict(),
            }
            return Report("reduce", payload)
        return Report("reduce", semi_reduce(point, config=self.config).to_dict())

    def homotopy(self, options: Mapping[str, Any]) -> Report:
        space = load_space(load_document(options["input"]))
        steps = int(options.get("steps") or 10)
        if steps < 1:
            raise BadParameter("steps must be positive")
        grid = np.linspace(0.0, 1.0, steps + 1)
        self.logger.stage(f"homotopy sampled at {steps + 1} times")
        if isinstance(space, MetricGraph):
            graph = rescale(space, "diameter")
            path = phi_path(graph, grid, self.config)
            rows = [{"t": t, "edges": len(g.edges), "vertices": len(g.vertices)} for t, g in path]
            columns = ("t", "edges", "vertices")
        elif isinstance(space, FlatTorus):
            torus = rescale_torus(space, "diameter", config=self.config)
            path = psi_path(torus, grid, self.config)
            rows = [{"t": s, "dim": t.dim} for s, t in path]
            columns = ("t", "dim")
        else:
            raise InvalidInput("the homotopy needs a graph or a torus")
        payload = {
            "stratum": join_stratum(path[0][1]).to_dict(),
            "path": [{"t": t, "space": item.to_dict()} for t, item in path],
        }
        return Report("homotopy", payload, rows, columns)

    def plot_convergence(self, options: Mapping[str, Any]) -> Report:
        family = SiegelFamily.from_dict(load_document(options["input"]))
        indices = [float(i) for i in options.get("indices") or (10, 100, 1000)]
        self.logger.stage(f"convergence at {len(indices)} indices")
        rows = plot_convergence(
            family,
            indices,
            self.config.spacing,
            self.config.budget,
            self.config.seed,
            self.config,
        )
        payload = {"family": family.to_dict(), "rows": rows}
        return Report("plot-convergence", payload, rows, ("i", "lb", "ub"))
