"""Named experiments run from a config.

Each experiment kind is an [Experiment][gurevich_lab.experiments.Experiment]
registered under its config name. Experiments only fill a
[Report][gurevich_lab.report.Report]; writing it out is left to
[emit_report][gurevich_lab.report.emit_report].
"""
import json
import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, List, Optional, Type

from gurevich_lab.abelian import (
    abelian_data,
    fit_lattice_correction,
    maximal_winding_vanishes,
    minimize_beta,
    winding_cycle,
    zero_winding_entropy,
)
from gurevich_lab.cache import CountCache, cached_counts
from gurevich_lab.config import (
    ExperimentConfig,
    build_potential,
    build_sft,
    build_skew,
    render_config,
)
from gurevich_lab.equidist import (
    QUANTUM,
    deviation_fraction,
    equidistribution_distance,
    equilibrium_at_minimum,
)
from gurevich_lab.exceptions import NoOrbits
from gurevich_lab.extension import (
    SkewSystem,
    TransitivityStatus,
    check_transitivity,
    fit_counts,
    gurevich_pressure_bound,
    truncated_transfer_spr,
)
from gurevich_lab.helpers import content_hash
from gurevich_lab.report import Report
from gurevich_lab.sft import Sft, irreducibility, topological_entropy
from gurevich_lab.suspension import (
    Suspension,
    cover_entropy_abelian,
    cover_entropy_counting,
    flow_entropy,
    flow_orbit_table,
)
from gurevich_lab.thermo import (
    EdgePotential,
    equilibrium_measure,
    integrate_edge,
    measure_entropy,
    pressure,
)

logger = logging.getLogger(__name__)

NO_GAP = "no-gap-within-tolerance"
GAP = "gap"
CORRECTION_NOTE = (
    "per-n correction exponent of Z_n, expected a/2; "
    "cumulative flow orbit counts carry 1 + a/2"
)


@dataclass
class ExperimentContext:
    config: ExperimentConfig
    sft: Sft
    f: Optional[EdgePotential]
    skew: Optional[SkewSystem]
    report: Report
    threads: int = 1
    cache: Optional[CountCache] = None

    @property
    def params(self) -> Any:
        return self.config.params

    def require_skew(self) -> SkewSystem:
        assert self.skew is not None, "validated configs carry a group"
        return self.skew


class Experiment(ABC):
    """Interface that must be implemented by experiment kinds.

    Subclasses declare their config ``kind`` and are registered
    automatically.
    """

    kind: ClassVar[str] = ""
    registry: ClassVar[Dict[str, Type["Experiment"]]] = {}

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if cls.kind:
            Experiment.registry[cls.kind] = cls

    @abstractmethod
    def run(self, context: ExperimentContext) -> None:  # pragma: no cover
        """Should be overridden in inherited class.

        Parameters:
            context: Built objects of the config and the report to fill.
        """


def _counts_table(report: Report, counts: List[Any], sizes: List[int]) -> None:
    report.add_table(
        "counts",
        ["n", "count", "layer_size"],
        [
            [n, counts[n - 1], sizes[n - 1] if n - 1 < len(sizes) else None]
            for n in range(1, len(counts) + 1)
        ],
    )


def _transitivity(context: ExperimentContext) -> Dict[str, Any]:
    status = check_transitivity(context.require_skew(), context.params.depth)
    if not status.transitive:
        logger.warning("extension transitivity: %s", status.status.value)
    return {
        "status": status.status.value,
        "witness": status.witness,
        "depth": status.depth,
        "warning": not status.transitive,
    }


def _estimate(context: ExperimentContext) -> Dict[str, Any]:
    params = context.params
    counts, sizes, method = cached_counts(
        context.require_skew(),
        params.n_max,
        context.f,
        params.method,
        context.threads,
        params.ball_cap,
        context.cache,
    )
    _counts_table(context.report, counts, sizes)
    estimate = fit_counts(counts, sizes, method)
    return {
        "rate": estimate.rate,
        "poly_exponent": estimate.poly_exponent,
        "n_range": list(estimate.n_range),
        "residual": estimate.residual,
        "method": estimate.method,
        "window": estimate.window,
    }


class EntropyExperiment(Experiment):
    kind = "entropy"

    def run(self, context: ExperimentContext) -> None:
        report = context.report
        report.set_result("value", topological_entropy(context.sft))
        report.set_result("period", irreducibility(context.sft).period)


class PressureExperiment(Experiment):
    kind = "pressure"

    def run(self, context: ExperimentContext) -> None:
        sft, f = context.sft, context.f
        value = pressure(sft, f)
        mm = equilibrium_measure(sft, f)
        entropy = measure_entropy(mm)
        integral = float(integrate_edge(mm, f)) if f is not None else 0.0
        report = context.report
        report.set_result("value", value)
        report.set_result("measure_entropy", entropy)
        report.set_result("integral", integral)
        report.set_result("variational_residual", abs(value - entropy - integral))
        report.set_result("stationary", mm.stationary.tolist())
        report.set_result("kernel", mm.kernel.tolist())


class GurevichExperiment(Experiment):
    kind = "gurevich"

    def run(self, context: ExperimentContext) -> None:
        report = context.report
        report.set_result("transitivity", _transitivity(context))
        report.set_result("estimate", _estimate(context))
        report.set_result(
            "pressure_bound", gurevich_pressure_bound(context.require_skew(), context.f)
        )


class AbelianMinExperiment(Experiment):
    kind = "abelian-min"

    def run(self, context: ExperimentContext) -> None:
        skew = context.require_skew()
        data = abelian_data(skew, context.f)
        point = minimize_beta(data, context.params.tol)
        report = context.report
        report.set_result("rank", data.rank)
        report.set_result("critical_point", point.as_dict())
        mm = equilibrium_measure(skew.base, context.f)
        report.set_result("maximal_winding", winding_cycle(mm, data).tolist())
        report.set_result(
            "maximal_winding_vanishes", maximal_winding_vanishes(data, context.params.tol)
        )
        report.set_result("zero_winding_entropy", zero_winding_entropy(data, context.params.tol))
        if data.rank and context.f is None:
            counts, sizes, _ = cached_counts(
                data.skew_ab,
                context.params.n_max,
                None,
                "dp",
                context.threads,
                context.params.ball_cap,
                context.cache,
            )
            _counts_table(report, counts, sizes)
            report.set_result(
                "correction",
                {
                    "kappa": fit_lattice_correction(counts, point.value),
                    "expected": data.rank / 2,
                    "note": CORRECTION_NOTE,
                },
            )


class AmenabilityGapExperiment(Experiment):
    kind = "amenability-gap"

    def run(self, context: ExperimentContext) -> None:
        skew = context.require_skew()
        report = context.report
        report.set_result("amenable", skew.group.amenable)
        report.set_result("transitivity", _transitivity(context))
        estimate = _estimate(context)
        point = minimize_beta(abelian_data(skew, context.f), context.params.tol)
        difference = point.value - estimate["rate"]
        tolerance = context.params.verdict_tolerance
        report.set_result("estimate", estimate)
        report.set_result("abelian", point.as_dict())
        report.set_result("h_gurevich", estimate["rate"])
        report.set_result("h_gurevich_abelian", point.value)
        report.set_result("difference", difference)
        report.set_result("verdict_tolerance", tolerance)
        report.set_result("verdict", GAP if difference > tolerance else NO_GAP)


class FlowCountExperiment(Experiment):
    kind = "flow-count"

    def run(self, context: ExperimentContext) -> None:
        params = context.params
        roof = build_potential(context.sft, context.config.roof)
        assert roof is not None, "validated flow-count configs carry a roof"
        susp = Suspension(context.sft, roof)
        report = context.report
        report.set_result("flow_entropy", flow_entropy(susp))
        rows = flow_orbit_table(
            susp, params.T_max, context.skew, params.depth_cap, context.threads, params.ball_cap
        )
        report.add_table(
            "flow_orbits",
            ["T", "count_all", "count_trivial_class", "prime_count"],
            [[int(row.T), row.count_all, row.count_trivial_class, row.prime_count] for row in rows],
        )
        if context.skew is None:
            return
        estimate = cover_entropy_counting(
            susp,
            context.skew,
            params.T_max,
            params.depth_cap,
            context.threads,
            params.ball_cap,
            params.depth,
        )
        report.set_result(
            "cover_entropy_counting",
            {
                "rate": estimate.rate,
                "poly_exponent": estimate.poly_exponent,
                "n_range": list(estimate.n_range),
                "residual": estimate.residual,
                "transitivity": estimate.transitivity,
                "transitivity_warning": (
                    estimate.transitivity != TransitivityStatus.TRANSITIVE.value
                ),
            },
        )
        report.set_result(
            "cover_entropy_abelian",
            cover_entropy_abelian(susp, abelian_data(context.skew, context.f)),
        )


class EquidistributionExperiment(Experiment):
    kind = "equidistribution"

    def run(self, context: ExperimentContext) -> None:
        skew = context.require_skew()
        params = context.params
        data = abelian_data(skew, context.f)
        point = minimize_beta(data, params.tol)
        mm = equilibrium_at_minimum(data, point)
        report = context.report
        report.set_result("xi", list(point.xi))
        report.set_result("kernel", mm.kernel.tolist())
        report.set_result("stationary", mm.stationary.tolist())
        report.set_result("window", "loops of length exactly n")
        rows = []
        for n in params.ns:
            try:
                distance = equidistribution_distance(
                    skew, n, data, point, context.threads, params.ball_cap
                )
                rows.append([n, distance, None])
            except NoOrbits as exc:
                rows.append([n, None, exc.residue])
        report.add_table("tv_distance", ["n", "tv", "empty_residue"], rows)


class LargeDeviationExperiment(Experiment):
    kind = "ld"

    def run(self, context: ExperimentContext) -> None:
        skew = context.require_skew()
        params = context.params
        observable = build_potential(context.sft, context.config.observable)
        assert observable is not None, "validated ld configs carry an observable"
        data = abelian_data(skew, context.f)
        point = minimize_beta(data, params.tol)
        mm = equilibrium_at_minimum(data, point)
        report = context.report
        report.set_result("xi", list(point.xi))
        report.set_result("target", float(integrate_edge(mm, observable)))
        report.set_result("delta", params.delta)
        report.set_result("quantum", QUANTUM)
        rows = []
        for n in params.ns:
            try:
                fraction = deviation_fraction(
                    skew, n, data, observable, params.delta, point,
                    context.threads, params.ball_cap,
                )
                ratio = math.log(fraction) / n if fraction > 0 else -math.inf
                rows.append([n, fraction, ratio, None])
            except NoOrbits as exc:
                rows.append([n, None, None, exc.residue])
        report.add_table("ld_ratio", ["n", "fraction", "ld_ratio", "empty_residue"], rows)


class TransferBoundsExperiment(Experiment):
    kind = "transfer-bounds"

    def run(self, context: ExperimentContext) -> None:
        skew = context.require_skew()
        params = context.params
        bound = gurevich_pressure_bound(skew, context.f)
        values = [
            truncated_transfer_spr(skew, context.f, radius, params.ball_cap)
            for radius in params.radii
        ]
        report = context.report
        report.set_result("amenable", skew.group.amenable)
        report.set_result("pressure", bound)
        report.set_result("monotone", all(b >= a - 1e-12 for a, b in zip(values, values[1:])))
        report.set_result("largest", max(values) if values else None)
        report.add_table(
            "transfer_bounds",
            ["radius", "log_spectral_radius", "gap_to_pressure"],
            [[radius, value, bound - value] for radius, value in zip(params.radii, values)],
        )


def config_hash(config: ExperimentConfig) -> str:
    data = json.loads(render_config(config))
    data.pop("output", None)
    return content_hash(data)


def run_experiment(
    config: ExperimentConfig, threads: int = 1, cache: Optional[CountCache] = None
) -> Report:
    """Run the experiment named by ``config.kind`` and return its frozen report.

    Library errors propagate unchanged; the CLI maps them to exit codes.
    """
    experiment = Experiment.registry[config.kind]()
    sft = build_sft(config)
    context = ExperimentContext(
        config=config,
        sft=sft,
        f=build_potential(sft, config.potential),
        skew=build_skew(config),
        report=Report(config.name, config.kind, config_hash(config)),
        threads=max(1, threads),
        cache=cache,
    )
    started = time.perf_counter()
    logger.info("running %s experiment %s", config.kind, config.name)
    experiment.run(context)
    logger.info(
        "%s finished, wall_time_ms=%d",
        config.name,
        int((time.perf_counter() - started) * 1000),
    )
    context.report._freeze()
    return context.report

