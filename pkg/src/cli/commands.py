"""Command implementations and the dispatcher behind ``python -m src.cli``."""
from __future__ import annotations

import logging
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .. import __version__
from ..chain.generator import DENSE_LIMIT, AbsorbedGenerator, SurvivalCurve, validate
from ..criteria.certificate import certify
from ..criteria.mixing import bound_curve, master_bound_slack, mixing_integral, tv_to_qsd_curve
from ..criteria.series import s_series
from ..errors import CriteriaViolation
from ..io.export import write_csv, write_json, write_plot_script
from ..io.ingest import (
    bd_spec_from_document,
    generator_from_document,
    load_document,
    multibd_spec_from_document,
    neutron_spec_from_document,
)
from ..models.birth_death import build_bd
from ..models.multitype import build_multibd, check_weak_cooperation, domination_rates
from ..neutron.estimators import (
    MIN_WINDOW_POINTS,
    MIN_WINDOW_SURVIVORS,
    estimate_lambda0,
    estimate_qsd,
    estimate_survival_curve,
)
from ..neutron.assumption_b import disk_assumption_b_params
from ..neutron.density_bound import verify_transport_density_bound
from ..neutron.geometry import Disk
from ..neutron.transport import InitialLaw, SimulationConfig
from ..spectral.triple import solve_spectral, spectrum_report
from .config import RunConfig, config_hash
from .report import write_report

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
BOUND_TOLERANCE = 1e-9

PLOTS = {
    "tv_bound.csv": ("t", ["sup_tv", "bound"], True),
    "ratio_curve.csv": ("t", ["ratio"], False),
    "survival.csv": ("t", ["survival", "ci_lo", "ci_hi"], True),
}


@dataclass
class RunState:
    """Artifacts written so far and the summary copied into the manifest."""

    out: Path
    summary: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    def json(self, name: str, payload: Any) -> None:
        write_json(self.out / name, payload)
        self.artifacts.append(name)

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
        write_csv(self.out / name, header, rows)
        self.artifacts.append(name)

    def note(self, **values: Any) -> None:
        for key, value in values.items():
            if isinstance(value, (np.floating, np.integer, np.bool_)):
                value = value.item()
            self.summary[key] = value


def _validated(gen: AbsorbedGenerator) -> AbsorbedGenerator:
    validate(gen).raise_if_invalid()
    return gen


def _certify_generator(gen: AbsorbedGenerator, document: Dict[str, Any], config: RunConfig, state: RunState) -> None:
    triple = solve_spectral(gen, config.tol)
    state.json("spectral.json", triple.to_dict())
    state.note(lambda0=triple.lambda0, gap=triple.gap)
    options = document.get("certify", {})
    cert = certify(gen, triple, t0=options.get("t0"), t_max=options.get("t_max"), grid_step=options.get("grid_step"))
    state.json("certificate.json", cert.to_dict())
    state.note(t0=cert.t0, c1=cert.c1, c2=cert.c2, c2_alpha=cert.c2_alpha, gamma_bound=cert.gamma_bound)
    state.csv("ratio_curve.csv", ("t", "ratio"), zip(cert.ratio_times, cert.ratio_values))

    tv = document.get("tv", {})
    curve = tv_to_qsd_curve(gen, triple.alpha, float(tv.get("t_max", 10 * cert.t0)), float(tv.get("step", cert.t0 / 4)))
    bound = bound_curve(cert, curve.times)
    state.csv("tv_bound.csv", ("t", "sup_tv", "bound", "slack"), zip(curve.times, curve.sup, bound, bound - curve.sup))
    slack = master_bound_slack(cert, curve)
    state.note(tv_slack=slack, mixing_integral=mixing_integral(curve, cert))

    if gen.n <= DENSE_LIMIT:
        spectrum = spectrum_report(gen, triple, gamma_bound=cert.gamma_bound)
        state.csv(
            "spectrum.csv",
            ("re", "im", "kind"),
            ((entry.value.real, entry.value.imag, entry.kind) for entry in spectrum.entries),
        )
        state.note(spectrum_ok=spectrum.ok)
        if not spectrum.ok:
            raise CriteriaViolation("eigenvalues above -λ₀ - γ_bound", verdict="SPECTRUM-FAIL")
    if slack < -BOUND_TOLERANCE:
        raise CriteriaViolation(f"TV exceeds the certified bound by {-slack:.3e}", verdict="TV-BOUND-FAIL")


def _series(spec: Any, document: Dict[str, Any], state: RunState, *, z: int = 0) -> None:
    options = document.get("series", {})
    if not options.get("enabled", True):
        return
    report = s_series(spec, int(options.get("K_max", 10_000)), int(options.get("z", z)))
    state.json("series.json", report.to_dict())
    state.note(series_verdict=report.verdict, series_total=report.total)


def command_solve(document: Dict[str, Any], config: RunConfig, state: RunState) -> None:
    gen = _validated(generator_from_document(document))
    triple = solve_spectral(gen, config.tol)
    state.json("spectral.json", triple.to_dict())
    alpha_residual, eta_residual = triple.residuals(gen)
    state.note(model=document.get("name", "generator"), states=gen.n, lambda0=triple.lambda0, gap=triple.gap,
               alpha_residual=alpha_residual, eta_residual=eta_residual)


def command_certify(document: Dict[str, Any], config: RunConfig, state: RunState) -> None:
    gen = _validated(generator_from_document(document))
    state.note(model=document.get("name", "generator"), states=gen.n)
    _certify_generator(gen, document, config, state)


def command_bd(document: Dict[str, Any], config: RunConfig, state: RunState) -> None:
    spec = bd_spec_from_document(document)
    state.note(model=document.get("name", "bd"), states=spec.N)
    _series(spec, document, state)
    _certify_generator(_validated(build_bd(spec)), document, config, state)


def command_multibd(document: Dict[str, Any], config: RunConfig, state: RunState) -> None:
    spec = multibd_spec_from_document(document)
    state.note(model=document.get("name", f"multibd-{spec.mode}"), states=spec.state_count)
    if spec.mode == "cooperative":
        weak = check_weak_cooperation(spec)
        state.json("weak_cooperation.json", asdict(weak))
        state.note(weak_cooperation=weak.holds)
    domination = domination_rates(spec)
    _series(domination, document, state, z=domination.first_level - 1)
    gen = _validated(build_multibd(spec))
    if document.get("certify", {}).get("enabled", gen.n <= DENSE_LIMIT):
        _certify_generator(gen, document, config, state)
    else:
        logger.info("skipping certification of a %d-state chain", gen.n)


def _time_grid(options: Dict[str, Any]) -> np.ndarray:
    stop = float(options.get("stop", 10.0))
    step = float(options.get("step", 0.25))
    if not (step > 0 and stop > 0):
        raise ValueError("t_grid needs positive stop and step")
    return step * np.arange(int(round(stop / step)) + 1)


def _auto_window(curve: SurvivalCurve) -> Optional[Tuple[float, float]]:
    """From the first time half the particles are gone to the last time 50 remain."""

    half = np.nonzero(curve.values <= 0.5)[0]
    enough = np.nonzero(curve.survivors >= MIN_WINDOW_SURVIVORS)[0]
    if not half.size or not enough.size or enough[-1] - half[0] + 1 < MIN_WINDOW_POINTS:
        return None
    return float(curve.times[half[0]]), float(curve.times[enough[-1]])


def command_neutron(document: Dict[str, Any], config: RunConfig, state: RunState) -> None:
    spec = neutron_spec_from_document(document)
    seed = config.seed if config.seed is not None else int(document.get("seed", 0))
    N = int(document.get("N", 1_000))
    init = InitialLaw.from_dict(document.get("init", {}))
    simulation = SimulationConfig(threads=config.threads)
    state.note(model=document.get("name", "neutron"), seed=seed, particles=N, block_size=simulation.block_size)

    curve = estimate_survival_curve(spec, init, N, _time_grid(document.get("t_grid", {})), seed, simulation)
    state.csv(
        "survival.csv",
        ("t", "survivors", "survival", "ci_lo", "ci_hi"),
        zip(curve.times, curve.survivors, curve.values, curve.ci_lo, curve.ci_hi),
    )
    window = tuple(document["window"]) if "window" in document else _auto_window(curve)
    if window is None:
        logger.warning("too few survivors for a decay-rate window; decay.json not written")
    else:
        decay = estimate_lambda0(curve, window)
        state.json("decay.json", decay.to_dict())
        state.note(lambda0=decay.rate, lambda0_stderr=decay.stderr)

    qsd = document.get("qsd")
    if qsd is not None:
        histogram = estimate_qsd(
            spec,
            float(qsd["t_star"]),
            int(qsd.get("N", 10_000)),
            qsd.get("mode", "fleming_viot"),
            tuple(qsd.get("bins", (8, 8, 8))),
            seed,
            init,
            simulation,
        )
        state.csv("qsd_histogram.csv", ("x_lo", "x_hi", "y_lo", "y_hi", "a_lo", "a_hi", "mass"), histogram.cells())
        state.note(qsd_effective_sample_size=histogram.effective_sample_size)

    density = document.get("density_bound")
    if density is not None:
        if not isinstance(spec.domain, Disk):
            raise ValueError("the density bound is checked on disks only")
        table = verify_transport_density_bound(
            spec,
            tuple(density.get("x", spec.domain.center)),
            float(density["t"]),
            int(density.get("N", 100_000)),
            seed,
            cells=tuple(density.get("cells", (8, 8))),
            arcs=int(density.get("arcs", 8)),
            config=simulation,
        )
        state.csv(
            "density_bound.csv",
            ("x_lo", "x_hi", "y_lo", "y_hi", "a_lo", "a_hi", "empirical", "rhs", "margin", "passed"),
            (
                (cell.x_lo, cell.x_hi, cell.y_lo, cell.y_hi, cell.a_lo, cell.a_hi, cell.empirical, cell.rhs, cell.margin, cell.passed)
                for cell in table.cells
            ),
        )
        state.note(density_pass_fraction=table.pass_fraction)

    assumption = document.get("assumption_b")
    if assumption is not None:
        if not isinstance(spec.domain, Disk):
            raise ValueError("assumption_b parameters are derived for disks only")
        params = disk_assumption_b_params(spec.domain.radius, float(assumption["epsilon"]), seed=seed)
        state.json("assumption_b.json", params.to_dict())
        state.note(assumption_b_verified=params.verified)


HANDLERS: Dict[str, Callable[[Dict[str, Any], RunConfig, RunState], None]] = {
    "solve": command_solve,
    "certify": command_certify,
    "bd": command_bd,
    "multibd": command_multibd,
    "neutron": command_neutron,
}


def versions() -> Dict[str, str]:
    found = {"python": platform.python_version(), "qsdlab": __version__}
    for package in ("numpy", "scipy", "sympy"):
        try:
            found[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            found[package] = "unknown"
    return found


def run(config: RunConfig) -> int:
    """Execute one command; returns 0 (ok), 2 (negative verdict) or 1 (error)."""

    started = datetime.now(timezone.utc).isoformat()
    state = RunState(config.out)
    document: Dict[str, Any] = {}
    verdict, error, status = "OK", None, 0
    try:
        config.check_paths()
        if config.command == "report":
            summary = write_report(config.results_dir, config.out)
            logger.info("report: %d runs (%d incomplete)", len(summary.rows), summary.incomplete)
            return 0
        document = load_document(config.config)
        HANDLERS[config.command](document, config, state)
    except CriteriaViolation as exc:
        verdict, error, status = exc.verdict, str(exc), 2
        logger.warning("negative verdict %s: %s", exc.verdict, exc)
    except (ValueError, ArithmeticError, KeyError, TypeError, OSError) as exc:
        verdict, error, status = "ERROR", str(exc), 1
        logger.error("%s failed: %s", config.command, exc)
    if config.command == "report":
        return status
    try:
        plots = {name: spec for name, spec in PLOTS.items() if name in state.artifacts}
        if plots:
            write_plot_script(config.out, plots)
            state.artifacts.append("plot_results.py")
        write_json(
            config.out / MANIFEST,
            {
                "command": config.command,
                "config": str(config.config) if config.config else None,
                "config_hash": config_hash(config.command, document, config.overrides()),
                "seed": state.summary.get("seed", config.seed),
                "versions": versions(),
                "verdict": verdict,
                "error": error,
                "summary": state.summary,
                "artifacts": sorted(state.artifacts),
                "run_info": {
                    "started": started,
                    "finished": datetime.now(timezone.utc).isoformat(),
                    "threads": config.threads,
                },
            },
        )
    except OSError as exc:
        logger.error("cannot write the run manifest: %s", exc)
        return 1
    return status
