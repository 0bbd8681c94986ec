"""
Command-line front end.

    python -m helfer_flux.app figures  --config run.json --out out/
    python -m helfer_flux.app validate --shell 50 500 --samples 1000000
    python -m helfer_flux.app qi       --r 0 --tau 1e-3 10 64 log
    python -m helfer_flux.app corr     --mode 2d --grid-a 10 1000 64 log --grid-b 1 1 1 linear
    python -m helfer_flux.app density  --r-grid 0 5 51 linear --t-grid 0 0.05 11 linear

Exit status: 0 success, 1 a physics check failed, 2 bad input or unwritable output.
"""
import argparse
import json
import logging
import sys
import uuid
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from helfer_flux import __version__, vacuum
from helfer_flux.models import GridScale, GridSpec, HelferParams, RunConfig, ShellSpec
from helfer_flux.params import make_params, params_from_input
from helfer_flux.service.helfer_service import HelferService
from helfer_flux.service.oracle_service import OracleService
from helfer_flux.service.qi_service import QIService
from helfer_flux.storage import OutputStore

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 10 ** 6
DEFAULT_SHELL = (50.0, 500.0)
HORIZON_T_MAX = 1e4
HORIZON_POINTS = 512
BOUND_SOURCE = "external: Lorentzian-sampling QI bound for a massless scalar in 4D"

DEFAULT_GRIDS: Dict[str, GridSpec] = {
    "fig1_r": GridSpec(min=0.0, max=10.0, count=256),
    "fig3_t": GridSpec(min=-0.05, max=0.05, count=201),
    "fig4_t": GridSpec(min=-0.05, max=0.05, count=201),
    "fig5_x": GridSpec(min=-3.0, max=3.0, count=61),
    "fig5_tprime": GridSpec(min=-2.95, max=2.95, count=60),
    "fig7_r": GridSpec(min=0.025, max=2.975, count=60),
    "fig7_dt": GridSpec(min=-3.0, max=3.0, count=61),
    "qi_tau": GridSpec(min=1e-3, max=10.0, count=64, scale=GridScale.LOG),
    "density_r": GridSpec(min=0.0, max=10.0, count=101),
    "density_t": GridSpec(min=0.0, max=0.0, count=1),
}

FIG1_LAMBDAS = (100.0, 300.0, 1000.0)
FIG2_LAMBDA = 1000.0
FIG2_TIMES = (0.0, 0.005, 0.05)
# (file, lambda, display scale) for the rho/flux-vs-t datasets at r = 2
TIME_SERIES_FIGURES = (("fig3", 100.0, 50), ("fig4", 1000.0, 300))
TIME_SERIES_RADIUS = 2.0

CORR_COLUMNS = {"2d": ("x", "tprime"), "4d": ("r", "dt")}


def setup_logging(verbose: bool = False) -> None:
    package_logger = logging.getLogger("helfer_flux")
    package_logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not package_logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        handler.setFormatter(formatter)
        package_logger.addHandler(handler)


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    if path is None:
        data = {}
    else:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"config {path} must hold a JSON object, got {type(data).__name__}")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig.model_validate(data)


def grid(config: RunConfig, name: str) -> GridSpec:
    return config.grids.get(name, DEFAULT_GRIDS[name])


def grid_from_args(values: Sequence[str]) -> GridSpec:
    low, high, count, scale = values
    return GridSpec(min=float(low), max=float(high), count=int(count), scale=scale)


def params_record(config: RunConfig, params: HelferParams) -> dict:
    record = params.model_dump(by_alias=True)
    record.update({"seed": config.seed, "version": __version__})
    return record


def run_id(config: RunConfig) -> str:
    return str(uuid.uuid5(uuid.NAMESPACE_URL, f"helfer-flux/{__version__}/{config.to_json()}"))


def _with_lambda(config: RunConfig, lambda_: float) -> HelferParams:
    p = config.params
    return make_params(lambda_, p.p0, p.q, p.chi0)


def cmd_figures(config: RunConfig, store: OutputStore) -> List[Path]:
    written = []
    base = params_from_input(config.params)

    r_points = grid(config, "fig1_r").points()
    fig1 = {lam: HelferService(_with_lambda(config, lam)).rho_total(r_points, 0.0) for lam in FIG1_LAMBDAS}
    written.append(
        store.write_csv(
            "fig1.csv",
            ["r"] + [f"rho_lambda{lam:g}" for lam in FIG1_LAMBDAS],
            ([r] + [fig1[lam][i] for lam in FIG1_LAMBDAS] for i, r in enumerate(r_points)),
            {**params_record(config, base), "lambda": [float(lam) for lam in FIG1_LAMBDAS], "t": 0.0},
        )
    )

    fig2_params = _with_lambda(config, FIG2_LAMBDA)
    helfer = HelferService(fig2_params)
    fig2 = {t: helfer.rho_total(r_points, t) for t in FIG2_TIMES}
    written.append(
        store.write_csv(
            "fig2.csv",
            ["r"] + [f"rho_t{t:g}" for t in FIG2_TIMES],
            ([r] + [fig2[t][i] for t in FIG2_TIMES] for i, r in enumerate(r_points)),
            params_record(config, fig2_params),
        )
    )

    for name, lam, scale in TIME_SERIES_FIGURES:
        series_params = _with_lambda(config, lam)
        helfer = HelferService(series_params)
        samples = helfer.rho_time_series(TIME_SERIES_RADIUS, grid(config, f"{name}_t"))
        t_points = [s.t for s in samples]
        i2a, i2b = helfer.flux_components(TIME_SERIES_RADIUS, t_points)
        rows = (
            [s.t, s.rho, s.rho * scale, s.flux, i2a[i], i2b[i]] for i, s in enumerate(samples)
        )
        written.append(
            store.write_csv(
                f"{name}.csv",
                ["t", "rho", f"rho_x{scale}", "flux", "i2a", "i2b"],
                rows,
                {**params_record(config, series_params), "r": TIME_SERIES_RADIUS, "display_scale": scale},
            )
        )

    written.append(_write_corr(store, "fig5.csv", "2d", grid(config, "fig5_x"), grid(config, "fig5_tprime"), config))
    written.append(_write_corr(store, "fig7.csv", "4d", grid(config, "fig7_r"), grid(config, "fig7_dt"), config))

    manifest = {
        "version": __version__,
        "run_id": run_id(config),
        "config": json.loads(config.to_json()),
        "files": [path.name for path in written],
    }
    written.append(store.write_json("manifest.json", manifest))
    return written


def _write_corr(store: OutputStore, name: str, mode: str, grid_a: GridSpec, grid_b: GridSpec, config: RunConfig) -> Path:
    samples = vacuum.corr_grid(mode, grid_a, grid_b)
    record = {
        "mode": mode,
        "grid_a": grid_a.model_dump(mode="json"),
        "grid_b": grid_b.model_dump(mode="json"),
        "version": __version__,
        "seed": config.seed,
        "legend": {label.value: vacuum.correlation_narrative(label) for label in {s.case_label for s in samples}},
    }
    return store.write_csv(
        name,
        list(CORR_COLUMNS[mode]) + ["C", "label"],
        ([s.coord_a, s.coord_b, s.c_value, s.case_label.value] for s in samples),
        record,
    )


def cmd_validate(config: RunConfig, store: OutputStore, shell: ShellSpec, n: int) -> int:
    params = params_from_input(config.params)
    oracle = OracleService(params, workers=config.workers)
    checks = oracle.validate(shell, n, config.seed)
    passed = all(check.passed for check in checks)
    report = {
        "params": params_record(config, params),
        "shell": shell.model_dump(),
        "samples": n,
        "checks": [check.model_dump(exclude={"estimate": {"elapsed"}}) for check in checks],
        "passed": passed,
    }
    store.write_json("validate.json", report)
    if not passed:
        failed = [f"{c.name}(r={c.r}, t={c.t})" for c in checks if not c.passed]
        logger.error(f"oracle checks failed: {', '.join(failed)}")
        return 1
    logger.info(f"all {len(checks)} oracle checks passed")
    return 0


def cmd_qi(config: RunConfig, store: OutputStore, r: float, tau_grid: GridSpec) -> int:
    params = params_from_input(config.params)
    logger.warning(f"bound_const={config.bound_const} is {BOUND_SOURCE}")
    qi = QIService(params)
    reports = qi.qi_margin(r, tau_grid, config.bound_const)
    horizon = qi.positivity_horizon(r, HORIZON_T_MAX, HORIZON_POINTS)
    n_failed = sum(not rep.passed for rep in reports)
    summary = {
        "rows": len(reports),
        "failed": n_failed,
        "passed": n_failed == 0,
        "window_t_star": horizon.t_star,
        "window_all_positive_beyond": horizon.all_positive_beyond,
        "window_crossings": horizon.n_crossings,
    }
    store.write_csv(
        "qi.csv",
        ["r", "tau", "averaged_rho", "bound_value", "margin", "passed"],
        ([rep.r, rep.tau_or_T, rep.averaged_rho, rep.bound_value, rep.margin, rep.passed] for rep in reports),
        {**params_record(config, params), "bound_const": config.bound_const, "bound_source": BOUND_SOURCE},
        summary=summary,
    )
    return 0 if n_failed == 0 else 1


def cmd_corr(config: RunConfig, store: OutputStore, mode: str, grid_a: GridSpec, grid_b: GridSpec) -> int:
    if mode not in CORR_COLUMNS:
        raise ValueError(f"mode must be '2d' or '4d', got {mode!r}")
    _write_corr(store, f"corr_{mode}.csv", mode, grid_a, grid_b, config)

    fit = None
    if grid_b.pinned and grid_a.scale == GridScale.LOG:
        fit = ("space", grid_b.min, grid_a)
    elif grid_a.pinned and grid_b.scale == GridScale.LOG:
        fit = ("time", grid_a.min, grid_b)
    if fit is not None:
        direction, fixed, varying = fit
        exponent = vacuum.falloff_exponent(vacuum.falloff_evaluator(mode, direction), fixed, varying)
        logger.info(f"{mode} {direction} falloff exponent: {exponent:.4f}")
        store.write_json(
            f"corr_{mode}_fit.json",
            {
                "mode": mode,
                "direction": direction,
                "fixed": fixed,
                "range": varying.model_dump(mode="json"),
                "exponent": exponent,
                "version": __version__,
            },
        )
    return 0


def cmd_density(config: RunConfig, store: OutputStore, r_grid: GridSpec, t_grid: GridSpec) -> int:
    params = params_from_input(config.params)
    samples = HelferService(params).field_grid(r_grid, t_grid)
    store.write_csv(
        "density.csv",
        ["r", "t", "rho1", "rho2", "rho", "flux"],
        ([s.r, s.t, s.rho1, s.rho2, s.rho, s.flux] for s in samples),
        {**params_record(config, params), "r_grid": r_grid.model_dump(mode="json"), "t_grid": t_grid.model_dump(mode="json")},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, help="64-bit seed (overrides seed)")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="helfer-flux", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    grid_meta = ("MIN", "MAX", "COUNT", "SCALE")

    sub.add_parser("figures", parents=[common], help="write the figure datasets")

    validate = sub.add_parser("validate", parents=[common], help="Monte Carlo oracle sweep")
    validate.add_argument("--shell", nargs=2, type=float, metavar=("LO", "HI"), default=list(DEFAULT_SHELL))
    validate.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, metavar="N")

    qi = sub.add_parser("qi", parents=[common], help="Lorentzian QI margins and window positivity")
    qi.add_argument("--r", type=float, default=0.0, metavar="V")
    qi.add_argument("--tau", nargs=4, metavar=grid_meta)
    qi.add_argument("--bound-const", type=float)

    corr = sub.add_parser("corr", parents=[common], help="vacuum correlator grid")
    corr.add_argument("--mode", choices=sorted(CORR_COLUMNS), default="2d")
    corr.add_argument("--grid-a", nargs=4, metavar=grid_meta)
    corr.add_argument("--grid-b", nargs=4, metavar=grid_meta)

    density = sub.add_parser("density", parents=[common], help="ad-hoc energy density / flux grid")
    density.add_argument("--r-grid", nargs=4, metavar=grid_meta)
    density.add_argument("--t-grid", nargs=4, metavar=grid_meta)
    return parser


def _dispatch(args: argparse.Namespace, config: RunConfig, store: OutputStore) -> int:
    if args.command == "figures":
        cmd_figures(config, store)
        return 0
    if args.command == "validate":
        shell = ShellSpec(lambda_lo=args.shell[0], lambda_hi=args.shell[1])
        return cmd_validate(config, store, shell, args.samples)
    if args.command == "qi":
        tau_grid = grid_from_args(args.tau) if args.tau else grid(config, "qi_tau")
        return cmd_qi(config, store, args.r, tau_grid)
    if args.command == "corr":
        default_a, default_b = ("fig5_x", "fig5_tprime") if args.mode == "2d" else ("fig7_r", "fig7_dt")
        grid_a = grid_from_args(args.grid_a) if args.grid_a else grid(config, default_a)
        grid_b = grid_from_args(args.grid_b) if args.grid_b else grid(config, default_b)
        return cmd_corr(config, store, args.mode, grid_a, grid_b)
    r_grid = grid_from_args(args.r_grid) if args.r_grid else grid(config, "density_r")
    t_grid = grid_from_args(args.t_grid) if args.t_grid else grid(config, "density_t")
    return cmd_density(config, store, r_grid, t_grid)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    overrides = {"seed": args.seed, "output_dir": args.out, "bound_const": getattr(args, "bound_const", None)}
    try:
        config = load_config(args.config, overrides)
        store = OutputStore(config.output_dir)
        return _dispatch(args, config, store)
    except ValueError as e:
        logger.error(f"invalid input: {e}")
        return 2
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
