"""Command-line entry point and orchestration.

Commands: build, spectrum, heat-trace, extremal, graph, verify, sweep.
Artifacts are CSV/JSON files under --out; the report path also renders
matplotlib figures next to the delimited output (disable with --no-plots).
Exit status 0 on success; on failure a machine-readable error JSON goes to
stdout and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .errors import HyplabError, SpecValidationError
from .extremal import verify_thm14
from .figures import render_figures
from .graphs import check_discrete_bounds, parse_edge_list
from .lab import compute_surface
from .reports import (
    PLOT_COLUMNS,
    base_metadata,
    emit_plot_data,
    spec_hash,
    write_csv,
    write_json,
)
from .sharpness import (
    build_test_functions,
    kernel_concentration,
    minimax_upper_bounds,
    sharpness_layout,
    verify_thm11,
    verify_thm12,
)
from .spec_io import parse_spec, parse_sweep, serialize_spec
from .spectral import spectrum_to_csv_rows

COMMANDS = ("build", "spectrum", "heat-trace", "extremal", "graph", "verify", "sweep")
DEFAULT_T_GRID = [1.0, 1.8, 3.2, 5.6, 10.0, 18.0, 32.0, 56.0, 100.0]
THM14_COLUMNS = ("x_id", "y_id", "r_x", "r_y", "d_w", "EL", "bound", "ratio")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPLAB_THREADS", "1")))
    except ValueError:
        return 1


def _load_spec(path, h_override, seed_override):
    text = Path(path).read_text()
    spec = parse_spec(text)
    if h_override is not None:
        spec.mesh_h = h_override
    if seed_override is not None:
        spec.solver["seed"] = seed_override
    return spec, spec_hash(serialize_spec(spec))


def _spec_run(spec, digest, for_heat=False):
    graph = spec.to_graph()
    k = None if spec.k_cut is None else spec.k_cut + 1
    run = compute_surface(spec.name, graph, spec.mesh_h, k=k, seed=spec.seed,
                          tol=spec.tol, for_heat=for_heat)
    run.params["spec_hash"] = digest
    return run

def _meta(spec, digest, model=None, extra=None):
    flags = dict(model.flags) if model is not None else {}
    if extra:
        flags.update(extra)
    return base_metadata(
        spec_hash=digest, mesh_h=spec.mesh_h,
        solver={"k_cut": spec.k_cut, "tol": spec.tol, "seed": spec.seed},
        seed=spec.seed, flags=flags,
    )


def _surface_facts(run):
    return {
        "genus": run.model.genus,
        "volume": run.model.volume,
        "I_geodesic": run.I_geo,
        "I_integral": run.I_int,
        "vertices": run.mesh.num_vertices,
        "triangles": run.mesh.num_triangles,
        "euler_characteristic": run.mesh.euler_characteristic(),
        "min_angle_deg": run.mesh.min_angle_deg(),
        "eigenpairs": run.spectrum.count,
        "max_residual": float(run.spectrum.residuals.max()),
    }


def cmd_build(spec, digest, out):
    graph = spec.to_graph()
    from .meshing import mesh_surface
    from .pants import assemble_surface

    model = assemble_surface(graph)
    mesh = mesh_surface(model, spec.mesh_h, seed=spec.seed)
    mesh.export_text(out / "mesh.txt")
    write_json(out / "build_summary.json", {
        "meta": _meta(spec, digest, model),
        "genus": model.genus,
        "volume": model.volume,
        "collars": len(model.collars),
        "vertices": mesh.num_vertices,
        "triangles": mesh.num_triangles,
        "euler_characteristic": mesh.euler_characteristic(),
        "hyperbolic_area": float(mesh.areas_hyperbolic().sum()),
        "min_angle_deg": mesh.min_angle_deg(),
    })
    return 0


def cmd_spectrum(spec, digest, out):
    run = _spec_run(spec, digest)
    write_csv(out / "spectrum.csv", spectrum_to_csv_rows(run.spectrum),
              ("index", "eigenvalue", "residual"))
    write_json(out / "spectrum_summary.json", {
        "meta": _meta(spec, digest, run.model),
        "surface": _surface_facts(run),
    })
    return 0


def cmd_heat_trace(spec, digest, out, t_grid=None, plots=True):
    run = _spec_run(spec, digest, for_heat=True)
    rows, summary = verify_thm12([run], t_grid or DEFAULT_T_GRID)
    write_csv(out / "heat_trace.csv", rows, ("surface", "t", "stat", "scaled"))
    write_json(out / "heat_summary.json", {
        "meta": _meta(spec, digest, run.model),
        "surface": _surface_facts(run),
        "fit": summary,
    })
    plot_rows = emit_plot_data({"heat": rows, "heat_summary": summary})
    write_csv(out / "plot_data.csv", plot_rows, PLOT_COLUMNS)
    if plots:
        render_figures(plot_rows, out)
    return 0


def cmd_extremal(spec, digest, out, samples=50, plots=True):
    run = _spec_run(spec, digest)
    rows, summary = verify_thm14(run.model, run.mesh, samples, seed=spec.seed,
                                 fem=run.fem)
    write_csv(out / "thm14.csv", rows, THM14_COLUMNS)
    write_json(out / "thm14_summary.json", {
        "meta": _meta(spec, digest, run.model, extra={
            "disc_grounding": summary["interpretation"]}),
        "surface": _surface_facts(run),
        "max_ratio": summary["max_ratio"],
        "pairs": summary["pairs"],
    })
    plot_rows = emit_plot_data({"thm14": rows})
    write_csv(out / "plot_data.csv", plot_rows, PLOT_COLUMNS)
    if plots:
        render_figures(plot_rows, out)
    return 0


def cmd_graph(path, out):
    g = parse_edge_list(Path(path).read_text())
    report = check_discrete_bounds(g, t_max=10_000)
    write_csv(out / "discrete_bounds.csv", [{
        "n": report.n,
        "trace_identity_residual": report.trace_identity_residual,
        "eigenvalue_ratio_min": report.eigenvalue_ratio_min,
        "eigenvalue_ratio_min_low_band": report.eigenvalue_ratio_min_low_band,
        "heat_constant": report.heat_constant,
        "t_max": report.t_max,
    }], ("n", "trace_identity_residual", "eigenvalue_ratio_min",
         "eigenvalue_ratio_min_low_band", "heat_constant", "t_max"))
    write_json(out / "graph_summary.json", {
        "meta": base_metadata(),
        "n": report.n,
        "edges": len(g.edges),
        "heat_constant": report.heat_constant,
    })
    return 0


def _minimax_rows(run, k_list):
    try:
        n, eps = sharpness_layout(run.model.graph)
    except HyplabError:
        return [], {}
    rows = []
    fitted = 0.0
    g = run.model.genus
    for k in k_list:
        if k + 1 > n:
            continue
        profile = build_test_functions(run.model, run.mesh, k + 1)
        bounds = minimax_upper_bounds(profile, run.fem)
        r_k = float(bounds[k])
        lam_k = float(run.spectrum.eigenvalues[k])
        rows.append({
            "surface": run.name, "k": k, "R_k": r_k, "lambda_k": lam_k,
            "exact_minimax_ok": int(lam_k <= r_k),
            "scaling": r_k / (eps * k * k / (g * g)),
        })
        fitted = max(fitted, r_k / (eps * k * k / (g * g)))
    return rows, {"fitted_C": fitted}


def cmd_verify(spec, digest, out, t_grid=None, k_list=(1, 2, 3), samples=50,
               plots=True):
    run = _spec_run(spec, digest, for_heat=True)

    rows11, sum11 = verify_thm11([run])
    write_csv(out / "thm11.csv", rows11,
              ("surface", "k", "lambda_k", "I", "g", "ratio"))
    rows12, sum12 = verify_thm12([run], t_grid or DEFAULT_T_GRID)
    write_csv(out / "heat_trace.csv", rows12, ("surface", "t", "stat", "scaled"))
    rows14, sum14 = verify_thm14(run.model, run.mesh, samples, seed=spec.seed,
                                 fem=run.fem)
    write_csv(out / "thm14.csv", rows14, THM14_COLUMNS)
    mrows, msum = _minimax_rows(run, k_list)
    if mrows:
        write_csv(out / "minimax.csv", mrows,
                  ("surface", "k", "R_k", "lambda_k", "exact_minimax_ok", "scaling"))
    write_csv(out / "spectrum.csv", spectrum_to_csv_rows(run.spectrum),
              ("index", "eigenvalue", "residual"))
    run.mesh.export_text(out / "mesh.txt")

    payload = {
        "meta": _meta(spec, digest, run.model, extra={
            "disc_grounding": sum14["interpretation"]}),
        "surface": _surface_facts(run),
        "thm11": sum11,
        "thm12": sum12,
        "thm14": {"max_ratio": sum14["max_ratio"], "pairs": sum14["pairs"]},
        "minimax": msum,
    }
    if run.is_sharpness:
        payload["kernel_concentration"] = kernel_concentration(run)
    write_json(out / "verify_summary.json", payload)
    reports = {"thm11": rows11, "heat": rows12, "heat_summary": sum12,
               "thm14": rows14, "minimax": mrows}
    plot_rows = emit_plot_data(reports)
    write_csv(out / "plot_data.csv", plot_rows, PLOT_COLUMNS)
    if plots:
        render_figures(plot_rows, out)
    return 0


def cmd_sweep(path, out, seed_override, h_override, deterministic, plots=True):
    sweep = parse_sweep(Path(path).read_text())
    if seed_override is not None:
        sweep.seed = seed_override
    for spec in sweep.surfaces:
        spec.solver.setdefault("seed", sweep.seed)
        if h_override is not None:
            spec.mesh_h = h_override

    def job(spec):
        digest = spec_hash(serialize_spec(spec))
        return _spec_run(spec, digest, for_heat=True)

    workers = 1 if deterministic else _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(job, sweep.surfaces))
    else:
        runs = [job(s) for s in sweep.surfaces]

    rows11, sum11 = verify_thm11(runs)
    write_csv(out / "thm11.csv", rows11,
              ("surface", "k", "lambda_k", "I", "g", "ratio"))
    rows12, sum12 = verify_thm12(runs, sweep.t_grid)
    write_csv(out / "thm12.csv", rows12, ("surface", "t", "stat", "scaled"))
    all_minimax = []
    fitted = {}
    for run in runs:
        mrows, msum = _minimax_rows(run, sweep.k_list)
        all_minimax.extend(mrows)
        if msum:
            fitted[run.name] = msum["fitted_C"]
    if all_minimax:
        write_csv(out / "minimax.csv", all_minimax,
                  ("surface", "k", "R_k", "lambda_k", "exact_minimax_ok", "scaling"))
    write_json(out / "sweep_summary.json", {
        "meta": base_metadata(seed=sweep.seed, mesh_h=sweep.mesh_h),
        "surfaces": {r.name: _surface_facts(r) for r in runs},
        "thm11": sum11,
        "thm12": sum12,
        "minimax_fitted_C": fitted,
    })
    plot_rows = emit_plot_data({
        "thm11": rows11, "heat": rows12, "heat_summary": sum12,
        "minimax": all_minimax,
    })
    write_csv(out / "plot_data.csv", plot_rows, PLOT_COLUMNS)
    if plots:
        render_figures(plot_rows, out)
    return 0


def run(spec_path: str, command: str, out_dir: str, seed: int = None,
        deterministic: bool = True, h: float = None, plots: bool = True) -> int:
    """Execute one command; writes artifacts under out_dir and returns 0."""
    if command not in COMMANDS:
        raise SpecValidationError(f"unknown command {command!r}; "
                                  f"expected one of {COMMANDS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if command == "graph":
        return cmd_graph(spec_path, out)
    if command == "sweep":
        return cmd_sweep(spec_path, out, seed, h, deterministic, plots=plots)
    spec, digest = _load_spec(spec_path, h, seed)
    if command == "build":
        return cmd_build(spec, digest, out)
    if command == "spectrum":
        return cmd_spectrum(spec, digest, out)
    if command == "heat-trace":
        return cmd_heat_trace(spec, digest, out, plots=plots)
    if command == "extremal":
        return cmd_extremal(spec, digest, out, plots=plots)
    return cmd_verify(spec, digest, out, plots=plots)


def _bool_flag(value: str) -> bool:
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {value!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hyplab",
        description="Hyperbolic-surface spectral laboratory",
    )
    parser.add_argument("--spec", required=True,
                        help="surface spec JSON, sweep config, or edge-list file")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--deterministic", type=_bool_flag, default=True)
    parser.add_argument("--h", type=float, default=None,
                        help="mesh spacing override")
    parser.add_argument("--no-plots", action="store_true",
                        help="skip figure rendering")
    parser.add_argument("--version", action="version", version=__version__)
    args = parser.parse_args(argv)
    try:
        return run(args.spec, args.command, args.out, seed=args.seed,
                   deterministic=args.deterministic, h=args.h,
                   plots=not args.no_plots)
    except SpecValidationError as exc:
        print(json.dumps({"error": {
            "code": exc.code, "message": str(exc),
            "violations": getattr(exc, "violations", []),
        }}, sort_keys=True))
        return 2
    except HyplabError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}},
                         sort_keys=True))
        return 3


if __name__ == "__main__":
    sys.exit(main())
