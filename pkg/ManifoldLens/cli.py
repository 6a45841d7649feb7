# cli.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Command-line entry point: augment, synth, estimate-dim, frame, curvature, compare-*, report.
"""
Subcommands wiring the pipeline together. JSON goes to stdout (or --out),
diagnostics to stderr. run() maps outcomes to exit codes: 0 on success,
1 on data/parameter errors, 2 on usage errors.
"""


from __future__ import annotations
import concurrent.futures
import logging
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click

from . import augment, compare, curvature, exporter, models, patchio, synth, tangent
from .errors import LensError, ParameterError
from .patterns import RE_META_SUFFIX
from .utils import worker_count

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".pgm", ".ppm", ".pnm"}


@dataclass
class RunConfig:
    """Everything one subcommand needs, checked up front by validate()."""
    command: str
    inputs: List[pathlib.Path] = field(default_factory=list)
    input_dirs: List[pathlib.Path] = field(default_factory=list)
    output: Optional[pathlib.Path] = None
    out_dir: Optional[pathlib.Path] = None
    theta: float = 0.90
    residual_tol: float = 1e-8
    eps_ratio: float = 1e-9
    ridge: float = 0.0
    k_max: int = 22
    range_lo: float = 0.8
    range_hi: float = 1.2
    seed: int = 0
    parallel: Optional[int] = None
    dim: Optional[int] = None

    def validate(self) -> "RunConfig":
        for p in self.inputs:
            if not p.is_file():
                raise ParameterError(f"{self.command}: input file not found: {p}")
        for p in self.input_dirs:
            if not p.is_dir():
                raise ParameterError(f"{self.command}: input directory not found: {p}")
        if not 0.0 < self.theta <= 1.0:
            raise ParameterError(f"theta must lie in (0, 1], got {self.theta}")
        if not 0.0 <= self.residual_tol < 1.0:
            raise ParameterError(f"residual-tol must lie in [0, 1), got {self.residual_tol}")
        if self.eps_ratio < 0.0:
            raise ParameterError(f"eps-ratio must be >= 0, got {self.eps_ratio}")
        if self.ridge < 0.0:
            raise ParameterError(f"ridge must be >= 0, got {self.ridge}")
        if self.k_max < 1:
            raise ParameterError(f"k-max must be >= 1, got {self.k_max}")
        if not self.range_lo < self.range_hi:
            raise ParameterError(f"range needs lo < hi, got [{self.range_lo}, {self.range_hi}]")
        if self.parallel is not None and self.parallel < 1:
            raise ParameterError(f"parallel must be >= 1, got {self.parallel}")
        if self.dim is not None and self.dim < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim}")
        return self

    @property
    def workers(self) -> int:
        return worker_count(self.parallel)


def _path(value: Optional[str]) -> Optional[pathlib.Path]:
    return pathlib.Path(value) if value else None


def _emit(payload: Dict[str, Any], out: Optional[pathlib.Path]) -> None:
    if out is None:
        click.echo(exporter.dumps(payload), nl=False)
    else:
        exporter.write_json(payload, out)


def _config(ctx: click.Context, command: str, **kwargs: Any) -> RunConfig:
    parallel = (ctx.obj or {}).get("parallel")
    return RunConfig(command=command, parallel=parallel, **kwargs).validate()


def _stem(path: pathlib.Path) -> str:
    return path.name[:-len(".json")] if path.name.endswith(".json") else path.stem


@click.group()
@click.option("--parallel", type=int, default=None, help="Worker pool size (default: CURV_THREADS or 1)")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on stderr")
@click.pass_context
def main(ctx: click.Context, parallel: Optional[int], verbose: bool) -> None:
    """Local dimension and curvature of activation manifolds."""
    ctx.ensure_object(dict)
    ctx.obj["parallel"] = parallel
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


@main.command("augment")
@click.option("--input", "--image", "image_path", type=click.Path(dir_okay=False), required=True, help="PGM/PPM (or .npy) image")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True, help="Directory for derivative images")
@click.option("--k-max", type=int, default=22, show_default=True, help="Largest k per channel")
@click.option("--mode", type=click.Choice(augment.GRID_MODES), default="trailing", show_default=True)
@click.option("--raw", is_flag=True, help="Store exact float reconstructions as .npy")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Summary JSON path")
@click.pass_context
def augment_cmd(
    ctx: click.Context, image_path: str, out_dir: str, k_max: int, mode: str, raw: bool, out_path: Optional[str],
) -> None:
    """Write the k1 x k2 x k3 grid of derivative images plus a manifest."""
    cfg = _config(ctx, "augment", inputs=[pathlib.Path(image_path)], out_dir=pathlib.Path(out_dir),
                  output=_path(out_path), k_max=k_max)
    src = cfg.inputs[0]
    img = patchio.read_raw_image(src) if src.suffix.lower() == ".npy" else patchio.read_image(src)
    spec = augment.GridSpec(k_max=cfg.k_max, channels=img.channel_count, mode=mode)
    suffix = ".npy" if raw else (".ppm" if img.channel_count == 3 else ".pgm")
    stem = src.stem

    entries = []
    for item in augment.generate_grid(img, spec, quantize=not raw, workers=cfg.workers):
        name = augment.derivative_name(stem, item.ks) + suffix
        target = cfg.out_dir / name
        if raw:
            patchio.write_raw_image(item.image, target)
        else:
            patchio.write_image(item.image, target)
        entries.append(exporter.manifest_entry(item.ks, name, item.truncation_error, item.channel_errors))

    manifest = exporter.build_manifest(str(src), mode, cfg.k_max, img.channel_count, raw, entries)
    manifest_path = exporter.write_json(dict(manifest), cfg.out_dir / f"{stem}.manifest.json")
    logger.info("Derivative grid: %s images in %s", len(entries), cfg.out_dir)
    _emit(exporter.envelope("augment_summary", {
        "count": len(entries),
        "manifest": str(manifest_path),
        "mode": mode,
        "k_max": cfg.k_max,
    }), cfg.output)


@main.command("synth")
@click.option("--kind", type=click.Choice([k.value for k in synth.SynthKind]), required=True)
@click.option("--d", "d", type=int, required=True, help="Intrinsic dimension")
@click.option("--D", "ambient_dim", type=int, required=True, help="Ambient dimension")
@click.option("--n", "n", type=int, default=1000, show_default=True, help="Sample count")
@click.option("--rho", type=float, default=0.1, show_default=True, help="Patch radius")
@click.option("--r", "radius", type=float, default=1.0, show_default=True, help="Sphere radius")
@click.option("--hessian", "hessians", multiple=True, help='Graph Hessian per normal, e.g. "2,0;0,3"')
@click.option("--noise", type=float, default=0.0, show_default=True, help="Gaussian coordinate noise")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Patch CSV path")
@click.option("--oracle", "oracle_path", type=click.Path(dir_okay=False), default=None,
              help="Oracle JSON path (default: <out>.oracle.json)")
@click.pass_context
def synth_cmd(
    ctx: click.Context, kind: str, d: int, ambient_dim: int, n: int, rho: float, radius: float,
    hessians: Tuple[str, ...], noise: float, seed: int, out_path: str, oracle_path: Optional[str],
) -> None:
    """Sample a synthetic patch and write it with its analytic oracle."""
    cfg = _config(ctx, "synth", output=pathlib.Path(out_path), seed=seed)
    hess = synth.parse_hessians(hessians, d) if hessians else None
    spec = synth.SynthSpec(
        kind=synth.SynthKind(kind), d=d, D=ambient_dim, n=n, rho=rho, seed=cfg.seed,
        radius=radius, hessians=hess, noise=noise,
    )
    patch = synth.sample(spec)
    patchio.write_patch(patch, cfg.output)
    payload = exporter.synth_payload(spec.to_dict(), synth.oracle_for(spec).to_dict(), cfg.output.name)
    oracle_target = _path(oracle_path) or cfg.output.with_name(cfg.output.stem + ".oracle.json")
    exporter.write_json(payload, oracle_target)
    _emit(payload, None)


@main.command("estimate-dim")
@click.option("--patch", "patch_path", type=click.Path(dir_okay=False), required=True)
@click.option("--theta", type=float, default=0.90, show_default=True, help="Eigenvalue mass fraction")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def estimate_dim_cmd(ctx: click.Context, patch_path: str, theta: float, out_path: Optional[str]) -> None:
    """PCA spectrum and the estimated intrinsic dimension."""
    cfg = _config(ctx, "estimate-dim", inputs=[pathlib.Path(patch_path)], output=_path(out_path), theta=theta)
    patch = patchio.read_patch(cfg.inputs[0])
    spectrum = tangent.pca_spectrum(patch)
    d = tangent.estimate_dimension(spectrum, cfg.theta)
    _emit(exporter.dimension_payload(spectrum, d, cfg.theta, patch.source), cfg.output)


@main.command("frame")
@click.option("--patch", "patch_path", type=click.Path(dir_okay=False), required=True)
@click.option("--dim", type=int, default=None, help="Tangent dimension (default: estimated)")
@click.option("--theta", type=float, default=0.90, show_default=True)
@click.option("--residual-tol", type=float, default=1e-8, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Frame JSON header path")
@click.pass_context
def frame_cmd(
    ctx: click.Context, patch_path: str, dim: Optional[int], theta: float, residual_tol: float, out_path: str,
) -> None:
    """Tangent and normal bases at the base point, as CSV blocks plus a JSON header."""
    cfg = _config(ctx, "frame", inputs=[pathlib.Path(patch_path)], output=pathlib.Path(out_path),
                  theta=theta, residual_tol=residual_tol, dim=dim)
    patch = patchio.read_patch(cfg.inputs[0])
    d = cfg.dim if cfg.dim is not None else tangent.estimate_dimension(tangent.pca_spectrum(patch), cfg.theta)
    frame = tangent.build_frame(patch, d, cfg.residual_tol)
    patchio.write_frame(frame, cfg.output)


def _write_report(report: models.CurvatureReport, target: Optional[pathlib.Path]) -> Dict[str, Any]:
    payload = exporter.report_payload(report)
    if target is not None:
        exporter.write_json(payload, target)
        stem = _stem(target)
        exporter.write_distribution_csv(report.riemann_distribution, target.with_name(stem + ".riemann.csv"))
        exporter.write_distribution_csv(report.sectional_distribution, target.with_name(stem + ".sectional.csv"))
    return payload


@main.command("curvature")
@click.option("--patch", "patch_paths", type=click.Path(dir_okay=False), multiple=True, required=True)
@click.option("--theta", type=float, default=0.90, show_default=True)
@click.option("--dim", type=int, default=None, help="Override the estimated dimension")
@click.option("--residual-tol", type=float, default=1e-8, show_default=True)
@click.option("--ridge", type=float, default=0.0, show_default=True, help="Ridge penalty for noisy patches")
@click.option("--abs", "absolute", is_flag=True, help="Sort absolute values")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Report JSON (single patch)")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Report directory (several patches)")
@click.pass_context
def curvature_cmd(
    ctx: click.Context, patch_paths: Tuple[str, ...], theta: float, dim: Optional[int], residual_tol: float,
    ridge: float, absolute: bool, out_path: Optional[str], out_dir: Optional[str],
) -> None:
    """Riemann and sectional curvature distributions per patch."""
    cfg = _config(ctx, "curvature", inputs=[pathlib.Path(p) for p in patch_paths], output=_path(out_path),
                  out_dir=_path(out_dir), theta=theta, residual_tol=residual_tol, ridge=ridge, dim=dim)
    if len(cfg.inputs) > 1 and cfg.out_dir is None:
        raise ParameterError("several --patch values need --out-dir")

    def one(path: pathlib.Path) -> models.CurvatureReport:
        patch = patchio.read_patch(path)
        return curvature.patch_curvature(
            patch, cfg.theta, cfg.residual_tol, dim=cfg.dim, ridge=cfg.ridge, absolute=absolute,
        )

    with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        reports = list(pool.map(one, cfg.inputs))

    if cfg.out_dir is None:
        payload = _write_report(reports[0], cfg.output)
        if cfg.output is None:
            _emit(payload, None)
        return
    written = []
    for path, report in zip(cfg.inputs, reports):
        target = cfg.out_dir / f"{path.stem}.report.json"
        _write_report(report, target)
        written.append(str(target))
    _emit(exporter.envelope("curvature_batch", {"reports": written}), cfg.output)


@main.command("compare-euclid")
@click.option("--a", "a_path", type=click.Path(dir_okay=False), required=True)
@click.option("--b", "b_path", type=click.Path(dir_okay=False), required=True)
@click.option("--theta", type=float, default=0.90, show_default=True)
@click.option("--dim", type=int, default=None, help="Reduced dimension (default: larger estimate)")
@click.option("--procrustes", is_flag=True, help="Restrict T to scale * rotation")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def compare_euclid_cmd(
    ctx: click.Context, a_path: str, b_path: str, theta: float, dim: Optional[int], procrustes: bool,
    out_path: Optional[str],
) -> None:
    """Length, distance, rank and affine-fit statistics for two index-aligned patches."""
    cfg = _config(ctx, "compare-euclid", inputs=[pathlib.Path(a_path), pathlib.Path(b_path)],
                  output=_path(out_path), theta=theta, dim=dim)
    p1, p2 = (patchio.read_patch(p) for p in cfg.inputs)
    result = compare.euclidean_comparison(p1, p2, cfg.theta, cfg.dim, procrustes=procrustes)
    _emit(exporter.euclid_payload(result, [str(p) for p in cfg.inputs]), cfg.output)


@main.command("compare-curvature")
@click.option("--a", "a_path", type=click.Path(dir_okay=False), required=True)
@click.option("--b", "b_path", type=click.Path(dir_okay=False), required=True)
@click.option("--eps-ratio", type=float, default=1e-9, show_default=True, help="Relative near-zero denominator cut")
@click.option("--noise-floor/--no-noise-floor", default=True, show_default=True,
              help="Also drop denominators below the reports' curvature noise")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--csv-dir", type=click.Path(file_okay=False), default=None, help="Overlay and ratio-curve CSVs")
@click.pass_context
def compare_curvature_cmd(
    ctx: click.Context, a_path: str, b_path: str, eps_ratio: float, noise_floor: bool,
    out_path: Optional[str], csv_dir: Optional[str],
) -> None:
    """Similar ratios of two curvature reports."""
    cfg = _config(ctx, "compare-curvature", inputs=[pathlib.Path(a_path), pathlib.Path(b_path)],
                  output=_path(out_path), out_dir=_path(csv_dir), eps_ratio=eps_ratio)
    r1, r2 = (patchio.read_report(p) for p in cfg.inputs)
    result = compare.compare_manifolds(r1, r2, cfg.eps_ratio, noise_floor=noise_floor)
    if cfg.out_dir is not None:
        stem = _stem(cfg.output) if cfg.output else f"{_stem(cfg.inputs[0])}_vs_{_stem(cfg.inputs[1])}"
        exporter.write_comparison_csvs(result, cfg.out_dir, stem)
    _emit(exporter.comparison_payload(result), cfg.output)


def _collect(directory: pathlib.Path) -> Tuple[List[Dict[str, Any]], List[models.CurvatureReport]]:
    comparisons: List[Dict[str, Any]] = []
    reports: List[models.CurvatureReport] = []
    for path in sorted(directory.rglob("*.json")):
        if RE_META_SUFFIX.search(path.name):
            continue
        data = patchio.read_json(path)
        kind = data.get("kind")
        if kind == exporter.KIND_COMPARISON:
            comparisons.append(data)
        elif kind == exporter.KIND_REPORT:
            reports.append(models.CurvatureReport.from_dict(data))
    return comparisons, reports


@main.command("report")
@click.option("--dir", "run_dir", type=click.Path(file_okay=False), required=True, help="Directory of run outputs")
@click.option("--range", "bounds", type=float, nargs=2, default=(0.8, 1.2), show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def report_cmd(ctx: click.Context, run_dir: str, bounds: Sequence[float], out_path: Optional[str]) -> None:
    """Per-layer share of similar ratios in range, and the dimension table."""
    lo, hi = bounds
    cfg = _config(ctx, "report", input_dirs=[pathlib.Path(run_dir)], output=_path(out_path),
                  range_lo=lo, range_hi=hi)
    comparisons, reports = _collect(cfg.input_dirs[0])
    if not comparisons and not reports:
        raise ParameterError(f"no comparison or curvature report JSON under {cfg.input_dirs[0]}")
    ranges = compare.range_table(comparisons, cfg.range_lo, cfg.range_hi) if comparisons else {}
    dims = compare.dimension_table(reports) if reports else []
    logger.info("Report: %s comparisons, %s curvature reports", len(comparisons), len(reports))
    _emit(exporter.table_payload(ranges, dims, cfg.range_lo, cfg.range_hi), cfg.output)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI without exiting the interpreter; returns the exit code."""
    try:
        rv = main.main(args=list(argv) if argv is not None else None, prog_name="manifold-lens",
                       standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except LensError as e:
        click.echo(f"Error: {e}", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        click.echo("Aborted.", err=True)
        return 1
    return rv if isinstance(rv, int) else 0
