"""Command-line entry point: index computations, decoupling runs, diagnostics.

All numerical outputs are deterministic functions of the configuration file;
inconclusive physics (undetermined parities, closed gaps) exits 0 with status
fields, while invalid input exits nonzero with a diagnostic on stderr.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .diagnostics import NoGapStatesError, ballistic_transport, cylinder_bands, \
    gap_filling_fraction
from .lattice import build_half_space_hamiltonian, build_time_reversal
from .matio import load_pair, save_matrix
from .operators import AntiUnitary, ProjectionOperator, UnitaryOperator
from .pipeline import bulk_gap, cylinder_spec, run_bulk, run_edge, scan_rows
from .wold import ClusterError, SymmetricPair, decouple

HEADER = {"artifact": "z2wold", "version": __version__}


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _load(config_path) -> "RunConfig":
    try:
        return load_config(config_path)
    except ConfigError as exc:
        _fail(str(exc))


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    path.write_text(buf.getvalue())


def _out_dir(cfg, override) -> Path:
    if override:
        return Path(override)
    return Path(cfg.output.get("directory", "."))


@click.group()
@click.version_option(__version__)
def main():
    """Z2 indices, symmetric decoupling and edge diagnostics for lattice models."""


@main.group()
def index():
    """Bulk and edge parity computations."""


@index.command("bulk")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out-dir", default=None, type=click.Path())
@click.option("--filter-radius", default=None, type=float)
def index_bulk(config_path, out_dir, filter_radius):
    """Flux-response parity of the torus model, with eigenvalue table."""
    cfg = _load(config_path)
    spec = cfg.model_spec()
    settings = cfg.index_settings()
    if filter_radius is not None:
        from dataclasses import replace
        settings = replace(settings, filter_radius=filter_radius)
    try:
        report = run_bulk(spec, cfg.mu, settings)
    except Exception as exc:
        _fail(f"bulk run failed: {exc}")
    out = _out_dir(cfg, out_dir)
    payload = dict(HEADER, config=cfg.resolved(), report=report.to_dict())
    _write_json(out / "bulk_index.json", payload)
    _write_csv(
        out / "bulk_candidates.csv",
        ["eigenvalue", "side", "distance", "weight_in_radius", "r90", "kept"],
        [
            [c.eigenvalue, c.side, c.distance, c.weight_in_radius, c.r90, int(c.kept)]
            for c in report.candidates
        ],
    )
    click.echo(f"z2_bulk = {report.z2} ({report.status})")


@index.command("edge")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out-dir", default=None, type=click.Path())
def index_edge(config_path, out_dir):
    """Corner-localized parity of the half-space edge unitary."""
    cfg = _load(config_path)
    spec = cfg.model_spec()
    try:
        report = run_edge(spec, cfg.mu, cfg.index_settings())
    except Exception as exc:
        _fail(f"edge run failed: {exc}")
    out = _out_dir(cfg, out_dir)
    payload = dict(HEADER, config=cfg.resolved(), report=report.to_dict())
    _write_json(out / "edge_index.json", payload)
    click.echo(f"z2_edge = {report.z2} ({report.status})")


@index.command("compare")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out-dir", default=None, type=click.Path())
def index_compare(config_path, out_dir):
    """Bulk-vs-edge scan table over the configured mass grid and disorder."""
    cfg = _load(config_path)
    base = cfg.model_spec()
    m_values, disorder = cfg.scan_values()
    rows = scan_rows(base, m_values, disorder, cfg.mu, cfg.index_settings())
    out = _out_dir(cfg, out_dir)
    _write_csv(
        out / "compare.csv",
        ["m", "lambda_r", "w", "seed", "z2_bulk", "z2_edge", "status"],
        [
            [r.m, r.lambda_r, r.w, r.seed,
             "" if r.z2_bulk is None else r.z2_bulk,
             "" if r.z2_edge is None else r.z2_edge,
             r.status]
            for r in rows
        ],
    )
    payload = dict(
        HEADER, config=cfg.resolved(),
        rows=[
            {"m": r.m, "lambda_r": r.lambda_r, "w": r.w, "seed": r.seed,
             "z2_bulk": r.z2_bulk, "z2_edge": r.z2_edge, "status": r.status}
            for r in rows
        ],
    )
    _write_json(out / "compare.json", payload)
    for r in rows:
        click.echo(f"m={r.m} lr={r.lambda_r} w={r.w} seed={r.seed}: "
                   f"bulk={r.z2_bulk} edge={r.z2_edge} [{r.status}]")


@main.group()
def wold():
    """Symmetry-constrained decoupling of serialized operator pairs."""


@wold.command("run")
@click.option("--input", "pair_path", required=True, type=click.Path())
@click.option("--cluster-tol", default=1e-7, type=float, show_default=True)
@click.option("--depth", default=0, type=int, show_default=True,
              help="chain depth to walk when the decoupling leaves a residual")
@click.option("--out-dir", default=".", type=click.Path())
def wold_run(pair_path, cluster_tol, depth, out_dir):
    """Decouple a serialized (U, P, tau) triple and emit the result summary."""
    try:
        u_mat, p_mat, tau_mat = load_pair(pair_path)
        pair = SymmetricPair(
            UnitaryOperator(u_mat), ProjectionOperator(p_mat), AntiUnitary(tau_mat)
        )
    except Exception as exc:
        _fail(f"cannot load pair: {exc}")
    try:
        result = decouple(pair, cluster_tol=cluster_tol)
    except ClusterError as exc:
        _fail(f"clustering refused: {exc}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_matrix(out / "decoupled_unitary.cplx", result.w.matrix)
    save_matrix(out / "decoupler.cplx", result.v.matrix)
    chain_summary = None
    if result.classification == "odd-residual" and depth > 0:
        from .wold import chain_projections
        chains = chain_projections(
            result.w.matrix, result.pi_plus, result.pi_minus,
            pair.p.matrix, pair.tau, depth,
        )
        chain_summary = {
            "requested_depth": chains.requested_depth,
            "max_clean_depth": chains.max_clean_depth,
            "worst_residual": chains.worst_residual,
        }
    payload = dict(
        HEADER,
        input=str(pair_path),
        cluster_tol=cluster_tol,
        classification=result.classification,
        defect_dim=result.defect_dim,
        residuals=result.residuals,
        schatten=[
            {"p": p, "commutator": c, "correction": d}
            for (p, c, d) in result.schatten_report
        ],
        chains=chain_summary,
    )
    _write_json(out / "wold_result.json", payload)
    click.echo(f"classification = {result.classification} "
               f"(defect dimension {result.defect_dim})")


@main.group()
def edge():
    """Edge-spectrum diagnostics (proxies; finite-size statements only)."""


@edge.command("spectrum")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out-dir", default=None, type=click.Path())
@click.option("--k-points", default=0, type=int)
def edge_spectrum(config_path, out_dir, k_points):
    """Momentum-resolved cylinder bands with edge weights, as CSV."""
    cfg = _load(config_path)
    spec = cylinder_spec(cfg.model_spec())
    if spec.w != 0.0:
        _fail("edge spectrum needs a clean model (w = 0)")
    bands = cylinder_bands(spec, k_points)
    out = _out_dir(cfg, out_dir)
    rows = []
    for i, k in enumerate(bands.momenta):
        for j in range(bands.energies.shape[1]):
            rows.append([k, j, bands.energies[i, j], bands.edge_weight[i, j]])
    _write_csv(out / "bands.csv", ["k", "band", "energy", "edge_weight"], rows)
    click.echo(f"{bands.energies.shape[0]} momenta x {bands.energies.shape[1]} bands; "
               f"Kramers residual {bands.kramers_residual():.2e} (proxy data)")


@edge.command("transport")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out-dir", default=None, type=click.Path())
@click.option("--t-max", default=None, type=float)
@click.option("--n-times", default=24, type=int, show_default=True)
def edge_transport(config_path, out_dir, t_max, n_times):
    """Wave-packet spreading along the edge, with fitted growth exponent."""
    cfg = _load(config_path)
    spec = cylinder_spec(cfg.model_spec())
    gap = bulk_gap(spec, cfg.mu)
    if gap is None:
        _fail(f"no bulk gap at mu={cfg.mu}; transport filter undefined")
    clean = spec if spec.w == 0.0 else type(spec)(
        m=spec.m, lambda_r=spec.lambda_r, w=0.0, seed=0, geometry=spec.geometry
    )
    v_max = cylinder_bands(clean).max_group_velocity()
    h_hat = build_half_space_hamiltonian(spec)
    wrap = spec.geometry.Lx / (2 * v_max)
    horizon = t_max if t_max else wrap
    times = np.linspace(0.0, horizon, n_times)
    try:
        trace = ballistic_transport(h_hat, gap, (0, 0), times, spec.geometry, v_max)
    except NoGapStatesError as exc:
        _fail(str(exc))
    out = _out_dir(cfg, out_dir)
    _write_csv(
        out / "transport.csv",
        ["time", "spread", "in_fit_window"],
        [[t, s, int(m)] for t, s, m in zip(trace.times, trace.spread, trace.fit_mask)],
    )
    payload = dict(
        HEADER, config=cfg.resolved(),
        alpha=trace.alpha, alpha_stderr=trace.alpha_stderr,
        wrap_time=trace.wrap_time, v_max=trace.v_max,
        filtered_norm=trace.filtered_norm,
        note="finite-size proxy; no statement about spectral type",
    )
    _write_json(out / "transport.json", payload)
    click.echo(f"alpha = {trace.alpha:.3f} +- {trace.alpha_stderr:.3f} (proxy)")


if __name__ == "__main__":
    main()
