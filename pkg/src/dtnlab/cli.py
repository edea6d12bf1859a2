"""Command-line front end.

Subcommands: ``validate``, ``dtn``, ``graph``, ``sector``, ``converge``,
``resolvent`` and ``check`` (the acceptance suite).  Exit codes: 0 success,
2 configuration error, 3 pair-validation failure, 4 solver failure,
5 acceptance failure in check mode.  ``DTNLAB_THREADS`` caps the number of
concurrently executed schedule rows.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import boundary as bnd
from . import convergence as cv
from . import dtn as dtncore
from . import graphs as gr
from .config import RunConfig, config_hash, parse_config
from .errors import ConfigError, DtnLabError, GraphNotOperatorError, NearSingularError
from .linalg import to_dense
from .pairs import build_interval_pair, build_rectangle_pair, coefficient_from_spec, validate_pair
from .reports import write_csv, write_svg_lineplot

__all__ = ["main", "console_main", "run_config"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_ACCEPTANCE = 5


def _build_pair(config: RunConfig):
    geo = config.geometry
    if geo["kind"] == "interval":
        return build_interval_pair(geo["n"])
    return build_rectangle_pair(geo["nx"], geo["ny"])


def _build_pivot(config: RunConfig, pair):
    gram = config.pivot["gram"]
    if gram == "default":
        return dtncore.default_pivot(pair)
    weights = np.asarray(gram, dtype=float)
    if weights.shape != (pair.b0,):
        raise ConfigError(
            f"pivot gram has {weights.size} weights, expected {pair.b0}"
        )
    import scipy.sparse as sp

    from .linalg import WeightedSpace

    bdg = bnd.bd_space(pair, "G")
    kappa = to_dense(pair.trace0 @ bdg.basis)
    return dtncore.PivotSpace(WeightedSpace(pair.b0, sp.diags(weights)), kappa)


def _coefficients(config: RunConfig, pair):
    a = coefficient_from_spec(config.coefficients["a"], pair, "a")
    m = coefficient_from_spec(config.coefficients["m"], pair, "m")
    return a, m


def _sequence_from_parameters(params: dict) -> cv.CoefficientSequence:
    return cv.CoefficientSequence(
        a_template=params.get("a_template", "2+sin(2*pi*{n}*x)"),
        m_template=params.get("m_template", 1.0),
        a_limit=params.get("a_limit", float(np.sqrt(3.0))),
        m_limit=params.get("m_limit", 1.0),
        mu=params.get("mu", 1.0),
        norm_cap=params.get("norm_cap", 3.0),
        m_coercive=bool(params.get("m_coercive", True)),
    )


def _schedule_from_parameters(params: dict):
    n_oscs = params.get("n_oscs", [4, 8, 16, 32])
    grid_factor = params.get("grid_factor", 128)
    return [(int(n), int(grid_factor) * int(n)) for n in n_oscs]


def _run_validate(config, pair, out_dir, chash):
    rep = validate_pair(pair)
    rows = [(name, value, tol, ok) for name, value, tol, ok in rep.rows]
    path = write_csv(out_dir / config.output["csv_path"], "validate", rows,
                     config.schema_version, chash)
    print(f"validate: {'PASS' if rep.passed else 'FAIL'} ({len(rows)} checks) -> {path}")
    return EXIT_OK if rep.passed else EXIT_VALIDATION


def _run_dtn(config, pair, out_dir, chash, seed):
    a, m = _coefficients(config, pair)
    piv = _build_pivot(config, pair)
    op = dtncore.dtn_pivot(pair, a, m, piv, seed=seed)
    lam = np.asarray(op.lambda_h, dtype=complex)
    rows = [
        (i, j, lam[i, j].real, lam[i, j].imag)
        for i in range(lam.shape[0])
        for j in range(lam.shape[1])
    ]
    path = write_csv(out_dir / config.output["csv_path"], "dtn", rows,
                     config.schema_version, chash)
    print(
        f"dtn: {lam.shape[0]}x{lam.shape[1]} operator, vertex {op.vertex:.6g}, "
        f"half-angle {op.half_angle:.6g}, symmetric {op.symmetric} -> {path}"
    )
    return EXIT_OK


def _run_graph(config, pair, out_dir, chash):
    a, m = _coefficients(config, pair)
    graph = gr.dtn_graph(pair, a, m)
    inv = gr.ntd_graph(pair, a, m)
    dom_rep = gr.graph_domain_check(pair, a, m)
    ntd_rep = gr.ntd_domain_check(pair, a, m)
    rows = [
        ("graph", graph.dim, 0.0),
        ("dom", graph.dom.dim, dom_rep.max_angle),
        ("mul", graph.mul.dim, 0.0),
        ("inverse_graph", inv.dim, 0.0),
        ("inverse_dom", inv.dom.dim, ntd_rep.max_angle),
        ("inverse_mul", inv.mul.dim, 0.0),
    ]
    path = write_csv(out_dir / config.output["csv_path"], "graph", rows,
                     config.schema_version, chash)
    print(
        f"graph: dim {graph.dim}, dom {graph.dom.dim}, mul {graph.mul.dim} "
        f"(single-valued: {graph.is_operator}) -> {path}"
    )
    return EXIT_OK


def _run_sector(config, pair, out_dir, chash, seed):
    a, m = _coefficients(config, pair)
    piv = _build_pivot(config, pair)
    samples = int(config.experiment["parameters"].get("samples", 50 * piv.space.dim))
    op = dtncore.dtn_pivot(pair, a, m, piv, seed=seed)
    rep = dtncore.sector_report(op, samples=samples, seed=seed)
    rows = [
        ("empirical_vertex", rep.vertex, float("inf"), True),
        ("empirical_half_angle", rep.half_angle, float("inf"), True),
        ("apriori_vertex", rep.apriori_vertex, float("inf"), True),
        ("apriori_half_angle", rep.apriori_half_angle, float("inf"), True),
        ("contained", 1.0 if rep.contained else 0.0, 1.0, rep.contained),
    ]
    path = write_csv(out_dir / config.output["csv_path"], "validate", rows,
                     config.schema_version, chash)
    print(
        f"sector: vertex {rep.vertex:.6g}, half-angle {rep.half_angle:.6g}, "
        f"contained {rep.contained} -> {path}"
    )
    return EXIT_OK if rep.contained else EXIT_SOLVER


def _emit_converge(config, report, out_dir, chash, label):
    rows = [
        (r.n_osc, r.grid_n, r.h, r.metric, r.value, r.runtime_ms) for r in report.rows
    ]
    path = write_csv(out_dir / config.output["csv_path"], "converge", rows,
                     config.schema_version, chash)
    svg = config.output.get("svg_path")
    if svg:
        series = {}
        for r in report.rows:
            series.setdefault(r.metric, []).append((r.n_osc, max(r.value, 1e-300)))
        write_svg_lineplot(out_dir / svg, series, title=label)
    return path


def _run_converge(config, out_dir, chash, seed):
    params = config.experiment["parameters"]
    seq = _sequence_from_parameters(params)
    schedule = _schedule_from_parameters(params)
    report = cv.wot_resolvent_experiment(
        seq, schedule, witnesses=int(params.get("witnesses", 8)), seed=seed
    )
    path = _emit_converge(config, report, out_dir, chash, "WOT resolvent convergence")
    first, final, ratio = report.trend("ntd_gap_opnorm")
    print(
        f"converge: ntd gap {first:.3e} -> {final:.3e} "
        f"(window ratio {ratio:.3f}) -> {path}"
    )
    return EXIT_OK


def _run_resolvent(config, out_dir, chash, seed):
    params = config.experiment["parameters"]
    seq = _sequence_from_parameters(params)
    schedule = _schedule_from_parameters(params)
    offsets = [float(x) for x in params.get("lambda_offsets", [1.0])]
    report = cv.noncoercive_resolvent_experiment(seq, offsets, schedule, seed=seed)
    path = _emit_converge(config, report, out_dir, chash, "non-coercive resolvent convergence")
    metric = f"resolvent_gap_offset{offsets[0]:g}"
    first, final, ratio = report.trend(metric)
    print(
        f"resolvent: omega {report.meta['omega']:.4g}, sector contained "
        f"{report.meta['sector_contained']}, gap {first:.3e} -> {final:.3e} -> {path}"
    )
    return EXIT_OK


def _run_check(out_dir, seed):
    from .acceptance import run_acceptance

    results = run_acceptance(out_dir=out_dir, seed=seed)
    passed = all(r.passed for r in results)
    rows = [(f"criterion_{r.index:02d}_{r.name}", 0.0 if r.passed else 1.0, 0.5, r.passed)
            for r in results]
    from .config import SCHEMA_VERSION

    write_csv(Path(out_dir) / "acceptance.csv", "validate", rows, SCHEMA_VERSION, "acceptance")
    print(f"check: {sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if passed else EXIT_ACCEPTANCE


def run_config(config: RunConfig, out_dir=".", seed: int | None = None) -> int:
    """Dispatch a validated configuration; returns the process exit code."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chash = config_hash(config)
    kind = config.experiment["kind"]
    seed = config.output["seed"] if seed is None else seed
    if kind == "check":
        return _run_check(out_dir, seed)
    pair = None
    if kind in ("validate", "dtn", "graph", "sector"):
        pair = _build_pair(config)
    if kind == "validate":
        return _run_validate(config, pair, out_dir, chash)
    if kind == "dtn":
        return _run_dtn(config, pair, out_dir, chash, seed)
    if kind == "graph":
        return _run_graph(config, pair, out_dir, chash)
    if kind == "sector":
        return _run_sector(config, pair, out_dir, chash, seed)
    if kind == "converge":
        return _run_converge(config, out_dir, chash, seed)
    if kind == "resolvent":
        return _run_resolvent(config, out_dir, chash, seed)
    raise ConfigError(f"unknown experiment kind {kind!r}")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtnlab",
        description="Dirichlet-to-Neumann laboratory on discrete dual operator pairs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in [
        ("validate", True),
        ("dtn", True),
        ("graph", True),
        ("sector", True),
        ("converge", True),
        ("resolvent", True),
        ("check", False),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=needs_config,
                       help="path to the JSON configuration")
        p.add_argument("--out", type=Path, default=Path("."), help="artifact directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--strict", action="store_true",
                       help="reject unknown configuration keys")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "check":
            seed = 42 if args.seed is None else args.seed
            return _run_check(args.out, seed)
        text = Path(args.config).read_text(encoding="utf-8")
        config = parse_config(text, strict=args.strict)
        if config.experiment["kind"] != args.command:
            # the subcommand selects the experiment; the config's kind (and a
            # defaulted csv name derived from it) only provide defaults
            old_kind = config.experiment["kind"]
            output = dict(config.output)
            if output["csv_path"] == f"{old_kind}.csv":
                output["csv_path"] = f"{args.command}.csv"
            config = RunConfig(
                geometry=config.geometry,
                coefficients=config.coefficients,
                pivot=config.pivot,
                experiment={"kind": args.command,
                            "parameters": config.experiment["parameters"]},
                output=output,
                schema_version=config.schema_version,
            )
        return run_config(config, out_dir=args.out, seed=args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NearSingularError, GraphNotOperatorError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DtnLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def console_main() -> None:
    raise SystemExit(main())
