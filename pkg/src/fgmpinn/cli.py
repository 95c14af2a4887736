"""Command line interface.

Verbs::

    fgmpinn run CODE [--config FILE] [--epochs N] [--lr X] [--seed S] [--oracle KIND] [--set key=value ...]
    fgmpinn table3 [--codes CODE ...] [--epochs N]
    fgmpinn export-mesh CODE [--set key=value ...]
    fgmpinn gradcheck CODE [--seeds N]

Outputs go under ``--output``, else ``$FGMPINN_OUTPUT_DIR``, else ``./fgmpinn-output``.
Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .metrics import format_table, passes, table_csv
from .network import ConfigError, save_checkpoint
from .problems import CODES, ProblemSpec, default_config, merge
from .solution import evaluate_solution
from .trainer import NumericalAbort, TrainConfig, gradient_check, train

EXIT_OK, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
ENV_OUTPUT = "FGMPINN_OUTPUT_DIR"

log = logging.getLogger("fgmpinn")


def _parse_set(items) -> dict:
    """``a.b=value`` pairs into a nested override dict; values parse as JSON when possible."""
    out: dict = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return out


def resolve_config(code: str, config_file=None, epochs=None, lr=None, seed=None,
                   oracle=None, sets=None) -> dict:
    """Defaults, then a config file, then explicit flags; train options fully expanded."""
    cfg = default_config(code)
    if config_file:
        try:
            user = json.loads(Path(config_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_file}: {exc}") from exc
        if user.get("code", code) != code:
            raise ConfigError(f"config file is for {user['code']}, not {code}")
        cfg = merge(cfg, user)
    cfg = merge(cfg, _parse_set(sets))
    if epochs is not None:
        cfg["train"]["epochs"] = int(epochs)
    if lr is not None:
        cfg["train"]["lr"] = float(lr)
    if seed is not None:
        cfg["seed"] = int(seed)
    kind = cfg["reference"]["kind"]
    if oracle is not None and oracle != kind and not (oracle == "analytic" and kind == "kirsch"):
        raise ConfigError(f"{code} has no {oracle!r} oracle; available: {cfg['reference']['kind']}")
    train_cfg = TrainConfig.from_dict({**cfg.get("train", {}), "seed": cfg.get("seed", 0)})
    cfg["train"] = {k: v for k, v in train_cfg.to_dict().items() if k not in ("seed", "checkpoint_dir")}
    return cfg


def output_root(explicit=None) -> Path:
    return Path(explicit or os.environ.get(ENV_OUTPUT) or "fgmpinn-output")


def _write_loss(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "W_elastic", "W_thermal", "W_ext", "total"])
        for h in trace.history:
            w.writerow([h["epoch"], repr(h["W_elastic"]), repr(h["W_thermal"]), repr(h["W_ext"]), repr(h["total"])])
        if trace.final is not None:
            f = trace.final
            w.writerow(["final", repr(f["W_elastic"]), repr(f["W_thermal"]), repr(f["W_ext"]), repr(f["total"])])


def _write_diagnostics(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "layer", "quantity", "mean", "std", "count"])
        for r in trace.stats:
            w.writerow([r["epoch"], r["layer"], r["quantity"], repr(r["mean"]), repr(r["std"]), r["count"]])


def _plots(outdir: Path, problem: ProblemSpec, trace, report) -> None:
    from . import plots

    losses = trace.losses
    plots.line_chart(outdir / "loss.svg", {"total": (np.arange(len(losses)), losses)},
                     f"{problem.code} loss", "epoch", "loss")
    for quantity in ("activation", "grad_weight"):
        layers = sorted({r["layer"] for r in trace.stats if r["quantity"] == quantity})
        bands = {}
        for layer in layers:
            st = trace.stat(quantity, layer)
            ep = sorted(st)
            bands[layer] = (ep, [st[e][0] for e in ep], [st[e][1] for e in ep])
        if bands:
            plots.band_chart(outdir / f"{quantity}_stats.svg", bands, f"{problem.code} {quantity}", ylabel=quantity)
    for v in report.variables:
        if problem.dim == 1:
            x = report.points[:, 0]
            plots.line_chart(outdir / f"field_{v}.svg",
                             {f"{v} PINN": (x, report.predicted[v]), f"{v} ref": (x, report.reference[v])},
                             f"{problem.code} {v}", "x", v)
        else:
            ref = report.reference[v]
            lo, hi = float(np.min(ref)), float(np.max(ref))
            plots.node_map(outdir / f"field_{v}_pred.svg", report.points, report.predicted[v],
                           f"{problem.code} {v} PINN", (lo, hi))
            plots.node_map(outdir / f"field_{v}_ref.svg", report.points, ref,
                           f"{problem.code} {v} reference", (lo, hi))


def run_problem(cfg: dict, outdir: Path | None, make_plots: bool = True):
    """Train, score and (optionally) write artifacts; returns (report, trace, model)."""
    problem = ProblemSpec.from_config(cfg)
    train_cfg = TrainConfig.from_dict({**problem.train, "seed": int(cfg.get("seed", 0))})
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        if train_cfg.checkpoint_every:
            train_cfg.checkpoint_dir = str(outdir)
    nodes = problem.build_nodes()
    model, trace = train(problem, train_cfg, nodes=nodes)
    report = evaluate_solution(model, problem, nodes)
    if outdir is not None:
        _write_loss(outdir / "loss.csv", trace)
        _write_diagnostics(outdir / "diagnostics.csv", trace)
        report.fields_csv(outdir / "fields.csv")
        report.scores_csv(outdir / "scores.csv")
        save_checkpoint(outdir / "model.json", list(zip(model.configs, model.params)),
                        {"code": problem.code, "epochs": len(trace.history)})
        if make_plots:
            _plots(outdir, problem, trace, report)
    return report, trace, model


def _print_scores(code, report, trace) -> bool:
    ok = passes(code, report.scores)
    if trace.final is not None:
        print(f"{code}: final loss {trace.final['total']:.6g} after {len(trace.history)} epochs")
    for v, s in report.scores.items():
        gate = "" if v not in ok else ("  PASS" if ok[v] else "  FAIL")
        flag = "  (low variance)" if s.low_variance else ""
        print(f"  {v:>4}  R2 {s.r2: .6g}  max|err| {s.max_abs:.3e}{flag}{gate}")
    return all(ok.values())


def cmd_run(args) -> int:
    cfg = resolve_config(args.code, args.config, args.epochs, args.lr, args.seed, args.oracle, args.set)
    outdir = output_root(args.output) / args.code
    report, trace, _ = run_problem(cfg, outdir, make_plots=not args.no_plots)
    ok = _print_scores(args.code, report, trace)
    print(f"artifacts in {outdir}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_table3(args) -> int:
    root = output_root(args.output)
    rows = {}
    for code in args.codes or CODES:
        try:
            cfg = resolve_config(code, epochs=args.epochs)
            report, trace, _ = run_problem(cfg, root / code, make_plots=not args.no_plots)
            rows[code] = report.scores
            _print_scores(code, report, trace)
        except (ConfigError, NumericalAbort) as exc:
            print(f"{code}: failed: {exc}", file=sys.stderr)
            rows[code] = None
    text = format_table(rows)
    print(text)
    root.mkdir(parents=True, exist_ok=True)
    (root / "table3.txt").write_text(text + "\n")
    (root / "table3.csv").write_text(table_csv(rows))
    ok = all(r is not None and all(passes(c, r).values()) for c, r in rows.items())
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_export_mesh(args) -> int:
    cfg = resolve_config(args.code, args.config, sets=args.set)
    problem = ProblemSpec.from_config(cfg)
    nodes = problem.build_nodes()
    root = output_root(args.output) / args.code
    root.mkdir(parents=True, exist_ok=True)
    path = root / "nodes.csv"
    nodes.to_csv(path)
    print(f"{len(nodes)} nodes, measure {nodes.measure:.6g}, groups {sorted(nodes.boundaries)} -> {path}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    cfg = resolve_config(args.code, args.config, sets=args.set)
    problem = ProblemSpec.from_config(cfg)
    nodes = problem.build_nodes()
    worst = 0.0
    for seed in range(args.seeds):
        err = gradient_check(problem.build_model(seed), nodes, problem, seed=seed)
        print(f"{args.code} seed {seed}: relative error {err:.3e}")
        worst = max(worst, err)
    return EXIT_OK if worst <= args.tol else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fgmpinn", description="Energy-based PINN solver for thermo-elastic benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, code=True):
        if code:
            sp.add_argument("code", help=f"one of {', '.join(CODES)}")
        sp.add_argument("--output", help=f"output root (default ${ENV_OUTPUT} or ./fgmpinn-output)")

    r = sub.add_parser("run", help="train one problem and score it against its oracle")
    common(r)
    r.add_argument("--config", help="JSON config merged over the defaults (e.g. a resolved config.json)")
    r.add_argument("--epochs", type=int)
    r.add_argument("--lr", type=float)
    r.add_argument("--seed", type=int)
    r.add_argument("--oracle", choices=("analytic", "fem"), help="reference source (must match the problem)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="dotted config override, repeatable")
    r.add_argument("--no-plots", action="store_true")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table3", help="run every problem and print the R^2 grid")
    common(t, code=False)
    t.add_argument("--codes", nargs="+", choices=CODES)
    t.add_argument("--epochs", type=int)
    t.add_argument("--no-plots", action="store_true")
    t.set_defaults(func=cmd_table3)

    m = sub.add_parser("export-mesh", help="write the node set and weights as CSV")
    common(m)
    m.add_argument("--config")
    m.add_argument("--set", action="append", metavar="KEY=VALUE")
    m.set_defaults(func=cmd_export_mesh)

    g = sub.add_parser("gradcheck", help="compare tape gradients with central differences")
    common(g)
    g.add_argument("--config")
    g.add_argument("--set", action="append", metavar="KEY=VALUE")
    g.add_argument("--seeds", type=int, default=3)
    g.add_argument("--tol", type=float, default=1e-5)
    g.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "code", None) is not None and args.code not in CODES:
        print(f"error: unknown problem code {args.code!r}; choose from {', '.join(CODES)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
