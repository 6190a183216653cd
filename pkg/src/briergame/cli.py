"""Command line interface: ``briergame {ingest,run,sweep,report,mixability}``.

Data options may come from an INI config file with a ``[data]`` section::

    [data]
    outcomes = 3
    experts = B365, BW, GB
    date_column = date
    group_column = group
    outcome_column = outcome
    odds_pattern = {expert}_a{i}

Command line flags override the config. Exit status is 1 when any
error-level diagnostic or invariant violation occurred, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys

import numpy as np

from . import experiment as ex
from .mixability import curvature_sign_sweep, mixability_search
from .odds import Schema, build_histogram, odds_to_probs, overround, read_matches

log = logging.getLogger("briergame")


def _usage(message: str):
    sys.stderr.write(f"briergame: error: {message}\n")
    raise SystemExit(2)


def _schema(args) -> Schema:
    cfg = {}
    if getattr(args, "config", None):
        parser = configparser.ConfigParser(interpolation=None)
        parser.read(args.config)
        if parser.has_section("data"):
            cfg = dict(parser["data"])
    n = args.outcomes or cfg.get("outcomes")
    experts = args.experts or cfg.get("experts")
    if not n or not experts:
        _usage("--outcomes and --experts are required (flags or config [data] section)")
    kw = {k: cfg[k] for k in ("date_column", "outcome_column", "odds_pattern") if k in cfg}
    if "group_column" in cfg:
        kw["group_column"] = cfg["group_column"] or None
    return Schema(int(n), tuple(e.strip() for e in str(experts).split(",") if e.strip()), **kw)


def _load_game(args):
    """Forecasts, outcomes, batch keys, expert names and parse diagnostics."""
    if args.synthetic:
        spec = ex.parse_synthetic(args.synthetic)
        preds, outcomes = ex.synthetic_game(spec)
        if outcomes is None:
            # fix the adversarial outcomes against the SAA so every algorithm sees the same data
            algo = ex.make_algorithm("saa", spec.n_experts, spec.n_outcomes)
            outcomes = ex.run_protocol(algo, preds, adversary=ex.adversarial_outcome).outcomes
        names = [f"expert{k + 1}" for k in range(spec.n_experts)]
        return preds, outcomes, None, names, []
    if not args.data:
        _usage("give --data or --synthetic")
    schema = _schema(args)
    records, diags = read_matches(args.data, schema)
    for d in diags:
        log.log(logging.ERROR if d.level == "error" else logging.WARNING, "%s", d)
    preds, outcomes, dates = ex.records_to_game(records)
    keys = dates if args.batch_by_date else None
    return preds, outcomes, keys, list(schema.experts), diags


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def cmd_ingest(args) -> int:
    schema = _schema(args)
    records, diags = read_matches(args.input, schema)
    overrounds = np.array([overround(v) for r in records for v in r.odds_by_expert])
    summary = {
        "records": len(records),
        "errors": sum(d.level == "error" for d in diags),
        "warnings": sum(d.level == "warning" for d in diags),
        "diagnostics": [str(d) for d in diags],
    }
    if overrounds.size:
        summary["overround"] = {
            "min": float(overrounds.min()),
            "mean": float(overrounds.mean()),
            "max": float(overrounds.max()),
        }
    print(json.dumps(summary, indent=2))
    if args.probs_out:
        lines = ["date,group,outcome," + ",".join(f"{e}_p{i}" for e in schema.experts for i in range(1, schema.n_outcomes + 1))]
        for r in records:
            p = odds_to_probs(np.array(r.odds_by_expert)).ravel()
            lines.append(",".join([r.date.isoformat(), r.group_key or "", str(r.outcome), *(repr(float(x)) for x in p)]))
        _write(args.probs_out, "\n".join(lines) + "\n")
    if args.histogram_out and overrounds.size:
        _write(args.histogram_out, ex.histogram_csv(build_histogram(overrounds, args.bins)))
    return 1 if summary["errors"] else 0


def cmd_run(args) -> int:
    preds, outcomes, keys, names, diags = _load_game(args)
    K, n = preds.shape[-2], preds.shape[-1]
    param = args.param if args.param is not None else ex.default_param(args.algo, n)
    algo = ex.make_algorithm(args.algo, K, n, param)
    traj = ex.run_protocol(algo, preds, outcomes, batch_keys=keys)
    result = ex.RunResult(args.algo, param, traj, n, names)
    problems = ex.check_invariants(result)
    for p in problems:
        log.error("invariant violated: %s", p)
    payload = {"type": "run", **result.to_dict(), "diagnostics": [str(d) for d in diags] + problems}
    _write(args.out, json.dumps(payload) + "\n")
    if args.curves:
        _write(args.curves, ex.curves_csv(result))
    s = result.summary()
    log.info("%s: max difference %.4f, bound %s", args.algo, s["max_difference"], s["theoretical_bound"])
    return 1 if problems or any(d.level == "error" for d in diags) else 0


def cmd_sweep(args) -> int:
    preds, outcomes, keys, _, diags = _load_game(args)
    res = ex.sweep(args.algo, ex.parse_grid(args.grid), preds, outcomes, batch_keys=keys, workers=args.workers)
    _write(args.out, json.dumps({"type": "sweep", **res.to_dict()}) + "\n")
    return 1 if res.diagnostics or any(d.level == "error" for d in diags) else 0


def cmd_report(args) -> int:
    results = []
    for path in args.input:
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        results.append(ex.SweepResult.from_dict(d) if d.get("type") == "sweep" else ex.RunResult.from_dict(d))
    _write(args.out, ex.emit_report(results, args.format))
    return 0


def cmd_mixability(args) -> int:
    lo, where = curvature_sign_sweep(args.n, args.eta, args.samples, args.seed)
    out = {
        "n": args.n,
        "eta": args.eta,
        "samples": args.samples,
        "seed": args.seed,
        "curvature_min": lo,
        "curvature_argmin": where.tolist(),
        "curvature_positive": lo > 0,
    }
    if args.n in (2, 3) and args.grid_resolution:
        out["search"] = mixability_search(args.eta, args.n, args.grid_resolution).to_dict()
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="briergame", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def data_opts(sp):
        sp.add_argument("--data", help="canonical match CSV")
        sp.add_argument("--synthetic", help='synthetic game, e.g. "N=500,K=4,n=3,seed=0,outcomes=iid"')
        sp.add_argument("--outcomes", type=int)
        sp.add_argument("--experts", help="comma-separated bookmaker names")
        sp.add_argument("--config", help="INI file with a [data] section")
        sp.add_argument("--batch-by-date", action="store_true", help="no weight updates within a date")

    sp = sub.add_parser("ingest", help="validate a match CSV and convert odds to forecasts")
    sp.add_argument("--input", required=True)
    sp.add_argument("--outcomes", type=int)
    sp.add_argument("--experts")
    sp.add_argument("--config")
    sp.add_argument("--probs-out", help="write normalised forecasts as CSV")
    sp.add_argument("--histogram-out", help="write the overround histogram as CSV")
    sp.add_argument("--bins", type=int, default=200)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("run", help="play the protocol with one algorithm")
    sp.add_argument("--algo", required=True, choices=ex.ALGORITHMS)
    sp.add_argument("--param", type=float)
    sp.add_argument("--out", default="-")
    sp.add_argument("--curves", help="write per-step excess losses as CSV")
    data_opts(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="maximal difference over a parameter grid")
    sp.add_argument("--algo", required=True, choices=[a for a in ex.ALGORITHMS if a in ex.PARAM_NAMES])
    sp.add_argument("--grid", required=True, help="lo:hi:steps or v1,v2,...")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default="-")
    data_opts(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("report", help="summarise run/sweep JSON files")
    sp.add_argument("--input", nargs="+", required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("mixability", help="curvature sign sweep and mixability search")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid-resolution", type=int, default=0, help="also run the grid search (n = 2 or 3)")
    sp.set_defaults(func=cmd_mixability)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
