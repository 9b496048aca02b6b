"""Command-line entry point.

    dudenet analyze     single-point analytic evaluation
    dudenet simulate    single-point Monte Carlo run
    dudenet experiment  named or file-defined sweep
    dudenet accept      acceptance suite

Values on the command line use the configuration units (dBm, dBi, dB,
per km2, Hz, b/s).  Exit status is 0 only if every checked tolerance holds.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import acceptance
from .association import AssocQuery, Criterion, Direction, association
from .coverage import load_model, percentile_rate, rate_coverage, sinr_coverage
from .experiments import ENGINES, SpecError, library_spec, load_spec, run_experiment
from .montecarlo import simulate, summarize, write_samples_csv, write_summary_json
from .params import ConfigError, SystemParams, _parse_value, db_to_linear, emit_config, load_config

log = logging.getLogger("dudenet")


def _params(args) -> SystemParams:
    params = load_config(args.config)
    overrides = {}
    for item in args.set or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(key, "overrides must look like field=value")
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError:
            pass
        overrides[key.strip()] = _parse_value(key.strip(), raw)
    return params.replace(**overrides) if overrides else params


def _directions(name: str) -> list[Direction]:
    return list(Direction) if name == "both" else [Direction(name)]


def _dump(doc, out: str | None, filename: str) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / filename).write_text(text + "\n", encoding="utf-8")


def cmd_analyze(args) -> int:
    params = _params(args)
    tau = db_to_linear(args.tau_db)
    doc = {"config": emit_config(params), "tau_db": args.tau_db, "rate_bps": args.rate}
    for d in _directions(args.direction):
        entry = {}
        for c in Criterion:
            a = association(AssocQuery(d, c), params)
            entry[f"assoc_{c.value}"] = {"p_mcell": a.p_mcell, "p_scell": a.p_scell}
        cov = sinr_coverage(d, params, tau)
        entry["sinr_coverage"] = {"total": cov.total, "mcell": cov.mcell, "scell": cov.scell}
        loads = load_model(d, params)
        rc = rate_coverage(d, params, args.rate, loads)
        entry["rate_coverage"] = {"total": rc.total, "mcell": rc.mcell, "scell": rc.scell}
        entry["mean_load"] = {"mcell": loads.n_bar_m, "scell": loads.n_bar_s}
        if args.percentiles:
            entry["rate_p5_bps"] = percentile_rate(d, 0.95, params)
            entry["rate_p50_bps"] = percentile_rate(d, 0.5, params)
        doc[d.value] = entry
    if args.direction == "both":
        for c in Criterion:
            key = f"assoc_{c.value}"
            doc[f"decoupling_gain_{c.value}"] = abs(doc["ul"][key]["p_scell"] - doc["dl"][key]["p_scell"])
    _dump(doc, args.out, "analyze.json")
    return 0


def cmd_simulate(args) -> int:
    params = _params(args)
    samples = simulate(params, args.drops, args.seed,
                       full_field=not args.typical_only,
                       include_mmwave_interference=args.mmwave_interference)
    if args.out:
        write_samples_csv(samples, Path(args.out) / "samples.csv")
        write_summary_json(samples, Path(args.out) / "summary.json")
    print(json.dumps(summarize(samples), indent=2))
    return 0


def cmd_experiment(args) -> int:
    target = args.target
    specs = load_spec(target) if Path(target).is_file() else library_spec(target)
    params = _params(args) if (args.config or args.set) else None
    engines = tuple(e.strip() for e in args.engines.split(",")) if args.engines else None
    out = Path(args.out)
    ok = True
    for spec in specs:
        changes = {}
        if args.drops is not None:
            changes["n_drops"] = args.drops
        if args.seed is not None:
            changes["seed"] = args.seed
        if engines is not None:
            changes["engines"] = engines
        if changes:
            spec = spec.replace(**changes)
        report = run_experiment(spec, params, out)
        status = "PASS" if report.passed else "FAIL"
        print(f"{spec.name}: {status} in {report.runtime_s:.1f}s, {len(report.files)} files in {out}")
        for metric, cmp in sorted(report.comparison.items()):
            gap = cmp["max_abs_discrepancy"]
            gap_txt = "n/a" if gap is None else f"{gap:.4g}"
            print(f"  {metric}: max |analytic - mc| = {gap_txt}, flagged {len(cmp['flagged'])}")
        for metric, errs in sorted(report.errors.items()):
            for e in errs:
                print(f"  error {metric}: {e}")
        ok &= report.passed
    return 0 if ok else 1


def cmd_accept(args) -> int:
    only = {int(v) for v in args.only.split(",")} if args.only else None
    drops = args.drops if args.drops is not None else acceptance.FULL_DROPS
    results = acceptance.run_all(n_drops=drops, only=only)
    if args.out:
        doc = [{"criterion": r.number, "title": r.title, "passed": r.passed,
                "flagged": r.flagged, "summary": r.summary, "runtime_s": r.runtime_s}
               for r in results]
        path = Path(args.out)
        path.mkdir(parents=True, exist_ok=True)
        (path / "acceptance.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failing: {', '.join(map(str, failed))}" if failed else ""))
    return 0 if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file (missing keys take the defaults)")
    common.add_argument("--set", action="append", metavar="FIELD=VALUE",
                        help="override one configuration field, e.g. --set lambda_s=50 or "
                             "--set 't_s=10 dB' (repeatable)")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dudenet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="single-point analytic evaluation")
    p.add_argument("--direction", choices=("ul", "dl", "both"), default="both")
    p.add_argument("--tau-db", type=float, default=0.0, help="SINR threshold in dB")
    p.add_argument("--rate", type=float, default=1e7, help="rate threshold in b/s")
    p.add_argument("--percentiles", action="store_true", help="also solve 5th/50th percentile rates")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", parents=[common], help="single-point Monte Carlo run")
    p.add_argument("--drops", type=int, default=10000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--typical-only", action="store_true",
                   help="sample only the typical UE (association and DL only)")
    p.add_argument("--mmwave-interference", action="store_true",
                   help="include Scell-tier interference at mmWave receivers")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", parents=[common], help="run a named or file-defined sweep")
    p.add_argument("target", help="library name (fig2a ... fig10) or JSON spec file")
    p.add_argument("--drops", type=int, help="override the number of drops")
    p.add_argument("--seed", type=int, help="override the experiment seed")
    p.add_argument("--engines", help=f"comma-separated subset of {','.join(ENGINES)}")
    p.set_defaults(func=cmd_experiment, out="results")

    p = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    p.add_argument("--drops", type=int, help="Monte Carlo drops (reduced runs widen criterion 8)")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
