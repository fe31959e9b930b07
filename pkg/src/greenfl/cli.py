"""Command-line entry point: run scenarios, report, what-if, calibrate.

Exit codes: 0 success, 1 runtime failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

from .config import bundled_config_path, load_config, parse_config
from .errors import CalibrationFailed, ConfigError, GreenflError, UnknownRegion
from .reporting import (
    TierTarget,
    calibrate_tiers,
    parse_round_log,
    remap_grid_intensity,
    summarize_run,
)
from .runner import execute_run, write_artifacts
from .sites import BUILTIN_REGIONS, EfficiencyTier

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _load_json(path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(what, f"cannot read {path}: {exc}") from exc


def _resolve_config_path(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = bundled_config_path(name_or_path)
    if bundled.is_file():
        return bundled
    raise ConfigError("config", f"no such config file or bundled scenario: {name_or_path}")


def _load_tier_overrides(path) -> dict[str, EfficiencyTier]:
    doc = _load_json(path, "tiers")
    tiers = {}
    for label, t in doc.get("tiers", doc).items():
        try:
            tiers[label] = EfficiencyTier(label, float(t["slowdown_factor"]), float(t["power_scale"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"tiers.{label}", str(exc)) from exc
    return tiers


def cmd_run(args) -> int:
    path = _resolve_config_path(args.config)
    doc = _load_json(path, "config")
    if args.seed is not None:
        doc["seed"] = args.seed
    overrides = _load_tier_overrides(args.tiers) if args.tiers else None
    cfg = parse_config(doc, tier_overrides=overrides)
    records, result = execute_run(cfg)
    report = write_artifacts(args.out, cfg, records, result)
    print(
        f"{cfg.scenario}: {len(cfg.plan.sites)} sites x {cfg.plan.num_rounds} rounds -> {args.out}"
    )
    print(
        f"  total {report.total_co2e_kg:.6g} kg CO2e, {report.total_energy_kwh:.6g} kWh, "
        f"runtime {report.runtime_s / 60.0:.4g} min, final accuracy "
        f"{report.accuracy_by_round[-1]:.4f}"
    )
    return EXIT_OK


def _read_run_dir(run_dir):
    path = Path(run_dir)
    csv_path = path / "rounds.csv"
    if not csv_path.is_file():
        raise ConfigError("in", f"{run_dir} does not contain rounds.csv")
    records = parse_round_log(csv_path.read_text(encoding="utf-8"))
    meta = {}
    meta_path = path / "run.json"
    if meta_path.is_file():
        meta = _load_json(meta_path, "run.json")
    return records, meta


def _run_label(records, meta) -> str:
    tiers = Counter(r.tier_label for r in records)
    if tiers:
        return tiers.most_common(1)[0][0]
    return meta.get("scenario", "run")


def cmd_report(args) -> int:
    runs = []
    for run_dir in args.in_dirs:
        records, meta = _read_run_dir(run_dir)
        report = summarize_run(records)
        runs.append((run_dir, _run_label(records, meta), report))

    if args.format == "json":
        payload = [{"dir": str(d), "label": label, **r.to_dict()} for d, label, r in runs]
        if len(runs) > 1:
            base = runs[0][2].total_co2e_kg
            payload.append(
                {
                    "ratios": {
                        f"{label}/{runs[0][1]}": r.total_co2e_kg / base for _, label, r in runs[1:]
                    }
                }
            )
        print(json.dumps(payload, indent=2))
        return EXIT_OK

    if args.format == "csv":
        print("run,site_id,energy_kwh,co2e_kg,busy_s")
        for run_dir, label, report in runs:
            for site, t in sorted(report.per_site.items()):
                print(f"{label},{site},{t.energy_kwh!r},{t.co2e_kg!r},{t.busy_s!r}")
        return EXIT_OK

    for run_dir, label, report in runs:
        print(f"run {label} ({run_dir}): {report.num_rounds} rounds")
        print(f"  {'site':<12} {'energy_kwh':>14} {'co2e_kg':>14} {'busy_min':>10}")
        for site, t in sorted(report.per_site.items()):
            print(f"  {site:<12} {t.energy_kwh:>14.6g} {t.co2e_kg:>14.6g} {t.busy_s / 60.0:>10.4g}")
        print(
            f"  mean energy/round {report.mean_energy_kwh_per_round:.6g} kWh | "
            f"comm {report.comm_co2e_kg:.6g} kg | total {report.total_co2e_kg:.6g} kg CO2e | "
            f"runtime {report.runtime_s / 60.0:.4g} min"
        )
    if len(runs) > 1:
        base_label, base = runs[0][1], runs[0][2].total_co2e_kg
        parts = [f"{label}/{base_label}={r.total_co2e_kg / base:.2f}" for _, label, r in runs[1:]]
        print("ratios: " + " ".join(parts))
    return EXIT_OK


def cmd_whatif(args) -> int:
    records, _ = _read_run_dir(args.in_dir)
    regions = {r.region_code for r in records}
    if args.ci is not None:
        if args.ci < 0:
            raise ConfigError("ci", "carbon intensity must be >= 0")
        mapping = {code: args.ci for code in regions}
    else:
        if args.region not in BUILTIN_REGIONS:
            raise UnknownRegion(args.region)
        ci = BUILTIN_REGIONS[args.region].ci_kg_per_kwh
        mapping = {code: ci for code in regions}
    remapped = remap_grid_intensity(records, mapping)
    report = summarize_run(remapped)
    original = summarize_run(records)
    print(json.dumps(
        {
            "ci_kg_per_kwh": mapping,
            "original_total_co2e_kg": original.total_co2e_kg,
            "remapped_total_co2e_kg": report.total_co2e_kg,
            "total_energy_kwh": report.total_energy_kwh,
            "per_site_co2e_kg": {
                site: t.co2e_kg + t.comm_co2e_kg for site, t in sorted(report.per_site.items())
            },
        },
        indent=2,
    ))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    summary_path = Path(args.baseline) / "summary.json"
    if not summary_path.is_file():
        raise ConfigError("baseline", f"{args.baseline} does not contain summary.json")
    summary = _load_json(summary_path, "summary.json")
    targets_doc = _load_json(args.targets, "targets")
    targets = {}
    for label, t in targets_doc.items():
        try:
            targets[label] = TierTarget(
                mean_energy_kwh_per_round=float(t["mean_energy_kwh_per_round"]),
                runtime_min=float(t["runtime_min"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"targets.{label}", str(exc)) from exc
    tiers = calibrate_tiers(float(summary["mean_energy_kwh_per_round"]), targets)
    out = {
        "tiers": {
            label: {"slowdown_factor": t.slowdown_factor, "power_scale": t.power_scale}
            for label, t in sorted(tiers.items())
        }
    }
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"calibrated {len(tiers)} tiers -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenfl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config and write artifacts")
    p_run.add_argument("--config", required=True, help="config file path or bundled scenario name")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--tiers", default=None, help="calibrated tier preset file")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="summarize one or more run directories")
    p_rep.add_argument("--in", dest="in_dirs", nargs="+", required=True, help="run directories")
    p_rep.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p_rep.set_defaults(func=cmd_report)

    p_what = sub.add_parser("whatif", help="remap a run's emissions to another grid intensity")
    p_what.add_argument("--in", dest="in_dir", required=True, help="run directory")
    group = p_what.add_mutually_exclusive_group(required=True)
    group.add_argument("--ci", type=float, default=None, help="carbon intensity, kg CO2e per kWh")
    group.add_argument("--region", default=None, help="region code from the builtin intensity table")
    p_what.set_defaults(func=cmd_whatif)

    p_cal = sub.add_parser("calibrate", help="fit tier knobs to published per-round means")
    p_cal.add_argument("--baseline", required=True, help="baseline (high tier) run directory")
    p_cal.add_argument("--targets", required=True, help="JSON file of per-tier targets")
    p_cal.add_argument("--out", required=True, help="output tier preset file")
    p_cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownRegion) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CalibrationFailed, GreenflError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
