"""Glue between the orchestrator and the reporting layer: run a configured
scenario, flatten the ledger into schema records, and write run artifacts
(rounds.csv, run.json, summary.json) to an output directory."""

from __future__ import annotations

import json
from pathlib import Path

from . import __version__
from .config import RunConfig, build_dataset, build_partitions
from .orchestrator import RunResult, run_job
from .reporting import RoundRecord, RunReport, summarize_run, write_round_log
from .tracker import ROUND


def ledger_to_records(cfg: RunConfig, result: RunResult) -> list[RoundRecord]:
    records = []
    payloads = {
        (o.round_index, site): bytes_
        for o in result.outcomes
        for site, bytes_ in o.payload_bytes.items()
    }
    net_intensity = cfg.plan.comm_model.net_intensity_kwh_per_gb
    for site in cfg.plan.sites:
        for rec in result.tracker.ledger(site.site_id):
            payload = None
            if rec.phase.kind == ROUND:
                payload = payloads.get((rec.phase.round_index, site.site_id))
            records.append(
                RoundRecord(
                    run_id=cfg.scenario,
                    site_id=site.site_id,
                    round_index=rec.phase.round_index,
                    phase=rec.phase.kind,
                    start_s=rec.start.seconds,
                    duration_s=rec.duration.seconds,
                    energy_kwh=rec.energy.value,
                    co2e_kg=rec.co2e.value,
                    ci_kg_per_kwh=rec.ci.value,
                    region_code=site.region.code,
                    hardware_name=site.hardware.name,
                    tier_label=site.tier.label,
                    payload_bytes=payload,
                    net_intensity_kwh_per_gb=net_intensity,
                    seed=cfg.seed,
                )
            )
    records.sort(key=lambda r: (r.start_s, r.site_id, r.phase))
    return records


def execute_run(cfg: RunConfig):
    dataset = build_dataset(cfg)
    partitions = build_partitions(cfg, dataset)
    result = run_job(cfg.plan, dataset, partitions)
    records = ledger_to_records(cfg, result)
    return records, result


def run_metadata(cfg: RunConfig) -> dict:
    return {
        "tool": "greenfl",
        "version": __version__,
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "config_sha256": cfg.config_hash(),
        "comm_attribution": cfg.comm_attribution,
        "tiers": {
            s.site_id: {
                "label": s.tier.label,
                "slowdown_factor": s.tier.slowdown_factor,
                "power_scale": s.tier.power_scale,
            }
            for s in cfg.plan.sites
        },
        "hardware": {
            s.site_id: s.hardware.name for s in cfg.plan.sites
        },
        "regions": {s.site_id: s.region.code for s in cfg.plan.sites},
        "config": cfg.raw,
    }


def write_artifacts(out_dir, cfg: RunConfig, records, result: RunResult) -> RunReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rounds.csv").write_text(write_round_log(records), encoding="utf-8", newline="")
    report = summarize_run(records, accuracy_by_round=result.accuracy_by_round)
    with open(out / "run.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(run_metadata(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "summary.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
