"""Command-line entry point: ``fdnet {run,sweep,figure,dump-topology}``.

Every command writes plain CSV/JSON files into ``--out``. Floats are written
in their shortest round-trip form so reruns give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Sequence

from .config import ConfigError, SimConfig, config_from_dict, load_config, normalize_algorithm
from .engine import (
    AXES,
    Report,
    Variant,
    realization_rngs,
    run_variants,
    sweep_variants,
    variant_of,
)
from .geom import sample_topology

log = logging.getLogger("fdnet")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2
FIGURE_IDS = (2, 3, 4, 5, 6, 7)
OPA_CHOICES = ("off", "local", "genie")

CDF_HEADER = ("rate_bps", "cdf")
DECOMPOSITION_HEADER = ("term", "direction", "mean_dbm")
SWEEP_HEADER = (
    "axis_value",
    "algorithm",
    "opa",
    "mean_ul_bps",
    "mean_dl_bps",
    "mean_sum_bps",
    "se_sum_bps",
    "fd_fraction",
    "saturated_fraction",
)
VARIANTS_HEADER = SWEEP_HEADER[1:]
TOPOLOGY_HEADER = ("kind", "x_m", "y_m")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for I/O here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(value) -> str:
    """Shortest round-trip text for numbers; ``str`` for everything else."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def opa_label(variant: Variant) -> str:
    return variant.opa_knowledge.lower() if variant.opa_enabled else "off"


def write_report(report: Report, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "summary.json", report.summary())
    n = report.n
    for name, samples in (("ul", report.ul_rates), ("dl", report.dl_rates), ("sum", report.sum_rates)):
        write_csv(out / f"cdf_{name}.csv", CDF_HEADER, ((float(x), (i + 1) / n) for i, x in enumerate(samples)))
    write_csv(out / "decomposition.csv", DECOMPOSITION_HEADER, report.decomposition_dbm())


def _variant_row(variant: Variant, report: Report) -> tuple:
    return (
        variant.algorithm,
        opa_label(variant),
        report.mean_ul,
        report.mean_dl,
        report.mean_sum,
        report.se_sum,
        report.mode_fractions["FD"],
        report.saturated_fraction,
    )


def write_sweep(out: Path, axis: str, results) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows, points = [], []
    for value, reports in results:
        for variant, report in reports.items():
            rows.append((value,) + _variant_row(variant, report))
            points.append(
                {
                    "axis_value": value,
                    "algorithm": variant.algorithm,
                    "opa": opa_label(variant),
                    "realizations": report.n,
                    "mean_ul_bps": report.mean_ul,
                    "se_ul_bps": report.se_ul,
                    "mean_dl_bps": report.mean_dl,
                    "se_dl_bps": report.se_dl,
                    "mean_sum_bps": report.mean_sum,
                    "se_sum_bps": report.se_sum,
                    "mode_fractions": report.mode_fractions,
                    "saturated_fraction": report.saturated_fraction,
                }
            )
    write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    base = next(iter(results[0][1].values())).config if results else None
    write_json(
        out / "sweep_summary.json",
        {"axis": axis, "base_config": base.to_dict() if base else None, "points": points},
    )


def write_topologies(config: SimConfig, out: Path, count: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        topo = sample_topology(config, realization_rngs(config.seed, i)[0])
        write_csv(out / f"topology_{i:05d}.csv", TOPOLOGY_HEADER, topo.rows())


# --- argument handling ----------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file (defaults: baseline network)")
    p.add_argument("--seed", type=int, help="root seed, 0 <= seed < 2**64")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--workers", type=int, help="worker processes (fallback: FDNET_WORKERS, else 1)")
    p.add_argument("--realizations", type=int, help="Monte Carlo realizations")


def _variant_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", choices=("1", "2", "3"), help="user-scheduling algorithm")
    p.add_argument("--opa", choices=OPA_CHOICES, help="binary power allocation and its knowledge mode")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdnet", description="Full-duplex small-cell network simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one Monte Carlo run")
    _common(p)
    _variant_flags(p)
    p.add_argument("--dump-topology", action="store_true", help="also write every sampled topology")

    p = sub.add_parser("sweep", help="sweep one parameter axis")
    _common(p)
    _variant_flags(p)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", nargs="+", required=True, help="axis values (antennas as N or NTxNR)")
    p.add_argument("--all-variants", action="store_true", help="all algorithms, with and without OPA")

    p = sub.add_parser("figure", help="data behind one of the preset figures")
    _common(p)
    p.add_argument("--id", type=int, choices=FIGURE_IDS, required=True, dest="figure_id")

    p = sub.add_parser("dump-topology", help="write sampled topologies only")
    _common(p)
    p.add_argument("--count", type=int, default=1, help="number of realizations to dump")
    return parser


def _read_config(path: Path | None) -> SimConfig:
    if path is None:
        return SimConfig()
    return load_config(path.read_text())


def _apply_overrides(config: SimConfig, args) -> SimConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.realizations is not None:
        changes["realizations"] = args.realizations
    if getattr(args, "algorithm", None) is not None:
        changes["algorithm"] = normalize_algorithm(args.algorithm)
    opa = getattr(args, "opa", None)
    if opa is not None:
        changes["opa_enabled"] = opa != "off"
        if opa != "off":
            changes["opa_knowledge"] = opa.upper()
    return replace(config, **changes) if changes else config


def load_preset(figure_id: int) -> dict:
    text = resources.files("fdnet.data.presets").joinpath(f"fig{figure_id}.json").read_text()
    return json.loads(text)


def _preset_variants(doc: dict) -> list[Variant]:
    out = []
    for entry in doc["variants"]:
        opa = entry["opa"]
        out.append(Variant(normalize_algorithm(entry["algorithm"]), opa != "off", "GENIE" if opa == "off" else opa.upper()))
    return out


def all_variants(knowledge: str) -> list[Variant]:
    return [Variant(a, o, knowledge) for a in ("ALG1", "ALG2", "ALG3") for o in (False, True)]


def cmd_run(args) -> None:
    config = _apply_overrides(_read_config(args.config), args)
    variant = variant_of(config)
    report = run_variants(config, [variant], args.workers)[variant]
    write_report(report, args.out)
    if args.dump_topology:
        write_topologies(config, args.out / "topology", config.realizations)
    log.info("run %s: %d realizations in %.2f s", variant.label, report.n, report.runtime_s)


def cmd_sweep(args) -> None:
    config = _apply_overrides(_read_config(args.config), args)
    variants = all_variants(config.opa_knowledge) if args.all_variants else [variant_of(config)]
    results = sweep_variants(config, args.axis, args.values, variants, args.workers)
    write_sweep(args.out, args.axis, results)


def cmd_figure(args) -> None:
    doc = load_preset(args.figure_id)
    config = config_from_dict(doc["config"])
    if args.config is not None:
        config = _read_config(args.config)
    config = _apply_overrides(config, args)
    variants = _preset_variants(doc)
    workers = args.workers
    out = args.out
    if doc["axis"] is None:
        reports = run_variants(config, variants, workers)
        for variant, report in reports.items():
            write_report(report, out / variant.label)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "variants.csv", VARIANTS_HEADER, (_variant_row(v, r) for v, r in reports.items()))
        return
    results = sweep_variants(config, doc["axis"], doc["values"], variants, workers)
    write_sweep(out, doc["axis"], results)
    for value, reports in results:
        for variant, report in reports.items():
            write_report(report, out / f"{doc['axis']}_{value}" / variant.label)


def cmd_dump_topology(args) -> None:
    config = _apply_overrides(_read_config(args.config), args)
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    write_topologies(config, args.out, args.count)


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "figure": cmd_figure, "dump-topology": cmd_dump_topology}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"fdnet: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"fdnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
