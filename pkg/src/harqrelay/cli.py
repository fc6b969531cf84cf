"""Command-line front end.

Examples::

    python -m harqrelay --preset fig3 --packets 2000 --out fig3.csv
    python -m harqrelay --sweep gain_threshold_db=-97,-91,-85 --set feedback_prob=0.1
    python -m harqrelay --strategy opportunistic,harbinger,p2p --out compare.csv

Exit status: 0 on success, 2 for configuration errors, 3 for runtime faults.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import logging
import sys

from . import __version__
from .config import PRESETS, ConfigError, SimConfig, config_from_dict, load_config, parse_assignment, parse_sweep, preset
from .engine import result_row, run_campaign, sweep, write_results
from .protocol import Strategy
from .topology import Topology

log = logging.getLogger("harqrelay")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="harqrelay", description="Two-hop relay HARQ throughput simulator.")
    p.add_argument("--config", metavar="PATH", help="JSON file with SimConfig fields")
    p.add_argument("--preset", choices=sorted(PRESETS), help="figure reproduction preset")
    p.add_argument("--strategy", metavar="TOKEN", help="opportunistic | harbinger | p2p (comma-separated for several)")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--packets", type=int, metavar="N", help="packets per sweep point")
    p.add_argument("--sweep", metavar="AXIS=V1,V2,...")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field (repeatable)")
    p.add_argument("--out", metavar="PATH", default="results.csv")
    p.add_argument("--transcripts", metavar="PATH", help="write per-packet JSON lines here")
    p.add_argument("--workers", type=int, default=1, help="processes for sweep points")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def resolve_configs(args) -> tuple[list[SimConfig], str | None]:
    """Merge defaults, config file, preset and flags (later wins)."""
    base = load_config(args.config) if args.config else SimConfig()
    if args.preset:
        configs = preset(args.preset, base)
    else:
        configs = [base]
    updates: dict = {}
    for item in args.overrides:
        key, value = parse_assignment(item)
        updates[key] = value
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.packets is not None:
        updates["n_packets"] = args.packets
    if args.sweep:
        axis, values = parse_sweep(args.sweep)
        updates["sweep_axis"] = axis
        updates["sweep_values"] = values
    strategies = None
    if args.strategy:
        strategies = [s.strip() for s in args.strategy.split(",") if s.strip()]
        for s in strategies:
            if s not in {x.value for x in Strategy}:
                raise ConfigError(f"unknown strategy {s!r}")
    resolved = []
    for cfg in configs:
        cfg = config_from_dict(updates, cfg) if updates else cfg
        if strategies is None:
            resolved.append(cfg)
        else:
            resolved.extend(dataclasses.replace(cfg, strategy=s) for s in strategies)
    # de-duplicate when --strategy repeats a preset's strategies
    unique = list({c.config_hash(): c for c in resolved}.values())
    for cfg in unique:
        try:
            cfg.family()
            if cfg.topology_file:
                Topology.load(cfg.topology_file)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return unique, args.preset


def run(args) -> int:
    configs, preset_name = resolve_configs(args)
    rows, point_configs = [], {}
    axis = configs[0].sweep_axis
    if any(c.sweep_axis != axis for c in configs):
        raise ConfigError("all runs in one invocation must share the sweep axis")
    transcript_ctx = open(args.transcripts, "w") if args.transcripts else contextlib.nullcontext()
    with transcript_ctx as tfh:
        for cfg in configs:
            if cfg.sweep_axis:
                log.info("sweeping %s over %d values (%s)", cfg.sweep_axis, len(cfg.sweep_values), cfg.strategy)
                results = sweep(cfg, workers=args.workers, transcripts=tfh)
            else:
                point = cfg.point()
                results = [("", point, run_campaign(point, tfh))]
            for value, point, metrics in results:
                rows.append(result_row(value, point, metrics))
                point_configs[point.config_hash()] = point
                log.info("%s %s r_avg=%.5f", value, point.strategy, metrics.r_avg)
    meta = {
        "version": __version__,
        "preset": preset_name,
        "axis": axis,
        "resolved_configs": [c.to_dict() for c in configs],
        "rate_convention": (
            "r_avg = k/(n+M) * P/(P+l_av) with n = 3k (mother-code length without tail), "
            "k = 2040 inner information bits"
        ),
    }
    meta_path = write_results(args.out, rows, point_configs, meta)
    print(f"wrote {len(rows)} rows to {args.out} (metadata: {meta_path})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return EXIT_OK if exc.code is None else int(exc.code)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        return run(args)
    except ConfigError as exc:
        print(f"harqrelay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any fault maps to the runtime exit code
        log.debug("runtime fault", exc_info=True)
        print(f"harqrelay: runtime fault: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
