"""Experiment runner: resolve rack mappings, run sweeps, predict accesses.

Commands
--------
``racksim topology resolve -t topology.data HOST...``
    Print the rack path of each host, one trailing space per result,
    exactly as the mapping-script contract demands.
``racksim sweep -c sweep.cfg [-o DIR]``
    Replication-factor sweep; writes ``results.csv``, ``results.svg`` and
    ``manifest.json``.
``racksim predict TRACE.csv [-w WINDOW]``
    Print ``t_next,count_next,window_used`` for an access trace.
``racksim adaptive -c adaptive.cfg TRACE.csv [-o DIR]``
    Replay an access-event trace through the adaptive loop; writes
    ``decisions.csv``, ``epochs.csv`` and ``manifest.json``.

Exit codes: 0 success, 2 input error, 3 simulation precondition error.

Config files are flat ``key=value`` text with dotted section prefixes
(``cost.bw_cross_rack=12500000``); every key is listed in the README.  All
randomness flows from the required ``seed`` key.  Results files embed the
manifest verbatim (as a trailing ``#`` comment line in CSVs, an XML comment
in the SVG) so any output can be traced back to its exact inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .placement import ReplicationFactorTooLarge
from .prediction import AccessHistory, AccessSample, InsufficientHistory, predict_next
from .replication import CostModel, ReplicationConfig
from .sim import (
    ComputeHeavyJob,
    DataHeavyJob,
    NoEligibleNodes,
    SimConfig,
    build_cluster,
    run_adaptive,
    run_sweep,
)
from .topology import TopologyError, eligible_hosts, emit_mapping_output, parse_topology

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3


class ConfigError(Exception):
    pass


def _parse_int(text: str) -> int:
    return int(text.replace("_", ""), 10)


def _parse_float(text: str) -> float:
    value = float(text)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("value must be finite")
    return value


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_REQUIRED = "required"
_DERIVED = "derived"

#: key -> (parser, default).  ``_REQUIRED`` keys must appear in the file;
#: ``_DERIVED`` keys get filled from the topology or sibling keys.
_SCHEMA: dict[str, tuple] = {
    "seed": (_parse_int, _REQUIRED),
    "topology": (str, _REQUIRED),
    "workload.kind": (str, None),
    "workload.file_size_bytes": (_parse_int, 1073741824),
    "workload.num_tasks": (_parse_int, 14),
    "workload.task_seconds": (_parse_float, _DERIVED),
    "sweep.rf_min": (_parse_int, 1),
    "sweep.rf_max": (_parse_int, _DERIVED),
    "sim.block_size_bytes": (_parse_int, 67108864),
    "sim.map_slots_per_node": (_parse_int, 2),
    "sim.compute_rate": (_parse_float, 50e6),
    "sim.fixed_task_compute_seconds": (_parse_float, 10.0),
    "sim.runs_per_point": (_parse_int, 8),
    "sim.exclude_master": (_parse_bool, True),
    "cost.bw_in_rack": (_parse_float, 100e6),
    "cost.bw_cross_rack": (_parse_float, 12.5e6),
    "cost.latency_in_rack": (_parse_float, 0.001),
    "cost.latency_cross_rack": (_parse_float, 0.005),
    "replication.min_rf": (_parse_int, 1),
    "replication.max_rf": (_parse_int, _DERIVED),
    "replication.accesses_per_replica": (_parse_float, 2.0),
    "replication.hysteresis": (_parse_int, 1),
    "adaptive.epoch_seconds": (_parse_float, 60.0),
    "adaptive.initial_rf": (_parse_int, 3),
    "adaptive.file_size_bytes": (_parse_int, _DERIVED),
    "adaptive.window": (_parse_int, 4),
}


def load_config(path: Path) -> dict:
    """Parse a key=value config file against the schema, filling defaults."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{path}:{line_no}: unknown config key '{key}'")
        parser, _ = _SCHEMA[key]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: bad value for '{key}': {exc}") from None
    for key, (_, default) in _SCHEMA.items():
        if key in values:
            continue
        if default is _REQUIRED:
            raise ConfigError(f"{path}: missing required config key '{key}'")
        if default is not _DERIVED:
            values[key] = default
    return values


def _resolve_derived(values: dict, eligible_count: int) -> None:
    values.setdefault("sweep.rf_max", eligible_count)
    values.setdefault("replication.max_rf", eligible_count)
    values.setdefault("adaptive.file_size_bytes", values["sim.block_size_bytes"])
    values.setdefault("workload.task_seconds", values["sim.fixed_task_compute_seconds"])


def _sim_config(values: dict) -> SimConfig:
    return SimConfig(
        seed=values["seed"],
        block_size_bytes=values["sim.block_size_bytes"],
        map_slots_per_node=values["sim.map_slots_per_node"],
        compute_rate=values["sim.compute_rate"],
        fixed_task_compute_seconds=values["sim.fixed_task_compute_seconds"],
        cost=CostModel(
            bw_in_rack=values["cost.bw_in_rack"],
            bw_cross_rack=values["cost.bw_cross_rack"],
            per_transfer_latency_in_rack=values["cost.latency_in_rack"],
            per_transfer_latency_cross=values["cost.latency_cross_rack"],
        ),
        runs_per_point=values["sim.runs_per_point"],
        exclude_master=values["sim.exclude_master"],
    )


def fmt_num(value) -> str:
    """Minimal decimal rendering: integral values drop the trailing .0."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def build_manifest(command: str, config_path, topology_path, seed: int, parameters: dict) -> dict:
    return {
        "command": command,
        "config_path": str(config_path) if config_path is not None else None,
        "topology_path": str(topology_path) if topology_path is not None else None,
        "seed": seed,
        "tool_version": __version__,
        "parameters": {k: parameters[k] for k in sorted(parameters)},
    }


def manifest_line(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def _write(path: Path, content: str) -> None:
    path.write_text(content)
    print(f"wrote {path}")


def render_line_chart(
    points: list[tuple[float, float]],
    *,
    title: str,
    x_label: str,
    y_label: str,
    comment: str | None = None,
) -> str:
    """Minimal static SVG line chart: axes, ticks, one polyline."""
    width, height = 640, 420
    ml, mr, mt, mb = 70.0, 20.0, 40.0, 55.0
    plot_w, plot_h = width - ml - mr, height - mt - mb
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    x_span = (x_hi - x_lo) or 1.0
    y_hi = max(max(ys), 0.0) * 1.08 or 1.0

    def sx(x: float) -> float:
        return ml + (x - x_lo) / x_span * plot_w

    def sy(y: float) -> float:
        return mt + plot_h - y / y_hi * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if comment is not None:
        parts.append(f"<!-- {comment} -->")
    parts += [
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{ml:.1f}" y1="{mt + plot_h:.1f}" x2="{ml + plot_w:.1f}" '
        f'y2="{mt + plot_h:.1f}" stroke="black"/>',
        f'<line x1="{ml:.1f}" y1="{mt:.1f}" x2="{ml:.1f}" y2="{mt + plot_h:.1f}" '
        f'stroke="black"/>',
    ]
    for x in xs:
        px = sx(x)
        parts.append(
            f'<line x1="{px:.2f}" y1="{mt + plot_h:.1f}" x2="{px:.2f}" '
            f'y2="{mt + plot_h + 5:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{mt + plot_h + 20:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{fmt_num(x)}</text>'
        )
    for i in range(6):
        y_val = y_hi * i / 5
        py = sy(y_val)
        parts.append(
            f'<line x1="{ml - 5:.1f}" y1="{py:.2f}" x2="{ml:.1f}" y2="{py:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{ml - 9:.1f}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{y_val:.3g}</text>'
        )
    polyline = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
    parts.append(f'<polyline points="{polyline}" fill="none" stroke="#1f6fb2" stroke-width="2"/>')
    for x, y in points:
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3.5" fill="#1f6fb2"/>')
    parts.append(
        f'<text x="{ml + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{mt + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {mt + plot_h / 2:.1f})">{y_label}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _read_sample_trace(path: Path) -> list[AccessSample]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read trace {path}: {exc}") from None
    if not lines or lines[0].strip() != "t_seconds,count":
        raise ConfigError(f"{path}:1: expected header 't_seconds,count'")
    samples = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ConfigError(f"{path}:{line_no}: expected 2 fields")
        try:
            samples.append(AccessSample(float(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: {exc}") from None
    return samples


def _read_event_trace(path: Path) -> list[tuple[float, int]]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read trace {path}: {exc}") from None
    if not lines or lines[0].strip() != "t_seconds,file_id":
        raise ConfigError(f"{path}:1: expected header 't_seconds,file_id'")
    events = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ConfigError(f"{path}:{line_no}: expected 2 fields")
        try:
            events.append((float(fields[0]), int(fields[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: {exc}") from None
    return events


def _load_topology(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read topology {path}: {exc}") from None
    return parse_topology(text)


def cmd_topology_resolve(args: argparse.Namespace) -> int:
    try:
        topo = _load_topology(Path(args.topology))
    except (ConfigError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(emit_mapping_output(topo, args.hosts))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        values = load_config(Path(args.config))
        topo = _load_topology(Path(values["topology"]))
    except (ConfigError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _sim_config(values)
    eligible = eligible_hosts(topo, cfg.exclude_master)
    _resolve_derived(values, len(eligible))

    kind = values.get("workload.kind")
    if kind == "data_heavy":
        job = DataHeavyJob(file_size_bytes=values["workload.file_size_bytes"])
    elif kind == "compute_heavy":
        job = ComputeHeavyJob(
            num_tasks=values["workload.num_tasks"],
            task_seconds=values["workload.task_seconds"],
        )
    else:
        print(f"error: workload.kind must be data_heavy or compute_heavy, got {kind!r}",
              file=sys.stderr)
        return EXIT_INPUT
    rf_min, rf_max = values["sweep.rf_min"], values["sweep.rf_max"]
    if rf_min < 1 or rf_min > rf_max:
        print(f"error: need 1 <= sweep.rf_min <= sweep.rf_max, got {rf_min}..{rf_max}",
              file=sys.stderr)
        return EXIT_INPUT
    if rf_max > len(eligible):
        print(
            f"error: sweep.rf_max={rf_max} exceeds the {len(eligible)} eligible nodes",
            file=sys.stderr,
        )
        return EXIT_PRECONDITION
    try:
        sweep = run_sweep(topo, cfg, job, rf_min, rf_max)
    except (ReplicationFactorTooLarge, NoEligibleNodes, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    manifest = build_manifest("sweep", args.config, values["topology"], values["seed"], values)
    line = manifest_line(manifest)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    header = "rf,mean_completion_s,stddev_s,node_local_frac,rack_local_frac,off_rack_frac,mean_update_cost_s"
    rows = [
        ",".join(
            fmt_num(v)
            for v in (
                r.rf,
                r.mean_completion_s,
                r.stddev_s,
                r.node_local_frac,
                r.rack_local_frac,
                r.off_rack_frac,
                r.mean_update_cost_s,
            )
        )
        for r in sweep.rows
    ]
    _write(out / "results.csv", "\n".join([header, *rows, f"# {line}"]) + "\n")
    chart = render_line_chart(
        [(r.rf, r.mean_completion_s) for r in sweep.rows],
        title=f"{kind} sweep: completion time vs replication factor",
        x_label="replication factor",
        y_label="mean completion (s)",
        comment=line,
    )
    _write(out / "results.svg", chart)
    _write(out / "manifest.json", line + "\n")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    try:
        samples = _read_sample_trace(Path(args.trace))
        history = AccessHistory(file_id=0)
        for sample in samples:
            history.append(sample)
        predicted = predict_next(history, args.window)
    except InsufficientHistory:
        print("error: insufficient history (need at least 2 samples)", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"{fmt_num(predicted.t_next)},{fmt_num(predicted.count_next)},{predicted.window_used}")
    return EXIT_OK


def cmd_adaptive(args: argparse.Namespace) -> int:
    try:
        values = load_config(Path(args.config))
        topo = _load_topology(Path(values["topology"]))
        trace = _read_event_trace(Path(args.trace))
    except (ConfigError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _sim_config(values)
    eligible = eligible_hosts(topo, cfg.exclude_master)
    _resolve_derived(values, len(eligible))
    if values["replication.max_rf"] > len(eligible):
        print(
            f"error: replication.max_rf={values['replication.max_rf']} exceeds the "
            f"{len(eligible)} eligible nodes",
            file=sys.stderr,
        )
        return EXIT_PRECONDITION
    rep_cfg = ReplicationConfig(
        max_rf=values["replication.max_rf"],
        min_rf=values["replication.min_rf"],
        accesses_per_replica=values["replication.accesses_per_replica"],
        hysteresis=values["replication.hysteresis"],
    )
    try:
        cluster = build_cluster(topo, cfg)
        decisions, epochs = run_adaptive(
            cluster,
            trace,
            rep_cfg,
            epoch_seconds=values["adaptive.epoch_seconds"],
            initial_rf=values["adaptive.initial_rf"],
            default_file_size=values["adaptive.file_size_bytes"],
            window=values["adaptive.window"],
        )
    except NoEligibleNodes as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    manifest = build_manifest("adaptive", args.config, values["topology"], values["seed"], values)
    line = manifest_line(manifest)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    header = "epoch,file_id,rf_old,rf_new,predicted_count,reason,update_cost_s"
    rows = [
        ",".join(
            (
                fmt_num(rec.epoch),
                fmt_num(rec.decision.file_id),
                fmt_num(rec.decision.rf_old),
                fmt_num(rec.decision.rf_new),
                fmt_num(rec.decision.predicted_count),
                rec.decision.reason.value,
                fmt_num(rec.update_cost_s),
            )
        )
        for rec in decisions
    ]
    _write(out / "decisions.csv", "\n".join([header, *rows, f"# {line}"]) + "\n")
    epoch_header = "epoch,completion_s,node_local,rack_local,off_rack,tasks_total,update_cost_s"
    epoch_rows = [
        ",".join(
            fmt_num(v)
            for v in (
                i,
                res.completion_seconds,
                res.locality_histogram.node_local,
                res.locality_histogram.rack_local,
                res.locality_histogram.off_rack,
                res.tasks_total,
                res.ingest_update_cost_seconds,
            )
        )
        for i, res in enumerate(epochs)
    ]
    _write(out / "epochs.csv", "\n".join([epoch_header, *epoch_rows, f"# {line}"]) + "\n")
    _write(out / "manifest.json", line + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="racksim",
        description="Rack-aware cluster simulator with adaptive block replication.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    topo = sub.add_parser("topology", help="topology utilities")
    topo_sub = topo.add_subparsers(dest="topology_command", required=True)
    resolve = topo_sub.add_parser("resolve", help="map hosts to rack paths")
    resolve.add_argument("-t", "--topology", required=True, help="topology.data file")
    resolve.add_argument("hosts", nargs="*", help="host names to resolve")
    resolve.set_defaults(func=cmd_topology_resolve)

    sweep = sub.add_parser("sweep", help="replication-factor sweep experiment")
    sweep.add_argument("-c", "--config", required=True, help="key=value config file")
    sweep.add_argument("-o", "--out-dir", default=".", help="output directory")
    sweep.set_defaults(func=cmd_sweep)

    predict = sub.add_parser("predict", help="predict the next access for a trace")
    predict.add_argument("trace", help="CSV trace with header t_seconds,count")
    predict.add_argument("-w", "--window", type=int, default=4, help="trailing samples to interpolate")
    predict.set_defaults(func=cmd_predict)

    adaptive = sub.add_parser("adaptive", help="adaptive replication over an event trace")
    adaptive.add_argument("-c", "--config", required=True, help="key=value config file")
    adaptive.add_argument("trace", help="CSV trace with header t_seconds,file_id")
    adaptive.add_argument("-o", "--out-dir", default=".", help="output directory")
    adaptive.set_defaults(func=cmd_adaptive)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
