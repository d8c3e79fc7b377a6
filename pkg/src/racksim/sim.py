"""Deterministic discrete-event simulation of map-phase execution.

A cluster is a set of eligible nodes, each offering a fixed number of map
slots.  Jobs are either data-heavy (one map task per block of an ingested
file) or compute-heavy (fixed-duration tasks with no input data).  The
scheduler is greedy: whenever slots come free, the best (slot, task) pair by
locality runs next, ties broken by lowest task index, then host string order.
A data task pays the cost-model transfer time for its achieved locality on
top of its compute time; everything is a pure function of the seed, so any
run replays bit for bit.

The sweep runner re-runs a job template across a replication-factor range
with ``runs_per_point`` seeded replications per point and aggregates
completion times, locality fractions and ingest cost per row.  Runs are
independent and keyed by (rf, run index), so executing them concurrently and
merging by key would give the same rows; this implementation stays
single-threaded.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

import numpy as np

from .placement import Block, ReplicaMap, place_block
from .prediction import DEFAULT_WINDOW, AccessHistory, AccessSample, predict_next
from .replication import (
    CostModel,
    ReplicationConfig,
    ReplicationDecision,
    apply_decision,
    decide_rf,
    transfer_time,
    update_cost,
)
from .topology import ClusterTopology, LocalityLevel, eligible_hosts, locality

__all__ = [
    "NoEligibleNodes",
    "FileNotIngested",
    "SimConfig",
    "DataHeavyJob",
    "ComputeHeavyJob",
    "LocalityCounts",
    "SimResult",
    "SweepRow",
    "SweepResult",
    "DecisionRecord",
    "Cluster",
    "build_cluster",
    "ingest_file",
    "schedule_and_run",
    "run_sweep",
    "run_adaptive",
]


class NoEligibleNodes(Exception):
    pass


class FileNotIngested(Exception):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Cluster and cost parameters for one simulation setup."""

    seed: int
    block_size_bytes: int = 67108864
    map_slots_per_node: int = 2
    compute_rate: float = 50e6
    fixed_task_compute_seconds: float = 10.0
    cost: CostModel = field(default_factory=CostModel)
    runs_per_point: int = 8
    exclude_master: bool = True

    def __post_init__(self) -> None:
        if self.block_size_bytes <= 0 or self.compute_rate <= 0:
            raise ValueError("block size and compute rate must be positive")
        if self.map_slots_per_node < 1:
            raise ValueError("need at least one map slot per node")
        if self.runs_per_point < 1:
            raise ValueError("runs_per_point must be >= 1")


@dataclass(frozen=True)
class DataHeavyJob:
    """One map task per block of a file of ``file_size_bytes``."""

    file_size_bytes: int
    file_id: int | None = None


@dataclass(frozen=True)
class ComputeHeavyJob:
    """Fixed-duration tasks with no input data."""

    num_tasks: int
    task_seconds: float


JobSpec = DataHeavyJob | ComputeHeavyJob


@dataclass(frozen=True)
class LocalityCounts:
    node_local: int = 0
    rack_local: int = 0
    off_rack: int = 0

    @property
    def total(self) -> int:
        return self.node_local + self.rack_local + self.off_rack


@dataclass(frozen=True)
class SimResult:
    completion_seconds: float
    locality_histogram: LocalityCounts
    ingest_update_cost_seconds: float
    tasks_total: int


@dataclass(frozen=True)
class SweepRow:
    rf: int
    mean_completion_s: float
    stddev_s: float
    node_local_frac: float
    rack_local_frac: float
    off_rack_frac: float
    mean_update_cost_s: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]


@dataclass
class Cluster:
    """Mutable state owned by a single simulation run."""

    topo: ClusterTopology
    cfg: SimConfig
    eligible: tuple[str, ...]
    replicas: ReplicaMap = field(default_factory=dict)
    blocks: dict[int, Block] = field(default_factory=dict)
    files: dict[int, list[int]] = field(default_factory=dict)
    file_ingest_cost: dict[int, float] = field(default_factory=dict)
    clock: float = 0.0
    _next_block_id: int = 0
    _next_file_id: int = 0


def build_cluster(topo: ClusterTopology, cfg: SimConfig) -> Cluster:
    """Fresh cluster with empty slot queues, no blocks and clock zero."""
    eligible = eligible_hosts(topo, cfg.exclude_master)
    if not eligible:
        raise NoEligibleNodes("topology has no eligible compute nodes")
    return Cluster(topo=topo, cfg=cfg, eligible=eligible)


def ingest_file(
    cluster: Cluster,
    file_size_bytes: int,
    writer: str,
    rf: int,
    rng: random.Random,
    *,
    file_id: int | None = None,
) -> tuple[list[Block], float]:
    """Split a file into blocks, place each at ``rf``, and price the ingest.

    Replica 0 of each block is the writer's local copy and costs nothing;
    the remaining copies stream from the writer.  Per-block pipelines run
    concurrently, so the file's ingest wall clock is the slowest block's
    transfer chain, not the sum over blocks.
    """
    if file_size_bytes < 1:
        raise ValueError("file size must be >= 1 byte")
    if file_id is None:
        while cluster._next_file_id in cluster.files:
            cluster._next_file_id += 1
        file_id = cluster._next_file_id
    elif file_id in cluster.files:
        raise ValueError(f"file {file_id} already ingested")
    cfg = cluster.cfg
    block_size = cfg.block_size_bytes
    n_blocks = math.ceil(file_size_bytes / block_size)
    blocks: list[Block] = []
    ingest_cost = 0.0
    for i in range(n_blocks):
        size = block_size if i < n_blocks - 1 else file_size_bytes - block_size * (n_blocks - 1)
        block = Block(cluster._next_block_id, file_id, size, i)
        cluster._next_block_id += 1
        holders = place_block(cluster.topo, writer, rf, rng, exclude_master=cfg.exclude_master)
        cluster.blocks[block.block_id] = block
        cluster.replicas[block.block_id] = holders
        blocks.append(block)
        plan = [(writer, host) for host in holders[1:]]
        chain = update_cost([block] * len(plan), plan, cluster.topo, cfg.cost)
        ingest_cost = max(ingest_cost, chain)
    cluster.files[file_id] = [b.block_id for b in blocks]
    cluster.file_ingest_cost[file_id] = ingest_cost
    return blocks, ingest_cost


@dataclass(frozen=True)
class _Task:
    index: int
    size_bytes: int | None            # None marks a pure compute task
    holders: tuple[str, ...] | None
    seconds: float                    # fixed duration for compute tasks


def _run_tasks(cluster: Cluster, tasks: list[_Task]) -> tuple[float, LocalityCounts]:
    """Greedy locality-first list scheduling; returns (makespan, histogram)."""
    cfg = cluster.cfg
    slots: list[list] = [
        [0.0, host, k]
        for host in cluster.eligible
        for k in range(cfg.map_slots_per_node)
    ]
    # Locality is static during a job, so precompute it per (host, task).
    levels: dict[str, list[LocalityLevel]] = {}
    for host in cluster.eligible:
        levels[host] = [
            LocalityLevel.NODE_LOCAL
            if t.holders is None
            else min(locality(cluster.topo, host, h) for h in t.holders)
            for t in tasks
        ]
    pending = list(range(len(tasks)))
    counts = [0, 0, 0]
    makespan = 0.0
    while pending:
        now = min(s[0] for s in slots)
        best_key = None
        best = None
        for slot in slots:
            if slot[0] != now:
                continue
            host_levels = levels[slot[1]]
            for pos, ti in enumerate(pending):
                key = (host_levels[ti], tasks[ti].index, slot[1], slot[2])
                if best_key is None or key < best_key:
                    best_key = key
                    best = (slot, pos)
        slot, pos = best
        ti = pending.pop(pos)
        task = tasks[ti]
        level = levels[slot[1]][ti]
        if task.holders is None:
            duration = task.seconds
        else:
            duration = task.size_bytes / cfg.compute_rate + transfer_time(
                cfg.cost, task.size_bytes, level
            )
        counts[level] += 1
        slot[0] = now + duration
        makespan = max(makespan, slot[0])
    return makespan, LocalityCounts(*counts)


def schedule_and_run(cluster: Cluster, job: JobSpec) -> SimResult:
    """Run one job's map phase to completion on the current placements."""
    if isinstance(job, ComputeHeavyJob):
        if job.num_tasks < 1:
            raise ValueError("compute job needs at least one task")
        tasks = [_Task(i, None, None, job.task_seconds) for i in range(job.num_tasks)]
        ingest = 0.0
    else:
        if job.file_id is None or job.file_id not in cluster.files:
            raise FileNotIngested(f"job file {job.file_id!r} has not been ingested")
        tasks = [
            _Task(
                cluster.blocks[bid].index_in_file,
                cluster.blocks[bid].size_bytes,
                tuple(cluster.replicas[bid]),
                0.0,
            )
            for bid in cluster.files[job.file_id]
        ]
        ingest = cluster.file_ingest_cost.get(job.file_id, 0.0)
    makespan, histogram = _run_tasks(cluster, tasks)
    return SimResult(makespan, histogram, ingest, len(tasks))


def run_sweep(
    topo: ClusterTopology,
    cfg: SimConfig,
    job_template: JobSpec,
    rf_min: int,
    rf_max: int,
) -> SweepResult:
    """Sweep the replication factor over an inclusive range.

    Each point runs ``cfg.runs_per_point`` independent replications seeded
    ``cfg.seed ^ rf ^ run_index``, each on a fresh cluster.  Data-heavy rows
    report completion inclusive of the ingest cost; subtract the row's mean
    update cost to recover the pure map-phase makespan.
    """
    eligible = eligible_hosts(topo, cfg.exclude_master)
    if not eligible:
        raise NoEligibleNodes("topology has no eligible compute nodes")
    if rf_min < 1 or rf_min > rf_max:
        raise ValueError("need 1 <= rf_min <= rf_max")
    if rf_max > len(eligible):
        from .placement import ReplicationFactorTooLarge

        raise ReplicationFactorTooLarge(
            f"rf_max={rf_max} exceeds the {len(eligible)} eligible nodes"
        )
    rows = []
    for rf in range(rf_min, rf_max + 1):
        completions: list[float] = []
        costs: list[float] = []
        node_local = rack_local = off_rack = 0
        for run_index in range(cfg.runs_per_point):
            rng = random.Random(cfg.seed ^ rf ^ run_index)
            cluster = build_cluster(topo, cfg)
            job = job_template
            if isinstance(job, DataHeavyJob):
                writer = rng.choice(cluster.eligible)
                blocks, _ = ingest_file(cluster, job.file_size_bytes, writer, rf, rng)
                job = replace(job, file_id=blocks[0].file_id)
            result = schedule_and_run(cluster, job)
            completions.append(result.completion_seconds + result.ingest_update_cost_seconds)
            costs.append(result.ingest_update_cost_seconds)
            node_local += result.locality_histogram.node_local
            rack_local += result.locality_histogram.rack_local
            off_rack += result.locality_histogram.off_rack
        total = node_local + rack_local + off_rack
        rows.append(
            SweepRow(
                rf=rf,
                mean_completion_s=float(np.mean(completions)),
                stddev_s=float(np.std(completions)),
                node_local_frac=node_local / total if total else 0.0,
                rack_local_frac=rack_local / total if total else 0.0,
                off_rack_frac=off_rack / total if total else 0.0,
                mean_update_cost_s=float(np.mean(costs)),
            )
        )
    return SweepResult(tuple(rows))


@dataclass(frozen=True)
class DecisionRecord:
    epoch: int
    decision: ReplicationDecision
    update_cost_s: float


def run_adaptive(
    cluster: Cluster,
    trace: list[tuple[float, int]],
    rep_cfg: ReplicationConfig,
    *,
    epoch_seconds: float = 60.0,
    initial_rf: int = 3,
    default_file_size: int | None = None,
    window: int = DEFAULT_WINDOW,
    rng: random.Random | None = None,
) -> tuple[list[DecisionRecord], list[SimResult]]:
    """Adaptive replication driven by a (time, file_id) access trace.

    Events are bucketed into fixed epochs.  Within an epoch every access runs
    as a read job (one map task per block of the touched file) against the
    current placements.  At the epoch boundary each file seen so far gets a
    cumulative-count sample appended; once a file has two samples its next
    access count is predicted, fed through the decision rule and the decision
    enacted.  Files untouched in an epoch keep sampling with a flat count,
    which is what lets cold files decay back to ``min_rf``.

    Files first seen in the trace are auto-ingested at ``initial_rf``
    (clamped to the configured band) from a random writer.

    Returns every decision taken plus one :class:`SimResult` per epoch whose
    ``ingest_update_cost_seconds`` is that epoch's replication spend.
    """
    if rng is None:
        rng = random.Random(cluster.cfg.seed)
    if epoch_seconds <= 0:
        raise ValueError("epoch_seconds must be positive")
    for (t0, _), (t1, _) in zip(trace, trace[1:]):
        if t1 < t0:
            raise ValueError("trace times must be non-decreasing")
    if not trace:
        return [], []
    if trace[0][0] < 0:
        raise ValueError("trace times must be >= 0")

    size = default_file_size if default_file_size is not None else cluster.cfg.block_size_bytes
    histories: dict[int, AccessHistory] = {}
    cumulative: dict[int, int] = {}
    decisions: list[DecisionRecord] = []
    epoch_results: list[SimResult] = []
    n_epochs = int(trace[-1][0] // epoch_seconds) + 1
    cursor = 0
    for epoch in range(n_epochs):
        end = (epoch + 1) * epoch_seconds
        epoch_cost = 0.0
        tasks: list[_Task] = []
        while cursor < len(trace) and trace[cursor][0] < end:
            _, file_id = trace[cursor]
            cursor += 1
            if file_id not in cluster.files:
                writer = rng.choice(cluster.eligible)
                rf0 = max(rep_cfg.min_rf, min(initial_rf, rep_cfg.max_rf, len(cluster.eligible)))
                _, cost = ingest_file(cluster, size, writer, rf0, rng, file_id=file_id)
                epoch_cost += cost
                histories[file_id] = AccessHistory(file_id=file_id)
                cumulative[file_id] = 0
            cumulative[file_id] += 1
            for bid in cluster.files[file_id]:
                block = cluster.blocks[bid]
                tasks.append(
                    _Task(len(tasks), block.size_bytes, tuple(cluster.replicas[bid]), 0.0)
                )
        makespan, histogram = _run_tasks(cluster, tasks)
        for file_id in sorted(histories):
            history = histories[file_id]
            history.append(AccessSample(end, cumulative[file_id]))
            if len(history.samples) < 2:
                continue
            predicted = predict_next(history, window)
            increment = max(0.0, predicted.count_next - cumulative[file_id])
            rf_current = len(cluster.replicas[cluster.files[file_id][0]])
            decision = decide_rf(increment, rf_current, rep_cfg, file_id=file_id)
            _, cost = apply_decision(cluster, decision, rng)
            epoch_cost += cost
            decisions.append(DecisionRecord(epoch, decision, cost))
        epoch_results.append(SimResult(makespan, histogram, epoch_cost, len(tasks)))
        cluster.clock = end
    return decisions, epoch_results
