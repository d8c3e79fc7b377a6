"""Replication-factor decisions and transfer-cost pricing.

The core rule maps a predicted access count to a target replica count,
one replica per ``accesses_per_replica`` expected accesses, clamped to the
configured band.  A hysteresis band suppresses thrash: the factor only moves
when the target strays more than ``hysteresis`` steps from the current value.

Transfers are priced by locality: in-rack copies ride the rack switch,
cross-rack copies the slower inter-rack link, each with a fixed per-transfer
latency on top of bytes/bandwidth.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from .placement import Block, ReplicaMap, add_replicas, remove_replicas
from .topology import ClusterTopology, LocalityLevel, locality

__all__ = [
    "SelfTransfer",
    "ReplicationConfig",
    "Reason",
    "ReplicationDecision",
    "CostModel",
    "decide_rf",
    "transfer_time",
    "update_cost",
    "apply_decision",
]


class SelfTransfer(Exception):
    pass


@dataclass(frozen=True)
class ReplicationConfig:
    """Bounds and tuning for replication-factor decisions."""

    max_rf: int
    min_rf: int = 1
    accesses_per_replica: float = 2.0
    hysteresis: int = 1

    def __post_init__(self) -> None:
        if self.min_rf < 1:
            raise ValueError("min_rf must be >= 1")
        if self.min_rf > self.max_rf:
            raise ValueError("min_rf must not exceed max_rf")
        if self.accesses_per_replica <= 0:
            raise ValueError("accesses_per_replica must be > 0")
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be >= 0")


class Reason(enum.Enum):
    SCALE_UP = "ScaleUp"
    SCALE_DOWN = "ScaleDown"
    HOLD = "Hold"


@dataclass(frozen=True)
class ReplicationDecision:
    file_id: int | None
    rf_old: int
    rf_new: int
    predicted_count: float
    reason: Reason


@dataclass(frozen=True)
class CostModel:
    """Bandwidth/latency figures for block transfers.

    In-rack links must be at least as fast as cross-rack links; the defaults
    mirror a switched-rack / fast-ethernet-between-racks setup.
    """

    bw_in_rack: float = 100e6
    bw_cross_rack: float = 12.5e6
    per_transfer_latency_in_rack: float = 0.001
    per_transfer_latency_cross: float = 0.005

    def __post_init__(self) -> None:
        if not (self.bw_in_rack >= self.bw_cross_rack > 0):
            raise ValueError("expected bw_in_rack >= bw_cross_rack > 0")


def decide_rf(
    predicted_count: float,
    rf_current: int,
    cfg: ReplicationConfig,
    *,
    file_id: int | None = None,
) -> ReplicationDecision:
    """Turn a predicted access count into a replication-factor decision.

    target = clamp(ceil(predicted / accesses_per_replica), min_rf, max_rf);
    the factor moves only when |target - current| exceeds the hysteresis.
    """
    if predicted_count < 0:
        raise ValueError("predicted_count must be >= 0")
    if not (cfg.min_rf <= rf_current <= cfg.max_rf):
        raise ValueError(f"rf_current={rf_current} outside [{cfg.min_rf}, {cfg.max_rf}]")
    target = math.ceil(predicted_count / cfg.accesses_per_replica)
    target = max(cfg.min_rf, min(cfg.max_rf, target))
    rf_new = target if abs(target - rf_current) > cfg.hysteresis else rf_current
    if rf_new > rf_current:
        reason = Reason.SCALE_UP
    elif rf_new < rf_current:
        reason = Reason.SCALE_DOWN
    else:
        reason = Reason.HOLD
    return ReplicationDecision(file_id, rf_current, rf_new, predicted_count, reason)


def transfer_time(cost: CostModel, size_bytes: int, level: LocalityLevel) -> float:
    """Seconds to move ``size_bytes`` across the given locality distance."""
    if level is LocalityLevel.NODE_LOCAL:
        return 0.0
    if level is LocalityLevel.RACK_LOCAL:
        return size_bytes / cost.bw_in_rack + cost.per_transfer_latency_in_rack
    return size_bytes / cost.bw_cross_rack + cost.per_transfer_latency_cross


def update_cost(
    blocks: list[Block],
    transfer_plan: list[tuple[str, str]],
    topo: ClusterTopology,
    cost: CostModel,
) -> float:
    """Total seconds for a transfer plan, ``blocks[i]`` moved by plan ``i``.

    Additive over plan concatenation and zero exactly for the empty plan.
    """
    if len(blocks) != len(transfer_plan):
        raise ValueError("one block per planned transfer required")
    total = 0.0
    for block, (src, dst) in zip(blocks, transfer_plan):
        level = locality(topo, src, dst)
        if level is LocalityLevel.NODE_LOCAL:
            raise SelfTransfer(f"transfer {src!r} -> {dst!r} does not move data")
        total += transfer_time(cost, block.size_bytes, level)
    return total


def apply_decision(
    cluster, decision: ReplicationDecision, rng: random.Random
) -> tuple[ReplicaMap, float]:
    """Enact a decision on every block of the file, pricing the transfers.

    ``cluster`` is any object exposing ``topo``, ``cfg`` (with ``cost`` and
    ``exclude_master``), ``files``, ``blocks`` and ``replicas``; mutations go
    through the placement actions, so holder lists stay policy-shaped.
    Scale-down is metadata-only and costs nothing.
    """
    replicas: ReplicaMap = cluster.replicas
    if decision.reason is Reason.HOLD:
        return replicas, 0.0
    total_cost = 0.0
    for block_id in cluster.files[decision.file_id]:
        block = cluster.blocks[block_id]
        holders = replicas[block_id]
        if decision.reason is Reason.SCALE_UP:
            k = decision.rf_new - len(holders)
            if k > 0:
                _, plan = add_replicas(
                    cluster.topo, replicas, block, k, rng,
                    exclude_master=cluster.cfg.exclude_master,
                )
                total_cost += update_cost([block] * len(plan), plan, cluster.topo, cluster.cfg.cost)
        else:
            k = len(holders) - decision.rf_new
            if k > 0:
                remove_replicas(cluster.topo, replicas, block, k)
    return replicas, total_cost
