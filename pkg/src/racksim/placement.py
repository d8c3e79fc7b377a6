"""Default block placement policy plus the replica add/remove actions.

Placement follows the classic three-copy rule: the first copy lands on the
writing node, the next two on a single remote rack, and anything beyond that
is drawn uniformly from the remaining nodes.  Degenerate topologies (a single
rack, or remote racks too small to hold two copies) degrade to "distinct
nodes anywhere" rather than failing; :func:`validate_placement` knows about
the same waivers so the two stay consistent.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .topology import (
    ClusterTopology,
    RackPath,
    eligible_hosts,
    locality,
    resolve_rack,
)

__all__ = [
    "PlacementError",
    "ReplicationFactorTooLarge",
    "WriterNotInCluster",
    "CannotRemoveLastReplica",
    "Block",
    "ReplicaMap",
    "Violation",
    "place_block",
    "validate_placement",
    "add_replicas",
    "remove_replicas",
]


class PlacementError(Exception):
    pass


class ReplicationFactorTooLarge(PlacementError):
    pass


class WriterNotInCluster(PlacementError):
    pass


class CannotRemoveLastReplica(PlacementError):
    pass


@dataclass(frozen=True)
class Block:
    """One fixed-size unit of file storage; the unit of placement."""

    block_id: int
    file_id: int
    size_bytes: int
    index_in_file: int

    def __post_init__(self) -> None:
        if self.size_bytes <= 0:
            raise ValueError("block size must be positive")
        if self.index_in_file < 0:
            raise ValueError("block index must be >= 0")


#: block_id -> ordered replica holders; index 0 is the original writer copy.
ReplicaMap = dict[int, list[str]]


@dataclass(frozen=True)
class Violation:
    """One violated placement-policy clause, named by ``code``."""

    code: str
    detail: str


def _grouped_remote(topo: ClusterTopology, pool: list[str], writer_rack: RackPath) -> dict[RackPath, list[str]]:
    groups: dict[RackPath, list[str]] = {}
    for host in pool:
        rack = resolve_rack(topo, host)
        if rack != writer_rack:
            groups.setdefault(rack, []).append(host)
    return groups


def place_block(
    topo: ClusterTopology,
    writer: str,
    rf: int,
    rng: random.Random,
    *,
    exclude_master: bool = True,
) -> list[str]:
    """Choose ``rf`` distinct hosts for a new block written by ``writer``.

    The result is deterministic given the topology, writer, rf and the rng
    state, so replaying a seed reproduces the placement bit for bit.
    """
    if rf < 1:
        raise ValueError("replication factor must be >= 1")
    eligible = eligible_hosts(topo, exclude_master)
    if writer not in eligible:
        raise WriterNotInCluster(f"writer {writer!r} is not an eligible cluster node")
    if rf > len(eligible):
        raise ReplicationFactorTooLarge(
            f"rf={rf} exceeds the {len(eligible)} eligible nodes"
        )

    result = [writer]
    writer_rack = resolve_rack(topo, writer)
    pool = sorted(h for h in eligible if h != writer)

    if rf >= 2:
        remote_need = min(rf - 1, 2)
        remote_groups = _grouped_remote(topo, pool, writer_rack)
        full_racks = sorted(
            (rack for rack, hosts in remote_groups.items() if len(hosts) >= remote_need),
            key=str,
        )
        if full_racks:
            rack = rng.choice(full_racks)
            result += rng.sample(sorted(remote_groups[rack]), remote_need)
        elif remote_groups:
            # No single remote rack is big enough; split across remote racks.
            remote_pool = sorted(h for hosts in remote_groups.values() for h in hosts)
            result += rng.sample(remote_pool, min(remote_need, len(remote_pool)))

    rest = rf - len(result)
    if rest > 0:
        remaining = sorted(set(pool) - set(result))
        result += rng.sample(remaining, rest)
    return result


def validate_placement(
    topo: ClusterTopology,
    hosts: list[str],
    rf_expected: int,
    *,
    exclude_master: bool = True,
) -> list[Violation]:
    """Check a replica list against the placement policy.

    Returns one :class:`Violation` per broken clause; an empty report means
    the placement is policy-conformant.  The rack clauses are waived exactly
    where :func:`place_block` itself must relax them (single-rack clusters,
    remote racks with fewer than two free nodes).
    """
    violations: list[Violation] = []
    if len(hosts) != rf_expected:
        violations.append(
            Violation("ReplicaCountMismatch", f"expected {rf_expected} replicas, got {len(hosts)}")
        )
    dupes = sorted({h for h in hosts if hosts.count(h) > 1})
    if dupes:
        violations.append(Violation("DuplicateHost", f"repeated hosts: {', '.join(dupes)}"))
    unknown = sorted({h for h in hosts if h not in topo})
    if unknown:
        violations.append(Violation("HostNotInCluster", f"unmapped hosts: {', '.join(unknown)}"))
    if exclude_master:
        masters = sorted({h for h in hosts if h in topo and topo.role(h).value == "master"})
        if masters:
            violations.append(Violation("IneligibleHost", f"master nodes hold replicas: {', '.join(masters)}"))
    if not hosts or unknown:
        return violations

    writer = hosts[0]
    writer_rack = resolve_rack(topo, writer)
    eligible = eligible_hosts(topo, exclude_master)
    remote = [h for h in eligible if h != writer and resolve_rack(topo, h) != writer_rack]
    remote_groups = _grouped_remote(topo, remote, writer_rack)
    any_remote_pair = any(len(hs) >= 2 for hs in remote_groups.values())

    if rf_expected >= 2 and len(hosts) >= 2 and remote:
        if resolve_rack(topo, hosts[1]) == writer_rack:
            violations.append(
                Violation("RemoteCopyOnWriterRack", f"second replica {hosts[1]!r} shares the writer's rack")
            )
    if rf_expected >= 3 and len(hosts) >= 3 and remote:
        second_rack = resolve_rack(topo, hosts[1])
        third_rack = resolve_rack(topo, hosts[2])
        if third_rack == writer_rack and len(remote) >= 2:
            violations.append(
                Violation("RemoteCopyOnWriterRack", f"third replica {hosts[2]!r} shares the writer's rack")
            )
        elif third_rack != writer_rack and second_rack != writer_rack and second_rack != third_rack:
            if any_remote_pair:
                violations.append(
                    Violation(
                        "RemoteRackSplit",
                        f"replicas 2 and 3 sit on {second_rack} and {third_rack} "
                        "although a remote rack with two free nodes exists",
                    )
                )
    return violations


def _nearest_source(topo: ClusterTopology, holders: list[str], dst: str) -> str:
    """Existing replica closest to ``dst`` by locality, host order on ties."""
    return min(holders, key=lambda h: (locality(topo, h, dst), h))


def add_replicas(
    topo: ClusterTopology,
    replica_map: ReplicaMap,
    block: Block,
    k: int,
    rng: random.Random,
    *,
    exclude_master: bool = True,
) -> tuple[list[str], list[tuple[str, str]]]:
    """Append ``k`` new replica holders for ``block``.

    New hosts are drawn uniformly from eligible nodes not already holding the
    block.  Returns the updated holder list together with the transfer plan:
    one ``(src, dst)`` per new copy, the source being the locality-nearest
    replica at the time that copy is made.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    holders = replica_map[block.block_id]
    eligible = eligible_hosts(topo, exclude_master)
    if len(holders) + k > len(eligible):
        raise ReplicationFactorTooLarge(
            f"cannot grow to {len(holders) + k} replicas with {len(eligible)} eligible nodes"
        )
    free = sorted(set(eligible) - set(holders))
    new_hosts = rng.sample(free, k)
    plan: list[tuple[str, str]] = []
    for dst in new_hosts:
        plan.append((_nearest_source(topo, holders, dst), dst))
        holders.append(dst)
    return holders, plan


def remove_replicas(
    topo: ClusterTopology,
    replica_map: ReplicaMap,
    block: Block,
    k: int,
) -> list[str]:
    """Drop ``k`` replica holders for ``block``, keeping at least one.

    Removals prefer to keep the surviving racks as diverse as possible and
    never touch the writer copy (index 0) while another choice exists.  Ties
    break on host string order, so the result is deterministic.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    holders = replica_map[block.block_id]
    if len(holders) - k < 1:
        raise CannotRemoveLastReplica(
            f"removing {k} of {len(holders)} replicas would drop below one copy"
        )
    for _ in range(k):
        candidates = holders[1:] if len(holders) > 1 else holders[:]

        def surviving_diversity(victim: str) -> int:
            return len({resolve_rack(topo, h) for h in holders if h != victim})

        victim = min(candidates, key=lambda h: (-surviving_diversity(h), h))
        holders.remove(victim)
    return holders
