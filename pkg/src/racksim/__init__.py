"""racksim: deterministic rack-aware cluster simulator with adaptive replication.

The package models an HDFS-style cluster at desk scale: a rack topology
parsed from the classic two-column mapping file, the default three-copy
block placement policy, next-access prediction by polynomial interpolation
of access histories, replication-factor decisions priced by a locality cost
model, and a greedy locality-aware map-phase scheduler tying it together.
"""

from .topology import (
    ClusterTopology,
    DEFAULT_RACK,
    LocalityLevel,
    NodeName,
    RackPath,
    Role,
    eligible_hosts,
    emit_mapping_output,
    format_topology,
    locality,
    parse_topology,
    resolve_rack,
)
from .placement import (
    Block,
    ReplicaMap,
    Violation,
    add_replicas,
    place_block,
    remove_replicas,
    validate_placement,
)
from .prediction import (
    AccessHistory,
    AccessSample,
    PredictedAccess,
    average_interval,
    lagrange_eval,
    predict_next,
)
from .replication import (
    CostModel,
    Reason,
    ReplicationConfig,
    ReplicationDecision,
    apply_decision,
    decide_rf,
    transfer_time,
    update_cost,
)
from .sim import (
    Cluster,
    ComputeHeavyJob,
    DataHeavyJob,
    DecisionRecord,
    LocalityCounts,
    SimConfig,
    SimResult,
    SweepResult,
    SweepRow,
    build_cluster,
    ingest_file,
    run_adaptive,
    run_sweep,
    schedule_and_run,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # topology
    "ClusterTopology", "DEFAULT_RACK", "LocalityLevel", "NodeName", "RackPath",
    "Role", "eligible_hosts", "emit_mapping_output", "format_topology",
    "locality", "parse_topology", "resolve_rack",
    # placement
    "Block", "ReplicaMap", "Violation", "add_replicas", "place_block",
    "remove_replicas", "validate_placement",
    # prediction
    "AccessHistory", "AccessSample", "PredictedAccess", "average_interval",
    "lagrange_eval", "predict_next",
    # replication
    "CostModel", "Reason", "ReplicationConfig", "ReplicationDecision",
    "apply_decision", "decide_rf", "transfer_time", "update_cost",
    # sim
    "Cluster", "ComputeHeavyJob", "DataHeavyJob", "DecisionRecord",
    "LocalityCounts", "SimConfig", "SimResult", "SweepResult", "SweepRow",
    "build_cluster", "ingest_file", "run_adaptive", "run_sweep",
    "schedule_and_run",
]
