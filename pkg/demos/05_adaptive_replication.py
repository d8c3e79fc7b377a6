"""Drive replication factors from a synthetic access trace.

Two files share the cluster: file 1 stays hot (10 accesses per epoch),
file 2 goes cold after two epochs.  At each epoch boundary the predictor
extrapolates every file's access count, the decision rule converts it into
a target factor (one replica per 2 expected accesses, hysteresis 1), and
the change is enacted and priced.  The hot file settles at rf 5; the cold
file decays to the floor once its history flattens out.
"""

from pathlib import Path

from racksim import ReplicationConfig, SimConfig, build_cluster, parse_topology, run_adaptive

topo = parse_topology((Path(__file__).parent / "topology.data").read_text())
cluster = build_cluster(topo, SimConfig(seed=99))

events = []
for epoch in range(8):
    events += [(60.0 * epoch + i + 0.25, 1) for i in range(10)]
    if epoch < 2:
        events += [(60.0 * epoch + i + 0.50, 2) for i in range(10)]
events.sort()

rep_cfg = ReplicationConfig(max_rf=7, accesses_per_replica=2.0, hysteresis=1)
decisions, epochs = run_adaptive(cluster, events, rep_cfg, epoch_seconds=60.0, initial_rf=3)

print("epoch  file  rf    predicted  action     cost(s)")
for rec in decisions:
    d = rec.decision
    print(f"{rec.epoch:5d}  {d.file_id:4d}  {d.rf_old}->{d.rf_new}  {d.predicted_count:9.1f}"
          f"  {d.reason.value:9s}  {rec.update_cost_s:7.3f}")

print("\nper-epoch read workload (tasks are block reads of the touched files):")
print("epoch  tasks  node-local  makespan(s)")
for i, res in enumerate(epochs):
    h = res.locality_histogram
    frac = h.node_local / h.total if h.total else 1.0
    print(f"{i:5d}  {res.tasks_total:5d}  {frac:10.2f}  {res.completion_seconds:11.3f}")

final = {fid: len(cluster.replicas[bids[0]]) for fid, bids in cluster.files.items()}
print(f"\nfinal replication factors: {final}")
