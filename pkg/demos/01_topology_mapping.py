"""Parse a rack mapping file and resolve hosts the way the cluster master does.

The sample cluster is 8 machines in 4 racks, one master plus seven workers.
Unknown hosts never fail: they fall back to /default/rack, and the mapping
output keeps the exact wire format (one rack path plus one trailing space
per query, no newline).
"""

from pathlib import Path

from racksim import (
    LocalityLevel,
    eligible_hosts,
    emit_mapping_output,
    locality,
    parse_topology,
    resolve_rack,
)

topo = parse_topology((Path(__file__).parent / "topology.data").read_text())

print(f"{len(topo)} nodes in {len(topo.racks)} racks")
for rack, hosts in topo.rack_groups().items():
    print(f"  {rack}: {', '.join(hosts)}")

print("\nworkers (master excluded):", ", ".join(eligible_hosts(topo)))

# Individual lookups, including the fallback for a host nobody mapped.
for host in ("Machine5.pc", "laptop.lan"):
    print(f"resolve {host} -> {resolve_rack(topo, host)}")

# The raw mapping output is what a script-based mapper would print on stdout.
queries = ["Machine1.pc", "Machine7.pc", "laptop.lan"]
print(f"\nmapping output for {queries}:")
print(repr(emit_mapping_output(topo, queries)))

# Locality distances drive both placement and scheduling decisions.
pairs = [
    ("Machine2.pc", "Machine2.pc"),
    ("Machine1.pc", "Machine2.pc"),
    ("Machine1.pc", "Machine8.pc"),
]
print("\nlocality distances:")
for a, b in pairs:
    level = locality(topo, a, b)
    print(f"  {a} <-> {b}: {level.name} (distance {int(level)})")
assert locality(topo, "Machine3.pc", "Machine4.pc") is LocalityLevel.RACK_LOCAL
