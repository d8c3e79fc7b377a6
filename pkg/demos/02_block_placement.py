"""Place blocks under the default policy and watch the validator agree.

The rule of thumb: first copy on the writing node, the next two together on
one remote rack, anything further spread uniformly.  Placement is a pure
function of (topology, writer, rf, seed), so every line below reproduces
bit for bit on every run.
"""

import random
from pathlib import Path

from racksim import (
    Block,
    add_replicas,
    parse_topology,
    place_block,
    remove_replicas,
    resolve_rack,
    validate_placement,
)

topo = parse_topology((Path(__file__).parent / "topology.data").read_text())
writer = "Machine2.pc"

for rf in (1, 2, 3, 5, 7):
    hosts = place_block(topo, writer, rf, random.Random(2024))
    racks = [str(resolve_rack(topo, h)) for h in hosts]
    report = validate_placement(topo, hosts, rf)
    print(f"rf={rf}: {hosts}")
    print(f"      racks {racks}  violations={report or 'none'}")

# The validator names each broken policy clause.
bogus = ["Machine2.pc", "Machine2.pc", "Machine3.pc"]
print("\ndeliberately broken placement:", bogus)
for violation in validate_placement(topo, bogus, 3):
    print(f"  {violation.code}: {violation.detail}")

# Growing and shrinking a block's replica set.  add_replicas returns the
# transfer plan; each new copy streams from its locality-nearest source.
block = Block(block_id=0, file_id=0, size_bytes=64 << 20, index_in_file=0)
replica_map = {0: place_block(topo, writer, 3, random.Random(2024))}
print("\nstart:", replica_map[0])
hosts, plan = add_replicas(topo, replica_map, block, 2, random.Random(7))
print("after +2:", hosts)
print("transfer plan:", plan)
remove_replicas(topo, replica_map, block, 3)
print("after -3:", replica_map[0], "(writer copy always survives)")
