import pytest
from hypothesis import settings

from racksim import parse_topology

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

# Classic 8-node, 4-rack sample cluster: one master, seven workers, two nodes
# per rack.  The first five lines are tab-separated, the last three use
# spaces, and there is a blank line in the middle; the parser must not care.
TOPOLOGY_8_NODES = (
    "(master)Machine1.pc\t/dc1/rack1\n"
    "(slave)Machine2.pc\t/dc1/rack1\n"
    "(slave)Machine3.pc\t/dc2/rack2\n"
    "(slave)Machine4.pc\t/dc2/rack2\n"
    "(slave)Machine5.pc\t/dc3/rack3\n"
    "\n"
    "(slave)Machine6.pc /dc3/rack3\n"
    "(slave)Machine7.pc /dc4/rack4\n"
    "(slave)Machine8.pc /dc4/rack4\n"
)

SLAVES = tuple(f"Machine{i}.pc" for i in range(2, 9))


@pytest.fixture
def topo8():
    return parse_topology(TOPOLOGY_8_NODES)
