"""Rack-aware cluster topology and the two-column mapping-file dialect.

The on-disk format is one ``node rack-path`` pair per line::

    (master)Machine1.pc	/dc1/rack1
    (slave)Machine2.pc	/dc1/rack1

The node token may carry a parenthesized role prefix glued to the host name.
Tabs and runs of spaces are interchangeable field separators (shell word
splitting treats them the same way), blank lines and ``#`` comments are
skipped.  Rack ids are hierarchical path names of unrestricted depth; rack
equality is whole-path equality.  Hosts absent from the mapping resolve to
the distinguished fallback rack ``/default/rack``.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable
from dataclasses import dataclass, field

__all__ = [
    "TopologyError",
    "MalformedLine",
    "InvalidRackPath",
    "DuplicateNode",
    "Role",
    "LocalityLevel",
    "NodeName",
    "RackPath",
    "DEFAULT_RACK",
    "ClusterTopology",
    "parse_topology",
    "format_topology",
    "resolve_rack",
    "emit_mapping_output",
    "locality",
    "eligible_hosts",
]


class TopologyError(ValueError):
    """Base error for mapping-file problems; knows the offending line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MalformedLine(TopologyError):
    pass


class InvalidRackPath(TopologyError):
    pass


class DuplicateNode(TopologyError):
    pass


class Role(enum.Enum):
    MASTER = "master"
    SLAVE = "slave"
    UNSPECIFIED = "unspecified"


class LocalityLevel(enum.IntEnum):
    """Distance between two hosts, ordered best to worst."""

    NODE_LOCAL = 0
    RACK_LOCAL = 1
    OFF_RACK = 2


_ROLE_PREFIX = re.compile(r"^\((master|slave)\)(.+)$")


@dataclass(frozen=True)
class NodeName:
    """A cluster host with an optional declared role."""

    host: str
    role: Role = Role.UNSPECIFIED

    def __post_init__(self) -> None:
        if not self.host or re.search(r"\s", self.host):
            raise ValueError(f"host must be non-empty without whitespace, got {self.host!r}")

    def __str__(self) -> str:
        if self.role is Role.UNSPECIFIED:
            return self.host
        return f"({self.role.value}){self.host}"


@dataclass(frozen=True)
class RackPath:
    """Hierarchical rack id, e.g. ``/dc1/rack1``."""

    components: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("rack path needs at least one segment")
        for seg in self.components:
            if not seg or "/" in seg or re.search(r"\s", seg):
                raise ValueError(f"invalid rack path segment {seg!r}")

    @classmethod
    def parse(cls, text: str) -> "RackPath":
        if not text.startswith("/"):
            raise ValueError(f"rack path must start with '/', got {text!r}")
        segments = text[1:].split("/")
        if any(not seg for seg in segments):
            raise ValueError(f"rack path has an empty segment: {text!r}")
        return cls(tuple(segments))

    def __str__(self) -> str:
        return "/" + "/".join(self.components)


#: Fallback rack returned for every host absent from the mapping.
DEFAULT_RACK = RackPath(("default", "rack"))


@dataclass(frozen=True)
class ClusterTopology:
    """Immutable host-to-rack mapping with insertion order preserved.

    Safe to share read-only across concurrent simulation runs.
    """

    entries: tuple[tuple[NodeName, RackPath], ...]
    _by_host: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[str, tuple[NodeName, RackPath]] = {}
        for node, rack in self.entries:
            if node.host in index:
                raise DuplicateNode(f"duplicate node {node.host!r}")
            index[node.host] = (node, rack)
        object.__setattr__(self, "_by_host", index)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, host: str) -> bool:
        return host in self._by_host

    @property
    def hosts(self) -> tuple[str, ...]:
        return tuple(node.host for node, _ in self.entries)

    @property
    def racks(self) -> tuple[RackPath, ...]:
        """Distinct racks in first-appearance order."""
        seen: dict[RackPath, None] = {}
        for _, rack in self.entries:
            seen.setdefault(rack)
        return tuple(seen)

    def role(self, host: str) -> Role:
        return self._by_host[host][0].role

    def rack_groups(self) -> dict[RackPath, tuple[str, ...]]:
        """Rack to member hosts, both in insertion order."""
        groups: dict[RackPath, list[str]] = {}
        for node, rack in self.entries:
            groups.setdefault(rack, []).append(node.host)
        return {rack: tuple(hosts) for rack, hosts in groups.items()}


def parse_topology(text: str) -> ClusterTopology:
    """Parse mapping-file text into a :class:`ClusterTopology`.

    Raises :class:`MalformedLine` when a line does not split into exactly two
    fields, :class:`InvalidRackPath` for a bad rack id and
    :class:`DuplicateNode` when a host appears twice.  Error messages name
    the offending line number.
    """
    entries: list[tuple[NodeName, RackPath]] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise MalformedLine(f"expected 2 fields, got {len(tokens)}", line_no)
        node_token, rack_token = tokens
        match = _ROLE_PREFIX.match(node_token)
        if match:
            node = NodeName(match.group(2), Role(match.group(1)))
        else:
            node = NodeName(node_token)
        try:
            rack = RackPath.parse(rack_token)
        except ValueError as exc:
            raise InvalidRackPath(str(exc), line_no) from None
        if node.host in seen:
            raise DuplicateNode(f"duplicate node {node.host!r}", line_no)
        seen.add(node.host)
        entries.append((node, rack))
    return ClusterTopology(tuple(entries))


def format_topology(topo: ClusterTopology) -> str:
    """Serialize back to the two-column format (round-trips with parse)."""
    return "".join(f"{node}\t{rack}\n" for node, rack in topo.entries)


def resolve_rack(topo: ClusterTopology, host: str) -> RackPath:
    """Rack of ``host``, or ``/default/rack`` when the host is unmapped.

    Never fails; the fallback is the contract.
    """
    entry = topo._by_host.get(host)
    return entry[1] if entry is not None else DEFAULT_RACK


def emit_mapping_output(topo: ClusterTopology, hosts: Iterable[str]) -> str:
    """Mapping output for a list of hosts, one rack path plus one trailing
    space per argument, no newline.  Byte-exact mapping-script contract."""
    return "".join(f"{resolve_rack(topo, host)} " for host in hosts)


def locality(topo: ClusterTopology, a: str, b: str) -> LocalityLevel:
    """Locality between two hosts; unmapped hosts resolve via the fallback."""
    if a == b:
        return LocalityLevel.NODE_LOCAL
    if resolve_rack(topo, a) == resolve_rack(topo, b):
        return LocalityLevel.RACK_LOCAL
    return LocalityLevel.OFF_RACK


def eligible_hosts(topo: ClusterTopology, exclude_master: bool = True) -> tuple[str, ...]:
    """Hosts that may store blocks and run tasks.

    Master nodes are excluded by default; they coordinate rather than
    compute.  Hosts with no declared role count as workers.
    """
    return tuple(
        node.host
        for node, _ in topo.entries
        if not (exclude_master and node.role is Role.MASTER)
    )
