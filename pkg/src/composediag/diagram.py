"""Graph IR for deployment diagrams.

The heart of the unambiguity claim is the role <-> rendering table below:
every edge role maps to exactly one (directionality, style, color) rendering
and every legal rendering maps back to exactly one role. Anything outside
the table is refused, never guessed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import AmbiguityError


class Direction(str, Enum):
    TB = "TB"
    LR = "LR"


class NodeKind(str, Enum):
    SERVER = "server"
    VOLUME = "volume"
    ICON = "icon"


class Directionality(str, Enum):
    DIRECTED = "directed"
    UNDIRECTED = "undirected"
    BIDIRECTED = "bidirected"


class EdgeStyle(str, Enum):
    SOLID = "solid"
    DASHED = "dashed"


class EdgeRole(str, Enum):
    DEPENDENCY = "dependency"
    LINK = "link"
    MOUNT = "mount"
    NETWORK_MEMBERSHIP = "network_membership"


_ROLE_TO_RENDERING: dict[EdgeRole, tuple[Directionality, EdgeStyle, str | None]] = {
    EdgeRole.DEPENDENCY: (Directionality.DIRECTED, EdgeStyle.SOLID, None),
    EdgeRole.LINK: (Directionality.UNDIRECTED, EdgeStyle.SOLID, None),
    EdgeRole.MOUNT: (Directionality.BIDIRECTED, EdgeStyle.DASHED, "darkgreen"),
    EdgeRole.NETWORK_MEMBERSHIP: (Directionality.UNDIRECTED, EdgeStyle.DASHED, "gray"),
}

_RENDERING_TO_ROLE = {rendering: role for role, rendering in _ROLE_TO_RENDERING.items()}


def rendering_of_role(role: EdgeRole) -> tuple[Directionality, EdgeStyle, str | None]:
    return _ROLE_TO_RENDERING[role]


def role_of_rendering(
    directionality: Directionality,
    style: EdgeStyle,
    color: str | None,
) -> EdgeRole:
    """Invert the style table; raises AmbiguityError off the table."""
    role = _RENDERING_TO_ROLE.get((directionality, style, color))
    if role is None:
        raise AmbiguityError(
            f"no role renders as ({directionality.value}, {style.value}, {color})")
    return role


@dataclass(frozen=True)
class DiagNode:
    id: str
    kind: NodeKind
    label: str
    icon: str | None = None


@dataclass(frozen=True)
class Cluster:
    label: str
    member_node_ids: tuple[str, ...]


@dataclass(frozen=True)
class DiagEdge:
    from_id: str
    to_id: str
    directionality: Directionality
    style: EdgeStyle
    color: str | None
    role: EdgeRole


def edge_for_role(from_id: str, to_id: str, role: EdgeRole) -> DiagEdge:
    """The only way edges are built: rendering always agrees with role."""
    directionality, style, color = rendering_of_role(role)
    return DiagEdge(from_id, to_id, directionality, style, color, role)


@dataclass
class DeploymentDiagram:
    title: str = ""
    direction: Direction = Direction.TB
    clusters: list[Cluster] = field(default_factory=list)
    nodes: list[DiagNode] = field(default_factory=list)
    edges: list[DiagEdge] = field(default_factory=list)

    def node_by_id(self, node_id: str) -> DiagNode | None:
        for node in self.nodes:
            if node.id == node_id:
                return node
        return None


def check_wellformed(g: DeploymentDiagram) -> list[str]:
    """All structural violations, each naming the offending element. Total."""
    violations: list[str] = []
    ids: set[str] = set()
    for node in g.nodes:
        if not node.id:
            violations.append("node with empty id")
        if node.id in ids:
            violations.append(f"duplicate node id {node.id!r}")
        ids.add(node.id)
        if node.kind is NodeKind.ICON and not node.icon:
            violations.append(f"icon node {node.id!r} has no icon name")
        if node.kind is not NodeKind.ICON and node.icon:
            violations.append(f"node {node.id!r} carries an icon but is not icon-kind")

    members_seen: set[str] = set()
    for cluster in g.clusters:
        if not cluster.label:
            violations.append("cluster with empty label")
        for member in cluster.member_node_ids:
            if member not in ids:
                violations.append(
                    f"cluster {cluster.label!r} member {member!r} is not a node")
            if member in members_seen:
                violations.append(f"node {member!r} belongs to more than one cluster")
            members_seen.add(member)

    for edge in g.edges:
        for endpoint in (edge.from_id, edge.to_id):
            if endpoint not in ids:
                violations.append(f"edge endpoint {endpoint!r} is not a node")
        expected = rendering_of_role(edge.role)
        if (edge.directionality, edge.style, edge.color) != expected:
            violations.append(
                f"edge {edge.from_id!r} -> {edge.to_id!r} renders as "
                f"({edge.directionality.value}, {edge.style.value}, {edge.color}) "
                f"which does not belong to role {edge.role.value}")
    return violations
