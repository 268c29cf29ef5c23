"""Diagram IR -> compose descriptor.

The diagram provably cannot carry environments, ports, commands, restart
policies or mount targets, so the generated descriptor fills deterministic
placeholders and reports every one of them in a LossReport instead of
pretending the information survived.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagram import DeploymentDiagram, DiagNode, EdgeRole, NodeKind, check_wellformed
from .errors import PreconditionError, ShapeError
from .forward import sanitize_identifier
from .model import (
    ComposeDescriptor,
    NetworkDecl,
    ServiceSpec,
    VolumeDecl,
    VolumeMount,
)

_CLUSTER_SUFFIX = " service"


@dataclass(frozen=True)
class LossEntry:
    kind: str
    subject: str
    detail: str

    def render(self) -> str:
        return f"[{self.kind}] {self.subject}: {self.detail}"


@dataclass
class LossReport:
    entries: list[LossEntry] = field(default_factory=list)

    def render_lines(self) -> list[str]:
        return [entry.render() for entry in self.entries]


def _service_image(node: DiagNode, name: str, loss: LossReport) -> str:
    lines = node.label.split("\n")
    if len(lines) > 1 and lines[1].startswith("[") and lines[1].endswith("]"):
        return lines[1][1:-1]
    loss.entries.append(LossEntry(
        "placeholder-image", f"services.{name}",
        f"diagram carries no image; using {name}:latest"))
    return f"{name}:latest"


def to_descriptor(g: DeploymentDiagram) -> tuple[ComposeDescriptor, LossReport]:
    """Rebuild a valid descriptor from a diagram in the forward transform's shape."""
    violations = check_wellformed(g)
    if violations:
        raise PreconditionError("diagram is not wellformed: " + "; ".join(violations))

    loss = LossReport()
    d = ComposeDescriptor(version="3.8")
    by_id = {node.id: node for node in g.nodes}
    service_of_node: dict[str, str] = {}

    for cluster in g.clusters:
        if not cluster.label.endswith(_CLUSTER_SUFFIX):
            raise ShapeError(
                f"cluster {cluster.label!r} does not end in {_CLUSTER_SUFFIX!r}")
        servers = [by_id[m] for m in cluster.member_node_ids
                   if by_id[m].kind in (NodeKind.SERVER, NodeKind.ICON)]
        if len(servers) != 1 or len(cluster.member_node_ids) != 1:
            raise ShapeError(
                f"cluster {cluster.label!r} must hold exactly one server node, "
                f"found {len(cluster.member_node_ids)}")
        node = servers[0]
        name = node.label.split("\n")[0]
        if name in d.services:
            raise ShapeError(f"two clusters yield the same service name {name!r}")
        spec = ServiceSpec(image=_service_image(node, name, loss))
        d.services[name] = spec
        service_of_node[node.id] = name

    for edge in g.edges:
        from_node, to_node = by_id[edge.from_id], by_id[edge.to_id]
        if edge.role is EdgeRole.DEPENDENCY:
            source = service_of_node.get(from_node.id)
            target = service_of_node.get(to_node.id)
            if source is None or target is None:
                raise ShapeError(
                    f"dependency edge {from_node.id!r} -> {to_node.id!r} must "
                    "connect two service nodes")
            d.services[source].depends_on.append(target)
        elif edge.role is EdgeRole.LINK:
            owner = service_of_node.get(from_node.id)
            other = service_of_node.get(to_node.id)
            if owner is None or other is None:
                raise ShapeError(
                    f"link edge {from_node.id!r} - {to_node.id!r} must "
                    "connect two service nodes")
            # the rendering is symmetric, but the script's left operand is the
            # declaring service; assigning ownership there keeps the dependency
            # graph acyclic whenever the source descriptor's graph was
            d.services[owner].links.append((other, None))
        elif edge.role is EdgeRole.MOUNT:
            _apply_mount(d, from_node, to_node, service_of_node, loss)
        else:  # network membership
            _apply_membership(d, from_node, to_node, service_of_node)

    for name in d.services:
        loss.entries.append(LossEntry(
            "uncarried-fields", f"services.{name}",
            "environment, ports, command and restart are not representable "
            "in a deployment diagram"))
    mounted = _mounted_ids(g)
    for node in g.nodes:
        if node.kind is NodeKind.VOLUME and node.id not in mounted:
            loss.entries.append(LossEntry(
                "orphan-volume", node.id,
                f"volume node {node.label!r} has no mount edge; dropped"))
    return d, loss


def _mounted_ids(g: DeploymentDiagram) -> set[str]:
    mounted: set[str] = set()
    for edge in g.edges:
        if edge.role is EdgeRole.MOUNT:
            mounted.add(edge.from_id)
            mounted.add(edge.to_id)
    return mounted


def _apply_mount(d: ComposeDescriptor, from_node: DiagNode, to_node: DiagNode,
                 service_of_node: dict[str, str], loss: LossReport) -> None:
    volume, server = from_node, to_node
    if volume.kind is not NodeKind.VOLUME:
        volume, server = server, volume
    service = service_of_node.get(server.id)
    if volume.kind is not NodeKind.VOLUME or service is None:
        raise ShapeError(
            f"mount edge {from_node.id!r} - {to_node.id!r} must connect a "
            "volume node to a service node")
    source = volume.label
    if source.startswith("/"):
        target = source
        kind = "bind"
    else:
        target = f"/{sanitize_identifier(source)}/data"
        kind = "bind" if source.startswith(".") or "/" in source else "named"
        loss.entries.append(LossEntry(
            "placeholder-target", f"services.{service}.volumes",
            f"diagram carries no mount target for {source!r}; using {target}"))
    d.services[service].volumes.append(
        VolumeMount(source=source, target=target, mode=None, kind=kind))
    if kind == "named" and source not in d.volumes:
        d.volumes[source] = VolumeDecl(source)


def _apply_membership(d: ComposeDescriptor, from_node: DiagNode, to_node: DiagNode,
                      service_of_node: dict[str, str]) -> None:
    network, server = from_node, to_node
    if network.id in service_of_node:
        network, server = server, network
    service = service_of_node.get(server.id)
    if (service is None or network.id in service_of_node
            or network.kind is NodeKind.VOLUME):
        raise ShapeError(
            f"network edge {from_node.id!r} - {to_node.id!r} must connect a "
            "network node to a service node")
    name = network.label
    d.services[service].networks.append(name)
    if name not in d.networks:
        d.networks[name] = NetworkDecl(name)
