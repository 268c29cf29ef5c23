"""Descriptor -> deployment diagram.

Every descriptor construct maps to exactly one diagram element: a service
becomes one cluster holding one server node, depends_on becomes a directed
solid edge, links an undirected solid edge (emitted even when it parallels a
dependency), each mount a volume node plus dashed darkgreen edge, and each
used network a bare node plus dashed gray membership edges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .diagram import (
    Cluster,
    DeploymentDiagram,
    DiagNode,
    Direction,
    EdgeRole,
    NodeKind,
    edge_for_role,
)
from .errors import PreconditionError
from .model import ComposeDescriptor, validate

DEFAULT_ICONS = {
    "mysql": "mysql",
    "postgres": "postgres",
    "zookeeper": "zookeeper",
    "kafka": "kafka",
}


@dataclass(frozen=True)
class TransformOptions:
    direction: Direction = Direction.TB
    merge_volumes: bool = False
    icons_enabled: bool = False
    embed_image_labels: bool = False


@dataclass
class IconRegistry:
    """Image-name-prefix -> icon-name table; ships with the four stock entries."""

    prefixes: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ICONS))

    def lookup(self, image: str | None) -> str | None:
        if not image:
            return None
        repo = image.rsplit("/", 1)[-1]
        candidates = (image, repo.split(":", 1)[0])
        best: tuple[int, str] | None = None
        for prefix, icon in self.prefixes.items():
            if any(c.startswith(prefix) for c in candidates):
                if best is None or len(prefix) > best[0]:
                    best = (len(prefix), icon)
        return best[1] if best else None


def load_icon_registry(text: str) -> IconRegistry:
    """Parse "prefix=icon-name" lines; "#" starts a comment."""
    prefixes = dict(DEFAULT_ICONS)
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        prefix, sep, icon = line.partition("=")
        if not sep or not prefix.strip() or not icon.strip():
            raise ValueError(f"icon registry line {raw!r} is not prefix=icon-name")
        prefixes[prefix.strip()] = icon.strip()
    return IconRegistry(prefixes)


def sanitize_identifier(name: str) -> str:
    ident = re.sub(r"[^a-z0-9_]", "_", name.lower())
    if not ident:
        ident = "n"
    if ident[0].isdigit():
        ident = "s_" + ident
    return ident


class _IdAllocator:
    """Deterministic unique ids: bare name first, then _2, _3, ..."""

    def __init__(self):
        self.used: set[str] = set()

    def claim(self, base: str) -> str:
        candidate = base
        n = 1
        while candidate in self.used:
            n += 1
            candidate = f"{base}_{n}"
        self.used.add(candidate)
        return candidate


def to_diagram(
    d: ComposeDescriptor,
    opts: TransformOptions = TransformOptions(),
    icons: IconRegistry | None = None,
) -> DeploymentDiagram:
    """Build the diagram; requires a descriptor with zero validation errors."""
    report = validate(d)
    if not report.ok:
        raise PreconditionError(
            "descriptor has validation errors: "
            + "; ".join(f.render() for f in report.errors))
    registry = icons or IconRegistry()

    g = DeploymentDiagram(
        title=" ".join(d.services),
        direction=opts.direction)
    ids = _IdAllocator()

    for name, svc in d.services.items():
        ids.used.add(name)
        icon = registry.lookup(svc.image) if opts.icons_enabled else None
        label = name
        if opts.embed_image_labels and svc.image:
            label = f"{name}\n[{svc.image}]"
        if icon is not None:
            node = DiagNode(id=name, kind=NodeKind.ICON, label=label, icon=icon)
        else:
            node = DiagNode(id=name, kind=NodeKind.SERVER, label=label)
        g.nodes.append(node)
        g.clusters.append(Cluster(label=f"{name} service", member_node_ids=(name,)))

    for name, svc in d.services.items():
        for target in svc.depends_on:
            g.edges.append(edge_for_role(name, target, EdgeRole.DEPENDENCY))
    for name, svc in d.services.items():
        for target, _alias in svc.links:
            g.edges.append(edge_for_role(name, target, EdgeRole.LINK))

    merged: dict[str, str] = {}
    for name, svc in d.services.items():
        for mount in svc.volumes:
            if opts.merge_volumes and mount.kind == "named":
                node_id = merged.get(mount.source)
                if node_id is None:
                    node_id = ids.claim(f"vol_{sanitize_identifier(mount.source)}")
                    merged[mount.source] = node_id
                    g.nodes.append(DiagNode(node_id, NodeKind.VOLUME, mount.source))
            else:
                node_id = ids.claim(f"vol_{sanitize_identifier(name)}")
                g.nodes.append(DiagNode(node_id, NodeKind.VOLUME, mount.source))
            g.edges.append(edge_for_role(node_id, name, EdgeRole.MOUNT))

    # networks in declaration order, then referenced-but-undeclared in use order
    network_order = list(d.networks)
    for svc in d.services.values():
        for network in svc.networks:
            if network not in network_order:
                network_order.append(network)
    for network in network_order:
        members = [name for name, svc in d.services.items() if network in svc.networks]
        if not members:
            continue
        node_id = ids.claim(f"network_{sanitize_identifier(network)}")
        g.nodes.append(DiagNode(node_id, NodeKind.SERVER, network))
        for member in members:
            g.edges.append(edge_for_role(node_id, member, EdgeRole.NETWORK_MEMBERSHIP))

    return g
