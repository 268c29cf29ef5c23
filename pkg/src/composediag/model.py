"""Typed model of the docker-compose subset, plus validation and dependency analysis.

The model is produced by :mod:`composediag.parser` and treated as immutable
afterwards; every operation here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CycleError

RESTART_VALUES = ("no", "always", "on-failure", "unless-stopped")

# Service-level keys the model understands, in canonical serialization order.
KNOWN_SERVICE_KEYS = (
    "image",
    "build",
    "command",
    "container_name",
    "environment",
    "ports",
    "volumes",
    "depends_on",
    "links",
    "restart",
    "networks",
)


@dataclass(frozen=True)
class BuildSpec:
    context: str
    dockerfile: str | None = None


@dataclass(frozen=True)
class PortMapping:
    container_port: int
    host_port: int | None = None
    protocol: str = "tcp"


@dataclass(frozen=True)
class VolumeMount:
    source: str
    target: str
    mode: str | None = None
    kind: str = "named"  # "named" or "bind"


@dataclass
class VolumeDecl:
    name: str
    options: dict = field(default_factory=dict)


@dataclass
class NetworkDecl:
    name: str
    options: dict = field(default_factory=dict)


@dataclass
class ServiceSpec:
    """Settings applied to one service's containers.

    ``raw_text`` keeps the pre-interpolation source text for any field whose
    value changed during variable substitution, keyed by a dotted field path
    such as ``"image"`` or ``"environment.KEY"``.  ``unknown_keys`` preserves
    unrecognized keys verbatim as re-emittable text fragments.
    """

    image: str | None = None
    build: BuildSpec | None = None
    command: str | None = None
    container_name: str | None = None
    environment: list[tuple[str, str]] = field(default_factory=list)
    ports: list[PortMapping] = field(default_factory=list)
    volumes: list[VolumeMount] = field(default_factory=list)
    depends_on: list[str] = field(default_factory=list)
    links: list[tuple[str, str | None]] = field(default_factory=list)
    restart: str | None = None
    networks: list[str] = field(default_factory=list)
    unknown_keys: dict[str, str] = field(default_factory=dict)
    raw_text: dict[str, str] = field(default_factory=dict)


@dataclass
class ComposeDescriptor:
    """Order-preserving model of one compose file.

    ``unresolved_variables`` records (field path, variable name) pairs for
    interpolations that had no binding at parse time; hand-built descriptors
    leave it empty.
    """

    version: str = ""
    services: dict[str, ServiceSpec] = field(default_factory=dict)
    volumes: dict[str, VolumeDecl] = field(default_factory=dict)
    networks: dict[str, NetworkDecl] = field(default_factory=dict)
    unresolved_variables: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    location: str

    def render(self) -> str:
        return f"[{self.code}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def render_lines(self) -> list[str]:
        lines = [f"error {f.render()}" for f in self.errors]
        lines += [f"warning {f.render()}" for f in self.warnings]
        return lines


@dataclass
class DependencyGraph:
    """Directed graph over service names; an edge s -> t means s needs t first."""

    nodes: list[str]
    edges: dict[tuple[str, str], frozenset[str]]

    def successors(self, name: str) -> list[str]:
        return [t for (s, t) in self.edges if s == name]


def dependency_graph(d: ComposeDescriptor) -> DependencyGraph:
    """Collect depends_on and links into one digraph, labeling each edge's origin."""
    origins: dict[tuple[str, str], set[str]] = {}
    order: list[tuple[str, str]] = []
    for name, svc in d.services.items():
        refs = [(t, "depends_on") for t in svc.depends_on]
        refs += [(t, "links") for t, _alias in svc.links]
        for target, origin in refs:
            if target not in d.services:
                continue  # dangling reference; validate() reports it
            key = (name, target)
            if key not in origins:
                origins[key] = set()
                order.append(key)
            origins[key].add(origin)
    return DependencyGraph(
        nodes=list(d.services),
        edges={key: frozenset(origins[key]) for key in order},
    )


def _find_cycle(graph: DependencyGraph) -> list[str] | None:
    """Return one dependency cycle as a node list, or None. Iterative DFS."""
    adjacency = {n: graph.successors(n) for n in graph.nodes}
    color = {n: 0 for n in graph.nodes}  # 0 new, 1 on stack, 2 done
    parent: dict[str, str] = {}
    for root in graph.nodes:
        if color[root]:
            continue
        stack = [(root, iter(adjacency[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(adjacency[nxt])))
                    advanced = True
                    break
                if color[nxt] == 1:
                    cycle = [node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    index = {n: i for i, n in enumerate(graph.nodes)}
                    start = min(range(len(cycle)), key=lambda i: index[cycle[i]])
                    return cycle[start:] + cycle[:start]
            if not advanced:
                color[node] = 2
                stack.pop()
    return None


def validate(d: ComposeDescriptor) -> ValidationReport:
    """Check every structural rule; findings only, never raises.

    Ordering is deterministic: findings sort by the declaration index of the
    service they concern, then by check code, then by occurrence.
    """
    index = {name: i for i, name in enumerate(d.services)}
    errors: list[tuple[int, str, Finding]] = []
    warnings: list[tuple[int, str, Finding]] = []

    for name, svc in d.services.items():
        i = index[name]
        for target in svc.depends_on:
            if target not in d.services:
                errors.append((i, "dangling-reference", Finding(
                    "dangling-reference",
                    f"depends_on target {target!r} is not a service",
                    f"services.{name}.depends_on")))
        for target, _alias in svc.links:
            if target not in d.services:
                errors.append((i, "dangling-reference", Finding(
                    "dangling-reference",
                    f"links target {target!r} is not a service",
                    f"services.{name}.links")))
        if svc.image is None and svc.build is None:
            errors.append((i, "no-image-or-build", Finding(
                "no-image-or-build",
                "service declares neither image nor build",
                f"services.{name}")))
        for mount in svc.volumes:
            if mount.kind == "named" and mount.source not in d.volumes:
                errors.append((i, "undeclared-volume", Finding(
                    "undeclared-volume",
                    f"named volume {mount.source!r} has no top-level declaration",
                    f"services.{name}.volumes")))
        for key in svc.unknown_keys:
            warnings.append((i, "unknown-key", Finding(
                "unknown-key",
                f"unrecognized key {key!r} preserved verbatim",
                f"services.{name}.{key}")))

    cycle = _find_cycle(dependency_graph(d))
    if cycle is not None:
        path = " -> ".join(cycle + cycle[:1])
        errors.append((index[cycle[0]], "dependency-cycle", Finding(
            "dependency-cycle",
            f"dependency cycle: {path}",
            f"services.{cycle[0]}")))

    for location, var in d.unresolved_variables:
        parts = location.split(".")
        i = len(d.services)
        if len(parts) >= 2 and parts[0] == "services" and parts[1] in index:
            i = index[parts[1]]
        warnings.append((i, "unresolved-variable", Finding(
            "unresolved-variable",
            f"variable {var!r} is unset; resolved to empty string",
            location)))

    errors.sort(key=lambda item: (item[0], item[1]))
    warnings.sort(key=lambda item: (item[0], item[1]))
    return ValidationReport(
        errors=[f for _, _, f in errors],
        warnings=[f for _, _, f in warnings],
    )


def topological_order(d: ComposeDescriptor) -> list[str]:
    """Startup order: every dependency before its dependents.

    Ties break by declaration order in the source file, so the result is
    stable. Raises CycleError when no order exists.
    """
    graph = dependency_graph(d)
    cycle = _find_cycle(graph)
    if cycle is not None:
        raise CycleError(cycle)

    index = {name: i for i, name in enumerate(graph.nodes)}
    pending = {n: len(graph.successors(n)) for n in graph.nodes}
    dependents: dict[str, list[str]] = {n: [] for n in graph.nodes}
    for s, t in graph.edges:
        dependents[t].append(s)

    ready = sorted((n for n, c in pending.items() if c == 0), key=index.__getitem__)
    out: list[str] = []
    while ready:
        node = ready.pop(0)
        out.append(node)
        changed = False
        for dep in dependents[node]:
            pending[dep] -= 1
            if pending[dep] == 0:
                ready.append(dep)
                changed = True
        if changed:
            ready.sort(key=index.__getitem__)
    return out
