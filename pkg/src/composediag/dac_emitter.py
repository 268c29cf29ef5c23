"""Diagram IR -> DaC script text and DOT text.

The DaC script is an interchange format, never executed: its grammar mirrors
the style of the diagrams library but is fixed here (see README). Output is
byte-deterministic so equal diagrams always serialize identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagram import (
    DeploymentDiagram,
    DiagNode,
    Direction,
    EdgeRole,
    NodeKind,
    check_wellformed,
)
from .errors import PreconditionError
from .forward import sanitize_identifier

PREAMBLE = (
    "from diagrams import Cluster, Diagram as DaC, Edge",
    "from diagrams.k8s.storage import Volume",
    "from diagrams.onprem.compute import Server",
)

_SCRIPT_FILENAME = "diagram"


def escape_text(text: str) -> str:
    return (text.replace("\\", "\\\\").replace("\"", "\\\"")
            .replace("\n", "\\n").replace("\t", "\\t"))


def unescape_text(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"n": "\n", "t": "\t", "\\": "\\", "\"": "\""}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class ClusterOpen:
    label: str


@dataclass(frozen=True)
class NodeDecl:
    var: str
    kind: NodeKind
    label: str
    icon: str | None = None
    in_cluster: bool = False


@dataclass(frozen=True)
class EdgeStmt:
    lhs_var: str
    operator: str  # ">>", "-" or "edge" (the >> Edge(...) << form)
    rhs_var: str
    color: str | None = None


@dataclass
class DacScript:
    """Structured form of the emitted script; render() is the only writer."""

    title: str
    direction: Direction
    header_lines: tuple[str, ...] = PREAMBLE
    statements: list[ClusterOpen | NodeDecl | EdgeStmt] = field(default_factory=list)

    def render(self) -> str:
        lines = list(self.header_lines)
        lines.append("")
        lines.append(
            f'with DaC("{escape_text(self.title)}", filename="{_SCRIPT_FILENAME}", '
            f'show=False, direction="{self.direction.value}"):')
        for stmt in self.statements:
            lines.append(_render_statement(stmt))
        return "\n".join(lines) + "\n"


def _render_statement(stmt) -> str:
    if isinstance(stmt, ClusterOpen):
        return f'    with Cluster("{escape_text(stmt.label)}"):'
    if isinstance(stmt, NodeDecl):
        indent = "        " if stmt.in_cluster else "    "
        if stmt.kind is NodeKind.VOLUME:
            return f'{indent}{stmt.var} = Volume("{escape_text(stmt.label)}")'
        if stmt.kind is NodeKind.ICON:
            return (f'{indent}{stmt.var} = Icon("{escape_text(stmt.label)}", '
                    f'icon="{escape_text(stmt.icon or "")}")')
        return f'{indent}{stmt.var} = Server("{escape_text(stmt.label)}")'
    if isinstance(stmt, EdgeStmt):
        if stmt.operator == ">>":
            return f"    {stmt.lhs_var} >> {stmt.rhs_var}"
        if stmt.operator == "-":
            return f"    {stmt.lhs_var} - {stmt.rhs_var}"
        return (f'    {stmt.lhs_var} >> Edge(color="{stmt.color}", '
                f'style="dashed") << {stmt.rhs_var}')
    raise TypeError(f"unknown statement {stmt!r}")


def script_of_diagram(g: DeploymentDiagram) -> DacScript:
    violations = check_wellformed(g)
    if violations:
        raise PreconditionError("diagram is not wellformed: " + "; ".join(violations))

    script = DacScript(title=g.title, direction=g.direction)
    by_id = {node.id: node for node in g.nodes}
    vars_by_id: dict[str, str] = {}
    used_vars: set[str] = set()

    def allocate(node: DiagNode) -> str:
        base = sanitize_identifier(node.id)
        var = base
        n = 1
        while var in used_vars:
            n += 1
            var = f"{base}_{n}"
        used_vars.add(var)
        vars_by_id[node.id] = var
        return var

    def declare(node: DiagNode, in_cluster: bool) -> None:
        script.statements.append(NodeDecl(
            var=allocate(node), kind=node.kind, label=node.label,
            icon=node.icon, in_cluster=in_cluster))

    for cluster in g.clusters:
        script.statements.append(ClusterOpen(cluster.label))
        for member in cluster.member_node_ids:
            declare(by_id[member], in_cluster=True)

    for edge in g.edges:
        for endpoint in (edge.from_id, edge.to_id):
            if endpoint not in vars_by_id:
                declare(by_id[endpoint], in_cluster=False)
        lhs, rhs = vars_by_id[edge.from_id], vars_by_id[edge.to_id]
        if edge.role is EdgeRole.DEPENDENCY:
            script.statements.append(EdgeStmt(lhs, ">>", rhs))
        elif edge.role is EdgeRole.LINK:
            script.statements.append(EdgeStmt(lhs, "-", rhs))
        else:
            script.statements.append(EdgeStmt(lhs, "edge", rhs, color=edge.color))

    for node in g.nodes:
        if node.id not in vars_by_id:
            declare(node, in_cluster=False)

    return script


def emit_dac(g: DeploymentDiagram) -> str:
    """Wellformed diagram -> deterministic DaC script text."""
    return script_of_diagram(g).render()


# -- DOT ------------------------------------------------------------------------

_EDGE_ATTRS = {
    EdgeRole.DEPENDENCY: "",
    EdgeRole.LINK: " [dir=none]",
    EdgeRole.MOUNT: " [dir=both, style=dashed, color=darkgreen]",
    EdgeRole.NETWORK_MEMBERSHIP: " [dir=none, style=dashed, color=gray]",
}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\"", "\\\"").replace("\n", "\\n")


def _dot_node(node: DiagNode) -> str:
    attrs = [
        "shape=cylinder" if node.kind is NodeKind.VOLUME else "shape=box",
        f'label="{_dot_escape(node.label)}"',
    ]
    if node.kind is NodeKind.ICON:
        attrs.append(f'tooltip="icon:{_dot_escape(node.icon or "")}"')
    return f'"{_dot_escape(node.id)}" [{", ".join(attrs)}];'


def emit_dot(g: DeploymentDiagram) -> str:
    """Wellformed diagram -> DOT digraph with the same style table."""
    violations = check_wellformed(g)
    if violations:
        raise PreconditionError("diagram is not wellformed: " + "; ".join(violations))

    lines = ["digraph {"]
    lines.append(f"    rankdir={g.direction.value};")
    lines.append(f'    label="{_dot_escape(g.title)}";')
    clustered: set[str] = set()
    by_id = {node.id: node for node in g.nodes}
    for i, cluster in enumerate(g.clusters):
        lines.append(f"    subgraph cluster_{i} {{")
        lines.append(f'        label="{_dot_escape(cluster.label)}";')
        for member in cluster.member_node_ids:
            clustered.add(member)
            lines.append("        " + _dot_node(by_id[member]))
        lines.append("    }")
    for node in g.nodes:
        if node.id not in clustered:
            lines.append("    " + _dot_node(node))
    for edge in g.edges:
        lines.append(
            f'    "{_dot_escape(edge.from_id)}" -> "{_dot_escape(edge.to_id)}"'
            f"{_EDGE_ATTRS[edge.role]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
