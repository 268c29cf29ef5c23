"""DaC script text -> diagram IR.

Single-pass, line oriented, indentation significant (4 spaces per level,
tabs rejected). Anything outside the emitted grammar is an error carrying
line and column; edge attributes outside the role table raise
UnknownConstructError because such a script has no unique interpretation.
"""

from __future__ import annotations

import re

from .dac_emitter import PREAMBLE, unescape_text
from .diagram import (
    Cluster,
    DeploymentDiagram,
    DiagEdge,
    DiagNode,
    Direction,
    Directionality,
    EdgeStyle,
    NodeKind,
    check_wellformed,
    role_of_rendering,
)
from .errors import AmbiguityError, DacSyntaxError, SourceLocation, UnknownConstructError

_STR = r'((?:[^"\\]|\\.)*)'
_IDENT = r"([A-Za-z_][A-Za-z0-9_]*)"

_RE_WITH = re.compile(
    rf'^with DaC\("{_STR}", filename="{_STR}", show=False, direction="(TB|LR)"\):$')
_RE_CLUSTER = re.compile(rf'^with Cluster\("{_STR}"\):$')
_RE_SERVER = re.compile(rf'^{_IDENT} = Server\("{_STR}"\)$')
_RE_VOLUME = re.compile(rf'^{_IDENT} = Volume\("{_STR}"\)$')
_RE_ICON = re.compile(rf'^{_IDENT} = Icon\("{_STR}", icon="{_STR}"\)$')
_RE_DEP = re.compile(rf"^{_IDENT} >> {_IDENT}$")
_RE_LINK = re.compile(rf"^{_IDENT} - {_IDENT}$")
_RE_EDGE = re.compile(rf"^{_IDENT} >> Edge\((.*)\) << {_IDENT}$")
_RE_ATTR = re.compile(rf'^(\w+)="{_STR}"$')


class _DacParser:
    def __init__(self, text: str, path: str | None):
        self.lines = text.split("\n")
        self.path = path
        self.g = DeploymentDiagram()
        self.vars: dict[str, str] = {}  # variable -> node id
        self.node_ids: set[str] = set()
        self.cluster: list[str] | None = None  # member ids of the open cluster
        self.cluster_label = ""

    def loc(self, line_no: int, column: int = 1) -> SourceLocation:
        return SourceLocation(line_no, column, self.path)

    def fail(self, message: str, line_no: int, column: int = 1) -> DacSyntaxError:
        return DacSyntaxError(message, self.loc(line_no, column))

    def parse(self) -> DeploymentDiagram:
        body: list[tuple[int, int, str]] = []  # (line_no, indent, text)
        preamble: list[tuple[int, str]] = []
        with_line = None
        for i, raw in enumerate(self.lines, start=1):
            line = raw.rstrip()
            if not line.strip():
                continue
            if "\t" in line[: len(line) - len(line.lstrip())]:
                raise self.fail("tab in indentation", i)
            indent = len(line) - len(line.lstrip(" "))
            if indent == 0:
                if len(preamble) < len(PREAMBLE):
                    preamble.append((i, line))
                elif with_line is None:
                    with_line = (i, line)
                else:
                    raise self.fail("unexpected content after diagram block", i)
            else:
                if with_line is None:
                    raise self.fail("indented line before the diagram block", i,
                                    indent + 1)
                body.append((i, indent, line.lstrip(" ")))

        for expected, got in zip(PREAMBLE, preamble):
            if got[1] != expected:
                raise self.fail(f"expected preamble line {expected!r}", got[0])
        if len(preamble) < len(PREAMBLE):
            raise self.fail("incomplete preamble", len(self.lines))
        if with_line is None:
            raise self.fail("missing 'with DaC(...)' line", len(self.lines))

        match = _RE_WITH.match(with_line[1])
        if not match:
            raise self.fail("malformed 'with DaC(...)' line", with_line[0])
        self.g.title = unescape_text(match.group(1))
        self.g.direction = Direction(match.group(3))

        for line_no, indent, text in body:
            if indent == 4:
                self.close_cluster(line_no)
                self.statement(text, line_no)
            elif indent == 8:
                if self.cluster is None:
                    raise self.fail("8-space indent outside a cluster block", line_no, 9)
                self.cluster_decl(text, line_no)
            else:
                raise self.fail(f"indentation must be 4 or 8 spaces, got {indent}",
                                line_no, indent + 1)
        self.close_cluster(len(self.lines))

        violations = check_wellformed(self.g)
        if violations:
            raise self.fail("script yields a malformed diagram: "
                            + "; ".join(violations), len(self.lines))
        return self.g

    def close_cluster(self, line_no: int) -> None:
        if self.cluster is None:
            return
        if not self.cluster:
            raise self.fail(
                f"cluster {self.cluster_label!r} has no node declaration", line_no)
        self.g.clusters.append(
            Cluster(label=self.cluster_label, member_node_ids=tuple(self.cluster)))
        self.cluster = None

    def statement(self, text: str, line_no: int) -> None:
        match = _RE_CLUSTER.match(text)
        if match:
            self.cluster_label = unescape_text(match.group(1))
            self.cluster = []
            return
        match = _RE_VOLUME.match(text)
        if match:
            self.declare(match.group(1), NodeKind.VOLUME,
                         unescape_text(match.group(2)), None, line_no)
            return
        match = _RE_SERVER.match(text)
        if match:
            self.declare(match.group(1), NodeKind.SERVER,
                         unescape_text(match.group(2)), None, line_no)
            return
        match = _RE_ICON.match(text)
        if match:
            self.declare(match.group(1), NodeKind.ICON, unescape_text(match.group(2)),
                         unescape_text(match.group(3)), line_no)
            return
        match = _RE_DEP.match(text)
        if match:
            self.edge(match.group(1), match.group(2),
                      Directionality.DIRECTED, EdgeStyle.SOLID, None, line_no, text)
            return
        match = _RE_LINK.match(text)
        if match:
            self.edge(match.group(1), match.group(2),
                      Directionality.UNDIRECTED, EdgeStyle.SOLID, None, line_no, text)
            return
        match = _RE_EDGE.match(text)
        if match:
            style, color = self.edge_attrs(match.group(2), line_no)
            self.attributed_edge(match.group(1), match.group(3), style, color,
                                 line_no, text)
            return
        raise self.fail(f"unrecognized statement {text!r}", line_no, 5)

    def cluster_decl(self, text: str, line_no: int) -> None:
        for regex, kind in ((_RE_ICON, NodeKind.ICON), (_RE_VOLUME, NodeKind.VOLUME),
                            (_RE_SERVER, NodeKind.SERVER)):
            match = regex.match(text)
            if not match:
                continue
            label = unescape_text(match.group(2))
            icon = unescape_text(match.group(3)) if kind is NodeKind.ICON else None
            # clustered service nodes take their id from the label's first
            # line, so service names that are not valid identifiers survive a
            # round trip; volume nodes are always variable-named
            if kind is NodeKind.VOLUME:
                node_id = match.group(1)
            else:
                node_id = label.split("\n")[0]
            self.declare(match.group(1), kind, label, icon, line_no, node_id=node_id)
            assert self.cluster is not None
            self.cluster.append(node_id)
            return
        raise self.fail(f"expected a node declaration, got {text!r}", line_no, 9)

    def declare(self, var: str, kind: NodeKind, label: str, icon: str | None,
                line_no: int, node_id: str | None = None) -> None:
        if var in self.vars:
            raise self.fail(f"variable {var!r} already declared", line_no, 5)
        node_id = var if node_id is None else node_id
        if not node_id:
            raise self.fail("node id must be non-empty", line_no, 5)
        if node_id in self.node_ids:
            raise self.fail(f"duplicate node id {node_id!r}", line_no, 5)
        self.vars[var] = node_id
        self.node_ids.add(node_id)
        self.g.nodes.append(DiagNode(id=node_id, kind=kind, label=label, icon=icon))

    def resolve(self, var: str, line_no: int, text: str) -> str:
        if var not in self.vars:
            column = text.find(var) + 5
            raise self.fail(f"variable {var!r} used before declaration",
                            line_no, column)
        return self.vars[var]

    def edge(self, lhs: str, rhs: str, directionality: Directionality,
             style: EdgeStyle, color: str | None, line_no: int, text: str) -> None:
        try:
            role = role_of_rendering(directionality, style, color)
        except AmbiguityError as exc:
            raise UnknownConstructError(str(exc), self.loc(line_no, 5)) from exc
        self.g.edges.append(DiagEdge(
            from_id=self.resolve(lhs, line_no, text),
            to_id=self.resolve(rhs, line_no, text),
            directionality=directionality, style=style, color=color, role=role))

    def attributed_edge(self, lhs: str, rhs: str, style: EdgeStyle,
                        color: str | None, line_no: int, text: str) -> None:
        # the ">> Edge(...) <<" form covers both bidirected (mount) and
        # undirected (network membership) renderings; the table decides
        for directionality in (Directionality.BIDIRECTED, Directionality.UNDIRECTED):
            try:
                role = role_of_rendering(directionality, style, color)
            except AmbiguityError:
                continue
            self.g.edges.append(DiagEdge(
                from_id=self.resolve(lhs, line_no, text),
                to_id=self.resolve(rhs, line_no, text),
                directionality=directionality, style=style, color=color, role=role))
            return
        raise UnknownConstructError(
            f"edge attributes (style={style.value}, color={color}) "
            "are outside the role table", self.loc(line_no, 5))

    def edge_attrs(self, attr_text: str, line_no: int) -> tuple[EdgeStyle, str | None]:
        style: str | None = None
        color: str | None = None
        for part in attr_text.split(", "):
            match = _RE_ATTR.match(part)
            if not match:
                raise UnknownConstructError(
                    f"unparseable edge attribute {part!r}", self.loc(line_no, 5))
            key, value = match.group(1), unescape_text(match.group(2))
            if key == "style":
                style = value
            elif key == "color":
                color = value
            else:
                raise UnknownConstructError(
                    f"unsupported edge attribute {key!r}", self.loc(line_no, 5))
        try:
            parsed_style = EdgeStyle(style) if style is not None else EdgeStyle.SOLID
        except ValueError:
            raise UnknownConstructError(
                f"unsupported edge style {style!r}", self.loc(line_no, 5)) from None
        return parsed_style, color


def parse_dac(text: str, path: str | None = None) -> DeploymentDiagram:
    """Parse script text; the result always satisfies check_wellformed."""
    return _DacParser(text, path).parse()
