"""Compose text <-> ComposeDescriptor.

Parsing walks PyYAML's composed node tree directly instead of using its
constructor: that keeps declaration order, exposes duplicate keys, gives a
SourceLocation for every element, and hands us raw scalar text (so ``22:22``
stays a port string and ``restart: no`` stays the word "no").

Serialization produces one canonical form: two-space indents, list-form
environment, short-form mounts, a fixed key order. parse(serialize(d))
reproduces d field for field when resolved with the same variable bindings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import yaml

from .errors import DescriptorSyntaxError, SourceLocation, StructureError
from .model import (
    RESTART_VALUES,
    BuildSpec,
    ComposeDescriptor,
    Finding,
    NetworkDecl,
    PortMapping,
    ServiceSpec,
    ValidationReport,
    VolumeDecl,
    VolumeMount,
)

_VAR_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}|\$([A-Za-z_][A-Za-z0-9_]*)")
_PORT_RE = re.compile(r"^(?:(\d+):)?(\d+)(?:/(\w+))?$")

_TOP_LEVEL_KEYS = ("version", "services", "volumes", "networks")


@dataclass(frozen=True)
class InterpolationEnv:
    """Variable bindings for ${VAR} / $VAR substitution."""

    bindings: dict[str, str] = field(default_factory=dict)

    def resolve(self, text: str) -> tuple[str, list[str]]:
        """Substitute every reference; unbound names become "" and are returned."""
        missing: list[str] = []

        def repl(match: re.Match) -> str:
            name = match.group(1) or match.group(2)
            if name in self.bindings:
                return self.bindings[name]
            missing.append(name)
            return ""

        return _VAR_RE.sub(repl, text), missing


def _loc(mark, path: str | None) -> SourceLocation:
    return SourceLocation(mark.line + 1, mark.column + 1, path)


class _Parser:
    def __init__(self, text: str, env: InterpolationEnv, path: str | None):
        self.text = text
        self.env = env
        self.path = path
        self.warnings: list[Finding] = []
        self.unresolved: list[tuple[str, str]] = []
        self.line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self.line_starts.append(i + 1)

    # -- generic node helpers ------------------------------------------------

    def fail(self, message: str, node) -> StructureError:
        return StructureError(message, _loc(node.start_mark, self.path))

    def mapping_items(self, node, what: str) -> list[tuple[str, object, object]]:
        if not isinstance(node, yaml.MappingNode):
            raise self.fail(f"{what} must be a map", node)
        items = []
        seen = {}
        for key_node, value_node in node.value:
            if not isinstance(key_node, yaml.ScalarNode):
                raise self.fail(f"{what} key must be a scalar", key_node)
            key = key_node.value
            if key in seen:
                raise StructureError(
                    f"duplicate key {key!r} in {what}",
                    _loc(key_node.start_mark, self.path))
            seen[key] = True
            items.append((key, key_node, value_node))
        return items

    def sequence_items(self, node, what: str) -> list:
        if not isinstance(node, yaml.SequenceNode):
            raise self.fail(f"{what} must be a list", node)
        return node.value

    def scalar(self, node, what: str) -> str:
        if not isinstance(node, yaml.ScalarNode):
            raise self.fail(f"{what} must be a scalar", node)
        return node.value

    def interp(self, node, path: str, svc: ServiceSpec | None = None,
               raw_key: str | None = None) -> str:
        """Consume a scalar, apply variable substitution, record raw + misses."""
        raw = self.scalar(node, path)
        resolved, missing = self.env.resolve(raw)
        for name in missing:
            self.unresolved.append((path, name))
            self.warnings.append(Finding(
                "unresolved-variable",
                f"variable {name!r} is unset; resolved to empty string",
                path))
        if resolved != raw and svc is not None and raw_key is not None:
            svc.raw_text[raw_key] = raw
        return resolved

    def warn(self, code: str, message: str, path: str) -> None:
        self.warnings.append(Finding(code, message, path))

    def plain(self, node):
        """Node subtree -> plain data (for uninterpreted option maps)."""
        if isinstance(node, yaml.ScalarNode):
            return yaml.SafeLoader("").construct_object(node)
        if isinstance(node, yaml.SequenceNode):
            return [self.plain(item) for item in node.value]
        if isinstance(node, yaml.MappingNode):
            return {key: self.plain(value_node)
                    for key, _, value_node in self.mapping_items(node, "map")}
        raise self.fail("unsupported node", node)

    # -- verbatim fragments for unknown keys ----------------------------------

    def _scalar_end(self, node) -> int:
        if isinstance(node, yaml.ScalarNode):
            return node.end_mark.index
        if getattr(node, "flow_style", False):
            return node.end_mark.index
        end = node.start_mark.index
        children = (node.value if isinstance(node, yaml.SequenceNode)
                    else [n for pair in node.value for n in pair])
        for child in children:
            end = max(end, self._scalar_end(child))
        return end

    def fragment(self, key_node, value_node) -> str:
        """Raw source text of a value, dedented so re-emission is stable."""
        end = self._scalar_end(value_node)
        if value_node.start_mark.line == key_node.start_mark.line:
            raw = self.text[value_node.start_mark.index:end]
            if "\n" not in raw:
                return raw
            # value head (block-scalar header, open quote, open brace) on the
            # key's line with continuation below: keep the head, pull the
            # continuation to a fixed two-space offset
            head, _, rest = raw.partition("\n")
            rest_lines = rest.split("\n")
            indents = [len(l) - len(l.lstrip(" ")) for l in rest_lines if l.strip()]
            shift = min(indents, default=2) - 2
            lines = [head]
            for line in rest_lines:
                if not line.strip():
                    lines.append("")
                elif shift >= 0:
                    indent = len(line) - len(line.lstrip(" "))
                    lines.append(line[min(shift, indent):])
                else:
                    lines.append(" " * -shift + line)
        else:
            start = self.line_starts[value_node.start_mark.line]
            col = value_node.start_mark.column
            lines = []
            for line in self.text[start:end].split("\n"):
                indent = len(line) - len(line.lstrip(" "))
                lines.append(line[min(col, indent):] if line.strip() else "")
        while lines and not lines[-1].strip():
            lines.pop()
        return "\n".join(lines)

    # -- sections -------------------------------------------------------------

    def parse(self) -> ComposeDescriptor:
        try:
            root = yaml.compose(self.text, Loader=yaml.SafeLoader)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            loc = (_loc(mark, self.path) if mark is not None
                   else SourceLocation(1, 1, self.path))
            raise DescriptorSyntaxError(exc.problem or "malformed document", loc) from exc
        except yaml.YAMLError as exc:
            raise DescriptorSyntaxError(str(exc), SourceLocation(1, 1, self.path)) from exc
        if root is None:
            raise StructureError("empty document", SourceLocation(1, 1, self.path))

        sections = {}
        for key, key_node, value_node in self.mapping_items(root, "document"):
            if key in _TOP_LEVEL_KEYS:
                sections[key] = value_node
            else:
                self.warn("unknown-top-level-key",
                          f"unsupported top-level key {key!r} ignored", key)

        d = ComposeDescriptor()
        if "version" in sections:
            d.version = self.scalar(sections["version"], "version")
        if "volumes" in sections:
            for name, _, value_node in self.mapping_items(sections["volumes"], "volumes"):
                options = {} if _is_null(value_node) else self.plain(value_node)
                if not isinstance(options, dict):
                    raise self.fail(f"volume {name!r} options must be a map", value_node)
                d.volumes[name] = VolumeDecl(name, options)
        if "networks" in sections:
            for name, _, value_node in self.mapping_items(sections["networks"], "networks"):
                options = {} if _is_null(value_node) else self.plain(value_node)
                if not isinstance(options, dict):
                    raise self.fail(f"network {name!r} options must be a map", value_node)
                d.networks[name] = NetworkDecl(name, options)

        if "services" not in sections:
            raise StructureError("services section missing", SourceLocation(1, 1, self.path))
        for name, key_node, value_node in self.mapping_items(sections["services"], "services"):
            if not name:
                raise StructureError("service name must be non-empty",
                                     _loc(key_node.start_mark, self.path))
            d.services[name] = self.parse_service(name, value_node, d)

        d.unresolved_variables = list(self.unresolved)
        return d

    def parse_service(self, name: str, node, d: ComposeDescriptor) -> ServiceSpec:
        svc = ServiceSpec()
        base = f"services.{name}"
        for key, key_node, value_node in self.mapping_items(node, f"service {name!r}"):
            path = f"{base}.{key}"
            if key == "image":
                svc.image = self.interp(value_node, path, svc, "image")
            elif key == "build":
                svc.build = self.parse_build(name, value_node, svc)
            elif key == "command":
                svc.command = self.interp(value_node, path, svc, "command")
            elif key == "container_name":
                value = self.interp(value_node, path, svc, "container_name")
                if svc.container_name is not None:
                    self.warn("nested-container-name",
                              "container_name already set from build block; "
                              "service-level value wins", path)
                svc.container_name = value
            elif key == "environment":
                self.parse_environment(value_node, svc, path)
            elif key == "ports":
                for i, item in enumerate(self.sequence_items(value_node, path)):
                    raw = self.interp(item, f"{path}[{i}]", svc, f"ports[{i}]")
                    svc.ports.append(self.parse_port(raw, item))
            elif key == "volumes":
                for i, item in enumerate(self.sequence_items(value_node, path)):
                    svc.volumes.append(
                        self.parse_mount(item, svc, f"{path}[{i}]", f"volumes[{i}]", d))
            elif key == "depends_on":
                for i, item in enumerate(self.sequence_items(value_node, path)):
                    svc.depends_on.append(
                        self.interp(item, f"{path}[{i}]", svc, f"depends_on[{i}]"))
            elif key == "links":
                for i, item in enumerate(self.sequence_items(value_node, path)):
                    text = self.interp(item, f"{path}[{i}]", svc, f"links[{i}]")
                    target, _, alias = text.partition(":")
                    svc.links.append((target, alias or None))
            elif key == "restart":
                svc.restart = self.interp(value_node, path, svc, "restart")
                if svc.restart not in RESTART_VALUES:
                    self.warn("invalid-restart",
                              f"restart value {svc.restart!r} outside "
                              f"{'/'.join(RESTART_VALUES)}; kept verbatim", path)
            elif key == "networks":
                for i, item in enumerate(self.sequence_items(value_node, path)):
                    svc.networks.append(
                        self.interp(item, f"{path}[{i}]", svc, f"networks[{i}]"))
            else:
                svc.unknown_keys[key] = self.fragment(key_node, value_node)
        return svc

    def parse_build(self, name: str, node, svc: ServiceSpec) -> BuildSpec:
        base = f"services.{name}.build"
        if isinstance(node, yaml.ScalarNode):
            context = self.interp(node, base, svc, "build.context")
            if not context:
                raise self.fail("build context must be non-empty", node)
            return BuildSpec(context=context)
        context = None
        dockerfile = None
        for key, _, value_node in self.mapping_items(node, base):
            path = f"{base}.{key}"
            if key == "context":
                context = self.interp(value_node, path, svc, "build.context")
            elif key == "dockerfile":
                dockerfile = self.interp(value_node, path, svc, "build.dockerfile")
            elif key == "container_name":
                value = self.interp(value_node, path, svc, "container_name")
                if svc.container_name is None:
                    svc.container_name = value
                    self.warn("nested-container-name",
                              "container_name found inside build; "
                              "moved to service level", path)
                else:
                    self.warn("nested-container-name",
                              "container_name found inside build; ignored in "
                              "favor of the service-level value", path)
            else:
                self.warn("unknown-key", f"unsupported build key {key!r} ignored", path)
        if not context:
            raise self.fail("build requires a non-empty context", node)
        return BuildSpec(context=context, dockerfile=dockerfile)

    def parse_environment(self, node, svc: ServiceSpec, base: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key, _, value_node in self.mapping_items(node, base):
                value = self.interp(value_node, f"{base}.{key}", svc, f"environment.{key}")
                self._add_env(svc, key, value, value_node)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                item_path = f"{base}[{i}]"
                first_unresolved = len(self.unresolved)
                first_warning = len(self.warnings)
                text = self.interp(item, item_path, svc, f"environment[{i}]")
                key, _, value = text.partition("=")
                self._add_env(svc, key, value, item)
                # normalize recorded paths to the map-form spelling so both
                # syntaxes produce identical models
                key_path = f"{base}.{key}"
                self.unresolved[first_unresolved:] = [
                    (key_path if loc == item_path else loc, var)
                    for loc, var in self.unresolved[first_unresolved:]]
                self.warnings[first_warning:] = [
                    Finding(f.code, f.message, key_path) if f.location == item_path else f
                    for f in self.warnings[first_warning:]]
                raw = svc.raw_text.pop(f"environment[{i}]", None)
                if raw is not None:
                    _, _, raw_value = raw.partition("=")
                    svc.raw_text[f"environment.{key}"] = raw_value
        else:
            raise self.fail(f"{base} must be a map or a list", node)

    def _add_env(self, svc: ServiceSpec, key: str, value: str, node) -> None:
        if any(existing == key for existing, _ in svc.environment):
            raise self.fail(f"duplicate environment key {key!r}", node)
        svc.environment.append((key, value))

    def parse_port(self, raw: str, node) -> PortMapping:
        match = _PORT_RE.match(raw)
        if not match:
            raise self.fail(
                f"port {raw!r} does not match N, N:N or N:N/protocol", node)
        host, container, protocol = match.groups()
        if host is None and protocol is not None:
            raise self.fail(
                f"port {raw!r} does not match N, N:N or N:N/protocol", node)
        protocol = protocol or "tcp"
        if protocol not in ("tcp", "udp"):
            raise self.fail(f"port protocol must be tcp or udp, got {protocol!r}", node)
        ports = [int(container)] + ([int(host)] if host is not None else [])
        for value in ports:
            if not 1 <= value <= 65535:
                raise self.fail(f"port {value} out of range 1-65535", node)
        return PortMapping(
            container_port=int(container),
            host_port=int(host) if host is not None else None,
            protocol=protocol)

    def parse_mount(self, node, svc: ServiceSpec, path: str, raw_key: str,
                    d: ComposeDescriptor) -> VolumeMount:
        if isinstance(node, yaml.MappingNode):
            source = target = mount_type = None
            mode = None
            for key, _, value_node in self.mapping_items(node, path):
                if key == "source":
                    source = self.interp(value_node, f"{path}.source")
                elif key == "target":
                    target = self.interp(value_node, f"{path}.target")
                elif key == "type":
                    mount_type = self.scalar(value_node, f"{path}.type")
                elif key == "read_only":
                    if self.scalar(value_node, f"{path}.read_only") in ("true", "True", "yes", "on"):
                        mode = "ro"
                else:
                    self.warn("unknown-key", f"unsupported mount key {key!r} ignored",
                              f"{path}.{key}")
            if not source or not target:
                raise self.fail("mount requires source and target", node)
        else:
            raw = self.interp(node, path, svc, raw_key)
            parts = raw.split(":")
            if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
                raise self.fail(
                    f"mount {raw!r} does not match source:target[:mode]", node)
            source, target = parts[0], parts[1]
            mode = parts[2] if len(parts) == 3 else None
            mount_type = None
        if not target.startswith("/"):
            raise self.fail(f"mount target {target!r} must be absolute", node)
        if mount_type in ("volume", "bind"):
            kind = "named" if mount_type == "volume" else "bind"
        else:
            kind = mount_kind(source, d.volumes)
        return VolumeMount(source=source, target=target, mode=mode, kind=kind)


def mount_kind(source: str, declared_volumes) -> str:
    """Named volume unless the source is declared nowhere and looks like a path."""
    if source in declared_volumes:
        return "named"
    if source.startswith(("/", ".")) or "/" in source:
        return "bind"
    return "named"


def _is_null(node) -> bool:
    return isinstance(node, yaml.ScalarNode) and node.tag == "tag:yaml.org,2002:null"


def parse_compose(
    text: str,
    env: InterpolationEnv | None = None,
    path: str | None = None,
) -> tuple[ComposeDescriptor, ValidationReport]:
    """Parse compose text; returns the model plus a warnings-only report.

    Raises DescriptorSyntaxError for unparseable markup and StructureError for
    shape violations; both carry a SourceLocation.
    """
    parser = _Parser(text, env or InterpolationEnv(), path)
    descriptor = parser.parse()
    return descriptor, ValidationReport(errors=[], warnings=parser.warnings)


# -- canonical serialization ---------------------------------------------------


def emit_scalar(value: str) -> str:
    """Plain scalar when it survives a reparse unchanged, else double-quoted."""
    try:
        loaded = yaml.safe_load(value)
    except yaml.YAMLError:
        loaded = None
    if isinstance(loaded, str) and loaded == value:
        return value
    return json.dumps(value, ensure_ascii=False)


def _emit_plain_value(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, dict):
        return "{}"
    if isinstance(value, list):
        return "[]"
    return emit_scalar(str(value))


def _emit_plain_block(value, indent: str, lines: list[str]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            prefix = f"{indent}{emit_scalar(str(key))}:"
            if isinstance(item, (dict, list)) and item:
                lines.append(prefix)
                _emit_plain_block(item, indent + "  ", lines)
            else:
                lines.append(f"{prefix} {_emit_plain_value(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and item:
                sub: list[str] = []
                _emit_plain_block(item, indent + "  ", sub)
                sub[0] = f"{indent}- {sub[0].lstrip()}"
                lines.extend(sub)
            else:
                lines.append(f"{indent}- {_emit_plain_value(item)}")
    else:
        raise ValueError("block emitter expects a collection")


def _fragment_fits_inline(fragment: str) -> bool:
    """True when `key: fragment` parses identically to the block form."""
    if "\n" in fragment:
        return False
    try:
        inline = yaml.safe_load("k: " + fragment)
        block = yaml.safe_load("k:\n  " + fragment)
    except yaml.YAMLError:
        return False
    return isinstance(inline, dict) and inline == block


def _format_port(port: PortMapping) -> str:
    text = str(port.container_port)
    if port.host_port is not None:
        text = f"{port.host_port}:{text}"
    if port.protocol != "tcp":
        text = f"{text}/{port.protocol}"
    return text


def _format_mount(mount: VolumeMount) -> str:
    text = f"{mount.source}:{mount.target}"
    if mount.mode:
        text = f"{text}:{mount.mode}"
    return text


def serialize_compose(d: ComposeDescriptor) -> str:
    """Canonical compose text; deterministic and reparseable."""
    lines: list[str] = []
    if d.version:
        lines.append(f"version: {json.dumps(d.version)}")
    if not d.services:
        lines.append("services: {}")
    else:
        lines.append("services:")
        for name, svc in d.services.items():
            lines.append(f"  {emit_scalar(name)}:")
            _serialize_service(svc, lines)
    for section, decls in (("volumes", d.volumes), ("networks", d.networks)):
        if not decls:
            continue
        lines.append(f"{section}:")
        for name, decl in decls.items():
            if decl.options:
                lines.append(f"  {emit_scalar(name)}:")
                _emit_plain_block(decl.options, "    ", lines)
            else:
                lines.append(f"  {emit_scalar(name)}:")
    return "\n".join(lines) + "\n"


def _serialize_service(svc: ServiceSpec, lines: list[str]) -> None:
    raw = svc.raw_text

    def scalar_field(key: str, value: str | None) -> None:
        if value is not None:
            lines.append(f"    {key}: {emit_scalar(raw.get(key, value))}")

    scalar_field("image", svc.image)
    if svc.build is not None:
        lines.append("    build:")
        lines.append(f"      context: {emit_scalar(raw.get('build.context', svc.build.context))}")
        if svc.build.dockerfile is not None:
            lines.append(
                f"      dockerfile: {emit_scalar(raw.get('build.dockerfile', svc.build.dockerfile))}")
    scalar_field("command", svc.command)
    scalar_field("container_name", svc.container_name)
    if svc.environment:
        lines.append("    environment:")
        for key, value in svc.environment:
            item = f"{key}={raw.get(f'environment.{key}', value)}"
            lines.append(f"      - {emit_scalar(item)}")
    if svc.ports:
        lines.append("    ports:")
        for i, port in enumerate(svc.ports):
            item = raw.get(f"ports[{i}]", _format_port(port))
            lines.append(f"      - {emit_scalar(item)}")
    if svc.volumes:
        lines.append("    volumes:")
        for i, mount in enumerate(svc.volumes):
            item = raw.get(f"volumes[{i}]", _format_mount(mount))
            lines.append(f"      - {emit_scalar(item)}")
    if svc.depends_on:
        lines.append("    depends_on:")
        for i, target in enumerate(svc.depends_on):
            lines.append(f"      - {emit_scalar(raw.get(f'depends_on[{i}]', target))}")
    if svc.links:
        lines.append("    links:")
        for i, (target, alias) in enumerate(svc.links):
            item = raw.get(f"links[{i}]", f"{target}:{alias}" if alias else target)
            lines.append(f"      - {emit_scalar(item)}")
    scalar_field("restart", svc.restart)
    if svc.networks:
        lines.append("    networks:")
        for i, network in enumerate(svc.networks):
            lines.append(f"      - {emit_scalar(raw.get(f'networks[{i}]', network))}")
    for key, fragment in svc.unknown_keys.items():
        if not fragment:
            lines.append(f"    {emit_scalar(key)}:")
        elif _fragment_fits_inline(fragment):
            lines.append(f"    {emit_scalar(key)}: {fragment}")
        else:
            lines.append(f"    {emit_scalar(key)}:")
            for fragment_line in fragment.split("\n"):
                lines.append(f"      {fragment_line}" if fragment_line else "")
