"""Command-line entry point.

Exit codes are a stable contract: 0 success/equal, 1 validation or shape
errors, 2 parse/IO errors, 3 equivalence mismatch. Diagnostics go to stderr;
file payloads only to stdout or the declared output paths.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .dac_emitter import emit_dac, emit_dot
from .dac_parser import parse_dac
from .diagram import Direction
from .equivalence import equivalent
from .errors import (
    DacSyntaxError,
    DescriptorSyntaxError,
    ShapeError,
    StructureError,
    UnknownConstructError,
)
from .forward import IconRegistry, TransformOptions, load_icon_registry, to_diagram
from .model import ComposeDescriptor, ServiceSpec, validate
from .parser import InterpolationEnv, parse_compose, serialize_compose
from .reverse import to_descriptor

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_NOT_EQUIVALENT = 3


def _env_pair(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key, value


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _build_env(pairs: list[tuple[str, str]] | None) -> InterpolationEnv:
    bindings = dict(os.environ)
    for key, value in pairs or []:
        bindings[key] = value
    return InterpolationEnv(bindings)


def _load_descriptor(args) -> tuple[ComposeDescriptor, list]:
    text = _read_input(args.input)
    descriptor, report = parse_compose(
        text, _build_env(getattr(args, "env", None)),
        path=None if args.input == "-" else args.input)
    full = validate(descriptor)
    warnings = list(report.warnings)
    warnings += [w for w in full.warnings if w not in warnings]
    for finding in warnings:
        print(f"warning {finding.render()}", file=sys.stderr)
    return descriptor, full.errors


def cmd_forward(args) -> int:
    descriptor, errors = _load_descriptor(args)
    if errors:
        for finding in errors:
            print(f"error {finding.render()}", file=sys.stderr)
        return EXIT_INVALID
    registry = IconRegistry()
    if args.icon_config:
        try:
            registry = load_icon_registry(
                Path(args.icon_config).read_text(encoding="utf-8"))
        except ValueError as exc:
            print(f"error: {args.icon_config}: {exc}", file=sys.stderr)
            return EXIT_PARSE
    opts = TransformOptions(
        direction=Direction(args.direction),
        merge_volumes=args.merge_volumes,
        icons_enabled=args.icons,
        embed_image_labels=args.embed_image)
    g = to_diagram(descriptor, opts, registry)
    wrote = False
    if args.out:
        Path(args.out).write_text(emit_dac(g), encoding="utf-8")
        wrote = True
    if args.dot:
        Path(args.dot).write_text(emit_dot(g), encoding="utf-8")
        wrote = True
    if not wrote:
        sys.stdout.write(emit_dac(g))
    return EXIT_OK


def cmd_reverse(args) -> int:
    text = _read_input(args.input)
    g = parse_dac(text, path=None if args.input == "-" else args.input)
    descriptor, loss = to_descriptor(g)
    for line in loss.render_lines():
        print(f"loss {line}", file=sys.stderr)
    output = serialize_compose(descriptor)
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return EXIT_OK


def cmd_validate(args) -> int:
    descriptor, errors = _load_descriptor(args)
    for finding in errors:
        print(f"error {finding.render()}", file=sys.stderr)
    if errors:
        return EXIT_INVALID
    print(f"ok: {len(descriptor.services)} services")
    return EXIT_OK


def _corrupt(descriptor: ComposeDescriptor) -> None:
    """Test hook: make the regenerated descriptor provably not equivalent."""
    for svc in descriptor.services.values():
        if svc.depends_on:
            svc.depends_on.pop(0)
            return
        if svc.links:
            svc.links.pop(0)
            return
        if svc.volumes:
            svc.volumes.pop(0)
            return
    descriptor.services["corrupted"] = ServiceSpec(image="corrupted:latest")


def cmd_roundtrip(args) -> int:
    descriptor, errors = _load_descriptor(args)
    if errors:
        for finding in errors:
            print(f"error {finding.render()}", file=sys.stderr)
        return EXIT_INVALID
    g = to_diagram(descriptor)
    regenerated, _loss = to_descriptor(g)
    if args.corrupt:
        _corrupt(regenerated)
    report = equivalent(descriptor, regenerated)
    if report.equal:
        return EXIT_OK
    for line in report.render_lines():
        print(line, file=sys.stderr)
    return EXIT_NOT_EQUIVALENT


def cmd_diff(args) -> int:
    results = []
    for path in (args.a, args.b):
        text = _read_input(path)
        descriptor, _ = parse_compose(text, _build_env(args.env),
                                      path=None if path == "-" else path)
        report = validate(descriptor)
        if report.errors:
            for finding in report.errors:
                print(f"error {finding.render()}", file=sys.stderr)
            return EXIT_INVALID
        results.append(descriptor)
    report = equivalent(results[0], results[1])
    if args.json:
        print(report.to_json())
    else:
        for line in report.render_lines():
            print(line)
    return EXIT_OK if report.equal else EXIT_NOT_EQUIVALENT


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="composediag",
        description="Convert docker-compose descriptors to deployment diagrams "
                    "and back, and check the round trip.")
    sub = parser.add_subparsers(dest="command", required=True)

    forward = sub.add_parser("forward", help="compose file -> DaC script / DOT")
    forward.add_argument("input", help="compose file path, or - for stdin")
    forward.add_argument("--out", help="write the DaC script here")
    forward.add_argument("--dot", help="write the DOT rendering here")
    forward.add_argument("--direction", choices=["TB", "LR"], default="TB")
    forward.add_argument("--icons", action="store_true",
                         help="use the icon registry for known images")
    forward.add_argument("--icon-config", help="extra prefix=icon-name lines")
    forward.add_argument("--merge-volumes", action="store_true",
                         help="share one node between equal named volumes")
    forward.add_argument("--embed-image", action="store_true",
                         help="append the image to each node label")
    forward.add_argument("--env", action="append", type=_env_pair, metavar="KEY=VALUE",
                         help="override an interpolation variable (repeatable)")
    forward.set_defaults(func=cmd_forward)

    reverse = sub.add_parser("reverse", help="DaC script -> compose file")
    reverse.add_argument("input", help="DaC script path, or - for stdin")
    reverse.add_argument("--out", help="write the compose file here")
    reverse.set_defaults(func=cmd_reverse)

    validate_cmd = sub.add_parser("validate", help="check a compose file")
    validate_cmd.add_argument("input", help="compose file path, or - for stdin")
    validate_cmd.add_argument("--env", action="append", type=_env_pair,
                              metavar="KEY=VALUE")
    validate_cmd.set_defaults(func=cmd_validate)

    roundtrip = sub.add_parser(
        "roundtrip", help="forward then reverse, then compare projections")
    roundtrip.add_argument("input", help="compose file path, or - for stdin")
    roundtrip.add_argument("--env", action="append", type=_env_pair,
                           metavar="KEY=VALUE")
    roundtrip.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    roundtrip.set_defaults(func=cmd_roundtrip)

    diff = sub.add_parser("diff", help="projection diff of two compose files")
    diff.add_argument("a", help="first compose file")
    diff.add_argument("b", help="second compose file")
    diff.add_argument("--json", action="store_true",
                      help="machine-readable report")
    diff.add_argument("--env", action="append", type=_env_pair, metavar="KEY=VALUE")
    diff.set_defaults(func=cmd_diff)
    return parser


def main(argv: list[str] | None = None) -> int:
    raw = sys.argv[1:] if argv is None else list(argv)
    # "--" means standard input, mirroring the documented pipe form
    args = build_arg_parser().parse_args(["-" if a == "--" else a for a in raw])
    try:
        return args.func(args)
    except (DescriptorSyntaxError, StructureError, DacSyntaxError,
            UnknownConstructError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        name = getattr(exc, "filename", None)
        detail = f"{name}: {exc.strerror}" if name else str(exc)
        print(f"error: {detail}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
