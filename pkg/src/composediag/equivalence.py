"""Projection onto the diagram-representable subset, and descriptor equivalence.

Two descriptors count as equivalent exactly when their projections match:
service names, dependency pairs, link pairs, (service, source) mounts and
network memberships. Images, ports, environments, commands and restart
policies are excluded by definition since no diagram can carry them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import PreconditionError
from .model import ComposeDescriptor, validate

CATEGORIES = (
    "service_names",
    "dependency_edges",
    "link_edges",
    "mounts",
    "network_memberships",
    "network_names",
)


@dataclass(frozen=True)
class DiagramProjection:
    service_names: frozenset[str]
    dependency_edges: frozenset[tuple[str, str]]
    link_edges: frozenset[frozenset[str]]
    mounts: frozenset[tuple[str, str]]
    network_memberships: frozenset[tuple[str, str]]
    network_names: frozenset[str]


def project(d: ComposeDescriptor) -> DiagramProjection:
    """Diagram-representable content of a valid descriptor, as plain sets."""
    report = validate(d)
    if not report.ok:
        raise PreconditionError(
            "descriptor has validation errors: "
            + "; ".join(f.render() for f in report.errors))
    dependency_edges = set()
    link_edges = set()
    mounts = set()
    memberships = set()
    for name, svc in d.services.items():
        dependency_edges.update((name, target) for target in svc.depends_on)
        link_edges.update(frozenset((name, target)) for target, _ in svc.links)
        mounts.update((name, mount.source) for mount in svc.volumes)
        memberships.update((name, network) for network in svc.networks)
    return DiagramProjection(
        service_names=frozenset(d.services),
        dependency_edges=frozenset(dependency_edges),
        link_edges=frozenset(link_edges),
        mounts=frozenset(mounts),
        network_memberships=frozenset(memberships),
        network_names=frozenset(network for _, network in memberships),
    )


@dataclass
class EquivalenceReport:
    equal: bool
    missing_in_a: dict[str, frozenset]
    missing_in_b: dict[str, frozenset]

    def render_lines(self) -> list[str]:
        lines = []
        for category in CATEGORIES:
            for side, diffs in (("A", self.missing_in_a), ("B", self.missing_in_b)):
                for element in sorted(diffs[category], key=_element_text):
                    lines.append(
                        f"{category}: missing in {side}: {_element_text(element)}")
        return lines

    def to_json(self) -> str:
        differences = []
        for category in CATEGORIES:
            for side, diffs in (("missing_in_a", self.missing_in_a),
                                ("missing_in_b", self.missing_in_b)):
                for element in sorted(diffs[category], key=_element_text):
                    differences.append({
                        "category": category,
                        "side": side,
                        "element": _element_json(element),
                    })
        return json.dumps({"equal": self.equal, "differences": differences}, indent=2)


def _element_text(element) -> str:
    if isinstance(element, frozenset):
        return " -- ".join(sorted(element))
    if isinstance(element, tuple):
        return " -> ".join(element)
    return element


def _element_json(element):
    if isinstance(element, frozenset):
        return sorted(element)
    if isinstance(element, tuple):
        return list(element)
    return element


def equivalent(a: ComposeDescriptor, b: ComposeDescriptor) -> EquivalenceReport:
    """Set-wise comparison of project(a) and project(b); symmetric, reflexive."""
    pa, pb = project(a), project(b)
    missing_in_a = {}
    missing_in_b = {}
    for category in CATEGORIES:
        set_a, set_b = getattr(pa, category), getattr(pb, category)
        missing_in_a[category] = frozenset(set_b - set_a)
        missing_in_b[category] = frozenset(set_a - set_b)
    equal = all(not missing_in_a[c] and not missing_in_b[c] for c in CATEGORIES)
    return EquivalenceReport(equal=equal, missing_in_a=missing_in_a,
                             missing_in_b=missing_in_b)
