"""Acceptance criteria, one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
"""

import random
import time

import pytest

from composediag.cli import main
from composediag.dac_emitter import emit_dac, emit_dot
from composediag.dac_parser import parse_dac
from composediag.diagram import (
    Directionality,
    EdgeRole,
    EdgeStyle,
    check_wellformed,
    rendering_of_role,
    role_of_rendering,
)
from composediag.errors import AmbiguityError
from composediag.forward import to_diagram
from composediag.model import validate
from composediag.parser import parse_compose
from composediag.reverse import to_descriptor

from conftest import VALID_FIXTURES, fixture_text
from generators import (
    brute_force_has_cycle,
    random_descriptor_any,
    random_valid_descriptor,
    random_wellformed_diagram,
)
from composediag.model import dependency_graph


def verdict(number: int, passed: bool, detail: str) -> None:
    print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
    assert passed


def test_criterion_1_golden_reproduction_of_the_case_study():
    started = time.perf_counter()
    descriptor, _ = parse_compose(fixture_text("dblog.yaml"))
    g = to_diagram(descriptor)
    script = emit_dac(g)
    elapsed = time.perf_counter() - started

    directed = {(e.from_id, e.to_id) for e in g.edges if e.role is EdgeRole.DEPENDENCY}
    undirected = {frozenset((e.from_id, e.to_id)) for e in g.edges
                  if e.role is EdgeRole.LINK}
    mounts = [e for e in g.edges if e.role is EdgeRole.MOUNT]

    ok = directed == {("dblog", "mysql"), ("dblog", "postgres"), ("kafka", "zookeeper")}
    ok &= undirected == {frozenset(("dblog", "zookeeper")),
                         frozenset(("kafka", "zookeeper"))}
    ok &= len(mounts) == 3
    ok &= all(e.style is EdgeStyle.DASHED and e.color == "darkgreen" for e in mounts)
    ok &= len(g.edges) == 8
    ok &= [c.label for c in g.clusters] == [
        "mysql service", "postgres service", "dblog service",
        "zookeeper service", "kafka service"]
    # documented deviations from the prototype's own output
    ok &= 'dblog = Server("dblog")' in script  # not "connect"
    ok &= g.title == "mysql postgres dblog zookeeper kafka"  # no trailing space
    ok &= "dblog >> mysql" in script  # depends_on rendered directed
    ok &= elapsed < 1.0
    verdict(1, ok, f"case-study edge set and clusters exact, {elapsed * 1000:.0f} ms")


def test_criterion_2_roundtrip_equivalence_across_the_corpus():
    assert len(VALID_FIXTURES) >= 10, "corpus must bundle at least 10 valid fixtures"
    worst = 0.0
    for path in VALID_FIXTURES:
        started = time.perf_counter()
        code = main(["roundtrip", str(path)])
        elapsed = time.perf_counter() - started
        worst = max(worst, elapsed)
        assert code == 0, f"roundtrip failed for {path.name}"
        assert elapsed < 1.0, f"{path.name} took {elapsed:.3f}s"
    verdict(2, True,
            f"{len(VALID_FIXTURES)} fixtures round-trip equal, "
            f"worst {worst * 1000:.0f} ms")


def test_criterion_3_mechanized_emit_parse_round_trip():
    rng = random.Random(42)
    failures = 0
    for _ in range(1000):
        g = random_wellformed_diagram(rng, max_services=8, max_edges_per_service=3)
        assert check_wellformed(g) == []
        if parse_dac(emit_dac(g)) != g:
            failures += 1
    verdict(3, failures == 0,
            f"parse(emit(g)) == g on 1000 random diagrams, {failures} failures")


def test_criterion_4_rendering_bijection_is_exhaustive():
    for role in EdgeRole:
        assert role_of_rendering(*rendering_of_role(role)) is role
    legal = {rendering_of_role(role) for role in EdgeRole}
    checked = 0
    for directionality in Directionality:
        for style in EdgeStyle:
            for color in (None, "darkgreen", "gray", "red"):
                triple = (directionality, style, color)
                checked += 1
                if triple in legal:
                    role_of_rendering(*triple)
                else:
                    with pytest.raises(AmbiguityError):
                        role_of_rendering(*triple)
    verdict(4, checked == 24,
            f"identity on 4 roles; AmbiguityError on the other {checked - 4} "
            f"of {checked} triples")


def test_criterion_5_reverse_of_forward_is_always_valid():
    rng = random.Random(1234)
    failures = 0
    for _ in range(500):
        d = random_valid_descriptor(rng)
        regenerated, _ = to_descriptor(to_diagram(d))
        if validate(regenerated).errors:
            failures += 1
    verdict(5, failures == 0,
            f"validate(reverse(forward(d))) clean on 500 descriptors, "
            f"{failures} failures")


def test_criterion_6_cycle_detection_matches_brute_force():
    rng = random.Random(777)
    disagreements = 0
    samples = 400
    for _ in range(samples):
        d = random_descriptor_any(rng, max_services=5)
        graph = dependency_graph(d)
        expected = brute_force_has_cycle(graph.nodes, set(graph.edges))
        found = any(f.code == "dependency-cycle" for f in validate(d).errors)
        if found != expected:
            disagreements += 1
    verdict(6, disagreements == 0,
            f"validator vs simple-cycle enumeration on {samples} descriptors "
            f"(<= 5 services), {disagreements} disagreements")


def test_criterion_7_forward_outputs_are_byte_deterministic():
    unstable = []
    for path in VALID_FIXTURES:
        descriptor, _ = parse_compose(path.read_text(encoding="utf-8"))
        first = (emit_dac(to_diagram(descriptor)), emit_dot(to_diagram(descriptor)))
        descriptor2, _ = parse_compose(path.read_text(encoding="utf-8"))
        second = (emit_dac(to_diagram(descriptor2)), emit_dot(to_diagram(descriptor2)))
        if first != second:
            unstable.append(path.name)
    verdict(7, not unstable,
            f"byte-identical DaC and DOT over {len(VALID_FIXTURES)} fixtures")
