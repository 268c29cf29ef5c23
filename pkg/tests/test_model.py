import random

import pytest

from composediag.errors import CycleError
from composediag.model import (
    ComposeDescriptor,
    ServiceSpec,
    VolumeMount,
    dependency_graph,
    topological_order,
    validate,
)

from generators import (
    all_topological_orders,
    brute_force_has_cycle,
    random_descriptor_any,
    random_valid_descriptor,
)


def two_service_cycle():
    d = ComposeDescriptor(version="3.8")
    d.services["a"] = ServiceSpec(image="a:1", depends_on=["b"])
    d.services["b"] = ServiceSpec(image="b:1", links=[("a", None)])
    return d


class TestValidate:
    def test_dblog_fixture_warns_only_about_unset_variables(self, dblog):
        report = validate(dblog)
        assert report.errors == []
        assert [f.code for f in report.warnings] == ["unresolved-variable"] * 2
        variables = {f.message.split("'")[1] for f in report.warnings}
        assert variables == {"DEBEZIUM_VERSION", "CF_HOST_IP"}

    def test_empty_services_is_clean(self):
        report = validate(ComposeDescriptor(version="3.8"))
        assert report.errors == [] and report.warnings == []

    def test_two_node_cycle_reported_with_path(self):
        report = validate(two_service_cycle())
        assert len(report.errors) == 1
        finding = report.errors[0]
        assert finding.code == "dependency-cycle"
        assert "a -> b -> a" in finding.message
        # independent check: exhaustive enumeration on the 2-node digraph
        assert brute_force_has_cycle(["a", "b"], {("a", "b"), ("b", "a")})

    def test_dangling_references(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec(image="a:1", depends_on=["ghost"],
                                      links=[("phantom", None)])
        codes = [f.code for f in validate(d).errors]
        assert codes == ["dangling-reference", "dangling-reference"]

    def test_service_without_image_or_build(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec()
        assert [f.code for f in validate(d).errors] == ["no-image-or-build"]

    def test_undeclared_named_volume(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec(
            image="a:1", volumes=[VolumeMount("data", "/data", kind="named")])
        assert [f.code for f in validate(d).errors] == ["undeclared-volume"]

    def test_unknown_keys_warn(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec(image="a:1", unknown_keys={"healthcheck": "x"})
        report = validate(d)
        assert report.errors == []
        assert [f.code for f in report.warnings] == ["unknown-key"]

    def test_report_is_deterministic(self, dblog):
        first = validate(dblog)
        second = validate(dblog)
        assert first.render_lines() == second.render_lines()

    def test_findings_ordered_by_service_then_code(self):
        d = ComposeDescriptor(version="3.8")
        d.services["z-first"] = ServiceSpec(depends_on=["ghost"])
        d.services["a-second"] = ServiceSpec()
        locations = [f.location for f in validate(d).errors]
        assert locations == ["services.z-first.depends_on", "services.z-first",
                             "services.a-second"]


class TestDependencyGraph:
    def test_dblog_edges_and_origins(self, dblog):
        g = dependency_graph(dblog)
        assert g.nodes == ["mysql", "postgres", "dblog", "zookeeper", "kafka"]
        assert g.edges == {
            ("dblog", "mysql"): frozenset({"depends_on"}),
            ("dblog", "postgres"): frozenset({"depends_on"}),
            ("dblog", "zookeeper"): frozenset({"links"}),
            ("kafka", "zookeeper"): frozenset({"depends_on", "links"}),
        }

    def test_single_service(self):
        d = ComposeDescriptor(version="3.8")
        d.services["only"] = ServiceSpec(image="x:1")
        g = dependency_graph(d)
        assert g.nodes == ["only"] and g.edges == {}

    def test_chain_has_exactly_its_two_edges(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec(image="a:1", depends_on=["b"])
        d.services["b"] = ServiceSpec(image="b:1", depends_on=["c"])
        d.services["c"] = ServiceSpec(image="c:1")
        g = dependency_graph(d)
        names = ["a", "b", "c"]
        for s in names:
            for t in names:
                expected = (s, t) in {("a", "b"), ("b", "c")}
                assert ((s, t) in g.edges) is expected

    def test_node_set_equals_service_set(self):
        rng = random.Random(7)
        for _ in range(25):
            d = random_valid_descriptor(rng)
            assert dependency_graph(d).nodes == list(d.services)


class TestTopologicalOrder:
    def test_dblog_order_constraints(self, dblog):
        order = topological_order(dblog)
        assert sorted(order) == sorted(dblog.services)
        assert order.index("zookeeper") < order.index("kafka")
        assert order.index("zookeeper") < order.index("dblog")
        assert order.index("mysql") < order.index("dblog")
        assert order.index("postgres") < order.index("dblog")

    def test_no_edges_keeps_declaration_order(self):
        d = ComposeDescriptor(version="3.8")
        for name in ("x", "y", "z"):
            d.services[name] = ServiceSpec(image=f"{name}:1")
        assert topological_order(d) == ["x", "y", "z"]

    def test_diamond_tie_break(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec(image="a:1", depends_on=["b", "c"])
        d.services["b"] = ServiceSpec(image="b:1", depends_on=["d"])
        d.services["c"] = ServiceSpec(image="c:1", depends_on=["d"])
        d.services["d"] = ServiceSpec(image="d:1")
        order = topological_order(d)
        edges = {("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")}
        assert order in all_topological_orders(["a", "b", "c", "d"], edges)
        assert order == ["d", "b", "c", "a"]

    def test_cycle_raises_with_path(self):
        with pytest.raises(CycleError) as excinfo:
            topological_order(two_service_cycle())
        assert excinfo.value.cycle == ["a", "b"]

    def test_respects_every_edge_on_random_descriptors(self):
        rng = random.Random(21)
        for _ in range(50):
            d = random_valid_descriptor(rng)
            order = topological_order(d)
            assert sorted(order) == sorted(d.services)
            position = {name: i for i, name in enumerate(order)}
            for (source, target) in dependency_graph(d).edges:
                assert position[target] < position[source]


class TestCycleOracle:
    def test_validator_agrees_with_brute_force(self):
        rng = random.Random(2024)
        for _ in range(150):
            d = random_descriptor_any(rng, max_services=5)
            g = dependency_graph(d)
            expected = brute_force_has_cycle(g.nodes, set(g.edges))
            found = any(f.code == "dependency-cycle" for f in validate(d).errors)
            assert found == expected
