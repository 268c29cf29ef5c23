import json
import random

import pytest

from composediag.equivalence import equivalent, project
from composediag.errors import PreconditionError
from composediag.forward import to_diagram
from composediag.model import ComposeDescriptor, ServiceSpec
from composediag.parser import parse_compose
from composediag.reverse import to_descriptor

from conftest import fixture_text
from generators import random_valid_descriptor


class TestProject:
    def test_dblog_projection(self, dblog):
        p = project(dblog)
        assert p.service_names == {"mysql", "postgres", "dblog", "zookeeper", "kafka"}
        assert p.dependency_edges == {("dblog", "mysql"), ("dblog", "postgres"),
                                      ("kafka", "zookeeper")}
        assert p.link_edges == {frozenset({"dblog", "zookeeper"}),
                                frozenset({"kafka", "zookeeper"})}
        assert p.mounts == {("mysql", "db-data"), ("postgres", "db-data"),
                            ("kafka", "/var/run/docker.sock")}
        assert p.network_memberships == frozenset()

    def test_db_projection(self, db):
        p = project(db)
        assert p.service_names == {"db"}
        assert p.mounts == {("db", ".api/db/data")}
        assert p.dependency_edges == p.link_edges == frozenset()

    def test_empty_projection(self):
        p = project(ComposeDescriptor(version="3.8"))
        assert p.service_names == frozenset()
        assert p.mounts == frozenset()

    def test_networks_tracked(self):
        d, _ = parse_compose(fixture_text("react-express-mongo.yaml"))
        p = project(d)
        assert p.network_memberships == {("frontend", "public"), ("server", "public"),
                                         ("server", "private"), ("mongo", "private")}
        assert p.network_names == {"public", "private"}

    def test_invalid_descriptor_rejected(self):
        d = ComposeDescriptor(version="3.8")
        d.services["a"] = ServiceSpec()
        with pytest.raises(PreconditionError):
            project(d)

    def test_invariant_under_declaration_order_and_excluded_fields(self, dblog):
        shuffled = ComposeDescriptor(version="9.9")
        for name in reversed(list(dblog.services)):
            shuffled.services[name] = dblog.services[name]
        shuffled.volumes = dict(dblog.volumes)
        assert project(shuffled) == project(dblog)

        d, _ = parse_compose(fixture_text("dblog.yaml"))
        mysql = d.services["mysql"]
        mysql.image = "different:tag"
        mysql.ports = []
        mysql.environment = [("OTHER", "1")]
        mysql.command = "changed"
        mysql.restart = "always"
        assert project(d) == project(dblog)


class TestEquivalent:
    def test_reflexive(self, dblog):
        report = equivalent(dblog, dblog)
        assert report.equal and report.render_lines() == []

    def test_full_pipeline_keeps_projection(self, dblog):
        regenerated, _ = to_descriptor(to_diagram(dblog))
        assert equivalent(dblog, regenerated).equal

    def test_single_mutation_detected(self, dblog):
        mutated, _ = parse_compose(fixture_text("dblog.yaml"))
        mutated.services["dblog"].depends_on.remove("mysql")
        report = equivalent(dblog, mutated)
        assert not report.equal
        assert report.missing_in_b["dependency_edges"] == {("dblog", "mysql")}
        assert report.missing_in_a["dependency_edges"] == frozenset()
        flipped = equivalent(mutated, dblog)
        assert flipped.missing_in_a["dependency_edges"] == {("dblog", "mysql")}

    def test_symmetry_on_random_pairs(self):
        rng = random.Random(31)
        for _ in range(20):
            a = random_valid_descriptor(rng)
            b = random_valid_descriptor(rng)
            assert equivalent(a, b).equal == equivalent(b, a).equal

    def test_equivalence_relation_on_random_triples(self):
        rng = random.Random(32)
        for _ in range(20):
            base = random_valid_descriptor(rng)
            variant_b, _ = to_descriptor(to_diagram(base))
            variant_c, _ = to_descriptor(to_diagram(variant_b))
            assert equivalent(base, base).equal                      # reflexive
            ab, ba = equivalent(base, variant_b), equivalent(variant_b, base)
            assert ab.equal == ba.equal                              # symmetric
            if ab.equal and equivalent(variant_b, variant_c).equal:  # transitive
                assert equivalent(base, variant_c).equal

    def test_render_lines_format(self, dblog):
        mutated, _ = parse_compose(fixture_text("dblog.yaml"))
        del mutated.services["kafka"]
        mutated.services["dblog"].links = []
        report = equivalent(dblog, mutated)
        lines = report.render_lines()
        assert "service_names: missing in B: kafka" in lines
        assert "dependency_edges: missing in B: kafka -> zookeeper" in lines
        assert "link_edges: missing in B: dblog -- zookeeper" in lines
        assert report.render_lines() == lines  # stable

    def test_json_report(self, dblog):
        mutated, _ = parse_compose(fixture_text("dblog.yaml"))
        mutated.services["mysql"].volumes = []
        payload = json.loads(equivalent(dblog, mutated).to_json())
        assert payload["equal"] is False
        assert {"category": "mounts", "side": "missing_in_b",
                "element": ["mysql", "db-data"]} in payload["differences"]
