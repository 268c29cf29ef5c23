import pytest

from composediag.diagram import (
    Cluster,
    DeploymentDiagram,
    DiagEdge,
    DiagNode,
    Directionality,
    EdgeRole,
    EdgeStyle,
    NodeKind,
    check_wellformed,
    edge_for_role,
    rendering_of_role,
    role_of_rendering,
)
from composediag.errors import AmbiguityError
from composediag.forward import to_diagram


class TestStyleTable:
    def test_round_trip_identity_over_all_roles(self):
        for role in EdgeRole:
            assert role_of_rendering(*rendering_of_role(role)) is role

    def test_known_renderings(self):
        assert role_of_rendering(
            Directionality.DIRECTED, EdgeStyle.SOLID, None) is EdgeRole.DEPENDENCY
        assert role_of_rendering(
            Directionality.BIDIRECTED, EdgeStyle.DASHED, "darkgreen") is EdgeRole.MOUNT

    def test_off_table_rendering_is_refused(self):
        with pytest.raises(AmbiguityError):
            role_of_rendering(Directionality.DIRECTED, EdgeStyle.DASHED, "red")

    def test_renderings_are_pairwise_distinct(self):
        renderings = [rendering_of_role(role) for role in EdgeRole]
        assert len(set(renderings)) == len(EdgeRole)


class TestCheckWellformed:
    def test_forward_output_is_wellformed(self, dblog):
        assert check_wellformed(to_diagram(dblog)) == []

    def test_edge_to_unknown_node(self):
        g = DeploymentDiagram(nodes=[DiagNode("a", NodeKind.SERVER, "a")],
                              edges=[edge_for_role("a", "ghost", EdgeRole.DEPENDENCY)])
        violations = check_wellformed(g)
        assert len(violations) == 1 and "ghost" in violations[0]

    def test_style_table_violation(self):
        g = DeploymentDiagram(
            nodes=[DiagNode("a", NodeKind.SERVER, "a"), DiagNode("b", NodeKind.SERVER, "b")],
            edges=[DiagEdge("a", "b", Directionality.DIRECTED, EdgeStyle.DASHED,
                            None, EdgeRole.DEPENDENCY)])
        violations = check_wellformed(g)
        assert len(violations) == 1
        assert "does not belong to role dependency" in violations[0]

    def test_duplicate_node_ids(self):
        g = DeploymentDiagram(nodes=[DiagNode("a", NodeKind.SERVER, "a"),
                                     DiagNode("a", NodeKind.SERVER, "a2")])
        assert any("duplicate node id" in v for v in check_wellformed(g))

    def test_node_in_two_clusters(self):
        g = DeploymentDiagram(
            nodes=[DiagNode("a", NodeKind.SERVER, "a")],
            clusters=[Cluster("x service", ("a",)), Cluster("y service", ("a",))])
        assert any("more than one cluster" in v for v in check_wellformed(g))

    def test_icon_node_requires_name(self):
        g = DeploymentDiagram(nodes=[DiagNode("a", NodeKind.ICON, "a")])
        assert any("no icon name" in v for v in check_wellformed(g))

    def test_cluster_member_must_exist(self):
        g = DeploymentDiagram(clusters=[Cluster("x service", ("missing",))])
        assert any("missing" in v for v in check_wellformed(g))

    def test_empty_diagram_is_wellformed(self):
        assert check_wellformed(DeploymentDiagram()) == []
