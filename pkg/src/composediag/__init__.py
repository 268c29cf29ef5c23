"""Bidirectional docker-compose <-> deployment-diagram toolchain."""

from .dac_emitter import emit_dac, emit_dot
from .dac_parser import parse_dac
from .diagram import (
    Cluster,
    DeploymentDiagram,
    DiagEdge,
    DiagNode,
    Direction,
    Directionality,
    EdgeRole,
    EdgeStyle,
    NodeKind,
    check_wellformed,
    edge_for_role,
    rendering_of_role,
    role_of_rendering,
)
from .equivalence import DiagramProjection, EquivalenceReport, equivalent, project
from .errors import (
    AmbiguityError,
    ComposeDiagError,
    CycleError,
    DacSyntaxError,
    DescriptorSyntaxError,
    PreconditionError,
    ShapeError,
    SourceLocation,
    StructureError,
    UnknownConstructError,
)
from .forward import IconRegistry, TransformOptions, load_icon_registry, to_diagram
from .model import (
    BuildSpec,
    ComposeDescriptor,
    DependencyGraph,
    NetworkDecl,
    PortMapping,
    ServiceSpec,
    ValidationReport,
    VolumeDecl,
    VolumeMount,
    dependency_graph,
    topological_order,
    validate,
)
from .parser import InterpolationEnv, parse_compose, serialize_compose
from .reverse import LossEntry, LossReport, to_descriptor

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "BuildSpec",
    "Cluster",
    "ComposeDescriptor",
    "ComposeDiagError",
    "CycleError",
    "DacSyntaxError",
    "DependencyGraph",
    "DeploymentDiagram",
    "DescriptorSyntaxError",
    "DiagEdge",
    "DiagNode",
    "DiagramProjection",
    "Direction",
    "Directionality",
    "EdgeRole",
    "EdgeStyle",
    "EquivalenceReport",
    "IconRegistry",
    "InterpolationEnv",
    "LossEntry",
    "LossReport",
    "NetworkDecl",
    "NodeKind",
    "PortMapping",
    "PreconditionError",
    "ServiceSpec",
    "ShapeError",
    "SourceLocation",
    "StructureError",
    "TransformOptions",
    "UnknownConstructError",
    "ValidationReport",
    "VolumeDecl",
    "VolumeMount",
    "check_wellformed",
    "dependency_graph",
    "edge_for_role",
    "emit_dac",
    "emit_dot",
    "equivalent",
    "load_icon_registry",
    "parse_compose",
    "parse_dac",
    "project",
    "rendering_of_role",
    "role_of_rendering",
    "serialize_compose",
    "to_descriptor",
    "to_diagram",
    "topological_order",
    "validate",
]
