"""Influence-operation intelligence toolkit.

Typed object model with structural validation, an in-memory knowledge
graph with analyst queries, STIX 2.1-compatible bundle interchange, and a
CLI for validate/ingest/query/export workflows.
"""

from .model import (
    AttackPattern,
    Campaign,
    Channel,
    Community,
    CyberPersona,
    Event,
    Identifier,
    Incident,
    IooObject,
    LEGAL_TRIPLES,
    Location,
    MediaReference,
    Message,
    Narrative,
    OBJECT_KINDS,
    RELATIONSHIP_KINDS,
    Relationship,
    ThreatActor,
    UserAccount,
    ValidationReport,
    Verdict,
    canonical_type_name,
    kind_of,
    make_identifier,
    validate_object,
    validate_relationship,
)
from .relgraph import KnowledgeGraph
from .vocab import TermVerdict, Vocabulary, VocabularyRegistry, list_vocabularies, lookup_vocabulary, validate_term
from .wire import Bundle, bundle_to_graph, emit_bundle, export_graph, graph_to_bundle, merge_bundle, parse_bundle

__version__ = "0.1.0"

__all__ = [
    "AttackPattern",
    "Bundle",
    "Campaign",
    "Channel",
    "Community",
    "CyberPersona",
    "Event",
    "Identifier",
    "Incident",
    "IooObject",
    "KnowledgeGraph",
    "LEGAL_TRIPLES",
    "Location",
    "MediaReference",
    "Message",
    "Narrative",
    "OBJECT_KINDS",
    "RELATIONSHIP_KINDS",
    "Relationship",
    "TermVerdict",
    "ThreatActor",
    "UserAccount",
    "ValidationReport",
    "Verdict",
    "Vocabulary",
    "VocabularyRegistry",
    "bundle_to_graph",
    "canonical_type_name",
    "emit_bundle",
    "export_graph",
    "graph_to_bundle",
    "kind_of",
    "list_vocabularies",
    "lookup_vocabulary",
    "make_identifier",
    "merge_bundle",
    "parse_bundle",
    "validate_object",
    "validate_relationship",
    "validate_term",
]
