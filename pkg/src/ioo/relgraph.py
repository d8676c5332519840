"""In-memory knowledge graph over validated objects and relationships.

The graph refuses anything that would break referential integrity or the
relationship legality matrix, and answers the analyst queries the ontology
exists for: attribution, targeting, amplification reach, narrative
audience, and the account/message footprint behind a persona or community.

Single-writer, multiple-reader: mutations need exclusive access, queries
are read-only and may run concurrently between mutations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Finding,
    Identifier,
    IooObject,
    OBJECT_KINDS,
    RELATIONSHIP_KINDS,
    Relationship,
    ValidationReport,
    canonical_type_name,
    kind_of,
    validate_object,
    validate_relationship,
)
from .vocab import VocabularyRegistry


class GraphError(Exception):
    """Base class for graph mutation and query failures."""


class NotFound(GraphError):
    def __init__(self, identifier: Identifier):
        super().__init__(f"no object {identifier}")
        self.identifier = identifier


class WrongKind(GraphError):
    def __init__(self, identifier: Identifier, expected: tuple[str, ...], actual: str):
        super().__init__(f"{identifier} is a {actual}, expected one of {', '.join(expected)}")
        self.identifier = identifier
        self.expected = expected
        self.actual = actual


class InvalidObject(GraphError):
    def __init__(self, report: ValidationReport):
        details = "; ".join(f.message for f in report.errors)
        super().__init__(f"object failed validation: {details}")
        self.report = report


class TypeNameMismatch(GraphError):
    def __init__(self, identifier: Identifier, kind: str):
        super().__init__(f"id {identifier} does not match object kind {kind}")
        self.identifier = identifier
        self.kind = kind


class DanglingEndpoint(GraphError):
    def __init__(self, side: str, rel: Relationship):
        endpoint = rel.source if side == "source" else rel.target
        super().__init__(f"relationship {rel.id} {side} {endpoint} is not in the graph")
        self.side = side
        self.rel = rel


class IllegalRelationship(GraphError):
    def __init__(self, triple: tuple[str, str, str], report: ValidationReport):
        details = "; ".join(f.message for f in report.errors)
        super().__init__(f"illegal relationship {triple}: {details}")
        self.triple = triple
        self.report = report


class DuplicateEdge(GraphError):
    def __init__(self, rel: Relationship, existing: Identifier):
        super().__init__(
            f"edge {rel.id} duplicates {existing} (same source, kind, target, and window)"
        )
        self.rel = rel
        self.existing = existing


class WouldDangle(GraphError):
    def __init__(self, identifier: Identifier, edge_count: int):
        super().__init__(f"{identifier} still has {edge_count} incident edge(s); use cascade")
        self.identifier = identifier
        self.edge_count = edge_count


@dataclass(frozen=True)
class InsertResult:
    outcome: str  # "inserted" | "updated" | "unchanged"
    warnings: tuple[Finding, ...] = ()


@dataclass(frozen=True)
class Audience:
    communities: tuple[Identifier, ...]
    personas: tuple[Identifier, ...]


@dataclass(frozen=True)
class Footprint:
    accounts: tuple[Identifier, ...]
    messages: tuple[Identifier, ...]


@dataclass(frozen=True)
class GraphStats:
    objects_by_kind: dict[str, int]
    edges_by_kind: dict[str, int]
    object_total: int
    edge_total: int


def _sorted_ids(ids: set[Identifier]) -> tuple[Identifier, ...]:
    return tuple(sorted(ids, key=str))


def _window_key(rel: Relationship) -> tuple:
    return (rel.source, rel.kind, rel.target, rel.start_time, rel.stop_time)


class KnowledgeGraph:
    def __init__(self) -> None:
        self._objects: dict[Identifier, IooObject] = {}
        self._edges: dict[Identifier, Relationship] = {}
        # adjacency: node id -> relationship kind -> edge ids
        self._out: dict[Identifier, dict[str, set[Identifier]]] = {}
        self._in: dict[Identifier, dict[str, set[Identifier]]] = {}
        # (source, kind, target, start, stop) -> edge id, for duplicate checks
        self._windows: dict[tuple, Identifier] = {}

    # -- introspection ------------------------------------------------------

    def __contains__(self, identifier: Identifier) -> bool:
        return identifier in self._objects

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self._objects == other._objects and self._edges == other._edges

    def __len__(self) -> int:
        return len(self._objects)

    @property
    def object_count(self) -> int:
        return len(self._objects)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def get(self, identifier: Identifier) -> IooObject:
        try:
            return self._objects[identifier]
        except KeyError:
            raise NotFound(identifier) from None

    def kind_at(self, identifier: Identifier) -> str:
        return kind_of(self.get(identifier))

    def objects(self) -> list[tuple[Identifier, IooObject]]:
        """All objects, sorted by id."""
        return sorted(self._objects.items(), key=lambda item: str(item[0]))

    def relationships(self) -> list[Relationship]:
        """All edges, sorted by edge id."""
        return sorted(self._edges.values(), key=lambda rel: str(rel.id))

    def copy(self) -> KnowledgeGraph:
        # object/edge values are immutable, so shallow copies suffice
        dup = KnowledgeGraph()
        dup._objects = dict(self._objects)
        dup._edges = dict(self._edges)
        dup._out = {node: {k: set(v) for k, v in kinds.items()} for node, kinds in self._out.items()}
        dup._in = {node: {k: set(v) for k, v in kinds.items()} for node, kinds in self._in.items()}
        dup._windows = dict(self._windows)
        return dup

    # -- mutation -----------------------------------------------------------

    def insert_object(
        self,
        obj: IooObject,
        identifier: Identifier,
        registry: VocabularyRegistry | None = None,
    ) -> InsertResult:
        """Insert or upsert one object. Idempotent on identical (id, object)."""
        report = validate_object(obj, identifier, registry)
        if not report.ok:
            raise InvalidObject(report)
        if identifier.type_name != canonical_type_name(kind_of(obj)):
            raise TypeNameMismatch(identifier, kind_of(obj))
        existing = self._objects.get(identifier)
        if existing == obj:
            return InsertResult("unchanged", report.warnings)
        self._objects[identifier] = obj
        return InsertResult("updated" if existing is not None else "inserted", report.warnings)

    def insert_relationship(
        self, rel: Relationship, registry: VocabularyRegistry | None = None
    ) -> InsertResult:
        """Insert one edge; both endpoints must already exist.

        Repeats of the same (source, kind, target) pair need distinct ids
        and distinct validity windows; exact window duplicates are rejected.
        """
        del registry  # edges carry no vocabulary-backed attributes
        if rel.source not in self._objects:
            raise DanglingEndpoint("source", rel)
        if rel.target not in self._objects:
            raise DanglingEndpoint("target", rel)
        source_kind = self.kind_at(rel.source)
        target_kind = self.kind_at(rel.target)
        report = validate_relationship(rel, source_kind, target_kind)
        if not report.ok:
            raise IllegalRelationship((source_kind, rel.kind, target_kind), report)
        existing = self._edges.get(rel.id)
        if existing == rel:
            return InsertResult("unchanged", report.warnings)
        window = _window_key(rel)
        holder = self._windows.get(window)
        if holder is not None and holder != rel.id:
            raise DuplicateEdge(rel, holder)
        if existing is not None:
            self._unindex(existing)
        self._edges[rel.id] = rel
        self._windows[window] = rel.id
        self._out.setdefault(rel.source, {}).setdefault(rel.kind, set()).add(rel.id)
        self._in.setdefault(rel.target, {}).setdefault(rel.kind, set()).add(rel.id)
        return InsertResult("updated" if existing is not None else "inserted", report.warnings)

    def remove_object(self, identifier: Identifier, cascade: bool = False) -> tuple[Relationship, ...]:
        """Remove an object; with cascade, also drop every incident edge."""
        if identifier not in self._objects:
            raise NotFound(identifier)
        incident_ids: set[Identifier] = set()
        for kinds in (self._out.get(identifier, {}), self._in.get(identifier, {})):
            for edge_ids in kinds.values():
                incident_ids |= edge_ids
        if incident_ids and not cascade:
            raise WouldDangle(identifier, len(incident_ids))
        removed = tuple(self._edges[edge_id] for edge_id in sorted(incident_ids, key=str))
        for rel in removed:
            self._unindex(rel)
            del self._edges[rel.id]
        del self._objects[identifier]
        self._out.pop(identifier, None)
        self._in.pop(identifier, None)
        return removed

    def _unindex(self, rel: Relationship) -> None:
        for index, node in ((self._out, rel.source), (self._in, rel.target)):
            edge_ids = index.get(node, {}).get(rel.kind)
            if edge_ids is not None:
                edge_ids.discard(rel.id)
        if self._windows.get(_window_key(rel)) == rel.id:
            del self._windows[_window_key(rel)]

    # -- adjacency ----------------------------------------------------------

    def _edges_at(self, index: dict, node: Identifier, kind: str | None) -> list[Relationship]:
        kinds = index.get(node, {})
        if kind is not None:
            edge_ids = kinds.get(kind, set())
        else:
            edge_ids = set().union(*kinds.values()) if kinds else set()
        return [self._edges[edge_id] for edge_id in edge_ids]

    def out_edges(self, node: Identifier, kind: str | None = None) -> list[Relationship]:
        return sorted(self._edges_at(self._out, node, kind), key=lambda rel: str(rel.id))

    def in_edges(self, node: Identifier, kind: str | None = None) -> list[Relationship]:
        return sorted(self._edges_at(self._in, node, kind), key=lambda rel: str(rel.id))

    def neighbors(
        self,
        identifier: Identifier,
        direction: str = "both",
        kind: str | None = None,
    ) -> list[tuple[Relationship, Identifier]]:
        """Edges incident to one node with the node at the far end of each."""
        if direction not in ("out", "in", "both"):
            raise ValueError(f"direction must be out, in, or both, not {direction!r}")
        self.get(identifier)
        pairs: list[tuple[Relationship, Identifier]] = []
        if direction in ("out", "both"):
            pairs += [(rel, rel.target) for rel in self._edges_at(self._out, identifier, kind)]
        if direction in ("in", "both"):
            pairs += [(rel, rel.source) for rel in self._edges_at(self._in, identifier, kind)]
        return sorted(pairs, key=lambda pair: str(pair[0].id))

    # -- analyst queries ----------------------------------------------------

    def _require_kind(self, identifier: Identifier, allowed: tuple[str, ...]) -> str:
        actual = self.kind_at(identifier)
        if actual not in allowed:
            raise WrongKind(identifier, allowed, actual)
        return actual

    def attribution_of(self, identifier: Identifier) -> tuple[Identifier, ...]:
        """Threat actors behind an incident or campaign.

        For an incident this includes actors attributed to any campaign the
        incident is part of.
        """
        kind = self._require_kind(identifier, ("incident", "campaign"))
        actors = {rel.target for rel in self.out_edges(identifier, "attributed-to")}
        if kind == "incident":
            for part in self.out_edges(identifier, "part-of"):
                actors |= {rel.target for rel in self.out_edges(part.target, "attributed-to")}
        return _sorted_ids(actors)

    def targets_of(self, identifier: Identifier, transitive: bool = False) -> tuple[Identifier, ...]:
        """What a threat entity aims at.

        Transitive mode also unions the targets of owned structures: an
        actor covers its attributed campaigns and incidents, a campaign its
        member incidents. Nothing is inferred through channels or accounts.
        """
        self._require_kind(identifier, ("incident", "campaign", "threat-actor"))
        return _sorted_ids(self._targets(identifier, transitive))

    def _targets(self, identifier: Identifier, transitive: bool) -> set[Identifier]:
        found = {rel.target for rel in self.out_edges(identifier, "targets")}
        if transitive:
            kind = self.kind_at(identifier)
            if kind == "threat-actor":
                for rel in self.in_edges(identifier, "attributed-to"):
                    found |= self._targets(rel.source, True)
            elif kind == "campaign":
                for rel in self.in_edges(identifier, "part-of"):
                    found |= self._targets(rel.source, True)
        return found

    def amplification_closure(self, identifier: Identifier) -> tuple[Identifier, ...]:
        """Channels and messages transitively boosted from one channel.

        Follows amplifies edges only; cycles terminate, and the start node
        appears only when a cycle reaches back to it.
        """
        self._require_kind(identifier, ("channel",))
        reached: set[Identifier] = set()
        frontier = [identifier]
        while frontier:
            next_frontier = []
            for node in frontier:
                for rel in self._edges_at(self._out, node, "amplifies"):
                    if rel.target not in reached:
                        reached.add(rel.target)
                        next_frontier.append(rel.target)
            frontier = next_frontier
        return _sorted_ids(reached)

    def audience_of(self, identifier: Identifier) -> Audience:
        """Communities holding a narrative and personas supporting it.

        Personas include direct supporters and the members of every
        returned community.
        """
        self._require_kind(identifier, ("narrative",))
        communities = {rel.source for rel in self.in_edges(identifier, "has")}
        personas = {rel.source for rel in self.in_edges(identifier, "supports")}
        for community in communities:
            personas |= {rel.source for rel in self.in_edges(community, "member-of")}
        return Audience(_sorted_ids(communities), _sorted_ids(personas))

    def footprint_of(self, identifier: Identifier) -> Footprint:
        """Accounts representing a persona/community and the messages they published."""
        self._require_kind(identifier, ("cyber-persona", "community"))
        accounts = {rel.source for rel in self.in_edges(identifier, "belongs-to")}
        messages: set[Identifier] = set()
        for account in accounts:
            messages |= {rel.target for rel in self._edges_at(self._out, account, "publishes")}
        return Footprint(_sorted_ids(accounts), _sorted_ids(messages))

    def stats(self) -> GraphStats:
        objects_by_kind = {kind: 0 for kind in OBJECT_KINDS}
        for obj in self._objects.values():
            objects_by_kind[kind_of(obj)] += 1
        edges_by_kind = {kind: 0 for kind in RELATIONSHIP_KINDS}
        for rel in self._edges.values():
            edges_by_kind[rel.kind] += 1
        return GraphStats(objects_by_kind, edges_by_kind, len(self._objects), len(self._edges))
