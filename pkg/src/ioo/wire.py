"""STIX 2.1-compatible bundle interchange and graph exports.

Parsing is fail-soft: unrecognized object types pass through verbatim and
malformed records become per-record diagnostics; only a top-level syntax
problem aborts. Emission is canonical: objects sorted by id, keys sorted,
absent optionals omitted, timestamps in RFC 3339 Z form, so equal content
always yields identical bytes.
"""

from __future__ import annotations

import json
import uuid as _uuid
from dataclasses import dataclass

from .model import (
    Identifier,
    IooObject,
    KIND_TO_CLASS,
    MediaReference,
    Relationship,
    format_timestamp,
    kind_for_type_name,
    kind_of,
    parse_timestamp,
)
from .relgraph import (
    DanglingEndpoint,
    DuplicateEdge,
    IllegalRelationship,
    InvalidObject,
    KnowledgeGraph,
    TypeNameMismatch,
)
from .vocab import VocabularyRegistry

# namespace for content-derived bundle ids, so equal graphs always
# serialize to byte-identical snapshots
_BUNDLE_NS = _uuid.UUID("6ba7b837-f1ad-4dd2-90cc-7d4405a0f9a2")


class BundleSyntaxError(ValueError):
    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at byte {position})")
        self.position = position


class NotABundle(ValueError):
    """Top-level document is not a bundle."""


class UnsupportedFormat(ValueError):
    def __init__(self, fmt: str):
        super().__init__(f"unsupported export format {fmt!r}")
        self.format = fmt


@dataclass(frozen=True)
class Diagnostic:
    path: str
    code: str
    message: str
    severity: str = "warning"  # "warning" | "error"


@dataclass(frozen=True)
class ParseDiagnostics:
    warnings: tuple[Diagnostic, ...] = ()
    skipped: int = 0

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.warnings if d.severity == "error")


@dataclass(frozen=True)
class Bundle:
    bundle_id: Identifier
    objects: tuple[tuple[Identifier, IooObject], ...] = ()
    relationships: tuple[Relationship, ...] = ()
    unknown_passthrough: tuple[dict, ...] = ()


# wire field name -> value shape, per object kind (names match the
# dataclass fields, which already follow snake_case wire convention)
_FIELDS: dict[str, tuple[tuple[str, str], ...]] = {
    "incident": (
        ("name", "text"),
        ("description", "text"),
        ("first_seen", "timestamp"),
        ("last_seen", "timestamp"),
        ("objective", "text"),
    ),
    "attack-pattern": (
        ("name", "text"),
        ("description", "text"),
        ("aliases", "text-list"),
        ("external_reference", "text"),
        ("kill_chain_phase", "text"),
    ),
    "campaign": (
        ("name", "text"),
        ("description", "text"),
        ("aliases", "text-list"),
        ("first_seen", "timestamp"),
        ("last_seen", "timestamp"),
        ("objective", "text"),
    ),
    "threat-actor": (
        ("name", "text"),
        ("description", "text"),
        ("threat_actor_type", "text"),
        ("aliases", "text-list"),
        ("first_seen", "timestamp"),
        ("last_seen", "timestamp"),
        ("roles", "text-list"),
        ("goals", "text"),
        ("sophistication", "text"),
        ("resource_level", "text"),
        ("primary_motivations", "text"),
        ("secondary_motivations", "text"),
        ("personal_motivations", "text"),
    ),
    "user-account": (
        ("display_name", "text"),
        ("name", "text"),
        ("age", "integer"),
        ("icon", "media"),
        ("description", "text"),
        ("external_links", "text-list"),
        ("region", "text"),
        ("account_created", "timestamp"),
        ("platform", "text"),
        ("privacy_settings", "text"),
        ("followers", "integer"),
        ("following", "integer"),
        ("rating", "integer"),
        ("privileged", "boolean"),
        ("disabled", "boolean"),
        ("automation", "integer"),
    ),
    "channel": (
        ("name", "text"),
        ("description", "text"),
        ("platform", "text"),
        ("affiliation", "text"),
        ("reach", "text"),
        ("purpose", "text"),
        ("sponsored", "boolean"),
        ("channel_type", "text"),
    ),
    "message": (
        ("name", "text"),
        ("description", "text"),
        ("media_content", "media-list"),
        ("url", "text"),
        ("format", "text"),
    ),
    "cyber-persona": (
        ("name", "text"),
        ("alias", "text-list"),
        ("age", "integer"),
        ("description", "text"),
        ("gender", "text"),
        ("language", "text-list"),
        ("religion", "text"),
        ("occupation", "text"),
        ("interest", "text-list"),
        ("public_opinion", "text"),
        ("affiliation", "text"),
    ),
    "community": (
        ("name", "text"),
        ("description", "text"),
        ("community_type", "text"),
        ("resources", "text-list"),
        ("topic", "text"),
        ("affiliation", "text"),
    ),
    "narrative": (
        ("name", "text"),
        ("description", "text"),
        ("goal", "text"),
        ("topic", "text"),
        ("targeted_public", "text"),
        ("emotion", "text"),
        ("affiliation", "text"),
    ),
    "event": (
        ("name", "text"),
        ("description", "text"),
        ("date", "timestamp"),
    ),
    "location": (
        ("name", "text"),
        ("description", "text"),
        ("latitude", "number"),
        ("longitude", "number"),
        ("precision", "text"),
        ("region", "text"),
        ("country", "text"),
        ("city", "text"),
        ("street_address", "text"),
        ("postal_code", "text"),
    ),
}

_MEDIA_FIELDS = (("url", "text"), ("mime_type", "text"), ("caption", "text"))


class _FieldError(ValueError):
    pass


def _decode_scalar(value, shape: str):
    if shape == "text":
        if not isinstance(value, str):
            raise _FieldError(f"expected string, got {type(value).__name__}")
        return value
    if shape == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise _FieldError(f"expected integer, got {type(value).__name__}")
        return value
    if shape == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _FieldError(f"expected number, got {type(value).__name__}")
        return float(value)
    if shape == "boolean":
        if not isinstance(value, bool):
            raise _FieldError(f"expected boolean, got {type(value).__name__}")
        return value
    if shape == "timestamp":
        if not isinstance(value, str):
            raise _FieldError(f"expected timestamp string, got {type(value).__name__}")
        try:
            return parse_timestamp(value)
        except ValueError as exc:
            raise _FieldError(f"bad timestamp {value!r}: {exc}") from None
    raise AssertionError(f"unhandled shape {shape}")


def _decode_media(value) -> MediaReference:
    if not isinstance(value, dict):
        raise _FieldError(f"expected media object, got {type(value).__name__}")
    if "url" not in value:
        raise _FieldError("media object missing url")
    kwargs = {}
    for name, shape in _MEDIA_FIELDS:
        if name in value:
            kwargs[name] = _decode_scalar(value[name], shape)
    return MediaReference(**kwargs)


def _decode_field(value, shape: str):
    if shape == "text-list":
        if not isinstance(value, list):
            raise _FieldError(f"expected array, got {type(value).__name__}")
        return tuple(_decode_scalar(item, "text") for item in value)
    if shape == "media":
        return _decode_media(value)
    if shape == "media-list":
        if not isinstance(value, list):
            raise _FieldError(f"expected array, got {type(value).__name__}")
        return tuple(_decode_media(item) for item in value)
    return _decode_scalar(value, shape)


def _encode_media(media: MediaReference) -> dict:
    record = {"url": media.url}
    if media.mime_type is not None:
        record["mime_type"] = media.mime_type
    if media.caption is not None:
        record["caption"] = media.caption
    return record


def _encode_field(value, shape: str):
    if shape == "timestamp":
        return format_timestamp(value)
    if shape == "text-list":
        return list(value)
    if shape == "media":
        return _encode_media(value)
    if shape == "media-list":
        return [_encode_media(item) for item in value]
    return value


def encode_object(identifier: Identifier, obj: IooObject) -> dict:
    """Wire record for one object: type, id, and every present field."""
    kind = kind_for_type_name(identifier.type_name)
    record = {"type": identifier.type_name, "id": str(identifier)}
    for name, shape in _FIELDS[kind]:
        value = getattr(obj, name)
        if value is None or value == ():
            continue
        record[name] = _encode_field(value, shape)
    return record


def encode_relationship(rel: Relationship) -> dict:
    record = {
        "type": "relationship",
        "id": str(rel.id),
        "source_ref": str(rel.source),
        "relationship_type": rel.kind,
        "target_ref": str(rel.target),
    }
    if rel.start_time is not None:
        record["start_time"] = format_timestamp(rel.start_time)
    if rel.stop_time is not None:
        record["stop_time"] = format_timestamp(rel.stop_time)
    if rel.description is not None:
        record["description"] = rel.description
    return record


class _DiagnosticLog:
    def __init__(self) -> None:
        self.items: list[Diagnostic] = []

    def warn(self, path: str, code: str, message: str) -> None:
        self.items.append(Diagnostic(path, code, message, "warning"))

    def error(self, path: str, code: str, message: str) -> None:
        self.items.append(Diagnostic(path, code, message, "error"))


def _decode_record_id(record: dict, path: str, log: _DiagnosticLog) -> Identifier | None:
    raw = record.get("id")
    if not isinstance(raw, str):
        log.error(path, "invalid-id", "record has no id string")
        return None
    try:
        identifier = Identifier.parse(raw)
    except ValueError as exc:
        log.error(path, "invalid-id", f"unparseable id {raw!r}: {exc}")
        return None
    if identifier.type_name != record.get("type"):
        log.error(path, "invalid-id", f"id prefix {identifier.type_name!r} does not match type")
        return None
    return identifier


def _decode_object(record: dict, path: str, log: _DiagnosticLog) -> tuple[Identifier, IooObject] | None:
    kind = kind_for_type_name(record["type"])
    identifier = _decode_record_id(record, path, log)
    if identifier is None:
        return None
    known = dict(_FIELDS[kind])
    kwargs = {}
    bad = False
    for key, value in record.items():
        if key in ("type", "id"):
            continue
        shape = known.get(key)
        if shape is None:
            log.warn(path, "unknown-field", f"ignoring unrecognized key {key!r}")
            continue
        if value is None:
            log.warn(path, "null-field", f"{key} is null; treating as absent")
            continue
        try:
            kwargs[key] = _decode_field(value, shape)
        except _FieldError as exc:
            log.error(path, "invalid-field", f"{key}: {exc}")
            bad = True
    if bad:
        return None
    cls = KIND_TO_CLASS[kind]
    try:
        obj = cls(**kwargs)
    except TypeError as exc:
        # mandatory constructor argument absent on the wire
        log.error(path, "invalid-object", str(exc))
        return None
    return identifier, obj


def _decode_relationship(record: dict, path: str, log: _DiagnosticLog) -> Relationship | None:
    identifier = _decode_record_id(record, path, log)
    if identifier is None:
        return None
    refs = {}
    for key in ("source_ref", "target_ref"):
        raw = record.get(key)
        if not isinstance(raw, str):
            log.error(path, "invalid-field", f"{key} missing or not a string")
            return None
        try:
            refs[key] = Identifier.parse(raw)
        except ValueError as exc:
            log.error(path, "invalid-field", f"{key} {raw!r}: {exc}")
            return None
    rel_type = record.get("relationship_type")
    if not isinstance(rel_type, str):
        log.error(path, "invalid-field", "relationship_type missing or not a string")
        return None
    kwargs = {}
    bad = False
    for key, shape in (("start_time", "timestamp"), ("stop_time", "timestamp"), ("description", "text")):
        value = record.get(key)
        if value is None:
            continue
        try:
            kwargs[key] = _decode_field(value, shape)
        except _FieldError as exc:
            log.error(path, "invalid-field", f"{key}: {exc}")
            bad = True
    for key in record:
        if key not in ("type", "id", "source_ref", "relationship_type", "target_ref",
                       "start_time", "stop_time", "description"):
            log.warn(path, "unknown-field", f"ignoring unrecognized key {key!r}")
    if bad:
        return None
    return Relationship(identifier, refs["source_ref"], rel_type, refs["target_ref"], **kwargs)


def parse_bundle(data: bytes | str) -> tuple[Bundle, ParseDiagnostics]:
    """Decode a UTF-8 JSON bundle document, fail-soft per record."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BundleSyntaxError(f"not UTF-8: {exc.reason}", exc.start) from None
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleSyntaxError(exc.msg, exc.pos) from None
    if not isinstance(doc, dict) or doc.get("type") != "bundle":
        raise NotABundle('top-level object must carry type:"bundle"')
    records = doc.get("objects", [])
    if not isinstance(records, list):
        raise NotABundle("objects must be an array")

    log = _DiagnosticLog()
    raw_id = doc.get("id")
    bundle_id = None
    if isinstance(raw_id, str):
        try:
            bundle_id = Identifier.parse(raw_id)
            if bundle_id.type_name != "bundle":
                bundle_id = None
        except ValueError:
            bundle_id = None
    if bundle_id is None:
        bundle_id = Identifier("bundle", _uuid.uuid4())
        log.warn("$", "missing-bundle-id", "bundle id absent or malformed; minted a fresh one")

    objects: list[tuple[Identifier, IooObject]] = []
    relationships: list[Relationship] = []
    passthrough: list[dict] = []
    seen: set[Identifier] = set()
    for position, record in enumerate(records):
        path = f"objects[{position}]"
        if not isinstance(record, dict) or not isinstance(record.get("type"), str):
            log.error(path, "invalid-object", "record is not an object with a type string")
            continue
        type_name = record["type"]
        if type_name == "relationship":
            rel = _decode_relationship(record, path, log)
            if rel is None:
                continue
            if rel.id in seen:
                log.warn(path, "duplicate-id", f"{rel.id} already appeared; keeping the first")
                continue
            seen.add(rel.id)
            relationships.append(rel)
        elif kind_for_type_name(type_name) is not None:
            decoded = _decode_object(record, path, log)
            if decoded is None:
                continue
            if decoded[0] in seen:
                log.warn(path, "duplicate-id", f"{decoded[0]} already appeared; keeping the first")
                continue
            seen.add(decoded[0])
            objects.append(decoded)
        else:
            log.warn(path, "unknown-type", f"type {type_name!r} is not recognized; passing through")
            passthrough.append(record)

    bundle = Bundle(bundle_id, tuple(objects), tuple(relationships), tuple(passthrough))
    return bundle, ParseDiagnostics(tuple(log.items), len(passthrough))


def emit_bundle(bundle: Bundle) -> bytes:
    """Canonical bytes for a bundle; equal bundles emit identical bytes."""
    records = [encode_object(identifier, obj) for identifier, obj in bundle.objects]
    records += [encode_relationship(rel) for rel in bundle.relationships]
    records.sort(key=lambda record: record["id"])
    records += list(bundle.unknown_passthrough)
    doc = {"type": "bundle", "id": str(bundle.bundle_id), "objects": records}
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _content_id(records: list[dict]) -> Identifier:
    fingerprint = json.dumps(records, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return Identifier("bundle", _uuid.uuid5(_BUNDLE_NS, fingerprint))


def graph_to_bundle(graph: KnowledgeGraph) -> Bundle:
    """Lossless bundle for a whole graph, with a content-derived bundle id."""
    objects = tuple(graph.objects())
    relationships = tuple(graph.relationships())
    records = [encode_object(identifier, obj) for identifier, obj in objects]
    records += [encode_relationship(rel) for rel in relationships]
    return Bundle(_content_id(records), objects, relationships)


@dataclass(frozen=True)
class MergeStats:
    objects_inserted: int = 0
    objects_updated: int = 0
    objects_unchanged: int = 0
    edges_inserted: int = 0
    edges_updated: int = 0
    edges_unchanged: int = 0
    skipped: int = 0


def merge_bundle(
    graph: KnowledgeGraph,
    bundle: Bundle,
    registry: VocabularyRegistry | None = None,
) -> tuple[MergeStats, ParseDiagnostics]:
    """Upsert a bundle's content into a graph, objects before edges.

    Records the graph refuses (invalid objects, illegal or dangling edges,
    window duplicates, passthrough) become diagnostics, never failures.
    """
    log = _DiagnosticLog()
    counts = {"inserted": 0, "updated": 0, "unchanged": 0}
    edge_counts = {"inserted": 0, "updated": 0, "unchanged": 0}
    skipped = len(bundle.unknown_passthrough)
    for identifier, obj in bundle.objects:
        path = str(identifier)
        try:
            result = graph.insert_object(obj, identifier, registry)
        except InvalidObject as exc:
            for finding in exc.report.errors:
                log.error(path, finding.code, finding.message)
            skipped += 1
            continue
        except TypeNameMismatch as exc:
            log.error(path, "type-name-mismatch", str(exc))
            skipped += 1
            continue
        counts[result.outcome] += 1
        for finding in result.warnings:
            log.warn(path, finding.code, finding.message)
    for rel in bundle.relationships:
        path = str(rel.id)
        try:
            result = graph.insert_relationship(rel, registry)
        except DanglingEndpoint as exc:
            log.warn(path, "dangling-endpoint", str(exc))
            skipped += 1
            continue
        except IllegalRelationship as exc:
            log.warn(path, "illegal-relationship", str(exc))
            skipped += 1
            continue
        except DuplicateEdge as exc:
            log.warn(path, "duplicate-edge", str(exc))
            skipped += 1
            continue
        edge_counts[result.outcome] += 1
        for finding in result.warnings:
            log.warn(path, finding.code, finding.message)
    stats = MergeStats(
        counts["inserted"],
        counts["updated"],
        counts["unchanged"],
        edge_counts["inserted"],
        edge_counts["updated"],
        edge_counts["unchanged"],
        skipped,
    )
    return stats, ParseDiagnostics(tuple(log.items), skipped)


def bundle_to_graph(
    bundle: Bundle, registry: VocabularyRegistry | None = None
) -> tuple[KnowledgeGraph, ParseDiagnostics]:
    """Fresh graph from a bundle; refused records become diagnostics."""
    graph = KnowledgeGraph()
    _, diagnostics = merge_bundle(graph, bundle, registry)
    return graph, diagnostics


def export_graph(graph: KnowledgeGraph, fmt: str) -> bytes:
    """Render a graph as a plain edge list ("triples") or DOT ("viz")."""
    if fmt == "triples":
        lines = sorted(
            f"{rel.source} {rel.kind} {rel.target}\n" for rel in graph.relationships()
        )
        return "".join(lines).encode("utf-8")
    if fmt == "viz":
        out = ["digraph ioo {\n"]
        for identifier, obj in graph.objects():
            out.append(f'  "{identifier}" [label="{kind_of(obj)}"];\n')
        for rel in graph.relationships():
            out.append(f'  "{rel.source}" -> "{rel.target}" [label="{rel.kind}"];\n')
        out.append("}\n")
        return "".join(out).encode("utf-8")
    raise UnsupportedFormat(fmt)
