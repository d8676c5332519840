"""Object model for influence-operation intelligence.

Twelve object kinds spanning three domains (threat, channel, social), a
typed relationship edge, STIX-style identifiers, and structural validation
of single objects and single relationships. All types are immutable
values; validation is pure and reports findings instead of raising.
"""

from __future__ import annotations

import re
import uuid as _uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Union
from urllib.parse import urlparse

from . import vocab as _vocab
from .vocab import MalformedTerm, TermVerdict, VocabularyRegistry

# ---------------------------------------------------------------------------
# timestamps

_DATE_ONLY_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp (or bare date, taken as midnight UTC)."""
    text = value.strip()
    if _DATE_ONLY_RE.match(text):
        text += "T00:00:00+00:00"
    elif text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    """Render as RFC 3339 UTC with millisecond precision and a Z suffix."""
    value = value.astimezone(timezone.utc) if value.tzinfo else value.replace(tzinfo=timezone.utc)
    return value.strftime("%Y-%m-%dT%H:%M:%S.") + f"{value.microsecond // 1000:03d}Z"


def _coerce_timestamp(value: datetime | str | None) -> datetime | None:
    # All stored timestamps are UTC at millisecond precision so that wire
    # round trips are exact.
    if value is None:
        return None
    if isinstance(value, str):
        value = parse_timestamp(value)
    elif value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    else:
        value = value.astimezone(timezone.utc)
    return value.replace(microsecond=(value.microsecond // 1000) * 1000)


# ---------------------------------------------------------------------------
# identifiers

OBJECT_KINDS = (
    "attack-pattern",
    "campaign",
    "channel",
    "community",
    "cyber-persona",
    "event",
    "incident",
    "location",
    "message",
    "narrative",
    "threat-actor",
    "user-account",
)

# Kinds imported from STIX 2.1 or the Filigran extension keep their wire
# names; kinds new to this ontology get the x-ioo- prefix.
_WIRE_NAME = {
    "attack-pattern": "attack-pattern",
    "campaign": "campaign",
    "channel": "channel",
    "community": "x-ioo-community",
    "cyber-persona": "x-ioo-cyber-persona",
    "event": "event",
    "incident": "incident",
    "location": "location",
    "message": "x-ioo-message",
    "narrative": "narrative",
    "threat-actor": "threat-actor",
    "user-account": "user-account",
}
_KIND_FOR_WIRE = {wire: kind for kind, wire in _WIRE_NAME.items()}

# "relationship" ids edges, "bundle" ids interchange documents.
ID_TYPE_NAMES = frozenset(_WIRE_NAME.values()) | {"relationship", "bundle"}


class UnknownTypeName(ValueError):
    """Type name is not one of the canonical identifier prefixes."""


def canonical_type_name(kind: str) -> str:
    """Wire type name for an object kind."""
    try:
        return _WIRE_NAME[kind]
    except KeyError:
        raise ValueError(f"unknown object kind {kind!r}") from None


def kind_for_type_name(type_name: str) -> str | None:
    """Object kind for a wire type name, or None for relationship/bundle/unknown."""
    return _KIND_FOR_WIRE.get(type_name)


@dataclass(frozen=True, order=True)
class Identifier:
    """Globally unique reference: canonical type name plus a UUID."""

    type_name: str
    uuid: _uuid.UUID

    def __post_init__(self) -> None:
        if self.type_name not in ID_TYPE_NAMES:
            raise UnknownTypeName(self.type_name)
        if not isinstance(self.uuid, _uuid.UUID):
            object.__setattr__(self, "uuid", _uuid.UUID(str(self.uuid)))

    def __str__(self) -> str:
        return f"{self.type_name}--{self.uuid}"

    @classmethod
    def parse(cls, text: str) -> Identifier:
        type_name, sep, raw = text.partition("--")
        if not sep:
            raise ValueError(f"identifier {text!r} has no '--' separator")
        return cls(type_name, _uuid.UUID(raw))


def make_identifier(type_name: str, uuid: _uuid.UUID | str | None = None) -> Identifier:
    """Mint an identifier, generating a fresh random UUID when none is given."""
    if type_name not in ID_TYPE_NAMES:
        raise UnknownTypeName(type_name)
    return Identifier(type_name, _uuid.UUID(str(uuid)) if uuid is not None else _uuid.uuid4())


# ---------------------------------------------------------------------------
# object types

def _freeze(obj: object, *names: str) -> None:
    for name in names:
        value = getattr(obj, name)
        if not isinstance(value, tuple):
            object.__setattr__(obj, name, tuple(value))


def _freeze_times(obj: object, *names: str) -> None:
    for name in names:
        object.__setattr__(obj, name, _coerce_timestamp(getattr(obj, name)))


@dataclass(frozen=True)
class MediaReference:
    """Flat reference to a media asset: URL plus optional MIME type and caption."""

    url: str
    mime_type: str | None = None
    caption: str | None = None


@dataclass(frozen=True)
class Incident:
    """One coordinated group of actions pursuing an objective against targets."""

    name: str
    description: str | None = None
    first_seen: datetime | None = None
    last_seen: datetime | None = None
    objective: str | None = None

    def __post_init__(self) -> None:
        _freeze_times(self, "first_seen", "last_seen")


@dataclass(frozen=True)
class AttackPattern:
    """A manipulation technique, optionally tied to a DISARM technique id."""

    name: str
    description: str | None = None
    aliases: tuple[str, ...] = ()
    external_reference: str | None = None
    kill_chain_phase: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "aliases")


@dataclass(frozen=True)
class Campaign:
    """A grouping of incidents run over time against specific targets."""

    name: str
    description: str | None = None
    aliases: tuple[str, ...] = ()
    first_seen: datetime | None = None
    last_seen: datetime | None = None
    objective: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "aliases")
        _freeze_times(self, "first_seen", "last_seen")


@dataclass(frozen=True)
class ThreatActor:
    """An individual, group, or organization running influence activity."""

    name: str
    description: str | None = None
    threat_actor_type: str | None = None
    aliases: tuple[str, ...] = ()
    first_seen: datetime | None = None
    last_seen: datetime | None = None
    roles: tuple[str, ...] = ()
    goals: str | None = None
    sophistication: str | None = None
    resource_level: str | None = None
    primary_motivations: str | None = None
    secondary_motivations: str | None = None
    personal_motivations: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "aliases", "roles")
        _freeze_times(self, "first_seen", "last_seen")


@dataclass(frozen=True)
class UserAccount:
    """A platform account; a directly observable artifact."""

    display_name: str
    name: str | None = None
    age: int | None = None
    icon: MediaReference | None = None
    description: str | None = None
    external_links: tuple[str, ...] = ()
    region: str | None = None
    account_created: datetime | None = None
    platform: str | None = None
    privacy_settings: str | None = None
    followers: int | None = None
    following: int | None = None
    rating: int | None = None
    privileged: bool | None = None
    disabled: bool | None = None
    automation: int | None = None

    def __post_init__(self) -> None:
        _freeze(self, "external_links")
        _freeze_times(self, "account_created")


@dataclass(frozen=True)
class Channel:
    """A medium through which messages are published and amplified."""

    name: str
    description: str | None = None
    platform: str | None = None
    affiliation: str | None = None
    reach: str | None = None
    purpose: str | None = None
    sponsored: bool | None = None
    channel_type: str | None = None


@dataclass(frozen=True)
class Message:
    """A unit of content sent to produce an effect; a directly observable artifact."""

    name: str
    description: str | None = None
    media_content: tuple[MediaReference, ...] = ()
    url: str | None = None
    format: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "media_content")


@dataclass(frozen=True)
class CyberPersona:
    """The virtual identity behind one or more user accounts."""

    name: str
    alias: tuple[str, ...] = ()
    age: int | None = None
    description: str | None = None
    gender: str | None = None
    language: tuple[str, ...] = ()
    religion: str | None = None
    occupation: str | None = None
    interest: tuple[str, ...] = ()
    public_opinion: str | None = None
    affiliation: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "alias", "language", "interest")


@dataclass(frozen=True)
class Community:
    """A group of personas sharing values, interests, or opinions."""

    name: str
    description: str | None = None
    community_type: str | None = None
    resources: tuple[str, ...] = ()
    topic: str | None = None
    affiliation: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "resources")


@dataclass(frozen=True)
class Narrative:
    """A coherent sequence of ideas shaping how audiences read events."""

    name: str
    description: str | None = None
    goal: str | None = None
    topic: str | None = None
    targeted_public: str | None = None
    emotion: str | None = None
    affiliation: str | None = None


@dataclass(frozen=True)
class Event:
    """A real-world occurrence providing context for activity."""

    name: str
    description: str | None = None
    date: datetime | None = None

    def __post_init__(self) -> None:
        _freeze_times(self, "date")


@dataclass(frozen=True)
class Location:
    """A geographic place, by coordinates and/or civic address."""

    name: str
    description: str | None = None
    latitude: float | None = None
    longitude: float | None = None
    precision: str | None = None
    region: str | None = None
    country: str | None = None
    city: str | None = None
    street_address: str | None = None
    postal_code: str | None = None


IooObject = Union[
    AttackPattern,
    Campaign,
    Channel,
    Community,
    CyberPersona,
    Event,
    Incident,
    Location,
    Message,
    Narrative,
    ThreatActor,
    UserAccount,
]

KIND_TO_CLASS: dict[str, type] = {
    "attack-pattern": AttackPattern,
    "campaign": Campaign,
    "channel": Channel,
    "community": Community,
    "cyber-persona": CyberPersona,
    "event": Event,
    "incident": Incident,
    "location": Location,
    "message": Message,
    "narrative": Narrative,
    "threat-actor": ThreatActor,
    "user-account": UserAccount,
}
CLASS_TO_KIND = {cls: kind for kind, cls in KIND_TO_CLASS.items()}


def kind_of(obj: IooObject) -> str:
    try:
        return CLASS_TO_KIND[type(obj)]
    except KeyError:
        raise ValueError(f"{type(obj).__name__} is not an ontology object type") from None


# ---------------------------------------------------------------------------
# relationships

RELATIONSHIP_KINDS = (
    "amplifies",
    "attributed-to",
    "belongs-to",
    "has",
    "located-at",
    "member-of",
    "part-of",
    "publishes",
    "related-to",
    "supports",
    "targets",
    "uses",
)

_THREAT_ENTITIES = ("incident", "campaign", "threat-actor")
_TARGETABLE = ("cyber-persona", "community", "narrative", "event", "location")

# Strict edge semantics; anything else must travel as related-to, which
# validates with a warning instead of failing.
_MATRIX_ROWS: tuple[tuple[str, str, tuple[str, ...]], ...] = (
    ("incident", "uses", ("attack-pattern", "channel", "user-account")),
    ("threat-actor", "uses", ("attack-pattern", "channel", "user-account")),
    ("incident", "attributed-to", ("threat-actor",)),
    ("campaign", "attributed-to", ("threat-actor",)),
    ("incident", "part-of", ("campaign",)),
    ("incident", "targets", _TARGETABLE),
    ("campaign", "targets", _TARGETABLE),
    ("threat-actor", "targets", _TARGETABLE),
    ("channel", "publishes", ("message",)),
    ("user-account", "publishes", ("message",)),
    ("channel", "amplifies", ("channel", "message")),
    ("user-account", "belongs-to", ("cyber-persona", "community")),
    ("cyber-persona", "member-of", ("community",)),
    ("cyber-persona", "supports", ("narrative",)),
    ("community", "has", ("narrative",)),
    ("event", "located-at", ("location",)),
    ("cyber-persona", "located-at", ("location",)),
    ("community", "located-at", ("location",)),
    ("threat-actor", "located-at", ("location",)),
)

LEGAL_TRIPLES: frozenset[tuple[str, str, str]] = frozenset(
    (source, kind, target) for source, kind, targets in _MATRIX_ROWS for target in targets
)


@dataclass(frozen=True)
class Relationship:
    """Typed directed edge between two objects, with an optional validity window."""

    id: Identifier
    source: Identifier
    kind: str
    target: Identifier
    start_time: datetime | None = None
    stop_time: datetime | None = None
    description: str | None = None

    def __post_init__(self) -> None:
        _freeze_times(self, "start_time", "stop_time")


# ---------------------------------------------------------------------------
# validation reports

class Verdict(Enum):
    VALID = "valid"
    VALID_WITH_WARNINGS = "valid-with-warnings"
    INVALID = "invalid"


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    field: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    verdict: Verdict
    findings: tuple[Finding, ...] = ()
    subject: Identifier | None = None

    @classmethod
    def from_findings(
        cls, findings: list[Finding] | tuple[Finding, ...], subject: Identifier | None = None
    ) -> ValidationReport:
        findings = tuple(findings)
        if any(f.severity == "error" for f in findings):
            verdict = Verdict.INVALID
        elif findings:
            verdict = Verdict.VALID_WITH_WARNINGS
        else:
            verdict = Verdict.VALID
        return cls(verdict, findings, subject)

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.INVALID

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")


class _Findings:
    def __init__(self) -> None:
        self.items: list[Finding] = []

    def error(self, code: str, message: str, field: str | None = None) -> None:
        self.items.append(Finding("error", code, message, field))

    def warning(self, code: str, message: str, field: str | None = None) -> None:
        self.items.append(Finding("warning", code, message, field))


# ---------------------------------------------------------------------------
# object validation

_DISARM_REF_RE = re.compile(r"^T\d+(?:\.\d+)?$")


def _is_absolute_url(text: str) -> bool:
    parsed = urlparse(text)
    return bool(parsed.scheme) and bool(parsed.netloc or parsed.path)


def _require_text(out: _Findings, value: str | None, field_name: str) -> None:
    if value is None or not str(value).strip():
        out.error("missing-mandatory-field", f"{field_name} must be non-empty", field_name)


def _check_window(
    out: _Findings, earlier: datetime | None, later: datetime | None, earlier_name: str, later_name: str
) -> None:
    if earlier is not None and later is not None and earlier > later:
        out.error(
            "timestamp-order",
            f"{earlier_name} {format_timestamp(earlier)} is after {later_name} {format_timestamp(later)}",
            earlier_name,
        )


def _check_list_entries(out: _Findings, values: tuple[str, ...], field_name: str) -> None:
    for index, value in enumerate(values):
        if not str(value).strip():
            out.error("empty-list-entry", f"{field_name}[{index}] is empty", field_name)


def _check_vocab(
    out: _Findings, registry: VocabularyRegistry, vocab_name: str, term: str, field_name: str
) -> None:
    try:
        verdict = registry.validate_term(vocab_name, term)
    except MalformedTerm:
        out.error(
            "vocabulary-rejection",
            f"{field_name} term {term!r} is not a lowercase-hyphenated token",
            field_name,
        )
        return
    if verdict is TermVerdict.REJECTED:
        out.error(
            "vocabulary-rejection",
            f"{field_name} term {term!r} is not in closed vocabulary {vocab_name!r}",
            field_name,
        )
    elif verdict is TermVerdict.ACCEPTED_WITH_WARNING:
        out.warning(
            "vocabulary-warning",
            f"{field_name} term {term!r} is not in open vocabulary {vocab_name!r}",
            field_name,
        )


def _check_range(
    out: _Findings,
    value: float | int | None,
    field_name: str,
    low: float | None = None,
    high: float | None = None,
) -> None:
    if value is None:
        return
    if (low is not None and value < low) or (high is not None and value > high):
        bounds = f"[{low if low is not None else '-inf'}, {high if high is not None else 'inf'}]"
        out.error("range-violation", f"{field_name} {value} outside {bounds}", field_name)


def _check_url(out: _Findings, value: str | None, field_name: str, mandatory: bool = False) -> None:
    if value is None:
        if mandatory:
            out.error("missing-mandatory-field", f"{field_name} must be present", field_name)
        return
    if not str(value).strip():
        code = "missing-mandatory-field" if mandatory else "invalid-url"
        out.error(code, f"{field_name} must be non-empty", field_name)
    elif not _is_absolute_url(value):
        out.error("invalid-url", f"{field_name} {value!r} is not an absolute URL", field_name)


def _check_media(out: _Findings, media: MediaReference, prefix: str) -> None:
    _check_url(out, media.url, f"{prefix}.url", mandatory=True)


def _validate_incident(obj: Incident, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_window(out, obj.first_seen, obj.last_seen, "first_seen", "last_seen")


def _validate_attack_pattern(obj: AttackPattern, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_list_entries(out, obj.aliases, "aliases")
    if obj.external_reference is not None and not _DISARM_REF_RE.match(obj.external_reference):
        out.error(
            "malformed-external-reference",
            f"external_reference {obj.external_reference!r} does not match the DISARM "
            "technique id shape (T + digits, optional .sub-digits)",
            "external_reference",
        )


def _validate_campaign(obj: Campaign, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_list_entries(out, obj.aliases, "aliases")
    _check_window(out, obj.first_seen, obj.last_seen, "first_seen", "last_seen")


def _validate_threat_actor(obj: ThreatActor, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_list_entries(out, obj.aliases, "aliases")
    _check_window(out, obj.first_seen, obj.last_seen, "first_seen", "last_seen")
    if obj.threat_actor_type is not None:
        _check_vocab(out, registry, "threat-actor-type", obj.threat_actor_type, "threat_actor_type")
    for index, role in enumerate(obj.roles):
        _check_vocab(out, registry, "threat-actor-role", role, f"roles[{index}]")
    if obj.sophistication is not None:
        _check_vocab(out, registry, "sophistication", obj.sophistication, "sophistication")
    if obj.resource_level is not None:
        _check_vocab(out, registry, "resource-level", obj.resource_level, "resource_level")


def _validate_user_account(obj: UserAccount, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.display_name, "display_name")
    _check_range(out, obj.age, "age", low=0)
    _check_range(out, obj.followers, "followers", low=0)
    _check_range(out, obj.following, "following", low=0)
    _check_range(out, obj.automation, "automation", low=0, high=100)
    _check_list_entries(out, obj.external_links, "external_links")
    if obj.icon is not None:
        _check_media(out, obj.icon, "icon")


def _validate_channel(obj: Channel, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    if obj.platform is not None:
        _check_vocab(out, registry, "platform", obj.platform, "platform")
    if obj.channel_type is not None:
        _check_vocab(out, registry, "channel-type", obj.channel_type, "channel_type")


def _validate_message(obj: Message, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_url(out, obj.url, "url")
    for index, media in enumerate(obj.media_content):
        _check_media(out, media, f"media_content[{index}]")


def _validate_cyber_persona(obj: CyberPersona, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_range(out, obj.age, "age", low=0)
    _check_list_entries(out, obj.alias, "alias")
    _check_list_entries(out, obj.language, "language")
    _check_list_entries(out, obj.interest, "interest")


def _validate_community(obj: Community, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    for index, term in enumerate(obj.resources):
        _check_vocab(out, registry, "community-resources", term, f"resources[{index}]")


def _validate_narrative(obj: Narrative, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")


def _validate_event(obj: Event, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")


def _validate_location(obj: Location, out: _Findings, registry: VocabularyRegistry) -> None:
    _require_text(out, obj.name, "name")
    _check_range(out, obj.latitude, "latitude", low=-90.0, high=90.0)
    _check_range(out, obj.longitude, "longitude", low=-180.0, high=180.0)
    if (obj.latitude is None) != (obj.longitude is None):
        missing = "latitude" if obj.latitude is None else "longitude"
        out.error(
            "incomplete-coordinates",
            "latitude and longitude must be present together or not at all",
            missing,
        )


_VALIDATORS = {
    AttackPattern: _validate_attack_pattern,
    Campaign: _validate_campaign,
    Channel: _validate_channel,
    Community: _validate_community,
    CyberPersona: _validate_cyber_persona,
    Event: _validate_event,
    Incident: _validate_incident,
    Location: _validate_location,
    Message: _validate_message,
    Narrative: _validate_narrative,
    ThreatActor: _validate_threat_actor,
    UserAccount: _validate_user_account,
}


def validate_object(
    obj: IooObject,
    subject: Identifier | None = None,
    registry: VocabularyRegistry | None = None,
) -> ValidationReport:
    """Check every structural invariant of a single object.

    Closed-vocabulary rejections are errors; unknown terms in open
    vocabularies are warnings. All problems are findings, never raises.
    """
    validator = _VALIDATORS.get(type(obj))
    if validator is None:
        raise ValueError(f"{type(obj).__name__} is not an ontology object type")
    out = _Findings()
    validator(obj, out, registry or _vocab.default_registry())
    return ValidationReport.from_findings(out.items, subject)


# ---------------------------------------------------------------------------
# relationship validation

def validate_relationship(rel: Relationship, source_kind: str, target_kind: str) -> ValidationReport:
    """Check one edge against the legality matrix and its own invariants.

    related-to is the generic fallback: it validates with a warning for any
    pair of distinct objects instead of failing.
    """
    for kind in (source_kind, target_kind):
        if kind not in OBJECT_KINDS:
            raise ValueError(f"unknown object kind {kind!r}")
    out = _Findings()
    if rel.source == rel.target:
        out.error("self-reference", "source and target must be distinct objects", "target")
    _check_window(out, rel.start_time, rel.stop_time, "start_time", "stop_time")
    if rel.kind not in RELATIONSHIP_KINDS:
        out.error(
            "unknown-relationship-kind",
            f"relationship kind {rel.kind!r} is not recognized",
            "kind",
        )
    elif rel.kind == "related-to":
        out.warning(
            "generic-relationship",
            f"related-to carries no strict semantics between {source_kind} and {target_kind}",
            "kind",
        )
    elif (source_kind, rel.kind, target_kind) not in LEGAL_TRIPLES:
        out.error(
            "illegal-relationship",
            f"({source_kind}) -{rel.kind}-> ({target_kind}) is not a permitted edge",
            "kind",
        )
    return ValidationReport.from_findings(out.items, rel.id)
