"""Object types, identifiers, and structural validation."""

import uuid
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ioo.model import (
    AttackPattern,
    Campaign,
    Channel,
    Community,
    CyberPersona,
    ID_TYPE_NAMES,
    Identifier,
    Incident,
    LEGAL_TRIPLES,
    Location,
    MediaReference,
    Message,
    OBJECT_KINDS,
    RELATIONSHIP_KINDS,
    Relationship,
    ThreatActor,
    UnknownTypeName,
    UserAccount,
    Verdict,
    canonical_type_name,
    format_timestamp,
    kind_of,
    make_identifier,
    parse_timestamp,
    validate_object,
    validate_relationship,
)
from randgraph import MANDATORY_FIELD, minimal_valid, missing_mandatory


def codes(report, severity=None):
    return [f.code for f in report.findings if severity is None or f.severity == severity]


# ---------------------------------------------------------------------------
# identifiers

def test_identifier_textual_form():
    identifier = make_identifier("channel", "00000000-0000-4000-8000-000000000001")
    assert str(identifier) == "channel--00000000-0000-4000-8000-000000000001"


def test_fresh_identifier_prefix():
    assert str(make_identifier("threat-actor")).startswith("threat-actor--")


def test_identifier_typo_rejected():
    with pytest.raises(UnknownTypeName):
        make_identifier("chanel")


@given(
    kind=st.sampled_from(sorted(ID_TYPE_NAMES)),
    value=st.uuids(),
)
def test_identifier_round_trip(kind, value):
    identifier = make_identifier(kind, value)
    parsed = Identifier.parse(str(identifier))
    assert parsed == identifier
    assert (parsed.type_name, parsed.uuid) == (kind, value)


@pytest.mark.parametrize("bad", ["nodashes", "channel-no-uuid", "channel--nope", "x--y--z"])
def test_identifier_parse_rejects(bad):
    with pytest.raises(ValueError):
        Identifier.parse(bad)


def test_canonical_type_names():
    assert canonical_type_name("campaign") == "campaign"
    assert canonical_type_name("cyber-persona") == "x-ioo-cyber-persona"
    assert canonical_type_name("message") == "x-ioo-message"
    assert canonical_type_name("community") == "x-ioo-community"
    assert canonical_type_name("narrative") == "narrative"
    assert canonical_type_name("channel") == "channel"
    with pytest.raises(ValueError):
        canonical_type_name("chanel")


# ---------------------------------------------------------------------------
# timestamps

def test_parse_timestamp_forms():
    assert parse_timestamp("2024-03-01T10:20:30.123Z") == datetime(
        2024, 3, 1, 10, 20, 30, 123000, tzinfo=timezone.utc
    )
    assert parse_timestamp("2024-03-01T12:20:30+02:00") == datetime(
        2024, 3, 1, 10, 20, 30, tzinfo=timezone.utc
    )
    # date-only input normalizes to midnight UTC
    assert parse_timestamp("2024-03-01") == datetime(2024, 3, 1, tzinfo=timezone.utc)


def test_format_timestamp_millisecond_z_form():
    value = datetime(2024, 3, 1, 10, 20, 30, 123000, tzinfo=timezone.utc)
    assert format_timestamp(value) == "2024-03-01T10:20:30.123Z"
    assert format_timestamp(datetime(2024, 3, 1, tzinfo=timezone.utc)) == "2024-03-01T00:00:00.000Z"


def test_types_coerce_timestamps():
    incident = Incident(name="x", first_seen="2024-01-02")
    assert incident.first_seen == datetime(2024, 1, 2, tzinfo=timezone.utc)
    # sub-millisecond precision is truncated at construction
    event_time = datetime(2024, 1, 2, 3, 4, 5, 123456, tzinfo=timezone.utc)
    assert Incident(name="x", first_seen=event_time).first_seen.microsecond == 123000


def test_list_fields_coerce_to_tuples():
    actor = ThreatActor(name="x", aliases=["a", "b"])
    assert actor.aliases == ("a", "b")
    with pytest.raises(AttributeError):
        actor.name = "y"


# ---------------------------------------------------------------------------
# object validation

def test_valid_incident():
    report = validate_object(Incident(name="Election smear wave"))
    assert report.verdict is Verdict.VALID
    assert report.findings == ()


@pytest.mark.parametrize("kind", OBJECT_KINDS)
def test_minimal_valid_instance_passes(kind):
    assert validate_object(minimal_valid(kind)).verdict is Verdict.VALID


@pytest.mark.parametrize("kind", OBJECT_KINDS)
def test_missing_mandatory_field_fails(kind):
    report = validate_object(missing_mandatory(kind))
    assert report.verdict is Verdict.INVALID
    assert any(
        f.code == "missing-mandatory-field" and f.field == MANDATORY_FIELD[kind]
        for f in report.errors
    )


def test_latitude_range_violation():
    report = validate_object(Location(name="Murcia", latitude=95.0, longitude=-1.13))
    assert report.verdict is Verdict.INVALID
    assert any(f.code == "range-violation" and f.field == "latitude" for f in report.errors)


def test_closed_vocabulary_rejection():
    report = validate_object(ThreatActor(name="APT-X", sophistication="wizard"))
    assert report.verdict is Verdict.INVALID
    assert codes(report, "error") == ["vocabulary-rejection"]


def test_open_vocabulary_warns_but_passes():
    report = validate_object(Channel(name="Chatter", platform="carrier-pigeon"))
    assert report.verdict is Verdict.VALID_WITH_WARNINGS
    assert codes(report, "warning") == ["vocabulary-warning"]


def test_timestamp_ordering_checked():
    report = validate_object(
        Incident(name="x", first_seen="2024-06-01", last_seen="2024-01-01")
    )
    assert "timestamp-order" in codes(report, "error")
    ok = validate_object(Incident(name="x", first_seen="2024-01-01", last_seen="2024-06-01"))
    assert ok.verdict is Verdict.VALID


@pytest.mark.parametrize("ref,ok", [
    ("T0086", True),
    ("T0086.002", True),
    ("T1", True),
    ("0086", False),
    ("TA01", False),
    ("T0086.002.1", False),
    ("t0086", False),
])
def test_disarm_reference_shape(ref, ok):
    report = validate_object(AttackPattern(name="Flood the zone", external_reference=ref))
    assert ("malformed-external-reference" in codes(report, "error")) is (not ok)


def test_aliases_reject_empty_entries():
    report = validate_object(AttackPattern(name="x", aliases=("ok", "")))
    assert "empty-list-entry" in codes(report, "error")


def test_user_account_ranges():
    bad = UserAccount(display_name="x", followers=-1, automation=101)
    report = validate_object(bad)
    fields = {f.field for f in report.errors if f.code == "range-violation"}
    assert fields == {"followers", "automation"}
    ok = UserAccount(display_name="x", followers=0, following=0, age=0, automation=100)
    assert validate_object(ok).verdict is Verdict.VALID


def test_user_account_icon_checked():
    report = validate_object(UserAccount(display_name="x", icon=MediaReference(url="not a url")))
    assert any(f.code == "invalid-url" and f.field == "icon.url" for f in report.errors)


def test_message_url_and_media():
    report = validate_object(Message(name="x", url="no-scheme"))
    assert "invalid-url" in codes(report, "error")
    report = validate_object(
        Message(name="x", media_content=(MediaReference(url="https://example.test/a"),))
    )
    assert report.verdict is Verdict.VALID


def test_persona_age_range():
    report = validate_object(CyberPersona(name="x", age=-3))
    assert "range-violation" in codes(report, "error")


def test_community_resources_vocabulary():
    ok = validate_object(Community(name="x", resources=("members", "funding")))
    assert ok.verdict is Verdict.VALID
    warned = validate_object(Community(name="x", resources=("gold",)))
    assert warned.verdict is Verdict.VALID_WITH_WARNINGS


def test_coordinates_must_pair():
    report = validate_object(Location(name="x", latitude=10.0))
    assert "incomplete-coordinates" in codes(report, "error")
    assert validate_object(Location(name="x")).verdict is Verdict.VALID


def test_validation_is_deterministic():
    obj = ThreatActor(name="APT-X", sophistication="wizard", roles=("ghost",))
    assert validate_object(obj) == validate_object(obj)


def test_verdict_finding_equivalence():
    # invalid iff an error finding exists; valid iff no findings at all
    cases = [
        Incident(name="ok"),
        Channel(name="ok", platform="carrier-pigeon"),
        Incident(name=""),
    ]
    for obj in cases:
        report = validate_object(obj)
        assert (report.verdict is Verdict.INVALID) == bool(report.errors)
        assert (report.verdict is Verdict.VALID) == (not report.findings)


# ---------------------------------------------------------------------------
# relationship validation

def rel(kind, source_kind="incident", target_kind="attack-pattern"):
    return Relationship(
        make_identifier("relationship"),
        make_identifier(canonical_type_name(source_kind)),
        kind,
        make_identifier(canonical_type_name(target_kind)),
    )


def test_legal_edges_validate():
    report = validate_relationship(rel("uses"), "incident", "attack-pattern")
    assert report.verdict is Verdict.VALID
    report = validate_relationship(
        rel("attributed-to", "campaign", "threat-actor"), "campaign", "threat-actor"
    )
    assert report.verdict is Verdict.VALID


def test_illegal_edge_rejected():
    report = validate_relationship(
        rel("amplifies", "location", "narrative"), "location", "narrative"
    )
    assert report.verdict is Verdict.INVALID
    assert "illegal-relationship" in codes(report, "error")


def test_related_to_is_generic_fallback():
    report = validate_relationship(rel("related-to", "message", "event"), "message", "event")
    assert report.verdict is Verdict.VALID_WITH_WARNINGS
    assert "generic-relationship" in codes(report, "warning")


def test_self_reference_rejected():
    identifier = make_identifier("channel")
    loop = Relationship(make_identifier("relationship"), identifier, "related-to", identifier)
    report = validate_relationship(loop, "channel", "channel")
    assert "self-reference" in codes(report, "error")


def test_unknown_relationship_kind():
    report = validate_relationship(rel("befriends"), "incident", "attack-pattern")
    assert "unknown-relationship-kind" in codes(report, "error")


def test_relationship_window_order():
    edge = Relationship(
        make_identifier("relationship"),
        make_identifier("channel"),
        "amplifies",
        make_identifier("channel"),
        start_time="2024-06-01",
        stop_time="2024-01-01",
    )
    report = validate_relationship(edge, "channel", "channel")
    assert "timestamp-order" in codes(report, "error")


def test_unknown_object_kind_is_precondition_violation():
    with pytest.raises(ValueError):
        validate_relationship(rel("uses"), "chanel", "attack-pattern")


def test_matrix_covers_expected_shape():
    # 37 strict triples compiled from the relationship prose
    assert len(LEGAL_TRIPLES) == 37
    assert all(k != "related-to" for _, k, _ in LEGAL_TRIPLES)
    assert set(RELATIONSHIP_KINDS) - {k for _, k, _ in LEGAL_TRIPLES} == {"related-to"}


def test_kind_of_round_trip():
    for kind in OBJECT_KINDS:
        assert kind_of(minimal_valid(kind)) == kind
