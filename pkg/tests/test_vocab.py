"""Vocabulary registry and term validation."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ioo.vocab import (
    MalformedTerm,
    TermVerdict,
    UnknownVocabulary,
    Vocabulary,
    VocabularyRegistry,
    default_registry,
    list_vocabularies,
    lookup_vocabulary,
    validate_term,
)

WELL_FORMED = st.from_regex(r"[a-z0-9]+(-[a-z0-9]+)*", fullmatch=True)


def test_lookup_channel_type():
    vocabulary = lookup_vocabulary("channel-type")
    assert vocabulary.open
    assert set(vocabulary.terms) == {
        "official-communication-channel",
        "state-linked-channel",
        "state-controlled-channel",
        "independent-channel",
        "unknown",
    }


def test_lookup_sophistication_is_closed_stix_list():
    vocabulary = lookup_vocabulary("sophistication")
    assert not vocabulary.open
    assert vocabulary.terms == (
        "none",
        "minimal",
        "intermediate",
        "advanced",
        "expert",
        "innovator",
        "strategic",
    )


def test_lookup_unknown_raises():
    with pytest.raises(UnknownVocabulary):
        lookup_vocabulary("no-such-vocab")


def test_validate_term_examples():
    assert validate_term("channel-type", "state-linked-channel") is TermVerdict.ACCEPTED
    assert validate_term("channel-type", "community-run-channel") is TermVerdict.ACCEPTED_WITH_WARNING
    assert validate_term("sophistication", "wizard") is TermVerdict.REJECTED


@pytest.mark.parametrize("bad", ["", "  ", "Wizard", "two words", "trailing-", "-leading", "UPPER"])
def test_validate_term_malformed(bad):
    with pytest.raises(MalformedTerm):
        validate_term("channel-type", bad)


def test_validate_term_unknown_vocab():
    with pytest.raises(UnknownVocabulary):
        validate_term("no-such-vocab", "anything")


def test_list_vocabularies_contents_and_order():
    names = list_vocabularies()
    assert "threat-actor-type" in names
    assert "platform" in names
    assert names == sorted(names)
    assert names == list_vocabularies()


def test_closed_vocabulary_equivalence():
    # closed vocab: accepted iff the term is listed, exhaustively
    registry = default_registry()
    for name in registry.names():
        vocabulary = registry.lookup(name)
        if vocabulary.open:
            continue
        for term in vocabulary.terms:
            assert vocabulary.validate(term) is TermVerdict.ACCEPTED
        assert vocabulary.validate("surely-not-a-term") is TermVerdict.REJECTED


@given(term=WELL_FORMED)
def test_open_vocabulary_never_rejects_well_formed(term):
    for name in ("channel-type", "platform", "community-resources"):
        assert validate_term(name, term) is not TermVerdict.REJECTED


@given(term=WELL_FORMED)
def test_closed_vocabulary_matches_membership(term):
    vocabulary = lookup_vocabulary("resource-level")
    expected = TermVerdict.ACCEPTED if term in vocabulary.terms else TermVerdict.REJECTED
    assert vocabulary.validate(term) is expected


@pytest.mark.parametrize(
    "terms", [("dup", "dup"), ("Bad",), ("",), ("two words",)]
)
def test_vocabulary_invariants_enforced(terms):
    with pytest.raises(ValueError):
        Vocabulary("test-vocab", terms)


def test_registry_rejects_duplicate_names():
    v = Vocabulary("dup-name", ("a",))
    with pytest.raises(ValueError):
        VocabularyRegistry((v, v))


def test_config_file_overrides_and_extends(tmp_path):
    config = {
        "vocabularies": [
            {"name": "platform", "open": False, "terms": ["carrier-pigeon"]},
            {"name": "emotion", "open": True, "terms": ["anger", "fear"]},
        ]
    }
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps(config))
    registry = VocabularyRegistry.from_config_file(path)
    # override replaces, new entry registers, defaults survive
    assert registry.lookup("platform").terms == ("carrier-pigeon",)
    assert not registry.lookup("platform").open
    assert registry.validate_term("emotion", "fear") is TermVerdict.ACCEPTED
    assert registry.lookup("sophistication").terms == default_registry().lookup("sophistication").terms


def test_config_file_without_defaults(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps([{"name": "only-one", "terms": ["a"]}]))
    registry = VocabularyRegistry.from_config_file(path, include_defaults=False)
    assert registry.names() == ["only-one"]
