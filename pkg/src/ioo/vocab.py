"""Controlled vocabularies for enumerated attributes.

Closed vocabularies reject unlisted terms; open vocabularies accept them
with a warning so analysts can extend the term set without breaking
interchange. Term normal form is lowercase hyphen-separated tokens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from re import compile as _compile

TERM_RE = _compile(r"^[a-z0-9]+(?:-[a-z0-9]+)*$")


class UnknownVocabulary(KeyError):
    """No vocabulary registered under the requested name."""


class MalformedTerm(ValueError):
    """Term is empty, contains whitespace/uppercase, or otherwise breaks normal form."""


class TermVerdict(Enum):
    ACCEPTED = "accepted"
    ACCEPTED_WITH_WARNING = "accepted-with-warning"
    REJECTED = "rejected"


def is_well_formed(term: str) -> bool:
    return bool(TERM_RE.match(term))


@dataclass(frozen=True)
class Vocabulary:
    """A named term list plus the open/closed policy applied to unknown terms."""

    name: str
    terms: tuple[str, ...]
    open: bool = True

    def __post_init__(self) -> None:
        if not is_well_formed(self.name):
            raise ValueError(f"vocabulary name {self.name!r} is not lowercase-hyphenated")
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(set(self.terms)) != len(self.terms):
            raise ValueError(f"vocabulary {self.name!r} has duplicate terms")
        for term in self.terms:
            if not is_well_formed(term):
                raise ValueError(f"vocabulary {self.name!r} term {term!r} is not lowercase-hyphenated")

    def validate(self, term: str) -> TermVerdict:
        if not isinstance(term, str) or not is_well_formed(term):
            raise MalformedTerm(f"term {term!r} is not a non-empty lowercase-hyphenated token")
        if term in self.terms:
            return TermVerdict.ACCEPTED
        if self.open:
            return TermVerdict.ACCEPTED_WITH_WARNING
        return TermVerdict.REJECTED


# The four enumerations imported from STIX 2.1 ship with the STIX term lists
# and stay closed; the three new ones are seeded and open for extension.
_DEFAULTS = (
    Vocabulary(
        "threat-actor-type",
        (
            "activist",
            "competitor",
            "crime-syndicate",
            "criminal",
            "hacker",
            "insider-accidental",
            "insider-disgruntled",
            "nation-state",
            "sensationalist",
            "spy",
            "terrorist",
            "unknown",
        ),
        open=False,
    ),
    Vocabulary(
        "threat-actor-role",
        (
            "agent",
            "director",
            "independent",
            "infrastructure-architect",
            "infrastructure-operator",
            "malware-author",
            "sponsor",
        ),
        open=False,
    ),
    Vocabulary(
        "sophistication",
        ("none", "minimal", "intermediate", "advanced", "expert", "innovator", "strategic"),
        open=False,
    ),
    Vocabulary(
        "resource-level",
        ("individual", "club", "contest", "team", "organization", "government"),
        open=False,
    ),
    Vocabulary(
        "channel-type",
        (
            "official-communication-channel",
            "state-linked-channel",
            "state-controlled-channel",
            "independent-channel",
            "unknown",
        ),
        open=True,
    ),
    Vocabulary(
        "platform",
        (
            "social-media",
            "messaging-app",
            "website",
            "video-platform",
            "forum",
            "blog",
            "podcast",
            "other",
        ),
        open=True,
    ),
    Vocabulary(
        "community-resources",
        ("members", "funding", "information", "technology"),
        open=True,
    ),
)


class VocabularyRegistry:
    """Immutable-after-construction name -> Vocabulary map."""

    def __init__(self, vocabularies: tuple[Vocabulary, ...] | list[Vocabulary] = ()) -> None:
        self._by_name: dict[str, Vocabulary] = {}
        for vocabulary in vocabularies:
            if vocabulary.name in self._by_name:
                raise ValueError(f"duplicate vocabulary name {vocabulary.name!r}")
            self._by_name[vocabulary.name] = vocabulary

    @classmethod
    def defaults(cls) -> VocabularyRegistry:
        return cls(_DEFAULTS)

    @classmethod
    def from_config_file(cls, path: str | Path, include_defaults: bool = True) -> VocabularyRegistry:
        """Build a registry from a JSON config, layered over the built-ins.

        The file holds one vocabulary per entry: {"name": ..., "open": ...,
        "terms": [...]}, either as a top-level list or under a
        "vocabularies" key. Entries replace built-ins of the same name.
        """
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = raw.get("vocabularies", []) if isinstance(raw, dict) else raw
        merged: dict[str, Vocabulary] = {v.name: v for v in _DEFAULTS} if include_defaults else {}
        for entry in entries:
            vocabulary = Vocabulary(
                name=entry["name"],
                terms=tuple(entry.get("terms", ())),
                open=bool(entry.get("open", True)),
            )
            merged[vocabulary.name] = vocabulary
        return cls(tuple(merged.values()))

    def lookup(self, name: str) -> Vocabulary:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVocabulary(name) from None

    def validate_term(self, vocab_name: str, term: str) -> TermVerdict:
        return self.lookup(vocab_name).validate(term)

    def names(self) -> list[str]:
        return sorted(self._by_name)


_DEFAULT_REGISTRY = VocabularyRegistry.defaults()


def default_registry() -> VocabularyRegistry:
    return _DEFAULT_REGISTRY


def lookup_vocabulary(name: str, registry: VocabularyRegistry | None = None) -> Vocabulary:
    return (registry or _DEFAULT_REGISTRY).lookup(name)


def validate_term(vocab_name: str, term: str, registry: VocabularyRegistry | None = None) -> TermVerdict:
    return (registry or _DEFAULT_REGISTRY).validate_term(vocab_name, term)


def list_vocabularies(registry: VocabularyRegistry | None = None) -> list[str]:
    return (registry or _DEFAULT_REGISTRY).names()
