"""Parsing LLM replies under the strict ``Topic k: word word ...`` contract.

The parser never raises on reply text; every outcome is a ParseReport.
A line only counts as a topic line when at least one word follows the
colon, so label-only replies ("Topic 1:") classify as format violations
rather than empty topics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

TOPIC_SOURCES = ("llm_parallel", "llm_sequential", "llm_controlled", "lda", "manual")

PARSE_OK = "ok"
WRONG_TOPIC_COUNT = "wrong_topic_count"
WRONG_WORD_COUNT = "wrong_word_count"
FORMAT_VIOLATION = "format_violation"

REPROMPT_SAME = "reprompt_same"
ABORT = "abort"

_TOPIC_LINE = re.compile(r"^\s*topic\s+(\d+)\s*:\s*(\S.*)$", re.IGNORECASE)


@dataclass(frozen=True)
class TopicSet:
    """K topics, each an ordered tuple of exactly t lowercase words."""

    topics: tuple[tuple[str, ...], ...]
    source: str = "manual"

    def __post_init__(self):
        if not self.topics:
            raise ValueError("TopicSet needs at least one topic")
        width = len(self.topics[0])
        for topic in self.topics:
            if len(topic) != width or width == 0:
                raise ValueError("every topic must carry the same, positive word count")
            for word in topic:
                if not word or any(ch.isspace() for ch in word):
                    raise ValueError(f"topic word {word!r} contains whitespace or is empty")
                if word != word.lower():
                    raise ValueError(f"topic word {word!r} is not lowercase")
        if self.source not in TOPIC_SOURCES:
            raise ValueError(f"source must be one of {TOPIC_SOURCES}")

    @property
    def k(self) -> int:
        return len(self.topics)

    @property
    def t(self) -> int:
        return len(self.topics[0])

    def all_words(self) -> list[str]:
        """Every word slot in topic order (duplicates kept)."""
        return [word for topic in self.topics for word in topic]

    def to_dict(self) -> dict:
        return {"topics": [list(t) for t in self.topics], "source": self.source}

    @classmethod
    def from_dict(cls, payload: dict) -> "TopicSet":
        return cls(
            topics=tuple(tuple(t) for t in payload["topics"]),
            source=payload.get("source", "manual"),
        )


@dataclass(frozen=True)
class ParseReport:
    status: str
    expected_k: int
    found_k: int
    offending_lines: tuple[str, ...] = ()
    ignored_lines: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == PARSE_OK

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "expected_k": self.expected_k,
            "found_k": self.found_k,
            "offending_lines": list(self.offending_lines),
            "ignored_lines": list(self.ignored_lines),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ParseReport":
        return cls(
            status=payload["status"],
            expected_k=payload["expected_k"],
            found_k=payload["found_k"],
            offending_lines=tuple(payload.get("offending_lines", ())),
            ignored_lines=tuple(payload.get("ignored_lines", ())),
            notes=tuple(payload.get("notes", ())),
        )


def _scan(reply: str) -> tuple[list[tuple[int, list[str], str]], list[str]]:
    """Split reply lines into topic-line matches and ignored non-blank lines."""
    matches = []
    ignored = []
    for raw_line in reply.splitlines():
        match = _TOPIC_LINE.match(raw_line)
        words = []
        if match:
            for piece in match.group(2).split():
                cleaned = piece.strip(",").lower()
                if cleaned:
                    words.append(cleaned)
        if words:
            matches.append((int(match.group(1)), words, raw_line))
        elif raw_line.strip():
            ignored.append(raw_line)
    return matches, ignored


def scan_topic_lines(reply: str) -> list[tuple[int, list[str], str]]:
    """All lines shaped like ``Topic <int>: word ...`` in reply order.

    Returns (topic index, cleaned words, raw line) per match. Words are
    lowercased and stripped of surrounding commas; comma-only fragments
    are dropped.
    """
    return _scan(reply)[0]


def parse_topics(reply: str, expected_k: int, expected_t: int,
                 source: str = "manual") -> tuple[TopicSet | None, ParseReport]:
    """Parse a reply into a TopicSet of exactly expected_k topics with
    expected_t words each; failures come back classified, never raised."""
    matched, ignored_list = _scan(reply)
    ignored = tuple(ignored_list)
    found_k = len(matched)

    if found_k == 0:
        report = ParseReport(
            status=FORMAT_VIOLATION, expected_k=expected_k, found_k=0,
            offending_lines=ignored, ignored_lines=ignored,
        )
        return None, report

    if found_k != expected_k:
        report = ParseReport(
            status=WRONG_TOPIC_COUNT, expected_k=expected_k, found_k=found_k,
            offending_lines=tuple(raw for _, _, raw in matched),
            ignored_lines=ignored,
        )
        return None, report

    bad_lines = tuple(raw for _, words, raw in matched if len(words) != expected_t)
    if bad_lines:
        report = ParseReport(
            status=WRONG_WORD_COUNT, expected_k=expected_k, found_k=found_k,
            offending_lines=bad_lines, ignored_lines=ignored,
        )
        return None, report

    notes = []
    for position, (_, words, _) in enumerate(matched, start=1):
        duplicates = sorted({w for w in words if words.count(w) > 1})
        if duplicates:
            notes.append(f"topic {position} repeats: {' '.join(duplicates)}")

    topic_set = TopicSet(
        topics=tuple(tuple(words) for _, words, _ in matched),
        source=source,
    )
    report = ParseReport(
        status=PARSE_OK, expected_k=expected_k, found_k=found_k,
        ignored_lines=ignored, notes=tuple(notes),
    )
    return topic_set, report


def format_topic_lines(topic_set: TopicSet) -> str:
    """Serialize a TopicSet back into ``Topic k: ...`` lines; the inverse
    of parse_topics for well-formed sets."""
    return "\n".join(
        f"Topic {i}: {' '.join(topic)}"
        for i, topic in enumerate(topic_set.topics, start=1)
    )


def retry_policy(report: ParseReport, attempt: int, max_attempts: int) -> str:
    """Decide whether a failed parse warrants re-sending the same prompt.

    `attempt` counts attempts already made (1-based).
    """
    if report.ok:
        raise ValueError("retry_policy is only defined for failed parses")
    if attempt < max_attempts:
        return REPROMPT_SAME
    return ABORT
