"""Prompt template catalog and rendering.

Templates live as versioned text assets under ``llmtopics/templates`` and
can be swapped for an external directory when experimenting with prompt
wording. Rendering is pure: identical inputs give byte-identical text.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MergeOfOne, MissingCategory
from .parsing import TopicSet
from .validation import check_positive_int

TEMPLATE_IDS = ("ParTM", "ParMrg", "SeqTM", "Base", "Orcl", "Ctrl")
CONTROL_MODES = ("Base", "Orcl", "Ctrl")

GOAL_PHRASE = "GoalPhrase"
DETAIL_PHRASE = "DetailPhrase"
CV_NOTE = "CvNote"
TU_NOTE = "TuNote"
DC_NOTE = "DcNote"
PHRASE_OPTIONS = (GOAL_PHRASE, DETAIL_PHRASE, CV_NOTE, TU_NOTE, DC_NOTE)

_METRIC_NOTE_FILES = {CV_NOTE: "note_cv.txt", TU_NOTE: "note_tu.txt", DC_NOTE: "note_dc.txt"}

# Goal and Detail wording is template-specific; metric notes apply anywhere.
SUPPORTED_PHRASES = {
    "ParTM": frozenset(_METRIC_NOTE_FILES),
    "ParMrg": frozenset(PHRASE_OPTIONS),
    "SeqTM": frozenset(PHRASE_OPTIONS),
    "Base": frozenset(_METRIC_NOTE_FILES),
    "Orcl": frozenset(_METRIC_NOTE_FILES),
    "Ctrl": frozenset(_METRIC_NOTE_FILES),
}

# Goal + Detail are on by default for the merge and sequential prompts;
# plain topic-modeling prompts default to no phrase insertion.
DEFAULT_PHRASES = {
    "ParTM": frozenset(),
    "ParMrg": frozenset({GOAL_PHRASE, DETAIL_PHRASE}),
    "SeqTM": frozenset({GOAL_PHRASE, DETAIL_PHRASE}),
    "Base": frozenset(),
    "Orcl": frozenset(),
    "Ctrl": frozenset(),
}

_BODY_FILES = {
    "ParTM": "par_tm.txt",
    "ParMrg": "par_mrg.txt",
    "SeqTM": "seq_tm.txt",
    "Base": "controlled.txt",
    "Orcl": "controlled.txt",
    "Ctrl": "controlled.txt",
}

PLACEHOLDER_MARKERS = (
    "[DOCS]", "[TOPICS]", "[NUM_TOPICS]", "[NUM_WORDS]", "[FORMAT]",
    "[CAT_CLAUSE]", "[CAT]", "[GOAL]", "[NOTES]",
)


class TemplateCatalog:
    """Loads template bodies and phrases from package assets or a directory."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory is not None else None

    def _read(self, relative: str) -> str:
        if self.directory is not None:
            return (self.directory / relative).read_text(encoding="utf-8")
        return (resources.files("llmtopics") / "templates" / relative).read_text(encoding="utf-8")

    @property
    def version(self) -> str:
        return self._read("VERSION").strip()

    def body(self, template_id: str) -> str:
        if template_id not in TEMPLATE_IDS:
            raise ValueError(f"unknown template id {template_id!r}")
        return self._read(_BODY_FILES[template_id])

    def goal_phrase(self, template_id: str) -> str:
        name = "goal_merge.txt" if template_id == "ParMrg" else "goal_seq.txt"
        return self._read(f"phrases/{name}").strip()

    def detail_phrase(self, template_id: str) -> str:
        name = "detail_merge.txt" if template_id == "ParMrg" else "detail_seq.txt"
        return self._read(f"phrases/{name}").strip()

    def metric_note(self, phrase: str) -> str:
        return self._read(f"phrases/{_METRIC_NOTE_FILES[phrase]}").strip()


_DEFAULT_CATALOG = TemplateCatalog()


@dataclass(frozen=True)
class PromptSpec:
    """A fully rendered prompt plus the knobs that produced it."""

    template_id: str
    rendered_text: str
    k_topics: int
    words_per_topic: int
    category: str | None = None

    @property
    def estimated_tokens(self) -> int:
        """Rough prompt length in tokens (chars / 4 heuristic)."""
        return (len(self.rendered_text) + 3) // 4

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "rendered_text": self.rendered_text,
            "k_topics": self.k_topics,
            "words_per_topic": self.words_per_topic,
            "category": self.category,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PromptSpec":
        return cls(
            template_id=payload["template_id"],
            rendered_text=payload["rendered_text"],
            k_topics=payload["k_topics"],
            words_per_topic=payload["words_per_topic"],
            category=payload.get("category"),
        )


def residual_placeholders(text: str) -> list[str]:
    """Placeholder markers still present in a rendered prompt."""
    return [marker for marker in PLACEHOLDER_MARKERS if marker in text]


def _doc_line(doc) -> str:
    tokens = getattr(doc, "tokens", doc)
    return "# " + " ".join(tokens)


def _serialize_docs(docs) -> str:
    return "\n".join(_doc_line(doc) for doc in docs)


def _serialize_topic_blocks(topic_sets) -> str:
    blocks = []
    for n, topic_set in enumerate(topic_sets, start=1):
        lines = [f"- {n}"]
        lines.extend("# " + " ".join(topic) for topic in topic_set.topics)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def _serialize_previous_topics(topic_set: TopicSet) -> str:
    return "\n".join(
        f"Topic {i}: {' '.join(topic)}"
        for i, topic in enumerate(topic_set.topics, start=1)
    )


def _resolve_phrases(template_id: str, phrases) -> frozenset:
    if phrases is None:
        return DEFAULT_PHRASES[template_id]
    phrases = frozenset(phrases)
    unknown = phrases - frozenset(PHRASE_OPTIONS)
    if unknown:
        raise ValueError(f"unknown phrase options: {sorted(unknown)}")
    unsupported = phrases - SUPPORTED_PHRASES[template_id]
    if unsupported:
        raise ValueError(
            f"template {template_id} does not support phrases {sorted(unsupported)}"
        )
    return phrases


def _render(template_id: str, k: int, t: int, phrases, catalog: TemplateCatalog,
            substitutions: dict[str, str], category: str | None = None) -> PromptSpec:
    check_positive_int(k, "k")
    check_positive_int(t, "t")
    catalog = catalog or _DEFAULT_CATALOG
    phrases = _resolve_phrases(template_id, phrases)
    body = catalog.body(template_id)

    goal = catalog.goal_phrase(template_id) if GOAL_PHRASE in phrases else ""
    notes = []
    if DETAIL_PHRASE in phrases:
        notes.append(catalog.detail_phrase(template_id))
    for note in (CV_NOTE, TU_NOTE, DC_NOTE):
        if note in phrases:
            notes.append(catalog.metric_note(note))

    body = body.replace("[GOAL]\n", goal + "\n" if goal else "")
    body = body.replace("[NOTES]\n", "\n".join(notes) + "\n" if notes else "")
    body = body.replace("[NUM_TOPICS]", str(k))
    body = body.replace("[NUM_WORDS]", str(t))
    body = body.replace("[FORMAT]", " ".join(["word"] * t))
    for marker, value in substitutions.items():
        body = body.replace(marker, value)
    body = body.rstrip("\n")

    leftover = residual_placeholders(body)
    if leftover:
        raise ValueError(f"template {template_id} left unfilled markers {leftover}")
    return PromptSpec(
        template_id=template_id, rendered_text=body,
        k_topics=k, words_per_topic=t, category=category,
    )


def render_par_tm(docs, k: int, t: int, phrases=None,
                  catalog: TemplateCatalog | None = None) -> PromptSpec:
    """Topic-modeling prompt over one subset of documents."""
    docs = list(docs)
    if not docs:
        raise ValueError("render_par_tm needs at least one document")
    return _render("ParTM", k, t, phrases, catalog, {"[DOCS]": _serialize_docs(docs)})


def render_par_mrg(topic_sets, k: int, t: int, phrases=None,
                   catalog: TemplateCatalog | None = None) -> PromptSpec:
    """Merge prompt over per-subset topic modeling results."""
    topic_sets = list(topic_sets)
    if len(topic_sets) < 2:
        raise MergeOfOne("merging needs at least two topic sets")
    return _render(
        "ParMrg", k, t, phrases, catalog,
        {"[TOPICS]": _serialize_topic_blocks(topic_sets)},
    )


def render_seq_tm(docs, previous: TopicSet, k: int, t: int, phrases=None,
                  catalog: TemplateCatalog | None = None) -> PromptSpec:
    """Sequential-update prompt: documents plus previously identified topics."""
    docs = list(docs)
    if not docs:
        raise ValueError("render_seq_tm needs at least one document")
    return _render(
        "SeqTM", k, t, phrases, catalog,
        {
            "[TOPICS]": _serialize_previous_topics(previous),
            "[DOCS]": _serialize_docs(docs),
        },
    )


def render_controlled(docs, k: int, t: int, mode: str, category: str | None = None,
                      phrases=None, catalog: TemplateCatalog | None = None) -> PromptSpec:
    """Category-controlled prompt family: Base, Orcl, or Ctrl.

    Ctrl inserts "specifically related to <category>"; Base and Orcl use
    the same wording without the parenthetical (Orcl callers pass
    category-filtered documents instead).
    """
    if mode not in CONTROL_MODES:
        raise ValueError(f"mode must be one of {CONTROL_MODES}")
    if mode == "Ctrl" and not category:
        raise MissingCategory("Ctrl prompts need a category label")
    docs = list(docs)
    if not docs:
        raise ValueError("render_controlled needs at least one document")
    clause = f" (specifically related to {category})" if mode == "Ctrl" else ""
    return _render(
        mode, k, t, phrases, catalog,
        {"[CAT_CLAUSE]": clause, "[DOCS]": _serialize_docs(docs)},
        category=category,
    )
