"""Paper XML and slides-text parsing into canonical in-memory documents.

The paper XML contract (UTF-8):

    <paper>
      <title>...</title>
      <abstract>  <s>...</s> ... </abstract>          (optional)
      <section name="..." kind="...">  <s>...</s> ... </section>   (zero or more)
      <graphic id="..." kind="table|figure|equation" caption="..."/>  (zero or more)
    </paper>

An ``<s>`` element holds sentence text interleaved with empty
``<ref type="literature|table|figure|equation" target="..."/>`` elements;
each ref is rendered into the sentence text as its target id in square
brackets.  Sentence segmentation is the producer's job: one ``<s>`` is one
sentence and is never re-split here.

A slides file is plain UTF-8 text with one sentence per line.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from ._text import tokenize
from .errors import EmptySlides, MalformedXml, SchemaViolation

SECTION_KINDS = (
    "abstract",
    "introduction",
    "background",
    "model",
    "results",
    "conclusion",
    "acknowledgement",
    "other",
)

REF_KINDS = ("literature", "table", "figure", "equation")

GRAPHIC_KINDS = ("table", "figure", "equation")


def normalize_whitespace(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends."""
    return " ".join(text.split())


@dataclass(frozen=True)
class RefMark:
    kind: str  # one of REF_KINDS
    target: str


@dataclass(frozen=True)
class GraphicElement:
    id: str
    kind: str  # one of GRAPHIC_KINDS
    caption: str = ""


@dataclass(frozen=True)
class Sentence:
    global_index: int
    section_index: int  # -1 for abstract sentences
    position_in_section: int  # 1-based
    text: str
    tokens: tuple[str, ...]
    ref_marks: tuple[RefMark, ...] = ()


@dataclass(frozen=True)
class Section:
    name: str
    kind: str  # one of SECTION_KINDS
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Paper:
    title: str
    abstract_sentences: tuple[Sentence, ...]
    sections: tuple[Section, ...]
    graphics: tuple[GraphicElement, ...]

    def graphic_ids(self) -> set[str]:
        return {g.id for g in self.graphics}

    def dangling_refs(self) -> list[tuple[int, RefMark]]:
        """Graphic-kind RefMarks whose target matches no graphic id.

        Literature refs never resolve against graphics and are not reported.
        """
        ids = self.graphic_ids()
        out = []
        for sent in sentence_stream(self):
            for mark in sent.ref_marks:
                if mark.kind in GRAPHIC_KINDS and mark.target not in ids:
                    out.append((sent.global_index, mark))
        return out


@dataclass(frozen=True)
class SlideText:
    sentences: tuple[str, ...]


def sentence_stream(paper: Paper) -> list[Sentence]:
    """All sentences in global-index order: abstract first, then sections."""
    out = list(paper.abstract_sentences)
    for section in paper.sections:
        out.extend(section.sentences)
    return out


def _parse_sentence_element(elem, global_index, section_index, position):
    parts = [elem.text or ""]
    marks = []
    for child in elem:
        if child.tag != "ref":
            raise SchemaViolation(
                f"unexpected <{child.tag}> inside <s> (sentence {global_index})"
            )
        kind = child.get("type")
        target = child.get("target")
        if kind not in REF_KINDS:
            raise SchemaViolation(
                f"<ref> has unknown type {kind!r} (sentence {global_index})"
            )
        if not target:
            raise SchemaViolation(f"<ref> missing target (sentence {global_index})")
        marks.append(RefMark(kind=kind, target=target))
        parts.append(f"[{target}]")
        parts.append(child.tail or "")
    text = normalize_whitespace("".join(parts))
    if not text:
        raise SchemaViolation(f"empty sentence (global index {global_index})")
    return Sentence(
        global_index=global_index,
        section_index=section_index,
        position_in_section=position,
        text=text,
        tokens=tuple(tokenize(text)),
        ref_marks=tuple(marks),
    )


def parse_paper(xml_text: str) -> Paper:
    """Parse paper XML into a :class:`Paper` with contiguous global indices.

    Raises :class:`MalformedXml` on syntax errors (with line/column) and
    :class:`SchemaViolation` on contract breaches: missing ``<title>``,
    an ``<s>`` outside a section or the abstract, duplicate graphic ids.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise MalformedXml(str(exc), line=line, column=column) from exc
    if root.tag != "paper":
        raise SchemaViolation(f"root element must be <paper>, got <{root.tag}>")

    title = None
    abstract: list[Sentence] = []
    sections: list[Section] = []
    graphics: list[GraphicElement] = []
    graphic_ids: set[str] = set()
    next_index = 0
    seen_abstract = False

    for child in root:
        if child.tag == "title":
            if title is not None:
                raise SchemaViolation("duplicate <title>")
            title = normalize_whitespace("".join(child.itertext()))
        elif child.tag == "abstract":
            if seen_abstract:
                raise SchemaViolation("duplicate <abstract>")
            seen_abstract = True
            for pos, s_elem in enumerate(child, start=1):
                if s_elem.tag != "s":
                    raise SchemaViolation(
                        f"unexpected <{s_elem.tag}> inside <abstract>"
                    )
                abstract.append(
                    _parse_sentence_element(s_elem, next_index, -1, pos)
                )
                next_index += 1
        elif child.tag == "section":
            kind = child.get("kind", "other")
            if kind not in SECTION_KINDS:
                kind = "other"
            sentences = []
            for pos, s_elem in enumerate(child, start=1):
                if s_elem.tag != "s":
                    raise SchemaViolation(
                        f"unexpected <{s_elem.tag}> inside <section>"
                    )
                sentences.append(
                    _parse_sentence_element(s_elem, next_index, len(sections), pos)
                )
                next_index += 1
            sections.append(
                Section(
                    name=normalize_whitespace(child.get("name", "")),
                    kind=kind,
                    sentences=tuple(sentences),
                )
            )
        elif child.tag == "graphic":
            gid = child.get("id")
            if not gid:
                raise SchemaViolation("<graphic> missing id")
            if gid in graphic_ids:
                raise SchemaViolation(f"duplicate graphic id {gid!r}")
            kind = child.get("kind")
            if kind not in GRAPHIC_KINDS:
                raise SchemaViolation(
                    f"<graphic id={gid!r}> has unknown kind {kind!r}"
                )
            graphic_ids.add(gid)
            graphics.append(
                GraphicElement(
                    id=gid,
                    kind=kind,
                    caption=normalize_whitespace(child.get("caption", "")),
                )
            )
        elif child.tag == "s":
            raise SchemaViolation("<s> outside a section or the abstract")
        else:
            raise SchemaViolation(f"unexpected element <{child.tag}> under <paper>")

    if title is None:
        raise SchemaViolation("missing <title>")
    return Paper(
        title=title,
        abstract_sentences=tuple(abstract),
        sections=tuple(sections),
        graphics=tuple(graphics),
    )


def _usable_line(line: str) -> bool:
    return any(ch.isalnum() for ch in line)


def parse_slides(text: str) -> SlideText:
    """Parse a one-sentence-per-line slides/insight file.

    Blank lines and lines containing only punctuation or whitespace are
    dropped; order is preserved.  Raises :class:`EmptySlides` when nothing
    usable remains.
    """
    sentences = [line.strip() for line in text.splitlines()]
    sentences = [line for line in sentences if _usable_line(line)]
    if not sentences:
        raise EmptySlides("slides file has no usable lines")
    return SlideText(sentences=tuple(sentences))
