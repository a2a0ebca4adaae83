"""Render an outline as a deterministic two-level-bullet deck.

Deck text format (UTF-8, LF endings, trailing newline):

* slide 1 is ``# <paper title>`` when the title slide is enabled;
* each cluster renders as ``- **<title>**`` followed by one
  ``  - <sentence text>`` line per member and one
  ``  - [<KIND> <id>: <caption>]`` line per owned graphic;
* slides are separated by a line containing only ``---``.

Clusters pack first-fit into slides of at most
``max_second_level_per_slide`` sentence bullets (graphic lines do not
count).  A cluster is split only when it alone exceeds the budget: it then
starts a fresh slide and continues in budget-sized chunks titled
``<title> (cont.)``, graphics following the last chunk.  A following
cluster may share the final chunk's slide if it fits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .document import Paper, sentence_stream
from .errors import InternalInvariantError
from .organize import Outline


@dataclass(frozen=True)
class LayoutConfig:
    max_second_level_per_slide: int = 8
    include_title_slide: bool = True

    def __post_init__(self):
        if self.max_second_level_per_slide < 1:
            raise ValueError("max_second_level_per_slide must be >= 1")


def emit_deck(outline: Outline, paper: Paper, cfg: LayoutConfig | None = None) -> str:
    if cfg is None:
        cfg = LayoutConfig()
    budget = cfg.max_second_level_per_slide
    text_by_index = {s.global_index: s.text for s in sentence_stream(paper)}
    graphic_by_id = {g.id: g for g in paper.graphics}

    slides: list[list[str]] = []
    if cfg.include_title_slide:
        slides.append([f"# {paper.title}"])
    current: list[str] | None = None
    used = 0

    def open_slide() -> None:
        nonlocal current, used
        current = []
        slides.append(current)
        used = 0

    def emit_cluster_part(title: str, members, graphics) -> None:
        nonlocal used
        current.append(f"- **{title}**")
        for index in members:
            if index not in text_by_index:
                raise InternalInvariantError(f"outline references sentence {index}")
            current.append(f"  - {text_by_index[index]}")
        for gid in graphics:
            graphic = graphic_by_id.get(gid)
            if graphic is None:
                raise InternalInvariantError(f"outline references graphic {gid!r}")
            current.append(
                f"  - [{graphic.kind.upper()} {graphic.id}: {graphic.caption}]"
            )
        used += len(members)

    for cluster in outline.clusters:
        members = cluster.member_indices
        if len(members) <= budget:
            if current is None or used + len(members) > budget:
                open_slide()
            emit_cluster_part(cluster.title, members, cluster.graphics)
        else:
            chunks = [
                members[i : i + budget] for i in range(0, len(members), budget)
            ]
            for pos, chunk in enumerate(chunks):
                open_slide()
                title = cluster.title if pos == 0 else f"{cluster.title} (cont.)"
                graphics = cluster.graphics if pos == len(chunks) - 1 else ()
                emit_cluster_part(title, chunk, graphics)

    if not slides:
        return ""
    return "\n---\n".join("\n".join(lines) for lines in slides) + "\n"
