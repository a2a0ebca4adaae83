"""Cluster selected sentences, title the clusters, attach graphics.

Clustering builds the complete similarity graph over the selected
sentences, then searches the sorted unique edge weights (plus +inf) for the
threshold whose keep-edges-at-or-above component count is closest to
round(N/3).  The component count is non-decreasing in the threshold, so the
search is a true binary search; ties break toward the smaller threshold.

Cluster titles are the noun-phrase candidates scored by mean cosine
similarity against the cluster's sentence vectors; graphics referenced by
member sentences are attached in first-mention order, deduplicated across
the whole deck.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .document import GRAPHIC_KINDS, Paper, Sentence, sentence_stream
from .embedding import cosine
from .errors import InternalInvariantError
from .features import noun_phrases


@dataclass(frozen=True)
class Cluster:
    member_indices: tuple[int, ...]  # global sentence indices, ascending
    title: str = ""
    graphics: tuple[str, ...] = ()


@dataclass(frozen=True)
class Outline:
    clusters: tuple[Cluster, ...]

    def validate(self) -> None:
        seen: set[int] = set()
        previous_first = -1
        for cluster in self.clusters:
            members = cluster.member_indices
            if not members:
                raise InternalInvariantError("empty cluster in outline")
            if list(members) != sorted(members):
                raise InternalInvariantError("cluster members not ascending")
            if members[0] <= previous_first:
                raise InternalInvariantError("clusters not ordered by first member")
            previous_first = members[0]
            overlap = seen.intersection(members)
            if overlap:
                raise InternalInvariantError(f"sentences in two clusters: {overlap}")
            seen.update(members)


class _UnionFind:
    def __init__(self, nodes):
        self.parent = {node: node for node in nodes}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _components(nodes, edges, threshold):
    """Connected components keeping edges with weight >= threshold."""
    uf = _UnionFind(nodes)
    for i, j, w in edges:
        if w >= threshold:
            uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for node in nodes:
        groups.setdefault(uf.find(node), []).append(node)
    comps = [sorted(members) for members in groups.values()]
    comps.sort(key=lambda members: members[0])
    return comps


def count_components(nodes, edges, threshold) -> int:
    return len(_components(nodes, edges, threshold))


def choose_threshold(nodes, edges, target: int) -> float:
    """Smallest threshold whose component count best approximates target.

    Candidates are the sorted unique edge weights plus +inf.  The count is
    monotone non-decreasing in the threshold, which the binary searches
    rely on; |count - target| ties break toward the smaller threshold.
    """
    candidates = sorted({w for _, _, w in edges})
    candidates.append(math.inf)
    counts: dict[int, int] = {}

    def count_at(idx: int) -> int:
        if idx not in counts:
            counts[idx] = count_components(nodes, edges, candidates[idx])
        return counts[idx]

    def first_index_with_count_at_least(value: int) -> int:
        lo, hi = 0, len(candidates) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if count_at(mid) >= value:
                hi = mid
            else:
                lo = mid + 1
        return lo

    # count(+inf) == len(nodes) >= target, so a crossing always exists
    crossing = first_index_with_count_at_least(target)
    best_count = count_at(crossing)
    if crossing > 0:
        below = count_at(crossing - 1)
        if target - below <= best_count - target:  # tie -> smaller threshold
            best_count = below
    return candidates[first_index_with_count_at_least(best_count)]


def cluster_sentences(selected, vectors) -> list[list[int]]:
    """Partition the selected sentence indices into similarity components.

    ``vectors`` is indexed by global sentence index.  Returns member lists
    sorted ascending, ordered by each cluster's first member.
    """
    nodes = sorted(selected)
    if not nodes:
        return []
    edges = [
        (nodes[a], nodes[b], cosine(vectors[nodes[a]], vectors[nodes[b]]))
        for a in range(len(nodes))
        for b in range(a + 1, len(nodes))
    ]
    target = round(len(nodes) / 3)
    threshold = choose_threshold(nodes, edges, target)
    return _components(nodes, edges, threshold)


def _title_case(tokens) -> str:
    return " ".join(tok.capitalize() for tok in tokens)


def title_cluster(sentences, sentence_vectors, embedder, pos_lexicon) -> str:
    """Best noun phrase by mean similarity to the cluster's sentences.

    Ties break toward the earlier sentence, then the earlier phrase; a
    cluster with no noun phrase falls back to the first five tokens of its
    first sentence.
    """
    sentences = list(sentences)
    candidates = []  # (sentence position, phrase position, tokens)
    for s_pos, sent in enumerate(sentences):
        for p_pos, phrase in enumerate(noun_phrases(sent.tokens, pos_lexicon)):
            candidates.append((s_pos, p_pos, phrase))
    if not candidates:
        first = sentences[0]
        return _title_case(first.tokens[:5]) if first.tokens else first.text

    phrase_vecs = embedder.embed([" ".join(tokens) for _, _, tokens in candidates])
    best_score = -math.inf
    best_tokens = candidates[0][2]
    # candidates arrive in (sentence, phrase) order, so strict improvement
    # realizes the earlier-sentence, earlier-phrase tie break
    for (_, _, tokens), vec in zip(candidates, phrase_vecs):
        sims = 0.0
        for sent_vec in sentence_vectors:
            sims += cosine(vec, sent_vec)
        score = sims / len(sentences)
        if score > best_score:
            best_score = score
            best_tokens = tokens
    return _title_case(best_tokens)


def attach_graphics(outline: Outline, paper: Paper) -> tuple[Outline, list[str]]:
    """Attach referenced graphics to clusters; first mention owns a graphic.

    Dangling targets (no matching graphic element) are omitted from the
    outline and reported in the returned warnings list.
    """
    by_index: dict[int, Sentence] = {
        s.global_index: s for s in sentence_stream(paper)
    }
    known = paper.graphic_ids()
    owned: set[str] = set()
    warnings: list[str] = []
    clusters = []
    for cluster in outline.clusters:
        graphics: list[str] = []
        for index in cluster.member_indices:
            for mark in by_index[index].ref_marks:
                if mark.kind not in GRAPHIC_KINDS:
                    continue
                if mark.target not in known:
                    warnings.append(
                        f"dangling {mark.kind} reference '{mark.target}' "
                        f"in sentence {index}"
                    )
                    continue
                if mark.target not in owned:
                    owned.add(mark.target)
                    graphics.append(mark.target)
        clusters.append(
            Cluster(
                member_indices=cluster.member_indices,
                title=cluster.title,
                graphics=tuple(graphics),
            )
        )
    return Outline(clusters=tuple(clusters)), warnings
