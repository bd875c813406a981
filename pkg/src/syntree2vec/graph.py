"""Concatenate dependency trees into one weighted graph over word types and
accumulate the POS tag co-occurrence matrix used to bias walks."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .corpus import PUNCT_TAG, SentenceTree, Vocabulary
from .errors import GraphFormatError, GraphVersionError

_MAGIC = "syntree2vec-graph"
_VERSION = 1


@dataclass
class BuildStats:
    """Arc accounting from one build (or merge of builds)."""

    arcs_total: int = 0
    arcs_counted: int = 0
    skipped_oov: int = 0
    skipped_self: int = 0
    skipped_punct: int = 0


class GiantGraph:
    """Undirected weighted graph over word types.

    Node ``i`` is the vocabulary word ``words[i]`` carrying its dominant tag
    ``tags[i]``; edge weights are integer dependency-arc counts. Neighbor
    lists are exposed in sorted index order so downstream sampling is
    deterministic.
    """

    def __init__(
        self,
        words: list[str],
        tags: list[str],
        adjacency: list[dict[int, int]],
        build_stats: BuildStats | None = None,
    ):
        if len(words) != len(tags) or len(words) != len(adjacency):
            raise ValueError("words, tags and adjacency must have equal length")
        self.words = list(words)
        self.tags = list(tags)
        self._adj = adjacency
        self.build_stats = build_stats
        self._sorted: list[tuple[int, ...] | None] = [None] * len(words)

    @classmethod
    def from_edges(
        cls,
        words: list[str],
        tags: list[str],
        edges: Iterable[tuple[int, int, int]],
    ) -> "GiantGraph":
        """Build directly from (u, v, weight) triples (mainly for fixtures)."""
        adj: list[dict[int, int]] = [{} for _ in words]
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if w < 1:
                raise ValueError(f"edge weight must be >= 1, got {w}")
            adj[u][v] = adj[u].get(v, 0) + w
            adj[v][u] = adj[v].get(u, 0) + w
        return cls(words, tags, adj)

    @property
    def num_nodes(self) -> int:
        return len(self.words)

    def neighbors(self, v: int) -> tuple[int, ...]:
        cached = self._sorted[v]
        if cached is None:
            cached = tuple(sorted(self._adj[v]))
            self._sorted[v] = cached
        return cached

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def weight(self, u: int, v: int) -> int:
        return self._adj[u][v]

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Yield each undirected edge once as (u, v, weight) with u < v."""
        for u in range(self.num_nodes):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj) // 2

    @property
    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GiantGraph):
            return NotImplemented
        return (
            self.words == other.words
            and self.tags == other.tags
            and self._adj == other._adj
        )

    def __repr__(self) -> str:
        return f"GiantGraph(nodes={self.num_nodes}, edges={self.num_edges})"


class TagTransitionMatrix:
    """Symmetric count matrix over POS tags: entry (a, b) counts dependency
    arcs whose endpoint tags are a and b (each arc adds to both (a,b) and
    (b,a), so a same-tag arc adds 2 on the diagonal)."""

    def __init__(self, tags: list[str], counts: np.ndarray | None = None):
        self.tags = list(tags)
        self.index = {t: i for i, t in enumerate(self.tags)}
        if counts is None:
            counts = np.zeros((len(tags), len(tags)), dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (len(tags), len(tags)):
            raise ValueError(
                f"counts shape {counts.shape} does not match {len(tags)} tags"
            )
        self.counts = counts

    def add_arc(self, tag_a: str, tag_b: str) -> None:
        a = self.index[tag_a]
        b = self.index[tag_b]
        self.counts[a, b] += 1
        self.counts[b, a] += 1

    def count(self, tag_a: str, tag_b: str) -> int:
        a = self.index.get(tag_a)
        b = self.index.get(tag_b)
        if a is None or b is None:
            return 0
        return int(self.counts[a, b])

    def row_sum(self, tag: str) -> int:
        i = self.index.get(tag)
        if i is None:
            return 0
        return int(self.counts[i].sum())

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TagTransitionMatrix):
            return NotImplemented
        return self.tags == other.tags and np.array_equal(self.counts, other.counts)

    def __repr__(self) -> str:
        return f"TagTransitionMatrix(tags={len(self.tags)}, total={self.total})"


def build_giant_graph(
    trees: Iterable[SentenceTree], vocab: Vocabulary
) -> tuple[GiantGraph, TagTransitionMatrix]:
    """Merge all parse trees on shared word-type nodes.

    Every dependency arc with both endpoint words in the vocabulary adds 1
    to the (undirected) edge weight between the two word nodes and 1 to each
    of the two symmetric tag-matrix entries for the occurrence tags. Arcs
    with an out-of-vocabulary endpoint, arcs joining two occurrences of the
    same word type, and (when the vocabulary dropped punctuation) arcs with
    a PUNCT endpoint are skipped and tallied in ``graph.build_stats``.
    """
    words = vocab.words
    tags = [vocab.dominant_tag(i) for i in range(len(vocab))]
    matrix = TagTransitionMatrix(vocab.all_tags())
    adj: list[dict[int, int]] = [{} for _ in words]
    stats = BuildStats()
    for tree in trees:
        for head_tok, dep_tok in tree.arcs():
            stats.arcs_total += 1
            if vocab.drop_punct and PUNCT_TAG in (head_tok.upos, dep_tok.upos):
                stats.skipped_punct += 1
                continue
            h = vocab.index.get(head_tok.form)
            d = vocab.index.get(dep_tok.form)
            if h is None or d is None:
                stats.skipped_oov += 1
                continue
            if h == d:
                stats.skipped_self += 1
                continue
            adj[h][d] = adj[h].get(d, 0) + 1
            adj[d][h] = adj[d].get(h, 0) + 1
            matrix.add_arc(head_tok.upos, dep_tok.upos)
            stats.arcs_counted += 1
    return GiantGraph(words, tags, adj, build_stats=stats), matrix


def merge_builds(
    a: tuple[GiantGraph, TagTransitionMatrix],
    b: tuple[GiantGraph, TagTransitionMatrix],
) -> tuple[GiantGraph, TagTransitionMatrix]:
    """Combine two builds over the same vocabulary by adding weights and
    tag counts. The result equals a single build over the union corpus."""
    graph_a, matrix_a = a
    graph_b, matrix_b = b
    if graph_a.words != graph_b.words or graph_a.tags != graph_b.tags:
        raise ValueError("builds to merge must share the same vocabulary")
    if matrix_a.tags != matrix_b.tags:
        raise ValueError("builds to merge must share the same tag set")
    adj: list[dict[int, int]] = []
    for u in range(graph_a.num_nodes):
        merged = dict(graph_a._adj[u])
        for v, w in graph_b._adj[u].items():
            merged[v] = merged.get(v, 0) + w
        adj.append(merged)
    stats = None
    if graph_a.build_stats is not None and graph_b.build_stats is not None:
        sa, sb = graph_a.build_stats, graph_b.build_stats
        stats = BuildStats(
            arcs_total=sa.arcs_total + sb.arcs_total,
            arcs_counted=sa.arcs_counted + sb.arcs_counted,
            skipped_oov=sa.skipped_oov + sb.skipped_oov,
            skipped_self=sa.skipped_self + sb.skipped_self,
            skipped_punct=sa.skipped_punct + sb.skipped_punct,
        )
    graph = GiantGraph(graph_a.words, graph_a.tags, adj, build_stats=stats)
    matrix = TagTransitionMatrix(matrix_a.tags, matrix_a.counts + matrix_b.counts)
    return graph, matrix


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    total_weight: int
    degree_histogram: dict[int, int]
    isolated_nodes: int

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "total_weight": self.total_weight,
            "degree_histogram": {str(k): v for k, v in self.degree_histogram.items()},
            "isolated_nodes": self.isolated_nodes,
        }

    def to_text(self) -> str:
        hist = " ".join(
            f"{d}:{n}" for d, n in sorted(self.degree_histogram.items())
        )
        return "\n".join(
            [
                f"node_count {self.node_count}",
                f"edge_count {self.edge_count}",
                f"total_weight {self.total_weight}",
                f"degree_histogram {hist}",
                f"isolated_nodes {self.isolated_nodes}",
            ]
        )


def graph_stats(graph: GiantGraph) -> GraphStats:
    """Exact node/edge/weight counts plus the degree histogram."""
    hist: dict[int, int] = {}
    for v in range(graph.num_nodes):
        d = graph.degree(v)
        hist[d] = hist.get(d, 0) + 1
    return GraphStats(
        node_count=graph.num_nodes,
        edge_count=graph.num_edges,
        total_weight=graph.total_weight,
        degree_histogram=hist,
        isolated_nodes=hist.get(0, 0),
    )


def export_graph(
    graph: GiantGraph, matrix: TagTransitionMatrix, path: str | Path
) -> None:
    """Write graph and tag matrix as versioned line-oriented text."""
    lines = [f"{_MAGIC} {_VERSION}"]
    lines.append(f"nodes {graph.num_nodes}")
    for i, (word, tag) in enumerate(zip(graph.words, graph.tags)):
        lines.append(f"{i} {word} {tag}")
    edges = list(graph.edges())
    lines.append(f"edges {len(edges)}")
    for u, v, w in edges:
        lines.append(f"{u} {v} {w}")
    lines.append(f"tags {len(matrix.tags)}")
    if matrix.tags:
        lines.append(" ".join(matrix.tags))
    lines.append("matrix")
    for row in matrix.counts:
        lines.append(" ".join(str(int(x)) for x in row))
    lines.append("end")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


class _LineReader:
    """Iterates decoded lines of a byte buffer, tracking the byte offset of
    the current line start for error reporting."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self.offset = 0

    def next_line(self, what: str) -> str:
        if self._pos >= len(self._data):
            raise GraphFormatError(f"unexpected end of file, expected {what}", self._pos)
        self.offset = self._pos
        end = self._data.find(b"\n", self._pos)
        if end == -1:
            end = len(self._data)
            self._pos = end
        else:
            self._pos = end + 1
        try:
            return self._data[self.offset : end].decode("utf-8").rstrip("\r")
        except UnicodeDecodeError:
            raise GraphFormatError("invalid UTF-8", self.offset) from None


def import_graph(path: str | Path) -> tuple[GiantGraph, TagTransitionMatrix]:
    """Read a file produced by export_graph. Raises GraphFormatError with the
    byte offset of the offending line, or GraphVersionError on a version
    mismatch."""
    reader = _LineReader(Path(path).read_bytes())

    def expect_int(text: str, what: str) -> int:
        try:
            return int(text)
        except ValueError:
            raise GraphFormatError(f"bad {what}: {text!r}", reader.offset) from None

    header = reader.next_line("header").split(" ")
    if len(header) != 2 or header[0] != _MAGIC:
        raise GraphFormatError("not a graph file (bad header)", reader.offset)
    version = expect_int(header[1], "version")
    if version != _VERSION:
        raise GraphVersionError(
            f"unsupported graph file version {version} (expected {_VERSION})"
        )

    parts = reader.next_line("node count").split(" ")
    if len(parts) != 2 or parts[0] != "nodes":
        raise GraphFormatError("expected 'nodes <count>'", reader.offset)
    n = expect_int(parts[1], "node count")
    words: list[str] = []
    tags: list[str] = []
    for i in range(n):
        fields = reader.next_line("node line").split(" ")
        if len(fields) < 3:
            raise GraphFormatError("node line needs 'index word tag'", reader.offset)
        if expect_int(fields[0], "node index") != i:
            raise GraphFormatError(f"node index out of order (expected {i})", reader.offset)
        words.append(" ".join(fields[1:-1]))
        tags.append(fields[-1])

    parts = reader.next_line("edge count").split(" ")
    if len(parts) != 2 or parts[0] != "edges":
        raise GraphFormatError("expected 'edges <count>'", reader.offset)
    m = expect_int(parts[1], "edge count")
    adj: list[dict[int, int]] = [{} for _ in range(n)]
    for _ in range(m):
        fields = reader.next_line("edge line").split(" ")
        if len(fields) != 3:
            raise GraphFormatError("edge line needs 'u v weight'", reader.offset)
        u = expect_int(fields[0], "edge endpoint")
        v = expect_int(fields[1], "edge endpoint")
        w = expect_int(fields[2], "edge weight")
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise GraphFormatError(f"bad edge endpoints {u} {v}", reader.offset)
        if w < 1:
            raise GraphFormatError(f"edge weight must be >= 1, got {w}", reader.offset)
        if v in adj[u]:
            raise GraphFormatError(f"duplicate edge {u} {v}", reader.offset)
        adj[u][v] = w
        adj[v][u] = w

    parts = reader.next_line("tag count").split(" ")
    if len(parts) != 2 or parts[0] != "tags":
        raise GraphFormatError("expected 'tags <count>'", reader.offset)
    t = expect_int(parts[1], "tag count")
    tag_names: list[str] = []
    if t > 0:
        tag_names = reader.next_line("tag names").split(" ")
        if len(tag_names) != t:
            raise GraphFormatError(
                f"expected {t} tag names, got {len(tag_names)}", reader.offset
            )
    if reader.next_line("matrix marker") != "matrix":
        raise GraphFormatError("expected 'matrix'", reader.offset)
    counts = np.zeros((t, t), dtype=np.int64)
    for i in range(t):
        fields = reader.next_line("matrix row").split(" ")
        if len(fields) != t:
            raise GraphFormatError(
                f"matrix row {i} has {len(fields)} entries, expected {t}", reader.offset
            )
        for j, cell in enumerate(fields):
            value = expect_int(cell, "matrix entry")
            if value < 0:
                raise GraphFormatError("negative matrix entry", reader.offset)
            counts[i, j] = value
    if reader.next_line("end marker") != "end":
        raise GraphFormatError("expected 'end'", reader.offset)
    return GiantGraph(words, tags, adj), TagTransitionMatrix(tag_names, counts)
