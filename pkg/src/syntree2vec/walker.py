"""Biased random-walk corpus generation.

Every node starts ``walks_per_node`` walks; each walk draws its own random
stream from (seed, iteration, start node), so the corpus is reproducible for
a fixed seed no matter how many threads generate it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Vocabulary
from .graph import GiantGraph
from .transition import TransitionIndex


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    seed: int = 1

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError(f"walks_per_node must be >= 1, got {self.walks_per_node}")
        if self.walk_length < 1:
            raise ValueError(f"walk_length must be >= 1, got {self.walk_length}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


def syntree2vec_walk(
    graph: GiantGraph,
    index: TransitionIndex,
    start: int,
    length: int,
    rng: np.random.Generator,
) -> list[int]:
    """One walk of ``length`` nodes from ``start``.

    The first step samples from the node's predecessor-free table, later
    steps from the (previous, current) edge table. The walk ends early only
    if it sits on a node with no neighbors (then the prefix is returned).
    """
    walk = [start]
    if length <= 1:
        return walk
    u_slot = rng.random(length - 1)
    u_accept = rng.random(length - 1)
    for k in range(length - 1):
        cur = walk[-1]
        if graph.degree(cur) == 0:
            break
        prev = walk[-2] if len(walk) >= 2 else None
        table = index.table(cur, prev)
        pos = table.pick(u_slot[k], u_accept[k])
        walk.append(int(index.neighbors_of(cur)[pos]))
    return walk


def _walk_rng(seed: int, iteration: int, node: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, iteration, node]))


def generate_walks(
    graph: GiantGraph,
    index: TransitionIndex,
    config: WalkConfig,
    threads: int = 1,
) -> list[list[int]]:
    """All walks in canonical (iteration, start node) order:
    walks_per_node x num_nodes walks, reproducible per seed."""
    specs = [
        (i, v)
        for i in range(config.walks_per_node)
        for v in range(graph.num_nodes)
    ]

    def run(spec: tuple[int, int]) -> list[int]:
        iteration, node = spec
        rng = _walk_rng(config.seed, iteration, node)
        return syntree2vec_walk(graph, index, node, config.walk_length, rng)

    if threads <= 1:
        return [run(spec) for spec in specs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, specs))


def walks_to_words(
    walks: Sequence[Sequence[int]], vocab: Vocabulary
) -> list[list[str]]:
    return [[vocab.words[v] for v in walk] for walk in walks]


def write_walks(
    walks: Sequence[Sequence[int]], vocab: Vocabulary, path: str | Path
) -> None:
    """One walk per line, space-separated word strings, so any external
    skip-gram trainer can consume the corpus."""
    with open(path, "w", encoding="utf-8") as fh:
        for walk in walks:
            fh.write(" ".join(vocab.words[v] for v in walk))
            fh.write("\n")


def read_walks(path: str | Path) -> list[list[str]]:
    walks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            words = line.split()
            if words:
                walks.append(words)
    return walks
