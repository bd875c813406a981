"""Second-order transition distributions for the biased walk.

For a walker sitting at node v having arrived from t, the unnormalized
probability of stepping to neighbor x is

    pi(t, v, x) = alpha(t, x) * weight(v, x) * bias(tag(v), tag(x))

where alpha is the return/in-out hop-distance bias (1/p, 1, 1/q), weight is
the dependency-arc count on edge {v, x}, and bias is the row-normalized tag
co-occurrence frequency. When the tag row of v gives zero mass to every
candidate (sparse rows, typically at leaves) the bias factor is dropped and
sampling falls back to alpha * weight alone. The first step of a walk has no
predecessor and uses alpha = 1.

Distributions are materialized as alias tables for O(1) draws, either for
every ordered edge upfront or lazily per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError
from .graph import GiantGraph, TagTransitionMatrix


@dataclass(frozen=True)
class WalkParams:
    """Return parameter p and in-out parameter q; both must be positive."""

    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        for name, value in (("p", self.p), ("q", self.q)):
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value}")


def alpha(params: WalkParams, d_tx: int) -> float:
    """Hop-distance search bias: 1/p when the candidate is the predecessor
    itself (d=0), 1 when it is adjacent to the predecessor (d=1), 1/q when
    it is two hops away (d=2)."""
    if d_tx == 0:
        return 1.0 / params.p
    if d_tx == 1:
        return 1.0
    if d_tx == 2:
        return 1.0 / params.q
    raise ValueError(f"hop distance must be 0, 1 or 2, got {d_tx}")


def tag_bias(
    matrix: TagTransitionMatrix, tag_v: str, tag_x: str
) -> tuple[float, bool]:
    """Row-normalized tag co-occurrence bias.

    Returns (M[tag_v][tag_x] / rowsum(tag_v), False) when the row has mass;
    (0.0, True) when the row is all-zero or tag_v is unknown, in which case
    the caller should fall back to static edge weights.
    """
    rowsum = matrix.row_sum(tag_v)
    if rowsum == 0:
        return 0.0, True
    return matrix.count(tag_v, tag_x) / rowsum, False


class AliasTable:
    """Walker/Vose alias table: O(n) setup, O(1) draws.

    ``prob[i]`` is the acceptance threshold for slot i and ``alias[i]`` the
    fallback outcome; a draw picks a uniform slot and a uniform acceptance
    value.
    """

    __slots__ = ("prob", "alias", "n")

    def __init__(self, prob: np.ndarray, alias: np.ndarray):
        self.prob = prob
        self.alias = alias
        self.n = len(prob)

    def pick(self, u_slot: float, u_accept: float) -> int:
        """Map two uniforms in [0, 1) to an outcome."""
        i = int(u_slot * self.n)
        if i >= self.n:  # guard against u_slot rounding to 1.0
            i = self.n - 1
        return i if u_accept < self.prob[i] else int(self.alias[i])

    def sample(self, rng: np.random.Generator) -> int:
        return self.pick(rng.random(), rng.random())

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized draws (used by the trainer's negative sampler)."""
        slots = (rng.random(size) * self.n).astype(np.int64)
        np.minimum(slots, self.n - 1, out=slots)
        accept = rng.random(size)
        return np.where(accept < self.prob[slots], slots, self.alias[slots])

    def outcome_probabilities(self) -> np.ndarray:
        """Exact distribution the table encodes (for verification)."""
        p = self.prob / self.n
        np.add.at(p, self.alias, (1.0 - self.prob) / self.n)
        return p


def build_alias_table(weights) -> AliasTable:
    """Build an alias table from non-negative unnormalized weights."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"weights must be one-dimensional, got shape {w.shape}")
    if w.size == 0:
        raise DegenerateDistributionError("cannot sample from an empty weight vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise DegenerateDistributionError("all weights are zero")
    n = w.size
    scaled = w * (n / total)
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    # Leftovers are within rounding of exactly 1; their alias stays self.
    return AliasTable(prob, alias)


def _normalized_bias_matrix(matrix: TagTransitionMatrix) -> np.ndarray:
    counts = matrix.counts.astype(np.float64)
    rowsums = counts.sum(axis=1)
    out = np.zeros_like(counts)
    nonzero = rowsums > 0
    out[nonzero] = counts[nonzero] / rowsums[nonzero, None]
    return out


class TransitionIndex:
    """Per-edge and per-node transition distributions with alias sampling.

    With ``precompute`` one alias table is stored for every ordered edge
    (t, v) plus one first-step table per node (memory grows with the sum of
    squared degrees); without it the same tables are built on demand each
    step, giving bit-identical walks.
    """

    def __init__(
        self,
        graph: GiantGraph,
        matrix: TagTransitionMatrix,
        params: WalkParams,
        *,
        use_tag_bias: bool = True,
        use_alpha: bool = True,
        precompute: bool = True,
    ):
        self.graph = graph
        self.matrix = matrix
        self.params = params
        self.use_tag_bias = use_tag_bias
        self.use_alpha = use_alpha
        self.precomputed = precompute
        self._bias = _normalized_bias_matrix(matrix) if use_tag_bias else None
        self._tag_row = np.array(
            [matrix.index.get(tag, -1) for tag in graph.tags], dtype=np.int64
        )
        # Per-node candidate arrays, aligned with graph.neighbors(v).
        self._nbrs: list[np.ndarray] = []
        self._weights: list[np.ndarray] = []
        for v in range(graph.num_nodes):
            nbrs = np.array(graph.neighbors(v), dtype=np.int64)
            self._nbrs.append(nbrs)
            self._weights.append(
                np.array([graph.weight(v, int(x)) for x in nbrs], dtype=np.float64)
            )
        self._node_tables: dict[int, AliasTable] = {}
        self._edge_tables: dict[tuple[int, int], AliasTable] = {}
        if precompute:
            for v in range(graph.num_nodes):
                if len(self._nbrs[v]) == 0:
                    continue
                self._node_tables[v] = build_alias_table(self._unnormalized(v, None))
                if use_alpha:
                    for t in self._nbrs[v]:
                        self._edge_tables[(int(t), v)] = build_alias_table(
                            self._unnormalized(v, int(t))
                        )

    def neighbors_of(self, v: int) -> np.ndarray:
        return self._nbrs[v]

    def _unnormalized(self, v: int, t: int | None) -> np.ndarray:
        """Unnormalized pi over graph.neighbors(v); t=None means first step."""
        nbrs = self._nbrs[v]
        if len(nbrs) == 0:
            raise DegenerateDistributionError(f"node {v} has no neighbors")
        pi = self._weights[v].copy()
        if self.use_alpha and t is not None:
            t_nbrs = self._nbrs[t]
            adjacent = np.isin(nbrs, t_nbrs, assume_unique=True)
            alphas = np.where(adjacent, 1.0, 1.0 / self.params.q)
            alphas[nbrs == t] = 1.0 / self.params.p
            pi *= alphas
        if self.use_tag_bias:
            row = self._tag_row[v]
            if row >= 0:
                cand_rows = self._tag_row[nbrs]
                bias = np.where(
                    cand_rows >= 0, self._bias[row, np.maximum(cand_rows, 0)], 0.0
                )
                if bias.max() > 0.0:
                    pi *= bias
                # else: sparse row, keep the static alpha*weight fallback
        return pi

    def table(self, v: int, t: int | None = None) -> AliasTable:
        """Alias table over graph.neighbors(v) for a step arriving from t."""
        if t is not None and not self.graph.has_edge(t, v):
            raise ValueError(f"predecessor {t} is not a neighbor of {v}")
        if not self.use_alpha:
            t = None  # first-order walk: distribution ignores the predecessor
        if self.precomputed:
            if t is None:
                table = self._node_tables.get(v)
                if table is None:
                    raise DegenerateDistributionError(f"node {v} has no neighbors")
                return table
            return self._edge_tables[(t, v)]
        return build_alias_table(self._unnormalized(v, t))

    def distribution(self, v: int, t: int | None = None) -> np.ndarray:
        """Normalized transition distribution over graph.neighbors(v)."""
        if t is not None and not self.graph.has_edge(t, v):
            raise ValueError(f"predecessor {t} is not a neighbor of {v}")
        if not self.use_alpha:
            t = None
        pi = self._unnormalized(v, t)
        return pi / pi.sum()

    def dump_distribution(self, v: int, t: int | None = None) -> str:
        """One-line text rendering, e.g. for fixture diffs:
        ``<t|start> v x1:p1 x2:p2 ...``."""
        probs = self.distribution(v, t)
        head = "start" if t is None else str(t)
        body = " ".join(
            f"{int(x)}:{p:.17g}" for x, p in zip(self._nbrs[v], probs)
        )
        return f"{head} {v} {body}"

    def dump_all(self) -> list[str]:
        lines = []
        for v in range(self.graph.num_nodes):
            if len(self._nbrs[v]) == 0:
                continue
            lines.append(self.dump_distribution(v, None))
            for t in self._nbrs[v]:
                lines.append(self.dump_distribution(v, int(t)))
        return lines


def _hop_distance(graph: GiantGraph, t: int, x: int) -> int:
    if x == t:
        return 0
    if graph.has_edge(t, x):
        return 1
    return 2


def unnormalized_pi(
    graph: GiantGraph,
    matrix: TagTransitionMatrix,
    params: WalkParams,
    t: int | None,
    v: int,
    x: int,
    *,
    use_tag_bias: bool = True,
    use_alpha: bool = True,
) -> float:
    """Unnormalized transition probability of stepping v -> x given
    predecessor t (None for the first step of a walk).

    The tag bias multiplies in only when at least one of v's candidates has
    a positive bias; otherwise (all-zero row over the candidates, the leaf
    regime) pi degrades to alpha * weight.
    """
    if not graph.has_edge(v, x):
        raise ValueError(f"({v}, {x}) is not an edge")
    if t is not None and not graph.has_edge(t, v):
        raise ValueError(f"predecessor {t} is not a neighbor of {v}")
    a = 1.0
    if use_alpha and t is not None:
        a = alpha(params, _hop_distance(graph, t, x))
    pi = a * graph.weight(v, x)
    if use_tag_bias:
        tag_v = graph.tags[v]
        any_positive = any(
            tag_bias(matrix, tag_v, graph.tags[c])[0] > 0.0 for c in graph.neighbors(v)
        )
        if any_positive:
            pi *= tag_bias(matrix, tag_v, graph.tags[x])[0]
    return pi


def preprocess_weights(
    graph: GiantGraph,
    matrix: TagTransitionMatrix,
    params: WalkParams,
    *,
    use_tag_bias: bool = True,
    use_alpha: bool = True,
    precompute: bool = True,
) -> TransitionIndex:
    """Build the transition index for walk generation."""
    return TransitionIndex(
        graph,
        matrix,
        params,
        use_tag_bias=use_tag_bias,
        use_alpha=use_alpha,
        precompute=precompute,
    )
