"""Graph representation, seeded random models, and edge-list I/O.

Vertices are labeled ``1..n`` everywhere (matching the text format).
All randomness flows through numpy's PCG64 generator keyed by a
``SeedSequence``; the same seed and parameters reproduce the same graph
bit-for-bit on every platform.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ConfigError, GraphParseError


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit unsigned master seed."""

    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or not 0 <= self.value < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.value!r}")

    @classmethod
    def coerce(cls, seed) -> "RngSeed":
        if isinstance(seed, cls):
            return seed
        return cls(int(seed))


def rng_from(seed, *stream: int) -> np.random.Generator:
    """PCG64 generator keyed by ``SeedSequence((seed, *stream))``.

    Deriving per-trial generators from ``(master seed, cell, trial)`` keys
    makes concurrent execution order irrelevant to the output.
    """
    entropy = (RngSeed.coerce(seed).value,) + tuple(int(s) for s in stream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


class Graph:
    """Simple undirected graph on labeled vertices ``1..n``.

    Values are treated as immutable after construction; nothing in the
    package mutates a built graph.
    """

    __slots__ = ("n", "_adj", "edge_count")

    def __init__(self, n: int, edges=()):
        if n < 0:
            raise ConfigError("vertex count must be non-negative")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n + 1)]
        count = 0
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ConfigError(f"edge ({u},{v}) out of range 1..{n}")
            if u == v:
                raise ConfigError(f"self-loop at vertex {u}")
            if v not in self._adj[u]:
                self._adj[u].add(v)
                self._adj[v].add(u)
                count += 1
        self.edge_count = count

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, v: int) -> set:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edges(self) -> list:
        return sorted((u, v) for u in self.vertices() for v in self._adj[u] if u < v)

    def isolated_vertices(self) -> list:
        return [v for v in self.vertices() if not self._adj[v]]

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric 0/1 matrix, row/column ``i`` for vertex ``i+1``."""
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for u in self.vertices():
            for v in self._adj[u]:
                A[u - 1, v - 1] = 1
        return A

    def induced_prefix(self, m: int) -> "Graph":
        """Subgraph induced on vertices ``1..m``."""
        if not 0 <= m <= self.n:
            raise ConfigError(f"prefix size {m} out of range")
        g = Graph(m)
        count = 0
        for u in range(1, m + 1):
            nbrs = {v for v in self._adj[u] if v <= m}
            g._adj[u] = nbrs
            count += len(nbrs)
        g.edge_count = count // 2
        return g

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self._adj == other._adj
        )

    def __hash__(self):
        return hash((self.n, self.edge_count, tuple(sorted(map(len, self._adj)))))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


# ---------------------------------------------------------------------------
# deterministic constructions
# ---------------------------------------------------------------------------

def complete(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ConfigError("cycle needs at least 3 vertices")
    return Graph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def star(leaves: int) -> Graph:
    return Graph(leaves + 1, [(1, i) for i in range(2, leaves + 2)])


# ---------------------------------------------------------------------------
# G(n, p)
# ---------------------------------------------------------------------------

def _pair_from_index(t: int) -> tuple:
    # pairs in vertex-exposure order: (1,2), (1,3), (2,3), (1,4), ...
    # index t lives in the block of vertex m, which starts at (m-1)(m-2)/2
    m = (3 + math.isqrt(8 * t + 1)) // 2
    while (m - 1) * (m - 2) // 2 > t:
        m -= 1
    while m * (m - 1) // 2 <= t:
        m += 1
    j = t - (m - 1) * (m - 2) // 2 + 1
    return j, m


def _sample_pair_indices(n: int, p: float, rng: np.random.Generator) -> list:
    """Indices of present pairs among 0..C(n,2)-1, one geometric gap per edge.

    Each pair is included independently with probability ``p``; skipping
    straight to the next success costs O(edges) instead of O(n^2).
    """
    total = n * (n - 1) // 2
    if p <= 0.0:
        return []
    if p >= 1.0:
        return list(range(total))
    out = []
    log_q = math.log1p(-p)
    t = -1
    while True:
        u = 1.0 - rng.random()  # in (0, 1]
        t += 1 + int(math.log(u) / log_q)
        if t >= total:
            break
        out.append(t)
    return out


def gnp(n: int, p: float, seed) -> Graph:
    """Erdos-Renyi sample: every pair an independent coin flip with bias ``p``."""
    if n < 1:
        raise ConfigError("n must be positive")
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"edge probability {p} outside [0, 1]")
    rng = rng_from(seed)
    return Graph(n, [_pair_from_index(t) for t in _sample_pair_indices(n, p, rng)])


def gnp_bernoulli(n: int, p: float, seed) -> Graph:
    """Reference sampler flipping one coin per pair, in the same pair order.

    Exists to test that geometric skipping has exactly the product
    Bernoulli distribution; ``gnp`` is the production path.
    """
    if n < 1:
        raise ConfigError("n must be positive")
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"edge probability {p} outside [0, 1]")
    rng = rng_from(seed)
    total = n * (n - 1) // 2
    flips = rng.random(total) < p
    return Graph(n, [_pair_from_index(t) for t in np.nonzero(flips)[0]])


class ExposureStream:
    """The nested sequence G_1 ⊂ G_2 ⊂ ... ⊂ G_n of prefix-induced subgraphs.

    The final graph is exactly ``gnp(n, p, seed)`` — both consume the same
    pair stream in exposure order — and every minor is the induced
    subgraph of the final graph on ``1..m``.
    """

    def __init__(self, n: int, p: float, seed):
        self.n = n
        self.p = p
        self.seed = RngSeed.coerce(seed).value
        self._graph = gnp(n, p, seed)

    @classmethod
    def from_graph(cls, graph: Graph) -> "ExposureStream":
        """Expose a fixed graph in vertex order; p and seed are not meaningful."""
        obj = cls.__new__(cls)
        obj.n = graph.n
        obj.p = None
        obj.seed = None
        obj._graph = graph
        return obj

    @property
    def final_graph(self) -> Graph:
        return self._graph

    def graphs(self):
        for m in range(1, self.n + 1):
            yield self._graph.induced_prefix(m)

    def __iter__(self):
        return self.graphs()

    def border_columns(self):
        """Per step m: the 0/1 column of vertex m against 1..m (diagonal last, 0)."""
        for m in range(1, self.n + 1):
            col = np.zeros(m, dtype=np.int64)
            for v in self._graph.neighbors(m):
                if v < m:
                    col[v - 1] = 1
            yield col


def exposure_stream(n: int, p: float, seed) -> ExposureStream:
    return ExposureStream(n, p, seed)


# ---------------------------------------------------------------------------
# random regular graphs (pairing model)
# ---------------------------------------------------------------------------

def pairing_model_sample(n: int, d: int, seed, max_restarts: int = 10_000):
    """Uniform simple d-regular graph via the pairing model.

    Shuffles ``n*d`` half-edge stubs, pairs them consecutively, and restarts
    from scratch whenever a loop or repeated edge appears; conditioned on
    acceptance the result is uniform over simple d-regular graphs.
    Returns ``(graph, restarts)``.
    """
    if d < 0:
        raise ConfigError("degree must be non-negative")
    if (n * d) % 2 != 0:
        raise ConfigError(f"n*d = {n * d} is odd; no {d}-regular graph on {n} vertices")
    if d >= n and d > 0:
        raise ConfigError(f"degree {d} infeasible on {n} vertices")
    if d == 0:
        return Graph(n), 0
    rng = rng_from(seed)
    stubs = np.repeat(np.arange(1, n + 1), d)
    for attempt in range(max_restarts):
        perm = rng.permutation(stubs)
        edges = set()
        ok = True
        for i in range(0, len(perm), 2):
            u, v = int(perm[i]), int(perm[i + 1])
            if u == v:
                ok = False
                break
            key = (u, v) if u < v else (v, u)
            if key in edges:
                ok = False
                break
            edges.add(key)
        if ok:
            return Graph(n, edges), attempt
    raise BudgetError(
        f"pairing model gave up after {max_restarts} restarts for (n={n}, d={d}); "
        "acceptance probability decays fast in d — use a larger budget or smaller d"
    )


def random_regular(n: int, d: int, seed, max_restarts: int = 10_000) -> Graph:
    graph, _ = pairing_model_sample(n, d, seed, max_restarts)
    return graph


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Parse "n\\nu v\\n..." edge-list text; 1-indexed, strict."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GraphParseError("missing vertex count", line=1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise GraphParseError(f"bad vertex count {lines[0].strip()!r}", line=1) from None
    if n < 0:
        raise GraphParseError("negative vertex count", line=1)
    seen = set()
    edges = []
    for idx, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected 'u v', got {stripped!r}", line=idx)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer endpoint in {stripped!r}", line=idx) from None
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u}", line=idx)
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphParseError(f"vertex out of range 1..{n} in {stripped!r}", line=idx)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphParseError(f"duplicate edge {key}", line=idx)
        seen.add(key)
        edges.append(key)
    return Graph(n, edges)


def serialize_graph(graph: Graph) -> str:
    """Canonical form: vertex count, then sorted 'u v' lines with u < v."""
    out = [str(graph.n)]
    out.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(out) + "\n"
