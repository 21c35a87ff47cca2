"""Executable structural checkers: separation, expansion, niceness, goodness,
normality of augmentation steps, and the witnesses that force rank deficiency.

Each checker takes its thresholds explicitly.  ``thresholds(n, p)`` supplies
the canonical values, guarded by ``max(1, .)`` so the predicates stay
meaningful at small n where the log-log quantities degenerate.
"""

import itertools
import math
from dataclasses import dataclass

from .errors import ConfigError, ContractError, ModeError
from .graphs import Graph, rng_from

ISOLATED_VERTEX = "isolated-vertex"
CHERRY = "cherry"
DUPLICATE_ROW_CLASS = "duplicate-row-class"

YES = "yes"
NO = "no"
CERTIFIED_YES = "certified-yes"
COUNTEREXAMPLE = "counterexample"
NO_COUNTEREXAMPLE_FOUND = "no-counterexample-found"
CERTIFIED_GOOD = "certified-good"
BAD_WITH_WITNESS = "bad-with-witness"
NO_VIOLATION_FOUND = "no-violation-found"

EXPANDER_EXACT_LIMIT = 24
GOODNESS_EXACT_VERTEX_LIMIT = 16
GOODNESS_EXACT_K_LIMIT = 3
DEFAULT_RESTARTS = 1_000


@dataclass(frozen=True)
class Thresholds:
    k: int
    low_degree: float
    small_set_bound: float
    few_low_degree_bound: float


def thresholds(n: int, p: float) -> Thresholds:
    """Canonical parameter values for the checkers at a given (n, p)."""
    if n < 3:
        raise ConfigError(f"thresholds need n >= 3, got {n}")
    if not 0.0 < p < 1.0:
        raise ConfigError(f"thresholds need 0 < p < 1, got {p}")
    loglog = math.log(math.log(n))
    return Thresholds(
        k=max(1, math.floor(loglog / (2.0 * p))),
        low_degree=max(1.0, loglog),
        small_set_bound=max(1.0, n / math.log(n) ** 1.5),
        few_low_degree_bound=max(1.0, 1.0 / (p * math.log(n))),
    )


@dataclass(frozen=True)
class DeficiencyWitness:
    """A local structure that by itself caps the rank below n - i(G).

    ``deficiency_contribution`` counts only once per duplicate-row class
    (class size minus one); cherries are reported for readability but
    their rank loss is carried by the class containing them.
    """

    kind: str
    vertices: tuple
    deficiency_contribution: int
    via: int | None = None


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: object = None


def isolated_count(graph: Graph) -> int:
    return sum(1 for v in graph.vertices() if graph.degree(v) == 0)


def duplicate_row_excess(witnesses) -> int:
    return sum(w.deficiency_contribution for w in witnesses if w.kind == DUPLICATE_ROW_CLASS)


def find_witnesses(graph: Graph) -> list:
    """All isolated vertices, cherries, and maximal duplicate-row classes."""
    out = []
    for v in graph.vertices():
        if graph.degree(v) == 0:
            out.append(DeficiencyWitness(ISOLATED_VERTEX, (v,), 0))
    # cherries: degree-1 vertices grouped by their unique neighbor
    by_center: dict = {}
    for v in graph.vertices():
        if graph.degree(v) == 1:
            (center,) = graph.neighbors(v)
            by_center.setdefault(center, []).append(v)
    for center, leaves in sorted(by_center.items()):
        for u, v in itertools.combinations(sorted(leaves), 2):
            out.append(DeficiencyWitness(CHERRY, (u, v), 0, via=center))
    # identical nonzero rows
    by_row: dict = {}
    for v in graph.vertices():
        if graph.degree(v) > 0:
            by_row.setdefault(frozenset(graph.neighbors(v)), []).append(v)
    for _, members in sorted(by_row.items(), key=lambda kv: kv[1]):
        if len(members) >= 2:
            out.append(
                DeficiencyWitness(DUPLICATE_ROW_CLASS, tuple(sorted(members)), len(members) - 1)
            )
    return out


def is_well_separated(graph: Graph, low_degree: float) -> Verdict:
    """No two vertices of degree <= low_degree within distance 2 of each other."""
    low = [v for v in graph.vertices() if 0 < graph.degree(v) <= low_degree]
    low_set = set(low)
    for v in low:
        for u in graph.neighbors(v):
            if u in low_set and u > v:
                return Verdict(NO, (v, u))
            for w in graph.neighbors(u):
                if w != v and w in low_set:
                    return Verdict(NO, tuple(sorted((v, w))))
    return Verdict(YES)


def _boundary_edges(graph: Graph, subset: set) -> int:
    return sum(1 for v in subset for u in graph.neighbors(v) if u not in subset)


def is_small_set_expander(graph, small_set_bound, mode="exact", seed=0,
                          restarts=DEFAULT_RESTARTS) -> Verdict:
    """Every small isolated-free set S must have >= |S| edges leaving it.

    Exact mode enumerates every candidate subset (n <= 24); randomized mode
    runs seeded greedy searches for a violating set and its negative verdict
    is explicitly NOT a certificate.
    """
    if mode not in ("exact", "randomized"):
        raise ConfigError(f"unknown mode {mode!r}")
    pool = [v for v in graph.vertices() if graph.degree(v) > 0]
    # cap at n - 1: the whole vertex set has an empty complement and the
    # size bound is far below n wherever the predicate is meaningful
    max_size = min(int(small_set_bound), len(pool), graph.n - 1)
    if max_size < 1:
        return Verdict(CERTIFIED_YES)
    if mode == "exact":
        if graph.n > EXPANDER_EXACT_LIMIT:
            raise ModeError(
                f"exact expander check limited to n <= {EXPANDER_EXACT_LIMIT}, got {graph.n}"
            )
        for size in range(1, max_size + 1):
            for combo in itertools.combinations(pool, size):
                subset = set(combo)
                if _boundary_edges(graph, subset) < size:
                    return Verdict(COUNTEREXAMPLE, frozenset(subset))
        return Verdict(CERTIFIED_YES)
    rng = rng_from(seed)
    pool_arr = sorted(pool)
    for _ in range(restarts):
        size = int(rng.integers(1, max_size + 1))
        subset = set(rng.choice(pool_arr, size=size, replace=False).tolist())
        # greedy descent on boundary(S) - |S|
        while True:
            score = _boundary_edges(graph, subset) - len(subset)
            if score < 0:
                return Verdict(COUNTEREXAMPLE, frozenset(subset))
            best, best_score = None, score
            if len(subset) > 1:
                for v in subset:
                    cand = subset - {v}
                    s = _boundary_edges(graph, cand) - len(cand)
                    if s < best_score:
                        best, best_score = cand, s
            if len(subset) < max_size:
                for v in pool_arr:
                    if v not in subset:
                        cand = subset | {v}
                        s = _boundary_edges(graph, cand) - len(cand)
                        if s < best_score:
                            best, best_score = cand, s
            if best is None:
                break
            subset = best
        if _boundary_edges(graph, subset) - len(subset) < 0:
            return Verdict(COUNTEREXAMPLE, frozenset(subset))
    return Verdict(NO_COUNTEREXAMPLE_FOUND)


def is_nice(graph: Graph, subset, outside_only: bool = False) -> bool:
    """True iff at least two vertices see exactly one member of ``subset``.

    The literal definition counts every vertex of the graph; pass
    ``outside_only=True`` to restrict witnesses to vertices not in the set.
    """
    s = set(subset)
    if not s:
        raise ConfigError("niceness is undefined for the empty set")
    if not all(1 <= v <= graph.n for v in s):
        raise ConfigError("subset contains out-of-range vertices")
    hits = 0
    for v in graph.vertices():
        if outside_only and v in s:
            continue
        if len(graph.neighbors(v) & s) == 1:
            hits += 1
            if hits >= 2:
                return True
    return False


def is_good(graph, k, few_low_degree_bound, mode="exact", seed=0,
            restarts=DEFAULT_RESTARTS, outside_only=False) -> Verdict:
    """Goodness: every isolated-free subset of size 2..k is nice, and at
    most ``few_low_degree_bound`` vertices have degree below 2."""
    if mode not in ("exact", "randomized"):
        raise ConfigError(f"unknown mode {mode!r}")
    low_count = sum(1 for v in graph.vertices() if graph.degree(v) < 2)
    if low_count > few_low_degree_bound:
        return Verdict(BAD_WITH_WITNESS, {"kind": "low-degree-overflow", "count": low_count})
    pool = sorted(v for v in graph.vertices() if graph.degree(v) > 0)
    top = min(int(k), len(pool))
    if top < 2:
        return Verdict(CERTIFIED_GOOD)
    if mode == "exact":
        if graph.n > GOODNESS_EXACT_VERTEX_LIMIT and k > GOODNESS_EXACT_K_LIMIT:
            raise ModeError(
                f"exact goodness check needs n <= {GOODNESS_EXACT_VERTEX_LIMIT} "
                f"or k <= {GOODNESS_EXACT_K_LIMIT} (got n={graph.n}, k={k})"
            )
        for size in range(2, top + 1):
            for combo in itertools.combinations(pool, size):
                if not is_nice(graph, combo, outside_only=outside_only):
                    return Verdict(
                        BAD_WITH_WITNESS, {"kind": "non-nice-subset", "subset": tuple(combo)}
                    )
        return Verdict(CERTIFIED_GOOD)
    rng = rng_from(seed)
    for _ in range(restarts):
        size = int(rng.integers(2, top + 1))
        subset = set(rng.choice(pool, size=size, replace=False).tolist())
        for _ in range(graph.n):
            if not is_nice(graph, subset, outside_only=outside_only):
                return Verdict(
                    BAD_WITH_WITNESS,
                    {"kind": "non-nice-subset", "subset": tuple(sorted(subset))},
                )
            # swap a member at random and keep looking nearby
            out_v = int(rng.choice(sorted(subset)))
            in_candidates = [v for v in pool if v not in subset]
            if not in_candidates:
                break
            in_v = int(rng.choice(in_candidates))
            subset = (subset - {out_v}) | {in_v}
    return Verdict(NO_VIOLATION_FOUND)


def is_normal_pair(g_small: Graph, g_big: Graph) -> bool:
    """True iff the newly exposed vertex avoids every vertex isolated before it."""
    if g_big.n != g_small.n + 1:
        raise ContractError(
            f"expected dimensions m and m+1, got {g_small.n} and {g_big.n}"
        )
    if g_big.induced_prefix(g_small.n) != g_small:
        raise ContractError("larger graph does not extend the smaller one")
    new = g_big.n
    return all(g_small.degree(u) > 0 for u in g_big.neighbors(new))
