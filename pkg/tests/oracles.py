"""Independent reference implementations used only by the tests.

Everything here is deliberately naive (permutation expansions, full
enumeration, Fraction Gaussian elimination) so that the production paths
are checked against code that shares nothing with them.
"""

import itertools
import math
from fractions import Fraction


def fraction_rank(rows) -> int:
    """Rank over Q by plain Gaussian elimination on Fractions."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    for c in range(n_cols):
        piv = next((i for i in range(rank, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][c]
        m[rank] = [x * inv for x in m[rank]]
        for i in range(n_rows):
            if i != rank and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def permutation_determinant(rows) -> int:
    """Leibniz expansion; fine up to n = 7 or so."""
    n = len(rows)
    if n == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = [False] * n
        for i in range(n):
            if seen[i]:
                continue
            j = i
            length = 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        term = sign
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total


def enumerate_linear_atoms(a, p, signed=False) -> dict:
    """Distribution of sum a_i z_i by full enumeration of all outcomes."""
    p = Fraction(p)
    support = (1, -1, 0) if signed else (1, 0)
    probs = {1: p, 0: (1 - 2 * p) if signed else (1 - p)}
    if signed:
        probs[-1] = p
    dist: dict = {}
    for outcome in itertools.product(support, repeat=len(a)):
        weight = Fraction(1)
        for z in outcome:
            weight *= probs[z]
        total = sum(x * z for x, z in zip(a, outcome))
        dist[total] = dist.get(total, Fraction(0)) + weight
    return dist


def perfect_matchings(vertices) -> list:
    """All perfect matchings of a labeled vertex list, as frozensets of pairs."""
    vertices = sorted(vertices)
    if not vertices:
        return [frozenset()]
    out = []
    first = vertices[0]
    for partner in vertices[1:]:
        rest = [v for v in vertices[1:] if v != partner]
        for sub in perfect_matchings(rest):
            out.append(sub | {(first, partner)})
    return out


def two_regular_cycle_type_counts(n: int) -> dict:
    """Labeled 2-regular graphs on n vertices, counted by sorted cycle type.

    A cycle on k >= 3 chosen labels can be arranged in (k-1)!/2 ways; the
    smallest unused label is pinned into each new cycle to avoid double
    counting partitions."""
    out: dict = {}

    def rec(remaining, acc, ways):
        if remaining == 0:
            key = tuple(sorted(acc))
            out[key] = out.get(key, 0) + ways
            return
        for length in range(3, remaining + 1):
            if remaining - length in (1, 2):
                continue
            choose = math.comb(remaining - 1, length - 1)
            cycles = math.factorial(length - 1) // 2
            rec(remaining - length, acc + [length], ways * choose * cycles)

    rec(n, [], 1)
    return out
