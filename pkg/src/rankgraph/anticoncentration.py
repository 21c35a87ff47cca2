"""Small-ball ("atom") probabilities of discrete random sums.

Exact atoms come from sequential convolution over the integer support —
rational arithmetic while the instance is small, compensated float64
beyond — and quadratic-form atoms from seeded Monte Carlo.  The decoupling
inequality is checked by exact computation on finite product spaces.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from .errors import BudgetError, ConfigError
from .graphs import rng_from

SUPPORT_BUDGET = 10_000_000
FRACTION_TERM_LIMIT = 64
FRACTION_SUPPORT_LIMIT = 100_000
DISTRIBUTION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CoefficientVector:
    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))

    @property
    def q(self) -> int:
        return sum(1 for x in self.a if x != 0)

    @classmethod
    def coerce(cls, a) -> "CoefficientVector":
        return a if isinstance(a, cls) else cls(tuple(a))


@dataclass(frozen=True)
class AtomEstimate:
    """Largest point mass of a discrete sum, max over the target value.

    ``ci_halfwidth`` is 0 in exact mode; ``exact_value`` is populated when
    the rational path ran."""

    value: float
    mode: str
    ci_halfwidth: float
    argmax_c: int
    exact_value: Fraction | None = None


def _steps(a, p, signed):
    # per-term distributions as (offset, probability) pairs
    if signed:
        pz = Fraction(1) - 2 * Fraction(p)
        return [((0, pz), (x, Fraction(p)), (-x, Fraction(p))) for x in a]
    q = Fraction(1) - Fraction(p)
    return [((0, q), (x, Fraction(p))) for x in a]


def exact_sum_distribution(a, p, signed: bool = False) -> dict:
    """Full rational distribution of the random sum, as {value: Fraction}."""
    a = CoefficientVector.coerce(a).a
    dist = {0: Fraction(1)}
    for step in _steps(a, Fraction(p), signed):
        nxt: dict = {}
        for value, prob in dist.items():
            if prob == 0:
                continue
            for off, w in step:
                if w == 0:
                    continue
                key = value + off
                nxt[key] = nxt.get(key, Fraction(0)) + prob * w
        dist = nxt
    return dist


def _float_sum_distribution(a, p, signed: bool):
    lo = sum(min(x, 0) for x in a) - (sum(max(x, 0) for x in a) if signed else 0)
    hi = sum(max(x, 0) for x in a) - (sum(min(x, 0) for x in a) if signed else 0)
    width = hi - lo + 1
    probs = np.zeros(width, dtype=np.float64)
    probs[-lo] = 1.0
    for x in a:
        if signed:
            nxt = (1.0 - 2.0 * p) * probs
            if x != 0:
                if x > 0:
                    nxt[x:] += p * probs[:-x]
                    nxt[:-x] += p * probs[x:]
                else:
                    nxt[:x] += p * probs[-x:]
                    nxt[-x:] += p * probs[:x]
            else:
                nxt += 2.0 * p * probs
        else:
            nxt = (1.0 - p) * probs
            if x > 0:
                nxt[x:] += p * probs[:-x]
            elif x < 0:
                nxt[:x] += p * probs[-x:]
            else:
                nxt += p * probs
        probs = nxt
    return lo, probs


def _atom(a, p, signed: bool) -> AtomEstimate:
    vec = CoefficientVector.coerce(a)
    a = vec.a
    if not 0.0 <= float(p) <= 1.0:
        raise ConfigError(f"probability {p} outside [0, 1]")
    weight = sum(abs(x) for x in a)
    if weight > SUPPORT_BUDGET:
        raise BudgetError(
            f"support weight {weight} exceeds the dense-convolution budget "
            f"{SUPPORT_BUDGET}; estimate by Monte Carlo instead"
        )
    span = (2 * weight if signed else weight) + 1
    if len(a) <= FRACTION_TERM_LIMIT and span <= FRACTION_SUPPORT_LIMIT:
        dist = exact_sum_distribution(a, p, signed)
        best_c, best = max(dist.items(), key=lambda kv: (kv[1], -abs(kv[0])))
        return AtomEstimate(
            value=float(best),
            mode="exact",
            ci_halfwidth=0.0,
            argmax_c=int(best_c),
            exact_value=best,
        )
    lo, probs = _float_sum_distribution(a, float(p), signed)
    idx = int(np.argmax(probs))
    return AtomEstimate(
        value=float(probs[idx]),
        mode="exact",
        ci_halfwidth=0.0,
        argmax_c=lo + idx,
    )


def linear_atom_exact(a, p) -> AtomEstimate:
    """max_c P(sum a_i z_i = c) with z_i Bernoulli(p) in {0, 1}."""
    return _atom(a, p, signed=False)


def linear_atom_signed(a, p) -> AtomEstimate:
    """Signed variant: z_i is +1 or -1 with probability p each, else 0."""
    if not 0.0 <= float(p) <= 0.5:
        raise ConfigError(f"signed variant needs p <= 1/2, got {p}")
    return _atom(a, p, signed=True)


def quadratic_atom_mc(A, p, samples: int, seed) -> AtomEstimate:
    """Monte Carlo modal atom of the quadratic form z^T A z, z_i Bernoulli(p).

    The mode is the most frequent sampled value; the normal-approximation
    CI is Bonferroni-adjusted over the observed support, since picking the
    empirical mode biases the estimate upward at small sample sizes.
    """
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError(f"expected a square coefficient matrix, got {A.shape}")
    if samples < 1_000:
        raise ConfigError(f"need at least 1000 samples, got {samples}")
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"probability {p} outside [0, 1]")
    rng = rng_from(seed)
    n = A.shape[0]
    counts: dict = {}
    chunk = 65_536
    done = 0
    while done < samples:
        take = min(chunk, samples - done)
        Z = (rng.random((take, n)) < p).astype(np.int64)
        vals = np.einsum("ij,jk,ik->i", Z, A, Z)
        uniq, cnt = np.unique(vals, return_counts=True)
        for v, c in zip(uniq.tolist(), cnt.tolist()):
            counts[v] = counts.get(v, 0) + c
        done += take
    best_c, best = max(counts.items(), key=lambda kv: (kv[1], -abs(kv[0])))
    phat = best / samples
    alpha = 0.05 / max(1, len(counts))
    z = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    half = z * math.sqrt(max(phat * (1.0 - phat), 1.0 / samples) / samples)
    return AtomEstimate(
        value=phat, mode="monte-carlo", ci_halfwidth=half, argmax_c=int(best_c)
    )


@dataclass(frozen=True)
class DecouplingResult:
    lhs: float
    rhs: float
    lhs_exact: Fraction
    joint_exact: Fraction  # rhs squared


def decoupling_check(x_dist, y_dist, event) -> DecouplingResult:
    """Exact check of P(E(X,Y)) <= sqrt(P(E(X,Y) and E(X',Y))).

    ``x_dist`` and ``y_dist`` are finite marginals (the inequality needs X
    and Y independent, with X' an independent copy of X).  Probabilities
    may be floats or Fractions; the comparison is carried out in exact
    rational arithmetic by squaring.
    """
    xs = {k: Fraction(v) for k, v in dict(x_dist).items()}
    ys = {k: Fraction(v) for k, v in dict(y_dist).items()}
    if len(xs) * len(ys) > 1_000_000:
        raise ConfigError("joint support exceeds the 10^6 cell budget")
    for name, dist in (("X", xs), ("Y", ys)):
        total = sum(dist.values())
        if abs(float(total) - 1.0) > DISTRIBUTION_TOLERANCE:
            raise ConfigError(f"{name} probabilities sum to {float(total)}, not 1")
        if any(v < 0 for v in dist.values()):
            raise ConfigError(f"{name} has a negative probability")
    lhs = Fraction(0)
    joint = Fraction(0)
    for y, py in ys.items():
        slice_mass = sum(px for x, px in xs.items() if event(x, y))
        lhs += py * slice_mass
        joint += py * slice_mass * slice_mass
    assert lhs * lhs <= joint, "decoupling inequality violated; this is a bug"
    return DecouplingResult(
        lhs=float(lhs),
        rhs=math.sqrt(float(joint)),
        lhs_exact=lhs,
        joint_exact=joint,
    )


@dataclass(frozen=True)
class ScalingRow:
    n: int
    p: float
    q: int
    atom_all_ones: float | None
    scaled_all_ones: float | None
    atom_ramp: float | None
    scaled_ramp: float | None
    atom_quadratic: float | None
    scaled_quadratic: float | None
    quadratic_ci: float | None


@dataclass(frozen=True)
class ScalingTable:
    rows: tuple
    skipped: tuple  # (n, p, reason)


FAMILIES = ("all-ones", "ramp")


def lo_scaling_experiment(n_grid, p_grid, families=FAMILIES, quadratic: bool = True,
                          mc_samples: int = 20_000, seed=0) -> ScalingTable:
    """Atoms scaled by (q p)^{1/2} (linear) and (q p)^{1/4} (quadratic form)
    across a parameter grid; cells with n*p < 4 are skipped with notice
    (there the atom is dominated by the all-zero outcome and the scaling
    says nothing)."""
    n_grid = [int(n) for n in n_grid]
    p_grid = [float(p) for p in p_grid]
    if not n_grid or not p_grid:
        raise ConfigError("scaling experiment needs non-empty grids")
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise ConfigError(f"unknown coefficient families {sorted(unknown)}")
    rows = []
    skipped = []
    for n in n_grid:
        for p in p_grid:
            if n * p < 4.0:
                skipped.append((n, p, "n*p < 4"))
                continue
            scale_lin = math.sqrt(n * p)
            atom_ones = scaled_ones = atom_ramp = scaled_ramp = None
            if "all-ones" in families:
                atom_ones = linear_atom_exact([1] * n, p).value
                scaled_ones = atom_ones * scale_lin
            if "ramp" in families:
                atom_ramp = linear_atom_exact(list(range(1, n + 1)), p).value
                scaled_ramp = atom_ramp * scale_lin
            atom_quad = scaled_quad = quad_ci = None
            if quadratic:
                est = quadratic_atom_mc(
                    np.ones((n, n), dtype=np.int64), p, mc_samples, seed
                )
                atom_quad = est.value
                scaled_quad = est.value * (n * p) ** 0.25
                quad_ci = est.ci_halfwidth
            rows.append(
                ScalingRow(
                    n=n,
                    p=p,
                    q=n,
                    atom_all_ones=atom_ones,
                    scaled_all_ones=scaled_ones,
                    atom_ramp=atom_ramp,
                    scaled_ramp=scaled_ramp,
                    atom_quadratic=atom_quad,
                    scaled_quadratic=scaled_quad,
                    quadratic_ci=quad_ci,
                )
            )
    return ScalingTable(rows=tuple(rows), skipped=tuple(skipped))
