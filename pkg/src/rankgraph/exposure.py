"""Tracing the deficiency process along vertex-exposure streams.

Per exposed minor Q_m the trace records its rank, isolated count, the
deficiency walk ``m - rank - isolated`` (non-negative by the rank upper
bound), how many previously isolated vertices the new vertex touched
(zero exactly when the step is normal), and the rank jump.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .exact_rank import BorderRankState, PrimeModulus
from .graphs import ExposureStream
from .stats import wilson_interval


@dataclass
class ExposureTrace:
    n: int
    p: float | None
    seed: int | None
    prime: int
    rank: np.ndarray        # rank of Q_m, index m-1
    isolated: np.ndarray    # i(Q_m)
    deficiency: np.ndarray  # m - rank - isolated
    wakeups: np.ndarray     # step m -> m+1: previously isolated vertices attached
    normal: np.ndarray      # wakeups == 0
    jump: np.ndarray        # rank increments, each 0, 1 or 2

    def weights(self) -> np.ndarray:
        """4**deficiency where the walk is positive, else 0 (ungated:
        no goodness gate is applied; see supermartingale_check)."""
        y = self.deficiency.astype(np.float64)
        with np.errstate(over="ignore"):
            w = np.exp2(2.0 * y)
        return np.where(self.deficiency > 0, w, 0.0)

    def step_records(self):
        """Wire-format dicts, one per step m: m, rank, i, Y, Z, normal, jump.

        The three step-transition fields are null at m = n."""
        for m in range(1, self.n + 1):
            last = m == self.n
            yield {
                "m": m,
                "rank": int(self.rank[m - 1]),
                "i": int(self.isolated[m - 1]),
                "Y": int(self.deficiency[m - 1]),
                "Z": None if last else int(self.wakeups[m - 1]),
                "normal": None if last else bool(self.normal[m - 1]),
                "jump": None if last else int(self.jump[m - 1]),
            }


def trace_exposure(stream: ExposureStream, prime) -> ExposureTrace:
    """Walk a stream once, maintaining rank incrementally (O(n^3) total)."""
    prime = PrimeModulus.coerce(prime)
    n = stream.n
    rank = np.zeros(n, dtype=np.int64)
    isolated = np.zeros(n, dtype=np.int64)
    wakeups = np.zeros(max(n - 1, 0), dtype=np.int64)
    state = BorderRankState(prime, n)
    degree = np.zeros(n + 1, dtype=np.int64)
    iso = 0
    for m, col in enumerate(stream.border_columns(), start=1):
        nbrs = np.nonzero(col)[0] + 1  # 1-based vertex labels
        woken = int(sum(1 for v in nbrs if degree[v] == 0))
        if m > 1:
            wakeups[m - 2] = woken
        degree[m] = len(nbrs)
        for v in nbrs:
            degree[v] += 1
        iso += -woken + (1 if len(nbrs) == 0 else 0)
        rank[m - 1] = state.extend(col)
        isolated[m - 1] = iso
    deficiency = np.arange(1, n + 1, dtype=np.int64) - rank - isolated
    jump = rank[1:] - rank[:-1]
    return ExposureTrace(
        n=n,
        p=stream.p,
        seed=stream.seed,
        prime=prime.value,
        rank=rank,
        isolated=isolated,
        deficiency=deficiency,
        wakeups=wakeups,
        normal=wakeups == 0,
        jump=jump,
    )


@dataclass(frozen=True)
class JumpCell:
    """Empirical jump frequencies in one (deficient?, normal?) cell."""

    deficient: bool
    normal: bool
    count: int
    jump_counts: tuple  # occurrences of jump 0, 1, 2
    intervals: tuple    # Wilson 95% interval per jump value

    def frequency(self, jump: int) -> float:
        return self.jump_counts[jump] / self.count if self.count else 0.0


def jump_statistics(traces, m_start: int) -> list:
    """Jump frequencies conditioned on the four (walk positive) x (normal)
    cells, over steps m >= m_start.  Frequencies are unconditional on
    goodness of the minor; see the module notes."""
    traces = list(traces)
    if not traces:
        raise ConfigError("jump_statistics needs at least one trace")
    for t in traces:
        if m_start >= t.n:
            raise ConfigError(f"m_start={m_start} reaches past a trace of length {t.n}")
    if m_start < 1:
        raise ConfigError("m_start must be >= 1")
    counts = {(d, nm): [0, 0, 0] for d in (False, True) for nm in (False, True)}
    for t in traces:
        for m in range(m_start, t.n):
            cell = (bool(t.deficiency[m - 1] > 0), bool(t.normal[m - 1]))
            counts[cell][int(t.jump[m - 1])] += 1
    cells = []
    for (d, nm), jc in sorted(counts.items()):
        total = sum(jc)
        cells.append(
            JumpCell(
                deficient=d,
                normal=nm,
                count=total,
                jump_counts=tuple(jc),
                intervals=tuple(wilson_interval(c, total) for c in jc),
            )
        )
    return cells


@dataclass(frozen=True)
class SupermartingaleRow:
    m: int
    mean_next: float            # average of 4**Y over traces at step m+1
    scaled_mean_current: float  # (3/5) * average at step m
    pointwise_violations: float  # fraction of traces with X_{m+1} > (3/5) X_m


@dataclass(frozen=True)
class SupermartingaleReport:
    """Per-step decay check of the mean weight process.

    Pointwise violations are expected — the bound concerns expectations —
    and the weights carry no goodness gate (columns are 'ungated')."""

    rows: tuple
    traces: int
    small_sample: bool
    gated: bool = False


def supermartingale_check(traces, m_start: int) -> SupermartingaleReport:
    traces = list(traces)
    if not traces:
        raise ConfigError("supermartingale_check needs at least one trace")
    n = min(t.n for t in traces)
    if not 1 <= m_start < n:
        raise ConfigError(f"m_start={m_start} out of range for traces of length {n}")
    weights = np.stack([t.weights()[:n] for t in traces])
    rows = []
    for m in range(m_start, n):
        cur = weights[:, m - 1]
        nxt = weights[:, m]
        rows.append(
            SupermartingaleRow(
                m=m,
                mean_next=float(nxt.mean()),
                scaled_mean_current=float(0.6 * cur.mean()),
                pointwise_violations=float(np.mean(nxt > 0.6 * cur)),
            )
        )
    return SupermartingaleReport(
        rows=tuple(rows), traces=len(traces), small_sample=len(traces) < 30
    )
