"""Seeded Monte Carlo campaigns with JSONL persistence and plot emission.

Every trial's generator is derived from ``(master seed, cell index, trial
index)``, so results do not depend on scheduling or worker count; records
are serialized canonically (sorted keys) and are byte-identical across
reruns once the per-trial ``timing`` field is stripped.
"""

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import ConfigError, ContractError, PersistenceError
from .exact_rank import CERTIFIED_EQUAL, DEFAULT_PRIMES, certify_rank
from .exposure import trace_exposure
from .graphs import exposure_stream, gnp, pairing_model_sample
from .stats import wilson_interval
from .structure import CHERRY, DUPLICATE_ROW_CLASS, duplicate_row_excess, find_witnesses

RANK_EQUALITY = "rank-equality"
THRESHOLD_SWEEP = "threshold-sweep"
G_OF_Y = "g-of-y"
D_REGULAR = "d-regular"
EXPOSURE_CAMPAIGN = "exposure-campaign"
KINDS = (RANK_EQUALITY, THRESHOLD_SWEEP, G_OF_Y, D_REGULAR, EXPOSURE_CAMPAIGN)


@dataclass(frozen=True)
class ExperimentConfig:
    """One campaign: a kind, a parameter grid, and a master seed.

    Grid entries are p values (rank-equality), c multipliers of ln n / n
    (threshold-sweep, exposure-campaign), y = n*p values (g-of-y), or
    degrees (d-regular)."""

    kind: str
    n: int
    grid: tuple
    samples: int
    seed: int
    primes: tuple = field(default_factory=lambda: tuple(p.value for p in DEFAULT_PRIMES))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not self.grid:
            raise ConfigError("parameter grid must be non-empty")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if not self.primes:
            raise ConfigError("prime set must be non-empty")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "primes", tuple(int(p) for p in self.primes))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "grid": list(self.grid),
            "samples": self.samples,
            "seed": self.seed,
            "primes": list(self.primes),
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()[:16]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def trial_seed(master: int, cell_index: int, trial_index: int) -> int:
    """64-bit per-trial seed; recorded so any single trial can be replayed."""
    ss = np.random.SeedSequence((int(master), int(cell_index), int(trial_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def _cell_p(config: ExperimentConfig, value: float) -> float:
    if config.kind == RANK_EQUALITY:
        return value
    if config.kind in (THRESHOLD_SWEEP, EXPOSURE_CAMPAIGN):
        return value * math.log(config.n) / config.n
    if config.kind == G_OF_Y:
        return value / config.n
    raise ConfigError(f"kind {config.kind!r} has no edge probability")


def _certificate_fields(cert) -> dict:
    counts: dict = {}
    for w in cert.witnesses:
        counts[w.kind] = counts.get(w.kind, 0) + 1
    if cert.rank > cert.n - cert.isolated:
        raise ContractError("rank exceeds n - i(G) in a trial record")
    return {
        "rank": cert.rank,
        "isolated": cert.isolated,
        "status": cert.status,
        "witness_counts": counts,
        "dup_excess": cert.duplicate_row_excess(),
    }


def _rank_trial(config: ExperimentConfig, cell_index: int, value: float,
                trial_index: int) -> dict:
    seed = trial_seed(config.seed, cell_index, trial_index)
    t0 = time.perf_counter()
    p = _cell_p(config, value)
    graph = gnp(config.n, p, seed)
    cert = certify_rank(graph, config.primes)
    rec = {
        "record": "trial",
        "kind": config.kind,
        "cell_index": cell_index,
        "cell": value,
        "trial": trial_index,
        "seed": seed,
        "n": config.n,
        "success": cert.status == CERTIFIED_EQUAL,
        **_certificate_fields(cert),
    }
    if config.kind == THRESHOLD_SWEEP:
        rec["cherries"] = sum(1 for w in cert.witnesses if w.kind == CHERRY)
    if config.kind == G_OF_Y:
        rec["rank_ratio"] = cert.rank / config.n
        rec["iso_ratio"] = cert.isolated / config.n
    rec["timing"] = {"elapsed_s": time.perf_counter() - t0}
    return rec


def _cycle_lengths(graph) -> list:
    # every vertex has degree 2: the graph is a disjoint union of cycles
    seen = set()
    lengths = []
    for start in graph.vertices():
        if start in seen:
            continue
        length = 0
        prev, cur = None, start
        while True:
            seen.add(cur)
            length += 1
            a, b = sorted(graph.neighbors(cur))
            nxt = b if a == prev else a
            prev, cur = cur, nxt
            if cur == start:
                break
        lengths.append(length)
    return lengths


def cycle_rank_oracle(graph) -> int:
    """Exact rank of a disjoint union of cycles: each cycle of length L
    contributes L, minus 2 when 4 divides L."""
    if any(graph.degree(v) != 2 for v in graph.vertices()):
        raise ConfigError("cycle oracle expects a 2-regular graph")
    return sum(L - (2 if L % 4 == 0 else 0) for L in _cycle_lengths(graph))


def _dregular_trial(config: ExperimentConfig, cell_index: int, value: float,
                    trial_index: int) -> dict:
    d = int(value)
    seed = trial_seed(config.seed, cell_index, trial_index)
    t0 = time.perf_counter()
    graph, restarts = pairing_model_sample(config.n, d, seed)
    cert = certify_rank(graph, config.primes)
    rec = {
        "record": "trial",
        "kind": config.kind,
        "cell_index": cell_index,
        "cell": d,
        "trial": trial_index,
        "seed": seed,
        "n": config.n,
        "pairing_restarts": restarts,
        "nonsingular": cert.rank == config.n,
        **_certificate_fields(cert),
    }
    if d == 2:
        oracle = cycle_rank_oracle(graph)
        rec["oracle_rank"] = oracle
        rec["engine_agrees"] = cert.rank == oracle
    rec["timing"] = {"elapsed_s": time.perf_counter() - t0}
    return rec


def _exposure_trial(config: ExperimentConfig, cell_index: int, value: float,
                    trial_index: int) -> dict:
    seed = trial_seed(config.seed, cell_index, trial_index)
    t0 = time.perf_counter()
    p = _cell_p(config, value)
    trace = trace_exposure(exposure_stream(config.n, p, seed), config.primes[0])
    y = trace.deficiency
    if int(trace.rank[-1]) > config.n - int(trace.isolated[-1]):
        raise ContractError("rank exceeds n - i(G) in a trace record")
    rec = {
        "record": "trial",
        "kind": config.kind,
        "cell_index": cell_index,
        "cell": value,
        "trial": trial_index,
        "seed": seed,
        "n": config.n,
        "final_Y": int(y[-1]),
        "max_Y": int(y.max()),
        "steps_positive": int((y > 0).sum()),
        "non_normal_steps": int((~trace.normal).sum()),
        "rank": int(trace.rank[-1]),
        "isolated": int(trace.isolated[-1]),
        "mean_Y_curve": [float(v) for v in y],
        "timing": {"elapsed_s": time.perf_counter() - t0},
    }
    return rec


_TRIAL_FN = {
    RANK_EQUALITY: _rank_trial,
    THRESHOLD_SWEEP: _rank_trial,
    G_OF_Y: _rank_trial,
    D_REGULAR: _dregular_trial,
    EXPOSURE_CAMPAIGN: _exposure_trial,
}


def _run_cells(config: ExperimentConfig, cells, workers: int = 1) -> list:
    trial_fn = _TRIAL_FN[config.kind]
    tasks = [
        (ci, value, t)
        for ci, value in cells
        for t in range(config.samples)
    ]
    if workers > 1 and len(tasks) > 1:
        fn = partial(_task, config)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [trial_fn(config, ci, value, t) for ci, value, t in tasks]
    return results


def _task(config, task):
    ci, value, t = task
    return _TRIAL_FN[config.kind](config, ci, value, t)


def _mean_sd(values) -> tuple:
    arr = np.asarray(list(values), dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=0))


def _aggregate_cell(config: ExperimentConfig, cell_index: int, value: float,
                    trials: list) -> list:
    out = []
    cell = {
        "record": "cell",
        "kind": config.kind,
        "cell_index": cell_index,
        "cell": value if config.kind != D_REGULAR else int(value),
        "samples": len(trials),
        "digest": config.digest(),
    }
    if config.kind in (RANK_EQUALITY, THRESHOLD_SWEEP, G_OF_Y):
        succ = sum(1 for t in trials if t["success"])
        lo, hi = wilson_interval(succ, len(trials))
        cell.update(successes=succ, rate=succ / len(trials), wilson_lo=lo, wilson_hi=hi)
    if config.kind == THRESHOLD_SWEEP:
        cell["p"] = _cell_p(config, value)
        cell["mean_cherries"], _ = _mean_sd(t["cherries"] for t in trials)
        cell["mean_dup_excess"], _ = _mean_sd(t["dup_excess"] for t in trials)
    if config.kind == G_OF_Y:
        cell["p"] = _cell_p(config, value)
        cell["mean_rank_ratio"], cell["sd_rank_ratio"] = _mean_sd(
            t["rank_ratio"] for t in trials
        )
        cell["mean_iso_ratio"], cell["sd_iso_ratio"] = _mean_sd(
            t["iso_ratio"] for t in trials
        )
    if config.kind == D_REGULAR:
        nonsing = sum(1 for t in trials if t["nonsingular"])
        lo, hi = wilson_interval(nonsing, len(trials))
        cell.update(
            nonsingular=nonsing,
            rate=nonsing / len(trials),
            wilson_lo=lo,
            wilson_hi=hi,
        )
        if int(value) == 2:
            cell["oracle_agreements"] = sum(1 for t in trials if t["engine_agrees"])
    if config.kind == EXPOSURE_CAMPAIGN:
        cell["mean_final_Y"], cell["sd_final_Y"] = _mean_sd(t["final_Y"] for t in trials)
        cell["fraction_tight"] = sum(
            1 for t in trials if t["final_Y"] == 0
        ) / len(trials)
        curves = np.array([t["mean_Y_curve"] for t in trials], dtype=np.float64)
        sd = curves.std(axis=0, ddof=0)
        half = 1.96 * sd / math.sqrt(len(trials))
        mean = curves.mean(axis=0)
        for m in range(curves.shape[1]):
            out.append(
                {
                    "record": "curve",
                    "kind": config.kind,
                    "cell_index": cell_index,
                    "cell": value,
                    "m": m + 1,
                    "mean_Y": float(mean[m]),
                    "half_width": float(half[m]),
                    "digest": config.digest(),
                }
            )
    out.append(cell)
    return out


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list:
    """Run a campaign and return its records (config, trials, cells, notices)."""
    records = [{"record": "config", "digest": config.digest(), **config.to_dict()}]
    cells = []
    for ci, value in enumerate(config.grid):
        if config.kind in (THRESHOLD_SWEEP, G_OF_Y, EXPOSURE_CAMPAIGN, RANK_EQUALITY):
            p = _cell_p(config, value)
            if config.kind == G_OF_Y and value < 0:
                raise ConfigError(f"y values must be non-negative, got {value}")
            if config.kind == RANK_EQUALITY and not 0.0 <= p <= 1.0:
                raise ConfigError(f"p={p} outside [0, 1]")
            if p > 1.0:
                records.append(
                    {
                        "record": "notice",
                        "kind": config.kind,
                        "cell_index": ci,
                        "cell": value,
                        "skipped": f"p={p:.6g} exceeds 1",
                        "digest": config.digest(),
                    }
                )
                continue
            if config.kind in (THRESHOLD_SWEEP, EXPOSURE_CAMPAIGN) and value <= 0:
                raise ConfigError(f"c values must be positive, got {value}")
        if config.kind == D_REGULAR:
            d = int(value)
            if (config.n * d) % 2 != 0 or d < 0 or (d >= config.n and d > 0):
                records.append(
                    {
                        "record": "notice",
                        "kind": config.kind,
                        "cell_index": ci,
                        "cell": d,
                        "skipped": f"no simple {d}-regular graph on {config.n} vertices",
                        "digest": config.digest(),
                    }
                )
                continue
        cells.append((ci, value))
    trials = _run_cells(config, cells, workers)
    by_cell: dict = {}
    for t in trials:
        by_cell.setdefault(t["cell_index"], []).append(t)
    records.extend(trials)
    for ci, value in cells:
        records.extend(_aggregate_cell(config, ci, value, by_cell[ci]))
    if config.kind == G_OF_Y:
        means = [
            (r["cell"], r["mean_rank_ratio"]) for r in records if r["record"] == "cell"
        ]
        means.sort()
        records.append(
            {
                "record": "summary",
                "kind": config.kind,
                "digest": config.digest(),
                "monotone_mean_rank_ratio": all(
                    a[1] < b[1] for a, b in zip(means, means[1:])
                ),
            }
        )
    return records


def run_rank_equality(config: ExperimentConfig, workers: int = 1) -> list:
    if config.kind != RANK_EQUALITY:
        raise ConfigError(f"expected a {RANK_EQUALITY} config, got {config.kind}")
    return run_experiment(config, workers)


def sweep_threshold(config: ExperimentConfig, workers: int = 1) -> list:
    if config.kind != THRESHOLD_SWEEP:
        raise ConfigError(f"expected a {THRESHOLD_SWEEP} config, got {config.kind}")
    return run_experiment(config, workers)


def estimate_g(config: ExperimentConfig, workers: int = 1) -> list:
    if config.kind != G_OF_Y:
        raise ConfigError(f"expected a {G_OF_Y} config, got {config.kind}")
    return run_experiment(config, workers)


def dregular_experiment(config: ExperimentConfig, workers: int = 1) -> list:
    if config.kind != D_REGULAR:
        raise ConfigError(f"expected a {D_REGULAR} config, got {config.kind}")
    return run_experiment(config, workers)


def run_exposure_campaign(config: ExperimentConfig, workers: int = 1) -> list:
    if config.kind != EXPOSURE_CAMPAIGN:
        raise ConfigError(f"expected an {EXPOSURE_CAMPAIGN} config, got {config.kind}")
    return run_experiment(config, workers)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def to_jsonl(records) -> str:
    return "".join(canonical_json(r) + "\n" for r in records)


def strip_timing(jsonl_text: str) -> str:
    """Re-serialize JSONL with per-trial timing removed; the remainder is
    byte-reproducible for a fixed master seed at any worker count."""
    out = []
    for line in jsonl_text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        rec.pop("timing", None)
        out.append(canonical_json(rec))
    return "".join(r + "\n" for r in out)


def persist(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_jsonl(records))


def load(path) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise PersistenceError(f"line {lineno}: malformed record ({exc.msg})") from exc
    return records


# ---------------------------------------------------------------------------
# plot artifacts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlotArtifact:
    kind: str
    csv: str
    script: str


_PLOT_HEADER = "#!/usr/bin/env python3\n# Self-contained renderer; pass the CSV path as argv[1].\n"


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def emit_plot_script(records, kind: str | None = None) -> PlotArtifact:
    """CSV data plus a matplotlib script for one experiment kind.

    Supports rate-vs-c (threshold-sweep), rank/n-vs-y (g-of-y), and
    mean-deficiency-vs-m (exposure-campaign) curves with interval bars."""
    kinds = {r.get("kind") for r in records if r.get("record") in ("cell", "curve")}
    if not kinds:
        raise ConfigError("no cell records to plot")
    if len(kinds) > 1:
        raise ConfigError(f"records mix experiment kinds {sorted(kinds)}")
    found = kinds.pop()
    if kind is not None and kind != found:
        raise ConfigError(f"records are {found}, not {kind}")
    kind = found
    if kind == THRESHOLD_SWEEP:
        cells = sorted(
            (r for r in records if r["record"] == "cell"), key=lambda r: r["cell"]
        )
        csv = _csv_text(
            ["c", "p", "rate", "wilson_lo", "wilson_hi", "mean_cherries", "mean_dup_excess"],
            [
                (r["cell"], r["p"], r["rate"], r["wilson_lo"], r["wilson_hi"],
                 r["mean_cherries"], r["mean_dup_excess"])
                for r in cells
            ],
        )
        script = _PLOT_HEADER + (
            "import sys\n"
            "import matplotlib.pyplot as plt\n"
            "import numpy as np\n"
            "c, p, rate, lo, hi, cherries, dup = np.loadtxt(sys.argv[1], delimiter=',', skiprows=1, unpack=True, ndmin=2)\n"
            "fig, ax = plt.subplots()\n"
            "ax.errorbar(c, rate, yerr=[rate - lo, hi - rate], fmt='o-', capsize=3)\n"
            "ax.set_xlabel('c  (p = c ln n / n)')\n"
            "ax.set_ylabel('certified-equal rate')\n"
            "ax.set_ylim(-0.02, 1.02)\n"
            "fig.savefig('threshold_sweep.png', dpi=150)\n"
            "print('wrote threshold_sweep.png')\n"
        )
    elif kind == G_OF_Y:
        cells = sorted(
            (r for r in records if r["record"] == "cell"), key=lambda r: r["cell"]
        )
        csv = _csv_text(
            ["y", "p", "mean_rank_ratio", "sd_rank_ratio", "mean_iso_ratio"],
            [
                (r["cell"], r["p"], r["mean_rank_ratio"], r["sd_rank_ratio"],
                 r["mean_iso_ratio"])
                for r in cells
            ],
        )
        script = _PLOT_HEADER + (
            "import sys\n"
            "import matplotlib.pyplot as plt\n"
            "import numpy as np\n"
            "y, p, mean, sd, iso = np.loadtxt(sys.argv[1], delimiter=',', skiprows=1, unpack=True, ndmin=2)\n"
            "fig, ax = plt.subplots()\n"
            "ax.errorbar(y, mean, yerr=sd, fmt='o-', capsize=3, label='mean rank / n')\n"
            "ys = np.linspace(max(y.min(), 1e-3), y.max(), 200)\n"
            "ax.plot(ys, 1 - np.exp(-ys), '--', label='1 - exp(-y) ceiling')\n"
            "ax.set_xlabel('y  (p = y / n)')\n"
            "ax.set_ylabel('rank / n')\n"
            "ax.legend()\n"
            "fig.savefig('g_of_y.png', dpi=150)\n"
            "print('wrote g_of_y.png')\n"
        )
    elif kind == EXPOSURE_CAMPAIGN:
        curves = sorted(
            (r for r in records if r["record"] == "curve"),
            key=lambda r: (r["cell"], r["m"]),
        )
        if not curves:
            raise ConfigError("exposure campaign records carry no curve data")
        csv = _csv_text(
            ["c", "m", "mean_Y", "half_width"],
            [(r["cell"], r["m"], r["mean_Y"], r["half_width"]) for r in curves],
        )
        script = _PLOT_HEADER + (
            "import sys\n"
            "import matplotlib.pyplot as plt\n"
            "import numpy as np\n"
            "c, m, mean, half = np.loadtxt(sys.argv[1], delimiter=',', skiprows=1, unpack=True, ndmin=2)\n"
            "fig, ax = plt.subplots()\n"
            "for cv in np.unique(c):\n"
            "    sel = c == cv\n"
            "    ax.plot(m[sel], mean[sel], label=f'c = {cv:g}')\n"
            "    ax.fill_between(m[sel], mean[sel] - half[sel], mean[sel] + half[sel], alpha=0.2)\n"
            "ax.set_xlabel('exposed vertices m')\n"
            "ax.set_ylabel('mean deficiency')\n"
            "ax.legend()\n"
            "fig.savefig('exposure_campaign.png', dpi=150)\n"
            "print('wrote exposure_campaign.png')\n"
        )
    else:
        raise ConfigError(f"no plot template for kind {kind!r}")
    return PlotArtifact(kind=kind, csv=csv, script=script)
