import math

import numpy as np
import pytest

from rankgraph.errors import ConfigError
from rankgraph.exact_rank import DEFAULT_PRIMES, FieldMatrix, certify_rank, rank_mod_p
from rankgraph.exposure import jump_statistics, supermartingale_check, trace_exposure
from rankgraph.graphs import ExposureStream, Graph, exposure_stream

P = DEFAULT_PRIMES[0]


def traced(n, p, seed):
    return trace_exposure(exposure_stream(n, p, seed), P)


class TestTraceExposure:
    def test_empty_process(self):
        t = traced(3, 0.0, 1)
        assert t.deficiency.tolist() == [0, 0, 0]
        assert t.rank.tolist() == [0, 0, 0]
        assert t.isolated.tolist() == [1, 2, 3]
        assert t.normal.tolist() == [True, True]
        assert t.jump.tolist() == [0, 0]

    def test_complete_process(self):
        t = traced(3, 1.0, 1)
        assert t.rank.tolist() == [0, 2, 3]
        assert t.isolated.tolist() == [1, 0, 0]
        assert t.deficiency.tolist() == [0, 0, 0]
        # the first augmentation attaches to a then-isolated vertex
        assert t.normal.tolist() == [False, True]
        assert t.wakeups.tolist() == [1, 0]
        assert t.jump.tolist() == [2, 1]

    def test_path_exposed_center_last(self):
        g = Graph(3, [(1, 3), (2, 3)])
        t = trace_exposure(ExposureStream.from_graph(g), P)
        assert t.deficiency.tolist() == [0, 0, 1]
        assert t.wakeups.tolist() == [0, 2]
        assert t.normal.tolist() == [True, False]

    def test_final_rank_matches_certificate(self):
        for seed in (1, 5, 9):
            stream = exposure_stream(35, 0.2, seed)
            t = trace_exposure(stream, P)
            cert = certify_rank(stream.final_graph, primes=(P,))
            assert int(t.rank[-1]) == cert.rank
            assert int(t.isolated[-1]) == cert.isolated

    def test_isolated_recurrence(self):
        # i_{m+1} = i_m - Z_m + [vertex m+1 isolated in G_{m+1}]
        stream = exposure_stream(60, 0.05, 3)
        final = stream.final_graph
        t = trace_exposure(stream, P)
        for m in range(1, t.n):
            newly_isolated = int(all(v > m + 1 for v in final.neighbors(m + 1)))
            assert t.isolated[m] == t.isolated[m - 1] - t.wakeups[m - 1] + newly_isolated

    def test_step_invariants_on_random_traces(self):
        for seed in range(6):
            t = traced(60, 2 * math.log(60) / 60, 100 + seed)
            assert (t.deficiency >= 0).all()
            assert set(t.jump.tolist()) <= {0, 1, 2}
            for m in range(1, t.n):
                y, y_next = int(t.deficiency[m - 1]), int(t.deficiency[m])
                if t.normal[m - 1] and y > 0 and t.jump[m - 1] == 2:
                    assert y_next == y - 1
                if t.normal[m - 1] and t.jump[m - 1] < 2:
                    assert y_next <= y + 1

    def test_incremental_equals_scratch_ranks(self):
        for seed in (2, 7):
            stream = exposure_stream(40, 0.1, seed)
            t = trace_exposure(stream, P)
            scratch = [rank_mod_p(FieldMatrix.from_graph(g, P)) for g in stream.graphs()]
            assert t.rank.tolist() == scratch

    def test_step_records_wire_format(self):
        t = traced(3, 1.0, 1)
        recs = list(t.step_records())
        assert [r["m"] for r in recs] == [1, 2, 3]
        assert set(recs[0]) == {"m", "rank", "i", "Y", "Z", "normal", "jump"}
        assert recs[-1]["jump"] is None and recs[-1]["Z"] is None
        assert recs[0] == {
            "m": 1, "rank": 0, "i": 1, "Y": 0, "Z": 1, "normal": False, "jump": 2,
        }

    def test_weights_zero_when_walk_at_zero(self):
        t = traced(3, 0.0, 1)
        assert t.weights().tolist() == [0.0, 0.0, 0.0]
        g = Graph(3, [(1, 3), (2, 3)])
        t = trace_exposure(ExposureStream.from_graph(g), P)
        assert t.weights().tolist() == [0.0, 0.0, 4.0]


class TestJumpStatistics:
    def test_triangle_cells(self):
        cells = {
            (c.deficient, c.normal): c
            for c in jump_statistics([traced(3, 1.0, 1)], m_start=1)
        }
        # step 1 attaches to an isolated vertex: cell (tight, not normal)
        assert cells[(False, False)].jump_counts == (0, 0, 1)
        assert cells[(False, True)].jump_counts == (0, 1, 0)
        assert cells[(True, True)].count == 0

    def test_empty_traces_all_tight_normal(self):
        cells = {
            (c.deficient, c.normal): c
            for c in jump_statistics([traced(4, 0.0, 1)], m_start=1)
        }
        assert cells[(False, True)].jump_counts == (3, 0, 0)
        assert sum(c.count for c in cells.values()) == 3

    def test_single_step_table(self):
        t = traced(5, 0.5, 2)
        cells = jump_statistics([t], m_start=4)
        assert sum(c.count for c in cells) == 1

    def test_intervals_bracket_frequencies(self):
        cells = jump_statistics([traced(40, 0.2, 3)], m_start=1)
        for cell in cells:
            for j in range(3):
                lo, hi = cell.intervals[j]
                if cell.count:
                    assert lo <= cell.frequency(j) <= hi

    def test_input_validation(self):
        with pytest.raises(ConfigError):
            jump_statistics([], m_start=1)
        with pytest.raises(ConfigError):
            jump_statistics([traced(3, 0.5, 1)], m_start=3)
        with pytest.raises(ConfigError):
            jump_statistics([traced(3, 0.5, 1)], m_start=0)


class TestSupermartingale:
    def test_all_tight_traces_trivially_pass(self):
        report = supermartingale_check([traced(5, 0.0, 1), traced(5, 0.0, 2)], 1)
        for row in report.rows:
            assert row.mean_next == 0.0
            assert row.pointwise_violations == 0.0

    def test_single_path_trace_flagged_small_sample(self):
        g = Graph(3, [(1, 3), (2, 3)])
        t = trace_exposure(ExposureStream.from_graph(g), P)
        report = supermartingale_check([t], m_start=1)
        assert report.small_sample
        last = report.rows[-1]
        assert last.mean_next == 4.0
        assert last.scaled_mean_current == 0.0
        assert last.pointwise_violations == 1.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            supermartingale_check([], 1)
        with pytest.raises(ConfigError):
            supermartingale_check([traced(4, 0.5, 1)], 4)

    def test_decay_holds_at_scale(self):
        # 100 seeded traces at n=300, c=2: the mean weight decays within a
        # 0.5 slack at >= 90% of steps past 0.3 n
        n, c = 300, 2.0
        p = c * math.log(n) / n
        traces = [traced(n, p, 4200 + s) for s in range(100)]
        report = supermartingale_check(traces, math.ceil(0.3 * n))
        assert not report.small_sample
        ok = sum(
            1 for r in report.rows if r.mean_next <= r.scaled_mean_current + 0.5
        )
        assert ok / len(report.rows) >= 0.90
        for t in traces:
            assert (t.deficiency >= 0).all()
