import numpy as np
import pytest

from rankgraph.errors import ConfigError, ContractError, OracleLimitError
from rankgraph.exact_rank import (
    CERTIFIED_DEFICIENT,
    CERTIFIED_EQUAL,
    DEFAULT_PRIMES,
    BorderRankState,
    FieldMatrix,
    IntegerMatrix,
    PrimeModulus,
    bareiss_determinant,
    border_rank_update,
    certify_rank,
    rank_mod_p,
    rational_rank,
)
from rankgraph.graphs import Graph, complete, cycle, exposure_stream, gnp, path, star
from rankgraph.structure import CHERRY, DUPLICATE_ROW_CLASS

from oracles import fraction_rank, permutation_determinant

P = DEFAULT_PRIMES[0]


def random_graph(n, p, rng):
    edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
             if rng.random() < p]
    return Graph(n, edges)


class TestPrimeModulus:
    def test_defaults_are_valid(self):
        for pm in DEFAULT_PRIMES:
            assert 2**30 < pm.value < 2**31

    def test_rejects_composite(self):
        with pytest.raises(ConfigError):
            PrimeModulus(2147483646)

    def test_rejects_out_of_range(self):
        with pytest.raises(ConfigError):
            PrimeModulus(101)
        with pytest.raises(ConfigError):
            PrimeModulus(2**31 + 11)


class TestRankModP:
    def test_single_edge(self):
        assert rank_mod_p(FieldMatrix([[0, 1], [1, 0]], P)) == 2

    def test_zero_matrix(self):
        assert rank_mod_p(FieldMatrix(np.zeros((3, 3), dtype=int), P)) == 0

    def test_path3(self):
        assert rank_mod_p(FieldMatrix.from_graph(path(3), P)) == 2

    def test_cycle4(self):
        assert rank_mod_p(FieldMatrix.from_graph(cycle(4), P)) == 2

    def test_dimension_zero(self):
        assert rank_mod_p(FieldMatrix(np.zeros((0, 0), dtype=int), P)) == 0

    def test_input_unmodified(self):
        fm = FieldMatrix.from_graph(complete(5), P)
        before = fm.entries.copy()
        rank_mod_p(fm)
        assert np.array_equal(fm.entries, before)

    def test_never_exceeds_rational_rank(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            n = int(rng.integers(1, 8))
            rows = rng.integers(-4, 5, size=(n, n)).tolist()
            modp = rank_mod_p(FieldMatrix(rows, P))
            assert modp <= rational_rank(IntegerMatrix(rows))

    def test_agrees_with_rational_rank_on_small_graphs(self):
        rng = np.random.default_rng(17)
        for trial in range(300):
            n = 3 + trial % 8
            g = random_graph(n, float(rng.choice([0.1, 0.3, 0.5, 0.9])), rng)
            exact = rational_rank(IntegerMatrix.from_graph(g))
            for pm in DEFAULT_PRIMES:
                assert rank_mod_p(FieldMatrix.from_graph(g, pm)) == exact

    def test_dump_format(self):
        fm = FieldMatrix([[0, 1], [1, 0]], P)
        assert fm.dump() == "0 1\n1 0"


class TestIntegerOracle:
    def test_bareiss_examples(self):
        assert bareiss_determinant(IntegerMatrix.from_graph(complete(2))) == -1
        assert bareiss_determinant(IntegerMatrix.from_graph(complete(3))) == 2
        assert bareiss_determinant(IntegerMatrix.from_graph(cycle(4))) == 0

    def test_bareiss_against_permutation_expansion(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(1, 6))
            rows = rng.integers(-3, 4, size=(n, n)).tolist()
            assert bareiss_determinant(IntegerMatrix(rows)) == permutation_determinant(rows)

    def test_rational_rank_examples(self):
        assert rational_rank(IntegerMatrix.from_graph(complete(4))) == 4
        assert rational_rank(IntegerMatrix.from_graph(star(3))) == 2
        assert rational_rank(IntegerMatrix([[0]])) == 0

    def test_rational_rank_against_fraction_elimination(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            n = int(rng.integers(1, 8))
            rows = rng.integers(-4, 5, size=(n, n)).tolist()
            assert rational_rank(IntegerMatrix(rows)) == fraction_rank(rows)

    def test_zero_determinant_iff_rank_deficient(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            n = int(rng.integers(1, 8))
            m = rng.integers(0, 2, size=(n, n))
            m = np.triu(m, 1)
            rows = (m + m.T).tolist()
            mat = IntegerMatrix(rows)
            assert (bareiss_determinant(mat) == 0) == (rational_rank(mat) < n)

    def test_dimension_cap(self):
        with pytest.raises(OracleLimitError):
            IntegerMatrix(np.zeros((65, 65), dtype=int).tolist())


CLOSED_FORMS = [
    (complete, range(2, 25), lambda n: n),
    (cycle, range(3, 25), lambda n: n - 2 if n % 4 == 0 else n),
    (path, range(1, 25), lambda n: n - 1 if n % 2 == 1 else n),
    (star, range(1, 24), lambda m: 2),
]


@pytest.mark.parametrize("family,sizes,formula", CLOSED_FORMS)
def test_closed_forms_small(family, sizes, formula):
    for k in sizes:
        g = family(k)
        expected = formula(k)
        assert rational_rank(IntegerMatrix.from_graph(g)) == expected
        assert rank_mod_p(FieldMatrix.from_graph(g, P)) == expected


class TestCertifyRank:
    def test_path3_deficient_with_cherry(self):
        cert = certify_rank(path(3))
        assert (cert.rank, cert.isolated, cert.status) == (2, 0, CERTIFIED_DEFICIENT)
        kinds = {w.kind for w in cert.witnesses}
        assert CHERRY in kinds and DUPLICATE_ROW_CLASS in kinds
        cherry = next(w for w in cert.witnesses if w.kind == CHERRY)
        assert cherry.vertices == (1, 3) and cherry.via == 2

    def test_triangle_equal(self):
        cert = certify_rank(complete(3))
        assert (cert.rank, cert.status) == (3, CERTIFIED_EQUAL)

    def test_empty_graph(self):
        cert = certify_rank(Graph(4))
        assert (cert.rank, cert.isolated, cert.status) == (0, 4, CERTIFIED_EQUAL)

    def test_requires_a_prime(self):
        with pytest.raises(ConfigError):
            certify_rank(path(3), primes=())

    def test_rank_never_exceeds_upper_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 14))
            g = random_graph(n, float(rng.random()), rng)
            cert = certify_rank(g)
            assert cert.rank <= cert.n - cert.isolated

    def test_large_deficient_graph_reports_witness(self):
        # two leaves hanging off vertex 1 of a big complete core
        g = complete(70)
        edges = g.edges() + [(1, 71), (1, 72)]
        big = Graph(72, edges)
        cert = certify_rank(big)
        assert cert.status == CERTIFIED_DEFICIENT
        assert cert.rank < big.n - cert.isolated
        assert cert.duplicate_row_excess() >= 1


class TestBorderRankUpdates:
    def test_single_edge_jump(self):
        st = BorderRankState(P, 2)
        assert st.extend([0]) == 0
        assert st.extend([1, 0]) == 2

    def test_triangle_completion(self):
        st = BorderRankState(P, 3)
        st.extend([0])
        st.extend([1, 0])
        assert st.extend([1, 1, 0]) == 3

    def test_zero_column_keeps_rank(self):
        st = BorderRankState(P, 4)
        st.extend([0])
        st.extend([1, 0])
        assert st.extend([0, 0, 0]) == 2
        assert st.extend([0, 0, 0, 0]) == 2

    def test_column_length_checked(self):
        st = BorderRankState(P, 3)
        st.extend([0])
        with pytest.raises(ContractError):
            st.extend([1, 0, 0])

    def test_diagonal_must_be_zero(self):
        st = BorderRankState(P, 2)
        with pytest.raises(ContractError):
            st.extend([1])

    def test_entries_must_be_binary(self):
        st = BorderRankState(P, 2)
        st.extend([0])
        with pytest.raises(ContractError):
            st.extend([2, 0])

    def test_functional_alias(self):
        st = BorderRankState(P, 1)
        assert border_rank_update(st, [0]) is st

    @pytest.mark.parametrize("n,p,seed", [(5, 0.5, 1), (12, 0.3, 2), (25, 0.15, 3),
                                          (40, 0.1, 4)])
    def test_replay_matches_scratch_ranks(self, n, p, seed):
        stream = exposure_stream(n, p, seed)
        st = BorderRankState(P, n)
        incremental = [st.extend(col) for col in stream.border_columns()]
        scratch = [
            rank_mod_p(FieldMatrix.from_graph(g, P)) for g in stream.graphs()
        ]
        assert incremental == scratch

    def test_jump_classification_on_dense_graph(self):
        # every increment is 0, 1, or 2
        stream = exposure_stream(30, 0.4, 9)
        st = BorderRankState(P, 30)
        prev = 0
        for col in stream.border_columns():
            cur = st.extend(col)
            assert cur - prev in (0, 1, 2)
            prev = cur
