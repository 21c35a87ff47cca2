import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankgraph.anticoncentration import (
    CoefficientVector,
    decoupling_check,
    exact_sum_distribution,
    linear_atom_exact,
    linear_atom_signed,
    lo_scaling_experiment,
    quadratic_atom_mc,
)
from rankgraph.errors import BudgetError, ConfigError

from oracles import enumerate_linear_atoms

coeffs = st.lists(st.integers(min_value=-6, max_value=6), min_size=1, max_size=9)
probs = st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(1, 10)])


class TestCoefficientVector:
    def test_nonzero_count(self):
        assert CoefficientVector((1, 0, -2, 0)).q == 2

    def test_coerce(self):
        assert CoefficientVector.coerce([1, 2]).a == (1, 2)


class TestLinearAtom:
    def test_four_ones(self):
        est = linear_atom_exact([1, 1, 1, 1], 0.5)
        assert est.exact_value == Fraction(6, 16)
        assert est.argmax_c == 2

    def test_all_zero_coefficients(self):
        est = linear_atom_exact([0, 0, 0], 0.3)
        assert est.value == 1.0 and est.argmax_c == 0

    def test_distinct_coefficients(self):
        assert linear_atom_exact([1, 2], 0.5).exact_value == Fraction(1, 4)

    def test_probability_domain(self):
        with pytest.raises(ConfigError):
            linear_atom_exact([1], 1.5)

    def test_budget_error_suggests_monte_carlo(self):
        with pytest.raises(BudgetError, match="Monte Carlo"):
            linear_atom_exact([10**8], 0.5)

    @settings(max_examples=60, deadline=None)
    @given(coeffs, probs)
    def test_matches_full_enumeration(self, a, p):
        est = linear_atom_exact(a, p)
        dist = enumerate_linear_atoms(a, p)
        assert est.exact_value == max(dist.values())

    @settings(max_examples=40, deadline=None)
    @given(coeffs, probs)
    def test_distribution_sums_to_one(self, a, p):
        assert sum(exact_sum_distribution(a, p).values()) == 1

    @settings(max_examples=40, deadline=None)
    @given(coeffs, probs)
    def test_invariant_under_permutation_and_negation(self, a, p):
        base = linear_atom_exact(a, p).exact_value
        assert linear_atom_exact(list(reversed(a)), p).exact_value == base
        assert linear_atom_exact(sorted(a), p).exact_value == base
        assert linear_atom_exact([-x for x in a], p).exact_value == base

    def test_float_path_matches_binomial(self):
        # 80 terms forces the float path; all-ones sums are Binomial(80, p)
        est = linear_atom_exact([1] * 80, 0.5)
        assert est.exact_value is None
        exact = max(math.comb(80, k) / 2**80 for k in range(81))
        assert est.value == pytest.approx(exact, abs=1e-12)
        assert est.argmax_c == 40


class TestSignedAtom:
    def test_single_coefficient(self):
        est = linear_atom_signed([1], 0.25)
        assert est.exact_value == Fraction(1, 2) and est.argmax_c == 0

    def test_two_rademacher(self):
        est = linear_atom_signed([1, 1], 0.5)
        assert est.exact_value == Fraction(1, 2) and est.argmax_c == 0

    def test_zero_coefficient(self):
        assert linear_atom_signed([0], 0.1).value == 1.0

    def test_p_above_half_rejected(self):
        with pytest.raises(ConfigError):
            linear_atom_signed([1], 0.6)

    @settings(max_examples=40, deadline=None)
    @given(coeffs, st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1, 8)]))
    def test_matches_full_enumeration(self, a, p):
        est = linear_atom_signed(a, p)
        dist = enumerate_linear_atoms(a, p, signed=True)
        assert est.exact_value == max(dist.values())


class TestQuadraticAtomMC:
    def test_zero_matrix(self):
        est = quadratic_atom_mc(np.zeros((3, 3), dtype=int), 0.5, 1000, 1)
        assert est.value == 1.0 and est.argmax_c == 0

    def test_identity_matches_linear(self):
        est = quadratic_atom_mc(np.eye(4, dtype=int), 0.5, 40_000, 7)
        assert abs(est.value - 0.375) <= est.ci_halfwidth

    def test_all_ones_is_squared_binomial(self):
        est = quadratic_atom_mc(np.ones((4, 4), dtype=int), 0.5, 40_000, 7)
        assert est.argmax_c == 4
        assert abs(est.value - 0.375) <= est.ci_halfwidth

    def test_deterministic_per_seed(self):
        a = quadratic_atom_mc(np.ones((5, 5), dtype=int), 0.3, 2000, 11)
        b = quadratic_atom_mc(np.ones((5, 5), dtype=int), 0.3, 2000, 11)
        assert a == b

    def test_sample_floor(self):
        with pytest.raises(ConfigError):
            quadratic_atom_mc(np.eye(2, dtype=int), 0.5, 999, 0)


class TestDecoupling:
    def test_always_true_event(self):
        res = decoupling_check({0: 1}, {0: 1}, lambda x, y: True)
        assert (res.lhs, res.rhs) == (1.0, 1.0)

    def test_event_depending_only_on_y(self):
        # a Y-only event has P(E and E') = P(E): the X-side slice masses
        # are 0/1 and squaring is idempotent
        res = decoupling_check(
            {0: Fraction(1, 3), 1: Fraction(2, 3)},
            {0: Fraction(1, 4), 1: Fraction(3, 4)},
            lambda x, y: y == 1,
        )
        assert res.lhs_exact == Fraction(3, 4)
        assert res.joint_exact == res.lhs_exact

    def test_unequal_bits(self):
        res = decoupling_check({0: 0.5, 1: 0.5}, {0: 0.5, 1: 0.5}, lambda x, y: x != y)
        assert res.lhs == 0.5 and res.rhs == 0.5

    def test_bad_distribution_rejected(self):
        with pytest.raises(ConfigError):
            decoupling_check({0: 0.5, 1: 0.4}, {0: 1.0}, lambda x, y: True)

    def test_exhaustive_small_space(self):
        xs = {0: Fraction(1, 3), 1: Fraction(2, 3)}
        ys = {0: Fraction(1, 6), 1: Fraction(1, 3), 2: Fraction(1, 2)}
        cells = [(x, y) for x in xs for y in ys]
        for mask in range(2 ** len(cells)):
            chosen = {cells[i] for i in range(len(cells)) if mask >> i & 1}
            res = decoupling_check(xs, ys, lambda x, y: (x, y) in chosen)
            assert res.lhs_exact**2 <= res.joint_exact


class TestScalingExperiment:
    def test_known_binomial_atoms(self):
        table = lo_scaling_experiment([16, 100], [0.5], quadratic=False)
        by_n = {r.n: r for r in table.rows}
        assert by_n[16].atom_all_ones == pytest.approx(12870 / 65536, abs=1e-15)
        exact100 = math.comb(100, 50) / 2**100
        assert by_n[100].atom_all_ones == pytest.approx(exact100, abs=1e-12)
        assert by_n[100].scaled_all_ones == pytest.approx(exact100 * math.sqrt(50), abs=1e-12)

    def test_ramp_family_present(self):
        table = lo_scaling_experiment([16], [0.5], quadratic=False)
        assert table.rows[0].atom_ramp is not None
        assert table.rows[0].atom_ramp < table.rows[0].atom_all_ones

    def test_low_np_cells_skipped_with_notice(self):
        table = lo_scaling_experiment([16], [0.5, 0.1], quadratic=False)
        assert len(table.rows) == 1
        assert table.skipped == ((16, 0.1, "n*p < 4"),)

    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigError):
            lo_scaling_experiment([], [0.5])

    def test_unknown_family_rejected(self):
        with pytest.raises(ConfigError):
            lo_scaling_experiment([8], [0.5], families=("fibonacci",))

    def test_quadratic_column(self):
        table = lo_scaling_experiment([8], [0.5], families=("all-ones",),
                                      mc_samples=2000, seed=3)
        row = table.rows[0]
        assert row.atom_quadratic is not None
        assert row.scaled_quadratic == pytest.approx(row.atom_quadratic * 4 ** 0.25)
