import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sloanegap.gap import GapParams
from sloanegap.synth import (
    BINARY_OPS,
    CONSTANT_CHOICES,
    MAX_DEPTH,
    PARAMS_PER_LEVEL,
    SQUARE_PROBABILITY,
    UNARY_OPS,
    ExprNode,
    Level,
    compare_gap,
    depth_weights,
    eval_expr,
    mix_seed,
    sample_function,
    sample_parameter_arrays,
    simulate,
    simulated_expression,
)
from surrogate import surrogate_table


def expr_source(expr):
    """Render an expression as Python source, evaluated by the interpreter.

    This re-derives the value through a completely different path (the
    Python parser and big-int arithmetic), so agreement with eval_expr
    is meaningful.
    """
    src = "n"
    ops = {"add": "+", "multiply": "*", "subtract": "-"}
    for level in expr.levels:
        g = f"({src})**2" if level.unary_op == "square" else src
        src = f"(({g}) {ops[level.binary_op]} {level.constant})"
    return src


def independent_eval(expr, n):
    return eval(expr_source(expr), {"n": n})


class TestStructures:
    def test_op_inventory(self):
        assert BINARY_OPS == ("add", "multiply", "subtract")
        assert UNARY_OPS == ("identity", "square")
        assert PARAMS_PER_LEVEL == CONSTANT_CHOICES * len(BINARY_OPS) * len(UNARY_OPS)

    def test_level_validation(self):
        Level(constant=9, binary_op="add", unary_op="square")
        with pytest.raises(ValueError):
            Level(constant=0, binary_op="add", unary_op="identity")
        with pytest.raises(ValueError):
            Level(constant=10, binary_op="add", unary_op="identity")
        with pytest.raises(ValueError):
            Level(constant=3, binary_op="divide", unary_op="identity")
        with pytest.raises(ValueError):
            Level(constant=3, binary_op="add", unary_op="cube")

    def test_expr_node_depth(self):
        lv = Level(constant=1, binary_op="add", unary_op="identity")
        assert ExprNode((lv, lv, lv)).depth == 3
        with pytest.raises(ValueError):
            ExprNode(())


class TestDepthWeights:
    def test_two_level_split(self):
        w = depth_weights(2)
        assert math.isclose(w[0], 1 / 55)
        assert math.isclose(w[1], 54 / 55)

    def test_default_exact_fractions(self):
        w = depth_weights()
        total = sum(54**i for i in range(MAX_DEPTH))
        assert total == 8663491
        for i in range(MAX_DEPTH):
            assert math.isclose(w[i], float(Fraction(54**i, total)), rel_tol=1e-15)
        assert math.isclose(w.sum(), 1.0, rel_tol=1e-12)

    def test_each_extra_level_is_54x_likelier(self):
        w = depth_weights()
        for a, b in zip(w, w[1:]):
            assert math.isclose(b / a, 54.0, rel_tol=1e-12)


class TestEvalExpr:
    def test_hand_computed_composition(self):
        expr = ExprNode(
            (
                Level(constant=3, binary_op="add", unary_op="identity"),
                Level(constant=5, binary_op="multiply", unary_op="square"),
            )
        )
        # n=2: 2+3 = 5, then 5^2 * 5 = 125
        assert eval_expr(expr, 2) == 125
        assert independent_eval(expr, 2) == 125

    def test_subtract_can_go_negative(self):
        expr = ExprNode((Level(constant=9, binary_op="subtract", unary_op="identity"),))
        assert eval_expr(expr, 4) == -5

    def test_operand_order_is_value_then_constant(self):
        expr = ExprNode((Level(constant=7, binary_op="subtract", unary_op="square"),))
        assert eval_expr(expr, 3) == 2  # 3^2 - 7, not 7 - 3^2

    def test_agrees_with_python_parser_on_sampled_expressions(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            expr = sample_function(rng)
            n = int(rng.integers(1, 30))
            assert eval_expr(expr, n) == independent_eval(expr, n)

    def test_depth_one_magnitude_bound(self):
        # worst single level is multiply after square: 9 n^2
        for n in range(1, 51):
            bound = max(9 * n * n, n * n + 9)
            for k in range(1, 10):
                for b in BINARY_OPS:
                    for u in UNARY_OPS:
                        expr = ExprNode((Level(constant=k, binary_op=b, unary_op=u),))
                        assert abs(eval_expr(expr, n)) <= bound

    def test_rejects_nonpositive_n(self):
        expr = ExprNode((Level(constant=1, binary_op="add", unary_op="identity"),))
        with pytest.raises(ValueError):
            eval_expr(expr, 0)


class TestSeeding:
    def test_mix_seed_scalar_vector_agreement(self):
        idx = np.arange(100)
        vec = mix_seed(42, idx)
        assert vec.dtype == np.uint64
        for i in range(100):
            assert mix_seed(42, i) == vec[i]

    def test_distinct_seeds_decorrelate(self):
        a = mix_seed(1, np.arange(1000))
        b = mix_seed(2, np.arange(1000))
        assert not np.any(a == b)

    def test_parameter_slices_are_schedule_independent(self):
        whole = sample_parameter_arrays(9, 500)
        part = sample_parameter_arrays(9, 120, start_index=250)
        assert np.array_equal(whole.depth[250:370], part.depth)
        assert np.array_equal(whole.constants[250:370], part.constants)
        assert np.array_equal(whole.binary_codes[250:370], part.binary_codes)
        assert np.array_equal(whole.square_flags[250:370], part.square_flags)


_DIST_N = 1_000_000


@pytest.fixture(scope="module")
def params():
    return sample_parameter_arrays(2024, _DIST_N)


class TestParameterDistribution:
    N = _DIST_N

    def within_3se(self, observed, p):
        se = math.sqrt(p * (1 - p) / self.N)
        return abs(observed / self.N - p) <= 3 * se

    def test_depth_frequencies(self, params):
        w = depth_weights()
        for d in range(1, MAX_DEPTH + 1):
            observed = int(np.count_nonzero(params.depth == d))
            assert self.within_3se(observed, w[d - 1]), (d, observed)

    def test_constant_frequencies(self, params):
        for k in range(1, CONSTANT_CHOICES + 1):
            observed = int(np.count_nonzero(params.constants == k))
            # constants fill count x MAX_DEPTH cells
            se = math.sqrt((1 / 9) * (8 / 9) / (self.N * MAX_DEPTH))
            assert abs(observed / (self.N * MAX_DEPTH) - 1 / 9) <= 3 * se

    def test_binary_op_frequencies(self, params):
        for code in range(len(BINARY_OPS)):
            observed = int(np.count_nonzero(params.binary_codes == code))
            se = math.sqrt((1 / 3) * (2 / 3) / (self.N * MAX_DEPTH))
            assert abs(observed / (self.N * MAX_DEPTH) - 1 / 3) <= 3 * se

    def test_square_flag_frequency(self, params):
        observed = int(np.count_nonzero(params.square_flags))
        p = SQUARE_PROBABILITY
        se = math.sqrt(p * (1 - p) / (self.N * MAX_DEPTH))
        assert abs(observed / (self.N * MAX_DEPTH) - p) <= 3 * se

    def test_value_ranges(self, params):
        assert params.depth.min() >= 1 and params.depth.max() <= MAX_DEPTH
        assert params.constants.min() >= 1
        assert params.constants.max() <= CONSTANT_CHOICES
        assert params.binary_codes.min() >= 0
        assert params.binary_codes.max() < len(BINARY_OPS)


class TestSampleFunction:
    def test_depths_lie_in_range(self):
        rng = np.random.default_rng(0)
        depths = [sample_function(rng).depth for _ in range(2000)]
        assert min(depths) >= 1 and max(depths) <= MAX_DEPTH
        # depth MAX_DEPTH dominates at 54^4 : ... odds
        assert depths.count(MAX_DEPTH) > 1900

    def test_respects_max_depth_argument(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            assert sample_function(rng, max_depth=2).depth <= 2


class TestSimulate:
    def test_deterministic(self):
        a = simulate(7, 2000, 10)
        b = simulate(7, 2000, 10)
        assert np.array_equal(a.table.counts, b.table.counts)
        assert a.counted == b.counted
        assert a.discarded == b.discarded

    def test_seed_changes_output(self):
        a = simulate(7, 2000, 10)
        b = simulate(8, 2000, 10)
        assert not np.array_equal(a.table.counts, b.table.counts)

    def test_value_conservation(self):
        res = simulate(3, 1500, 12, v_max=5000)
        assert res.total_values == 1500 * 12
        assert res.counted + res.discarded == res.total_values
        assert int(res.table.counts.sum()) == res.counted
        assert res.table.n_max == 5000
        assert res.table.total_terms_seen == res.total_values

    def test_matches_exact_big_int_evaluation(self):
        # replays every sampled function through the scalar expression
        # path with exact integers; the vectorized float run must agree
        res = simulate(11, 300, 20, v_max=10000)
        counts = np.zeros(10001, dtype=np.int64)
        for i in range(300):
            expr = simulated_expression(11, i)
            for n in range(1, 21):
                v = eval_expr(expr, n)
                if 1 <= v <= 10000:
                    counts[v] += 1
        assert np.array_equal(counts, res.table.counts)

    def test_counts_property_lists_nonzero_only(self):
        res = simulate(5, 200, 5)
        nz = res.counts
        assert all(c > 0 for c in nz.values())
        assert sum(nz.values()) == res.counted
        for v, c in nz.items():
            assert res.table.counts[v] == c

    def test_snapshot_label_mentions_seed(self):
        res = simulate(19, 50, 5)
        assert "seed=19" in res.table.snapshot_label

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"num_functions": 0},
            {"terms_per_function": 0},
            {"v_max": 0},
        ],
    )
    def test_rejects_bad_arguments(self, kwargs):
        args = {"num_functions": 10, "terms_per_function": 5, "v_max": 100}
        args.update(kwargs)
        with pytest.raises(ValueError):
            simulate(0, **args)


class TestCompareGap:
    def test_identical_clouds_have_unit_ratio(self):
        res = simulate(0, 30000, 20)
        cmp_ = compare_gap(res.table, res)
        assert cmp_.gap_score_real == cmp_.gap_score_synth
        assert cmp_.ratio == 1.0

    def test_biased_cloud_scores_far_above_synthetic(self):
        real = surrogate_table()
        res = simulate(0, 60000, 20)
        cmp_ = compare_gap(real, res)
        assert cmp_.gap_score_synth > 0.0
        assert cmp_.gap_score_real >= 2 * cmp_.gap_score_synth
        assert cmp_.fit_real.slope < 0.0
        assert cmp_.fit_synth.slope < 0.0

    def test_infinite_ratio_serializes_as_null(self):
        real = surrogate_table()
        sparse = simulate(0, 40, 5)  # too sparse for any qualifying window
        cmp_ = compare_gap(real, sparse)
        assert cmp_.gap_score_synth == 0.0
        assert cmp_.ratio == math.inf
        data = cmp_.to_json_dict()
        assert data["ratio"] is None
        assert data["gap_score_real"] == cmp_.gap_score_real
        assert set(data["fit_real"]) == {"slope", "intercept", "r2", "k", "n_used"}

    def test_custom_params_are_honored(self):
        res = simulate(0, 30000, 20)
        params = GapParams(n_start=500, n_end=2000)
        cmp_ = compare_gap(res.table, res, params)
        assert cmp_.ratio == 1.0
