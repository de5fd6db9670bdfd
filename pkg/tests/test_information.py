"""NMI tests: binning oracle parity, exact identities, and nonlinearity flags."""

import math
import random

import numpy as np
import pytest

from oracles import equal_frequency_bins_oracle, nmi_oracle
from qsimval.errors import ConfigError
from qsimval.matrix import MeasureMatrix
from qsimval.stats.correlation import CorrelationMatrix, correlation_matrix
from qsimval.stats.information import (
    default_bins,
    flag_nonlinear,
    nmi,
    nmi_matrix,
)


def _matrix(columns: dict[str, list[float]]) -> MeasureMatrix:
    names = tuple(columns)
    n = len(next(iter(columns.values())))
    return MeasureMatrix(
        row_keys=tuple(("sim", f"s{i}", 1) for i in range(n)),
        column_names=names,
        values=np.column_stack([np.asarray(columns[c], dtype=float) for c in names]),
    )


class TestDefaultBins:
    @pytest.mark.parametrize(
        "n, expected",
        [(1, 1), (2, 2), (5, 3), (24, 5), (26, 6), (1000, 32)],
    )
    def test_square_root_rule(self, n, expected):
        assert default_bins(n) == expected


class TestBinning:
    def test_ties_share_the_lower_bin(self):
        from qsimval.stats.information import _equal_frequency_bins

        values = np.array([3.0, 1.0, 3.0, 2.0, 3.0, 4.0])
        bins = _equal_frequency_bins(values, 3)
        # min-ranks: 3 -> 2, 1 -> 0, 2 -> 1, 4 -> 5
        assert bins.tolist() == [1, 0, 1, 0, 1, 2]

    def test_oracle_parity_on_random_tied_data(self):
        from qsimval.stats.information import _equal_frequency_bins

        rng = random.Random(31)
        for _ in range(200):
            n = rng.randint(2, 60)
            values = [float(rng.randint(0, 8)) for _ in range(n)]
            bins = rng.randint(1, 10)
            ours = _equal_frequency_bins(np.asarray(values), bins).tolist()
            assert ours == equal_frequency_bins_oracle(values, bins)


class TestNmiScalar:
    def test_self_nmi_is_exactly_one(self):
        x = [0.3, 1.9, 0.7, 2.5, 1.1, 0.2, 3.3, 2.0]
        assert nmi(x, x, bins=4) == 1.0

    def test_independent_four_point_case(self):
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1], bins=2) == 0.0

    def test_symmetry_bitwise(self):
        rng = random.Random(8)
        for _ in range(50):
            n = rng.randint(10, 60)
            x = [rng.gauss(0, 1) for _ in range(n)]
            y = [rng.gauss(0, 1) for _ in range(n)]
            assert nmi(x, y, bins=5) == nmi(y, x, bins=5)

    def test_shuffled_copy_loses_information(self):
        rng = random.Random(20240822)
        x = [rng.gauss(0, 1) for _ in range(1000)]
        y = list(x)
        rng.shuffle(y)
        value = nmi(x, y, bins=10)
        assert value < 0.1

    def test_constant_side_undefined(self):
        assert nmi([5, 5, 5, 5], [1, 2, 3, 4], bins=2) is None
        assert nmi([1, 2, 3, 4], [5, 5, 5, 5], bins=2) is None

    def test_fewer_complete_than_bins_undefined(self):
        assert nmi([1, 2, 3], [1, 2, 3], bins=4) is None
        nan = float("nan")
        assert nmi([1, 2, 3, nan, 5], [1, nan, 3, 4, 5], bins=4) is None

    def test_bad_bin_count(self):
        with pytest.raises(ConfigError, match="bin count"):
            nmi([1, 2, 3], [1, 2, 3], bins=0)

    def test_zero_entropy_collapse_scores_zero(self):
        # a dominant tied value at the top of the range pulls every
        # observation into bin 0, so both entropies vanish
        x = [1.0] * 21 + [0.5, 0.6, 0.7]
        assert nmi(x, x, bins=5) == 0.0
        assert nmi(x, list(range(24)), bins=5) == 0.0

    def test_single_bin_gives_zero(self):
        assert nmi([1, 2, 3, 4], [4, 3, 2, 1], bins=1) == 0.0

    def test_pairwise_deletion(self):
        nan = float("nan")
        x = [1.0, nan, 3.0, 4.0, 5.0, 6.0, 2.0]
        y = [2.0, 7.0, 6.0, nan, 1.0, 5.0, 3.0]
        complete_x = [1.0, 3.0, 5.0, 6.0, 2.0]
        complete_y = [2.0, 6.0, 1.0, 5.0, 3.0]
        assert nmi(x, y, bins=2) == nmi(complete_x, complete_y, bins=2)

    def test_oracle_parity(self):
        rng = random.Random(63)
        for _ in range(200):
            n = rng.randint(4, 80)
            x = [float(rng.randint(0, 9)) for _ in range(n)]
            y = [float(rng.randint(0, 9)) for _ in range(n)]
            bins = rng.randint(1, 8)
            reference = nmi_oracle(x, y, bins)
            ours = nmi(x, y, bins)
            if reference is None:
                assert ours is None
            else:
                assert ours == pytest.approx(reference, abs=1e-12)
                assert 0.0 <= ours <= 1.0 + 1e-12

    def test_default_bins_applied_when_unset(self):
        x = [float(v) for v in range(26)]
        # n = 26 -> 6 bins by the square-root rule
        assert nmi(x, x) == nmi(x, x, bins=6)


class TestNmiMatrix:
    def test_diagonal_one_and_symmetry(self):
        rng = random.Random(5)
        m = _matrix(
            {
                "a": [rng.gauss(0, 1) for _ in range(40)],
                "b": [rng.gauss(0, 1) for _ in range(40)],
                "c": [rng.gauss(0, 1) for _ in range(40)],
            }
        )
        report = nmi_matrix(m, bins=5)
        assert np.array_equal(report.values, report.values.T, equal_nan=True)
        for i in range(3):
            assert report.values[i, i] == 1.0

    def test_constant_column_masked(self):
        m = _matrix({"a": [1.0] * 10, "b": [float(v) for v in range(10)]})
        report = nmi_matrix(m, bins=3)
        assert np.isnan(report.values[0, 0])
        assert np.isnan(report.values[0, 1])
        assert report.values[1, 1] == 1.0

    def test_default_bins_follow_complete_rows(self):
        nan = float("nan")
        columns = {
            "a": [float(v) for v in range(30)],
            "b": [float(v % 7) for v in range(30)],
        }
        columns["a"][0] = nan  # 29 complete rows -> isqrt(28) + 1 = 6
        report = nmi_matrix(_matrix(columns))
        assert report.bins == 6

    def test_collapsed_column_zero_on_its_own_diagonal(self):
        # 21 of 24 values tied at the maximum: the binned column is
        # degenerate, so even its self-information is zero
        collapsed = [1.0] * 21 + [0.5, 0.6, 0.7]
        spread = [float(v) for v in range(24)]
        report = nmi_matrix(_matrix({"a": collapsed, "b": spread}), bins=5)
        assert report.values[0, 0] == 0.0
        assert report.values[0, 1] == 0.0
        assert report.values[1, 1] == 1.0


def _flag_inputs(columns, bins=10):
    m = _matrix(columns)
    corr_p = correlation_matrix(m, "pearson")
    corr_k = correlation_matrix(m, "kendall")
    report = nmi_matrix(m, bins=bins)
    return corr_p, corr_k, report


class TestFlagNonlinear:
    def test_quadratic_pair_flagged(self):
        x = np.linspace(-1.0, 1.0, 1000)
        corr_p, corr_k, report = _flag_inputs({"x": list(x), "x_sq": list(x**2)})
        flagged = flag_nonlinear(corr_p, corr_k, report).flagged_pairs
        assert len(flagged) == 1
        name_a, name_b, score, rp, rk = flagged[0]
        assert {name_a, name_b} == {"x", "x_sq"}
        assert score >= 0.5
        assert abs(rp) < 0.3 and abs(rk) < 0.3

    def test_linear_pair_not_flagged(self):
        x = np.linspace(-1.0, 1.0, 1000)
        corr_p, corr_k, report = _flag_inputs({"x": list(x), "y": list(2 * x + 3)})
        assert flag_nonlinear(corr_p, corr_k, report).flagged_pairs == ()

    def test_independent_columns_not_flagged(self):
        rng = np.random.default_rng(7)
        corr_p, corr_k, report = _flag_inputs(
            {name: list(rng.normal(size=1000)) for name in ("a", "b", "c")}
        )
        assert flag_nonlinear(corr_p, corr_k, report).flagged_pairs == ()

    def test_sorted_by_nmi_descending(self):
        x = np.linspace(-1.0, 1.0, 1000)
        rng = np.random.default_rng(3)
        noisy = x**2 + rng.normal(scale=0.02, size=1000)
        corr_p, corr_k, report = _flag_inputs(
            {"x": list(x), "clean": list(x**2), "noisy": list(noisy)}
        )
        flagged = flag_nonlinear(corr_p, corr_k, report).flagged_pairs
        # clean vs noisy is close to linear, so only the two x-vs-parabola
        # pairs qualify; the noiseless one carries the larger score
        assert [(item[0], item[1]) for item in flagged] == [
            ("x", "clean"),
            ("x", "noisy"),
        ]
        scores = [item[2] for item in flagged]
        assert scores == sorted(scores, reverse=True)

    def test_monotone_nonlinear_pair_not_flagged(self):
        # cubic growth is monotone: kendall stays high, so no flag
        x = np.linspace(0.0, 2.0, 500)
        corr_p, corr_k, report = _flag_inputs({"x": list(x), "x_cubed": list(x**3)})
        assert flag_nonlinear(corr_p, corr_k, report).flagged_pairs == ()

    def test_thresholds_respected(self):
        x = np.linspace(-1.0, 1.0, 1000)
        corr_p, corr_k, report = _flag_inputs({"x": list(x), "x_sq": list(x**2)})
        strict = flag_nonlinear(corr_p, corr_k, report, t_nmi=1.01)
        assert strict.flagged_pairs == ()

    def test_name_mismatch_rejected(self):
        corr_p, corr_k, report = _flag_inputs({"a": [1.0, 2.0, 3.0, 4.0], "b": [2.0, 1.0, 4.0, 3.0]}, bins=2)
        renamed = CorrelationMatrix(
            method="kendall",
            names=("a", "z"),
            values=corr_k.values,
            pair_counts=corr_k.pair_counts,
        )
        with pytest.raises(ConfigError, match="share column names"):
            flag_nonlinear(corr_p, renamed, report)
