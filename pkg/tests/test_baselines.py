import math

import numpy as np
import pytest

from mmdmiss.baselines import (
    average_of_extremes,
    coordinate_median,
    ignoring_mle_gaussian,
    truncated_mle_limit,
)
from mmdmiss.data import Dataset
from mmdmiss.exceptions import DataError, ShapeError


def test_mle_complete_data_is_sample_mean():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 3))
    ds = Dataset.complete(X)
    assert np.allclose(ignoring_mle_gaussian(ds), X.mean(axis=0), rtol=0, atol=1e-15)


def test_mle_per_coordinate_means():
    ds = Dataset.from_arrays(
        [[1.0, np.nan], [3.0, np.nan], [np.nan, 8.0]],
        [[0, 1], [0, 1], [1, 0]],
    )
    assert np.array_equal(ignoring_mle_gaussian(ds), [2.0, 8.0])


def test_mle_never_observed_coordinate():
    ds = Dataset.from_arrays([[1.0, np.nan], [2.0, np.nan]], [[0, 1], [0, 1]])
    with pytest.raises(DataError, match="coordinate 2"):
        ignoring_mle_gaussian(ds)
    with pytest.raises(DataError):
        coordinate_median(ds)


def test_mle_left_truncation_limit():
    # observe x only when x > 0: the observed mean approaches
    # phi(0) / (1 - Phi(0)) = sqrt(2/pi)
    rng = np.random.default_rng(1)
    x = rng.standard_normal(100_000)
    kept = x[x > 0.0]
    ds = Dataset.complete(kept[:, None])
    est = ignoring_mle_gaussian(ds)[0]
    assert abs(est - 0.797885) < 0.02


def test_median_examples():
    ds = Dataset.complete([[1.0], [2.0], [9.0]])
    assert coordinate_median(ds)[0] == 2.0
    ds2 = Dataset.complete([[1.0], [3.0]])
    assert coordinate_median(ds2)[0] == 2.0


def test_median_row_permutation_invariant():
    rng = np.random.default_rng(2)
    values = rng.standard_normal((31, 2))
    mask = rng.random((31, 2)) < 0.25
    mask[mask.all(axis=1)] = False
    ds = Dataset.from_arrays(values, mask)
    perm = rng.permutation(31)
    ds_perm = Dataset.from_arrays(values[perm], mask[perm])
    assert np.array_equal(coordinate_median(ds), coordinate_median(ds_perm))


def test_median_invariant_to_symmetric_pair():
    ds = Dataset.complete([[1.0], [2.0], [9.0]])
    med = coordinate_median(ds)[0]
    ds2 = Dataset.complete([[1.0], [2.0], [9.0], [med - 3.0], [med + 3.0]])
    assert coordinate_median(ds2)[0] == med


def test_average_of_extremes():
    ds = Dataset.complete([[-3.0], [0.0], [5.0]])
    assert average_of_extremes(ds) == 1.0
    assert average_of_extremes(Dataset.complete([[4.2]])) == 4.2


def test_average_of_extremes_needs_univariate():
    with pytest.raises(ShapeError):
        average_of_extremes(Dataset.complete([[1.0, 2.0]]))


def test_average_of_extremes_two_points():
    ds = Dataset.complete([[0.0], [2.0]])
    assert average_of_extremes(ds) == 1.0


def test_truncated_mle_limit_values():
    assert abs(truncated_mle_limit(0.0) - math.sqrt(2.0 / math.pi)) < 1e-12
    assert abs(truncated_mle_limit(0.0) - 0.797885) < 1e-6


def test_truncated_mle_limit_increasing_in_a():
    vals = [truncated_mle_limit(a) for a in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    assert all(v > 0 for v in vals[2:])
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_truncated_mle_limit_two_sided():
    # symmetric interval around zero leaves the limit at zero
    assert abs(truncated_mle_limit(-1.5, 1.5)) < 1e-15
    # (a, b) = (0, inf) equals the left-truncation special case
    assert np.isclose(truncated_mle_limit(0.0, math.inf), truncated_mle_limit(0.0))
    with pytest.raises(ShapeError):
        truncated_mle_limit(2.0, 1.0)
