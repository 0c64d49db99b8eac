import math

import numpy as np
import pytest
from scipy.special import ndtr

from mmdmiss.data import Pattern
from mmdmiss.exceptions import ConfigError, ShapeError, UnsupportedMechanismError
from mmdmiss.mechanisms import (
    AdversarialMechanism,
    DataContamination,
    HuberMixtureMechanism,
    McarMechanism,
    TruncationMechanism,
    apply_mechanism,
    blockwise_mcar,
    blockwise_patterns,
    deviation_to_mcar,
    draw_complete,
    mixture_cdf,
    self_censoring_blockwise,
)


def test_contamination_validation():
    with pytest.raises(ConfigError):
        DataContamination(epsilon=-0.1)
    with pytest.raises(ConfigError):
        DataContamination(epsilon=0.2, kind="bogus", param=[1.0])
    with pytest.raises(ConfigError):
        DataContamination(epsilon=0.2, kind="point_mass", param=None)


def test_draw_complete_clean_clt_band():
    rng = np.random.default_rng(0)
    rows = draw_complete(100_000, np.zeros(2), DataContamination.none(), rng)
    assert np.all(np.abs(rows.mean(axis=0)) < 4.0 / math.sqrt(100_000))


def test_draw_complete_full_point_mass():
    rng = np.random.default_rng(1)
    xi = np.asarray([3.0, -1.0])
    rows = draw_complete(50, np.zeros(2), DataContamination.point_mass(1.0, xi), rng)
    assert np.all(rows == xi)


def test_draw_complete_contaminated_fraction_band():
    rng = np.random.default_rng(2)
    xi = np.ones(2)
    rows = draw_complete(
        100_000, np.zeros(2), DataContamination.point_mass(0.2, xi), rng
    )
    frac = np.mean(np.all(rows == 1.0, axis=1))
    assert abs(frac - 0.2) < 0.006  # 4 sigma binomial band


def test_mcar_mechanism_validation():
    with pytest.raises(ConfigError):
        McarMechanism({(0, 0): 0.6, (0, 1): 0.5})
    with pytest.raises(ConfigError):
        McarMechanism({(0, 0): 1.2, (0, 1): -0.2})


def test_blockwise_patterns_structure():
    pats = blockwise_patterns(10)
    assert pats[0][:3] == (1, 1, 1)
    assert pats[1][2:5] == (1, 1, 1)  # shares coordinate 3 with the first block
    assert pats[2][5:8] == (1, 1, 1)
    assert pats[3] == (0,) * 10
    with pytest.raises(ConfigError):
        blockwise_patterns(5)


def test_blockwise_frequencies_band():
    rng = np.random.default_rng(3)
    rows = rng.standard_normal((100_000, 10))
    ds = apply_mechanism(rows, blockwise_mcar([0.25] * 4, 10), rng)
    sigma4 = 4.0 * math.sqrt(0.25 * 0.75 / 100_000)
    for pat in blockwise_patterns(10):
        freq = len(ds.pattern_index[Pattern(pat)]) / 100_000
        assert abs(freq - 0.25) < max(sigma4, 0.006)


def test_truncation_mechanism_deterministic():
    rng = np.random.default_rng(4)
    rows = np.sort(rng.standard_normal(1000))[:, None]
    mech = TruncationMechanism(lower=0.3)
    m1 = mech.sample_masks(rows, rng)
    m2 = mech.sample_masks(rows, np.random.default_rng(999))
    assert np.array_equal(m1, m2)
    observed = rows[~m1[:, 0], 0]
    assert np.all(observed > 0.3)
    assert np.all(rows[m1[:, 0], 0] <= 0.3)


def test_apply_mechanism_drops_fully_missing():
    rng = np.random.default_rng(5)
    rows = rng.standard_normal((500, 1))
    ds = apply_mechanism(rows, McarMechanism({(0,): 0.7, (1,): 0.3}), rng)
    assert len(ds) + ds.n_dropped_rows == 500
    assert ds.n_dropped_rows > 0


def test_self_censoring_probabilities_sum_to_one():
    rng = np.random.default_rng(6)
    mech = self_censoring_blockwise(DataContamination.none(), np.zeros(10), 10)
    X = rng.standard_normal((10_000, 10))
    P = mech.mask_probability_matrix(X)
    assert np.all(P >= 0)
    assert np.all(np.abs(P.sum(axis=1) - 1.0) < 1e-12)
    # block marginals stay at 1/4 each on average (F(score) is U(0,1)-like)
    assert np.all(np.abs(P.mean(axis=0) - 0.25) < 0.02)


def test_self_censoring_masks_follow_conditional_law():
    rng = np.random.default_rng(7)
    mech = self_censoring_blockwise(DataContamination.none(), np.zeros(10), 10)
    x = np.full(10, 2.0)  # high score -> F near 1 -> patterns m1/m4 dominate
    rows = np.tile(x, (20_000, 1))
    masks = mech.sample_masks(rows, rng)
    probs = mech.mask_probabilities(x)
    f = ndtr(2.0 * math.sqrt(10.0))
    m1 = blockwise_patterns(10)[0]
    assert np.isclose(probs[m1], f / 2.0, atol=1e-12)
    freq_m1 = np.mean([tuple(m) == m1 for m in masks.astype(int)])
    assert abs(freq_m1 - f / 2.0) < 0.02


def test_mixture_cdf_clean_is_standard_normal():
    c = DataContamination.none()
    beta = np.full(10, 1.0 / math.sqrt(10.0))
    assert np.isclose(mixture_cdf(c, beta, 0.0), 0.5)
    assert np.isclose(mixture_cdf(c, beta, 1.0), float(ndtr(1.0)))


def test_mixture_cdf_shifted_gaussian_component():
    beta = np.full(10, 1.0 / math.sqrt(10.0))
    c = DataContamination.gaussian_mean(0.2, np.full(10, 10.0))
    # beta'mu = 10 sqrt(10) ~ 31.6, so the contaminant mass sits far right
    assert np.isclose(mixture_cdf(c, beta, 0.0), 0.8 * 0.5, atol=1e-10)


def test_mixture_cdf_point_mass_step_and_monotone():
    beta = np.asarray([1.0])
    c = DataContamination.point_mass(0.3, np.asarray([2.0]))
    grid = np.linspace(-6.0, 6.0, 1000)
    vals = mixture_cdf(c, beta, grid)
    assert np.all(np.diff(vals) >= 0)
    assert vals[0] < 0.01 and vals[-1] > 0.99
    below = mixture_cdf(c, beta, 1.999999)
    above = mixture_cdf(c, beta, 2.0)
    assert np.isclose(above - below, 0.3, atol=1e-6)  # exact step of mass 0.3


def test_huber_mixture_mask_law():
    base = McarMechanism({(0,): 0.5, (1,): 0.5})
    mech = HuberMixtureMechanism(base, TruncationMechanism(lower=0.0), 0.1)
    probs_pos = mech.mask_probabilities(np.asarray([1.5]))
    probs_neg = mech.mask_probabilities(np.asarray([-1.5]))
    assert np.isclose(probs_pos[(0,)], 0.9 * 0.5 + 0.1 * 1.0)
    assert np.isclose(probs_neg[(0,)], 0.9 * 0.5)
    with pytest.raises(ConfigError):
        HuberMixtureMechanism(base, TruncationMechanism(lower=0.0), 1.0)


def test_huber_mixture_empirical_frequencies():
    rng = np.random.default_rng(8)
    base = McarMechanism({(0,): 0.5, (1,): 0.5})
    mech = HuberMixtureMechanism(base, TruncationMechanism(lower=0.0), 0.2)
    rows = rng.standard_normal((100_000, 1))
    masks = mech.sample_masks(rows, rng)
    # P[M=0] = 0.8*0.5 + 0.2*P[X>0] = 0.5
    freq = 1.0 - masks.mean()
    assert abs(freq - 0.5) < 0.007


def test_adversarial_flip_counts_and_reveal():
    rng = np.random.default_rng(9)
    mech = AdversarialMechanism(alpha=0.5, eps=0.1)
    n = 5000
    x = rng.standard_normal(n)
    rows = x[:, None]
    # reconstruct the MCAR stage with the same generator state
    rng2 = np.random.default_rng(101)
    mcar_missing = rng2.random(n) >= 0.5
    masks = mech.sample_masks(rows, np.random.default_rng(101))[:, 0]
    c = int((~mcar_missing).sum())
    k = mech.flip_count(c)
    assert k == max(0, math.ceil(2 * 0.1 * c) - 1)
    flipped_to_missing = masks & ~mcar_missing
    flipped_to_observed = ~masks & mcar_missing
    assert flipped_to_missing.sum() == k
    assert flipped_to_observed.sum() == 1
    # the revealed row is the largest among the initially masked ones
    assert np.isclose(x[flipped_to_observed][0], x[mcar_missing].max())
    # the masked observed rows are exactly the k smallest observed values
    observed_values = np.sort(x[~mcar_missing])
    assert np.all(np.sort(x[flipped_to_missing]) == observed_values[:k])


def test_adversarial_budget_forms_agree_at_half():
    fig = AdversarialMechanism(0.5, 0.1, budget="figure1")
    ex3 = AdversarialMechanism(0.5, 0.1, budget="example3")
    for c in (0, 1, 10, 123, 4567):
        assert fig.flip_count(c) == ex3.flip_count(c)
    assert AdversarialMechanism(0.5, 0.02, budget="figure1").flip_count(10) == 0


def test_adversarial_tie_breaking_first_occurrence():
    mech = AdversarialMechanism(alpha=1.0 - 1e-12, eps=0.3)
    x = np.asarray([1.0, 0.0, 0.0, 0.0, 2.0])
    # alpha ~ 1: everything observed, c=5, k = ceil(3)-1 = 2: the first two
    # zero-valued rows get masked
    masks = mech.sample_masks(x[:, None], np.random.default_rng(0))[:, 0]
    assert masks.tolist() == [False, True, True, False, False]


def test_adversarial_validation():
    with pytest.raises(ConfigError):
        AdversarialMechanism(alpha=0.5, eps=0.5)
    with pytest.raises(ConfigError):
        AdversarialMechanism(alpha=0.5, eps=0.1, budget="other")


def test_deviation_mcar_has_zero_variance():
    rng = np.random.default_rng(10)
    rep = deviation_to_mcar(blockwise_mcar([0.25] * 4, 10), np.zeros(10), 1000, rng)
    for e in rep.entries:
        assert e.var == 0.0
        assert np.isclose(e.pi, 0.25)
    assert rep.expected_ratio() == 0.0


def test_deviation_truncation_bernoulli_variance():
    rng = np.random.default_rng(11)
    a = 0.5
    rep = deviation_to_mcar(TruncationMechanism(lower=a), np.zeros(1), 200_000, rng)
    p = 1.0 - float(ndtr(a))
    e = rep.entry((0,))
    assert abs(e.pi - p) < 0.005
    assert abs(e.var - p * (1 - p)) < 0.005


def test_deviation_huber_variance_scaling():
    rng = np.random.default_rng(12)
    base = McarMechanism({(0,): 0.5, (1,): 0.5})
    eps = 0.1
    mech = HuberMixtureMechanism(base, TruncationMechanism(lower=0.0), eps)
    rep = deviation_to_mcar(mech, np.zeros(1), 200_000, rng)
    e = rep.entry((0,))
    # V[pi(X)] = eps^2 V[Q(X)] <= eps^2 / 4
    assert e.var <= eps**2 / 4 + 1e-4
    assert abs(e.var - eps**2 * 0.25) < 0.002


def test_deviation_unsupported_for_adversarial():
    rng = np.random.default_rng(13)
    with pytest.raises(UnsupportedMechanismError):
        deviation_to_mcar(AdversarialMechanism(0.5, 0.1), np.zeros(1), 100, rng)


def test_pointwise_law_sums_to_one_across_mechanisms():
    rng = np.random.default_rng(14)
    mechs = [
        blockwise_mcar([0.1, 0.2, 0.3, 0.4], 10),
        self_censoring_blockwise(
            DataContamination.point_mass(0.2, np.full(10, 10.0)), np.zeros(10), 10
        ),
        HuberMixtureMechanism(
            blockwise_mcar([0.25] * 4, 10),
            self_censoring_blockwise(DataContamination.none(), np.zeros(10), 10),
            0.2,
        ),
    ]
    X = rng.standard_normal((10_000, 10))
    for mech in mechs:
        P = mech.mask_probability_matrix(X)
        assert np.all(np.abs(P.sum(axis=1) - 1.0) < 1e-12)
        assert np.all(P >= -1e-15)


def test_apply_mechanism_shape_validation():
    with pytest.raises(ShapeError):
        apply_mechanism(np.ones((5, 2)), TruncationMechanism(lower=0.0), np.random.default_rng(0))
