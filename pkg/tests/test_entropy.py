import math

import numpy as np
import pytest

from prosinfo import (
    Design,
    EntropyError,
    kl_likelihood_chain,
    kl_pros_srs,
    make_balanced_design,
    make_model,
    renyi,
    shannon,
)

LN_2PIE = math.log(2.0 * math.pi * math.e)


def test_shannon_srs_uniform_is_zero():
    for n in (1, 3):
        report = shannon(make_model("uniform"), kind="srs", n=n)
        np.testing.assert_allclose(report.total, 0.0, atol=1e-9)
        assert report.per_subset == (0.0,) * n or np.allclose(report.per_subset, 0.0, atol=1e-9)


def test_shannon_srs_normal_pair():
    report = shannon(make_model("normal"), kind="srs", n=2)
    np.testing.assert_allclose(report.total, LN_2PIE, atol=1e-6)
    np.testing.assert_allclose(report.total, 2.8378770664, atol=1e-6)
    # iid observations: the bounds collapse onto the value itself
    np.testing.assert_allclose(report.lower_bound, report.total, atol=1e-9)
    np.testing.assert_allclose(report.upper_bound, report.total, atol=1e-9)


def test_shannon_scale_shift_invariance():
    base = shannon(make_model("normal"), kind="pros", n=2, set_size=6)
    shifted = shannon(make_model("normal", mu=5.0), kind="pros", n=2, set_size=6)
    np.testing.assert_allclose(shifted.total, base.total, atol=1e-8)
    doubled = shannon(make_model("normal", sigma=2.0), kind="pros", n=2, set_size=6)
    np.testing.assert_allclose(doubled.total, base.total + 2.0 * math.log(2.0), atol=1e-8)


def test_shannon_pros_uniform_pair():
    report = shannon(make_model("uniform"), kind="pros", n=2, set_size=2)
    np.testing.assert_allclose(report.total, 1.0 - 2.0 * math.log(2.0), atol=1e-8)
    np.testing.assert_allclose(report.per_subset, [0.5 - math.log(2.0)] * 2, atol=1e-8)
    assert report.kind == "pros"


def test_shannon_ranking_reduces_entropy():
    model = make_model("normal")
    srs = shannon(model, kind="srs", n=2)
    pros = shannon(model, kind="pros", n=2, set_size=6)
    rss = shannon(model, kind="rss", n=2, set_size=2)
    assert pros.total < srs.total
    assert rss.total < srs.total
    assert pros.total < rss.total  # a wider set pins each measurement down more


@pytest.mark.parametrize("fam", ("normal", "exponential", "uniform"))
@pytest.mark.parametrize("n,S", ((2, 6), (3, 6), (2, 12)))
def test_shannon_bounds_sandwich_total(fam, n, S):
    report = shannon(make_model(fam), kind="pros", n=n, set_size=S)
    assert report.lower_bound <= report.total + 1e-6
    assert report.total <= report.upper_bound + 1e-6


def test_shannon_argument_validation():
    model = make_model("normal")
    with pytest.raises(EntropyError):
        shannon(model, kind="pros", n=2)  # set_size required
    with pytest.raises(EntropyError):
        shannon(model, kind="rss", n=2, set_size=6)  # rss measures every rank
    with pytest.raises(EntropyError):
        shannon(model, kind="quantile", n=2, set_size=6)
    with pytest.raises(EntropyError):
        shannon(model, kind="pros", n=0, set_size=6)
    from prosinfo import DesignError

    with pytest.raises(DesignError):
        shannon(model, kind="pros", n=4, set_size=6)  # blocks must divide the set


def test_renyi_uniform_values():
    report = renyi(make_model("uniform"), 0.5, kind="srs", n=2)
    np.testing.assert_allclose(report.total, 0.0, atol=1e-9)
    pros = renyi(make_model("uniform"), 0.5, kind="pros", n=2, set_size=2)
    np.testing.assert_allclose(pros.total, 4.0 * math.log(2.0 * math.sqrt(2.0) / 3.0), atol=1e-8)
    np.testing.assert_allclose(pros.total, -0.2355660713, atol=1e-8)


def test_renyi_order_limits_to_shannon():
    model = make_model("normal")
    near_one = renyi(model, 0.999, kind="pros", n=2, set_size=4)
    exact = shannon(model, kind="pros", n=2, set_size=4)
    np.testing.assert_allclose(near_one.total, exact.total, atol=1e-3)


def test_renyi_order_validation():
    model = make_model("normal")
    for alpha in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(EntropyError, match="alpha"):
            renyi(model, alpha, kind="srs", n=1)


def test_renyi_decreases_in_order_for_pros():
    # Renyi entropy is non-increasing in its order
    model = make_model("exponential")
    values = [
        renyi(model, a, kind="pros", n=2, set_size=6).total for a in (0.25, 0.5, 0.75)
    ]
    assert values[0] >= values[1] >= values[2] - 1e-12


def test_kl_pros_srs_values():
    np.testing.assert_allclose(
        kl_pros_srs(make_model("uniform"), make_balanced_design(2, 2)),
        2.0 * math.log(2.0) - 1.0,
        atol=1e-8,
    )
    # distribution-free: any parent gives the same divergence
    np.testing.assert_allclose(
        kl_pros_srs(make_model("logistic"), make_balanced_design(2, 2)),
        kl_pros_srs(make_model("exponential"), make_balanced_design(2, 2)),
        atol=1e-8,
    )


@pytest.mark.parametrize("S,n", ((2, 2), (6, 2), (6, 3), (12, 4)))
def test_kl_pros_srs_nonnegative_and_bounded(S, n):
    model = make_model("normal")
    design = make_balanced_design(S, n)
    got = kl_pros_srs(model, design)
    assert got >= -1e-12
    rss_all = kl_pros_srs(model, make_balanced_design(S, S))
    assert got <= rss_all / (S // n) + 1e-9


def test_kl_pros_srs_requires_balanced():
    with pytest.raises(EntropyError):
        kl_pros_srs(make_model("normal"), Design(6, ((1, 2), (3, 4, 5, 6))))


def test_kl_chain_ordering():
    for fam in ("normal", "exponential", "logistic"):
        model = make_model(fam)
        lo, mid, hi = kl_likelihood_chain(model, make_balanced_design(6, 2))
        assert lo <= mid + 1e-9, fam
        assert mid <= hi + 1e-9, fam


def test_kl_chain_exponential_exact():
    # log f - log g is (x + delta)/sigma - x/sigma = shift for exponential noise
    lo, mid, hi = kl_likelihood_chain(make_model("exponential"), make_balanced_design(6, 2), shift=0.5)
    np.testing.assert_allclose(lo, 2.0 * 0.5, atol=1e-9)
    lo3, _, _ = kl_likelihood_chain(make_model("exponential"), make_balanced_design(6, 3), shift=0.25)
    np.testing.assert_allclose(lo3, 3.0 * 0.25, atol=1e-9)


def test_kl_chain_uniform_diverges():
    with pytest.raises(EntropyError):
        kl_likelihood_chain(make_model("uniform"), make_balanced_design(6, 2))


def test_report_labels():
    report = shannon(make_model("normal"), kind="pros", n=2, set_size=6)
    assert "pros" in report.design_label
    assert "normal" in report.model_label
    assert len(report.per_subset) == 2
