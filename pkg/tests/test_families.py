import math

import numpy as np
import pytest
from scipy import integrate, stats

from ira import DomainError, ParetoShift, ScaleExponential, ShiftedExponential, make_family
from ira.families import numeric_lr_sup

FAMILIES = [ShiftedExponential(1.0), ShiftedExponential(2.5), ParetoShift(2.0), ParetoShift(3.5), ScaleExponential()]
EFFORTS = [0.1, 0.5, 1.0, 2.3]


def scipy_dist(family, a):
    if isinstance(family, ShiftedExponential):
        return stats.expon(loc=a, scale=1 / family.rate)
    if isinstance(family, ParetoShift):
        return stats.pareto(family.k, scale=a)
    return stats.expon(scale=a)


@pytest.mark.parametrize("family", FAMILIES, ids=repr)
@pytest.mark.parametrize("a", EFFORTS)
def test_distribution_matches_scipy(family, a):
    dist = scipy_dist(family, a)
    x = family.lower(a) + np.array([0.01, 0.3, 1.0, 4.0])
    np.testing.assert_allclose(family.cdf(x, a), dist.cdf(x), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(family.sf(x, a), dist.sf(x), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(family.pdf(x, a), dist.pdf(x), rtol=1e-12)
    np.testing.assert_allclose(family.logpdf(x, a), dist.logpdf(x), rtol=1e-12)
    assert math.isclose(family.mean(a), dist.mean(), rel_tol=1e-12)


@pytest.mark.parametrize("family", FAMILIES, ids=repr)
@pytest.mark.parametrize("a", EFFORTS)
def test_effort_derivatives_match_finite_differences(family, a):
    h = 1e-6
    x = family.lower(a + h) + np.array([0.05, 0.7, 2.0])
    fd_cdf = (family.cdf(x, a + h) - family.cdf(x, a - h)) / (2 * h)
    fd_pdf = (family.pdf(x, a + h) - family.pdf(x, a - h)) / (2 * h)
    np.testing.assert_allclose(family.cdf_a(x, a), fd_cdf, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(family.pdf_a(x, a), fd_pdf, rtol=1e-6, atol=1e-9)
    fd_mean = (family.mean(a + h) - family.mean(a - h)) / (2 * h)
    assert math.isclose(family.mean_deriv(a), fd_mean, rel_tol=1e-7)
    fd_lower = (family.lower(a + h) - family.lower(a - h)) / (2 * h)
    assert math.isclose(family.lower_deriv(a), fd_lower, abs_tol=1e-7)


@pytest.mark.parametrize("family", FAMILIES, ids=repr)
@pytest.mark.parametrize("a", [0.3, 1.7])
def test_density_integrates_to_one_and_gives_mean(family, a):
    lo = float(family.lower(a))
    mass, _ = integrate.quad(lambda x: family.pdf(x, a), lo, np.inf)
    mean, _ = integrate.quad(lambda x: x * family.pdf(x, a), lo, np.inf)
    assert math.isclose(mass, 1.0, rel_tol=1e-9)
    assert math.isclose(mean, family.mean(a), rel_tol=1e-8)


def test_sf_is_one_at_and_below_the_lower_support():
    for family in FAMILIES:
        a = 0.8
        lo = family.lower(a)
        assert family.sf(lo, a) == 1.0
        assert family.sf(lo - 0.5, a) == 1.0


@pytest.mark.parametrize("family", FAMILIES, ids=repr)
@pytest.mark.parametrize("a", [0.2, 1.0, 3.0])
def test_numeric_lr_sup_agrees_with_closed_form(family, a):
    analytic = family.lr_sup(a)
    numeric = numeric_lr_sup(family, a)
    if math.isinf(analytic):
        assert math.isinf(numeric)
    else:
        assert math.isclose(numeric, analytic, rel_tol=1e-6)


def test_closed_form_lr_sup_values():
    assert ShiftedExponential(2.0).lr_sup(0.7) == 2.0
    assert math.isclose(ParetoShift(2.0).lr_sup(2 / 3), 3.0)
    assert ScaleExponential().lr_sup(1.0) == math.inf


def test_lower_inverse():
    assert ShiftedExponential(1.0).lower_inverse(1.25) == 1.25
    assert ParetoShift(3.0).lower_inverse(0.5) == 0.5
    assert ShiftedExponential(1.0).lower_inverse(-1.0) is None
    assert ScaleExponential().lower_inverse(1.0) is None


def test_registry_and_validation():
    fam = make_family("shifted-exponential", {"lambda": 2.0})
    assert fam == ShiftedExponential(2.0)
    assert fam.to_dict() == {"name": "shifted-exponential", "params": {"lambda": 2.0}}
    assert make_family("pareto", k=3.0) == ParetoShift(3.0)
    with pytest.raises(DomainError, match="mean undefined"):
        ParetoShift(1.0)
    with pytest.raises(DomainError):
        ShiftedExponential(0.0)
    with pytest.raises(DomainError):
        make_family("weibull")
    with pytest.raises(DomainError):
        make_family("pareto", {"shape": 2.0})
