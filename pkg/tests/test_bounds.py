import math

import pytest

from maasslab import bounds
from maasslab.bounds import FormMeta
from maasslab.errors import InvalidInputError


def test_conductor_examples():
    assert bounds.conductor(FormMeta(1, 0.0)) == 1.0
    assert bounds.conductor(FormMeta(5, 0.0)) == 25.0
    assert bounds.conductor(FormMeta(2, 3.0)) == 64.0


def test_conductor_scales_quadratically_in_level():
    t = 2.75
    base = bounds.conductor(FormMeta(3, t))
    assert bounds.conductor(FormMeta(9, t)) == pytest.approx(9 * base, rel=1e-14)


def test_conductor_uses_absolute_spectral_parameter():
    assert bounds.conductor(FormMeta(2, -3.0)) == 64.0


def test_form_meta_rejects_bad_level():
    with pytest.raises(InvalidInputError):
        FormMeta(0, 1.0)


def test_two_form_exponent_exact():
    assert bounds.least_prime_exponent(2) == 0.447374


def test_three_form_exponent_near_published_value():
    assert abs(bounds.least_prime_exponent(3) - 0.778798) <= 5e-6


def test_three_form_exponent_closed_form_cross_check():
    det = bounds.exponent_detail(3)
    assert abs(det.zero - math.exp(0.25)) < 1e-6
    assert abs(det.closed_form_zero - math.exp(0.25)) < 1e-9


def test_exponent_times_u_is_valid_upper_bound():
    for m in (2, 3):
        det = bounds.exponent_detail(m)
        assert det.exponent * det.u_used >= 1.0
        assert det.u_used <= det.zero


def test_two_form_u_truncation():
    det = bounds.exponent_detail(2)
    assert det.u_used == 2.23527
    assert 2.23527 < det.zero < 2.23528


def test_exponent_detail_rejects_bad_count():
    with pytest.raises(InvalidInputError):
        bounds.least_prime_exponent(4)


def test_least_prime_bound_trivial_forms():
    res = bounds.least_prime_bound([FormMeta(1, 0.0), FormMeta(1, 0.0)])
    assert res.base == 1.0
    assert res.exponent == 0.447374
    assert res.implied_constant == "unspecified"


def test_least_prime_bound_conductor_identity():
    metas = [FormMeta(3, 1.5), FormMeta(7, 0.25)]
    res = bounds.least_prime_bound(metas)
    q_product = bounds.conductor(metas[0]) * bounds.conductor(metas[1])
    u = res.u_used
    assert q_product ** (1 / (2 * u)) == pytest.approx(res.base ** (1 / u),
                                                       rel=1e-12)


def test_least_prime_bound_three_forms():
    metas = [FormMeta(2, 1.0), FormMeta(3, 0.0), FormMeta(1, 2.0)]
    res = bounds.least_prime_bound(metas)
    assert res.base == 36.0
    assert abs(res.exponent - 0.778798) <= 5e-6
    assert 0.0 < res.exponent < 1.0


def test_least_prime_bound_rejects_wrong_count():
    with pytest.raises(InvalidInputError):
        bounds.least_prime_bound([FormMeta(1, 0.0)])


def test_bound_json_payload():
    res = bounds.least_prime_bound([FormMeta(1, 0.0), FormMeta(1, 0.0)])
    doc = res.to_json_dict()
    assert doc["implied_constant"] == "unspecified"
    assert set(doc) == {"base", "exponent", "implied_constant",
                        "source_zero", "U_used"}


def test_convexity_exponent_window_edges():
    assert bounds.convexity_exponent(23 / 32) == pytest.approx(9 / 64, abs=1e-15)
    assert bounds.convexity_exponent(53 / 64) == pytest.approx(11 / 128, abs=1e-15)
    assert bounds.convexity_exponent(1 - 1e-9) == pytest.approx(0.0, abs=1e-9)


def test_convexity_exponent_rejects_out_of_range():
    for sigma in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(InvalidInputError):
            bounds.convexity_exponent(sigma)
