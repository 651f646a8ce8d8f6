import math

import pytest

from dtdd import ConvergenceError, DomainError, SeriesControl
from dtdd.series import log_pow, sum_series


def test_geometric_series_stops_and_sums():
    value = sum_series(lambda h: 0.5**h, SeriesControl(h_max=200))
    assert value == pytest.approx(2.0, rel=1e-14)


def test_at_least_five_terms_even_if_tail_is_zero():
    calls = []

    def term(h):
        calls.append(h)
        return 1.0 if h == 0 else 0.0

    assert sum_series(term, SeriesControl()) == 1.0
    assert calls == list(range(6))


def test_strict_cap_raises():
    with pytest.raises(ConvergenceError, match="demo"):
        sum_series(lambda h: 1.0 / (h + 1), SeriesControl(h_max=20), "demo")


def test_non_strict_cap_returns_partial_sum():
    value = sum_series(lambda h: 1.0, SeriesControl(h_max=9, strict=False))
    assert value == 10.0


def test_negative_term_is_rejected():
    with pytest.raises(ArithmeticError):
        sum_series(lambda h: -1.0 if h == 3 else 1.0, SeriesControl())


@pytest.mark.parametrize("kwargs", [{"h_max": 4}, {"rel_stop": 0.0}, {"rel_stop": 1.0}])
def test_control_validation(kwargs):
    with pytest.raises(DomainError):
        SeriesControl(**kwargs)


def test_log_pow_conventions():
    assert log_pow(0.0, 0.0) == 0.0
    assert log_pow(0.0, 2.0) == -math.inf
    assert log_pow(3.0, 2.0) == pytest.approx(math.log(9.0))
