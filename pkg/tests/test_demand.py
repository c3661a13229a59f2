from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vaxprice.demand import (
    HistoricalRecord, compute_slopes, estimate_intercepts, load_historical,
)
from vaxprice.market import DataError, DomainError

# Table of per-dose flu prices (pub m1, pub m2, priv m1, priv m2) and total doses (M).
FLU = [
    ("10.64", "8.90", "13.16", "10.98", "155.1"),
    ("11.68", "10.97", "13.16", "12.41", "132.0"),
    ("11.68", "9.25", "14.56", "10.98", "134.9"),
    ("17.05", "13.65", "20.50", "15.90", "134.5"),
    ("17.44", "13.65", "21.09", "15.90", "147.8"),
    ("17.94", "14.05", "21.70", "16.05", "146.4"),
    ("19.14", "14.43", "23.17", "16.82", "145.9"),
    ("15.68", "14.43", "18.72", "16.82", "155.3"),
    ("15.11", "13.50", "19.26", "16.82", "169.1"),
    ("13.76", "13.50", "18.31", "16.82", "174.5"),
]


def exact_intercept(sector, gamma, share, d):
    """Exact rational evaluation of the intercept average, straight from the table."""
    g, r = Fraction(gamma), Fraction(share)
    cost = sum(Fraction(x) for x in d)
    total = Fraction(0)
    for row in FLU:
        prices = row[0:2] if sector == "pub" else row[2:4]
        total += Fraction(1, 2) * r * Fraction(row[4])
        total += (2 * sum(Fraction(p) for p in prices) + cost) / (2 + 2 * g)
    return total / len(FLU)


def test_bundled_dataset(records):
    assert len(records) == 10
    assert records[0].year_label == "2010-11"
    last = records[-1]
    assert last.year_label == "2019-20"
    assert last.pub_price == (13.76, 13.50)
    assert last.priv_price == (18.31, 16.82)
    assert last.total_demand == 174.5
    assert sum(r.total_demand for r in records) / 10 == pytest.approx(149.55, abs=1e-12)


def test_bundled_matches_table(records):
    for rec, row in zip(records, FLU):
        assert rec.pub_price + rec.priv_price == tuple(float(x) for x in row[:4])
        assert rec.total_demand == float(row[4])


HEADER = "year,pub_price_m1,pub_price_m2,priv_price_m1,priv_price_m2,total_demand_millions\n"


@pytest.mark.parametrize("body, fragment", [
    ("", "no data rows"),
    (HEADER, "no data rows"),
    (HEADER + "2020,1,2,3,4\n", "row 1 has 5 columns"),
    (HEADER + "2020,1,2,3,4,5\n2021,1,x,3,4,5\n", "row 2, column pub_price_m2"),
    (HEADER + "2020,1,2,3,0,5\n", "row 1, column priv_price_m2"),
    (HEADER + "2020,1,2,3,4,-5\n", "row 1, column total_demand_millions"),
    ("year,a,b,c,d,e\n2020,1,2,3,4,5\n", "header"),
])
def test_load_historical_errors(tmp_path, body, fragment):
    path = tmp_path / "h.csv"
    path.write_text(body)
    with pytest.raises(DataError, match=fragment):
        load_historical(path)


def test_load_historical_missing_file(tmp_path):
    with pytest.raises(DataError, match="nope.csv"):
        load_historical(tmp_path / "nope.csv")


@pytest.mark.parametrize("gamma, b, c", [
    (0.75, 2.285714, 1.714286),
    (0.5, 1.333333, 0.666667),
])
def test_compute_slopes_examples(gamma, b, c):
    got_b, got_c = compute_slopes(gamma, 6)
    assert got_b == pytest.approx(b, abs=1e-6)
    assert got_c == pytest.approx(c, abs=1e-6)


def test_compute_slopes_magnitude():
    b6, _ = compute_slopes(0.5, 6)
    b7, _ = compute_slopes(0.5, 7)
    assert b7 == pytest.approx(10 * b6)


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_compute_slopes_domain(gamma):
    with pytest.raises(DomainError):
        compute_slopes(gamma, 6)


@given(st.floats(0.01, 0.99), st.integers(0, 9))
def test_slope_ratio_and_order(gamma, k):
    b, c = compute_slopes(gamma, k)
    assert c / b == pytest.approx(gamma, rel=1e-12)
    assert b > c > 0


@given(st.floats(0.01, 0.98), st.floats(0.001, 0.009))
def test_own_slope_increasing_in_gamma(gamma, step):
    assert compute_slopes(gamma + step, 6)[0] > compute_slopes(gamma, 6)[0]


@pytest.mark.parametrize("gamma, d", [
    (0.75, (31.96, 31.96)),
    (0.75, (23.44, 31.96)),
    (0.25, (0.0, 6.6)),
    (0.5, (31.96, 0.0)),
])
def test_intercepts_against_exact_oracle(records, gamma, d):
    a_pub, a_priv = estimate_intercepts(records, gamma, 0.57, d)
    d_str = tuple(repr(x) for x in d)
    assert a_pub == pytest.approx(float(exact_intercept("pub", repr(gamma), "0.57", d_str)), rel=1e-13)
    assert a_priv == pytest.approx(float(exact_intercept("priv", repr(gamma), "0.43", d_str)), rel=1e-13)


def test_intercept_reference_values(records):
    a_pub, a_priv = estimate_intercepts(records, 0.75, 0.57, (31.96, 31.96))
    assert a_priv == pytest.approx(69.46, abs=0.01)
    assert a_pub == pytest.approx(76.68, abs=0.01)
    b, c = compute_slopes(0.75, 6)
    assert a_priv / (2 * b - c) == pytest.approx(24.31, abs=0.005)

    _, a_priv = estimate_intercepts(records, 0.75, 0.57, (23.44, 31.96))
    assert a_priv == pytest.approx(67.0, abs=0.05)
    assert a_priv / (2 * b - c) == pytest.approx(23.46, abs=0.005)


def test_intercepts_zero_prices():
    rec = HistoricalRecord("x", (0.0, 0.0), (0.0, 0.0), 120.0)
    a_pub, a_priv = estimate_intercepts([rec], 0.5, 0.57, (0.0, 0.0))
    assert a_pub == pytest.approx(0.5 * 0.57 * 120.0)
    assert a_priv == pytest.approx(0.5 * 0.43 * 120.0)


def test_intercepts_errors(records):
    with pytest.raises(DataError):
        estimate_intercepts([], 0.5, 0.57, (0, 0))
    with pytest.raises(DomainError):
        estimate_intercepts(records, 0.5, 1.2, (0, 0))
    with pytest.raises(DomainError):
        estimate_intercepts(records, 0.5, 0.57, (-1, 0))


record_st = st.builds(
    HistoricalRecord,
    st.just("y"),
    st.tuples(st.floats(0.5, 50), st.floats(0.5, 50)),
    st.tuples(st.floats(0.5, 50), st.floats(0.5, 50)),
    st.floats(10, 400),
)


@settings(max_examples=60)
@given(st.lists(record_st, min_size=1, max_size=8), st.randoms(use_true_random=False),
       st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_intercepts_permutation_invariant(recs, rnd, gamma, r_pub):
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    a = estimate_intercepts(recs, gamma, r_pub, (5.0, 7.0))
    b = estimate_intercepts(shuffled, gamma, r_pub, (5.0, 7.0))
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=60)
@given(st.lists(record_st, min_size=1, max_size=8), st.floats(0.05, 0.95),
       st.floats(0.0, 40.0), st.floats(0.01, 10.0), st.integers(0, 1))
def test_intercepts_increasing_in_cost(recs, gamma, d, bump, which):
    base = [d, d]
    more = list(base)
    more[which] += bump
    lo = estimate_intercepts(recs, gamma, 0.57, base)
    hi = estimate_intercepts(recs, gamma, 0.57, more)
    assert hi[0] > lo[0] and hi[1] > lo[1]


@settings(max_examples=60)
@given(st.lists(record_st, min_size=1, max_size=8), st.floats(0.05, 0.95),
       st.floats(0.05, 0.95))
def test_demand_terms_split_half_mean(recs, gamma, r_pub):
    # with all price and cost terms removed, the two intercepts sum to half the mean demand
    zero = [HistoricalRecord("y", (0.0, 0.0), (0.0, 0.0), r.total_demand) for r in recs]
    a_pub, a_priv = estimate_intercepts(zero, gamma, r_pub, (0.0, 0.0))
    mean_d = sum(r.total_demand for r in recs) / len(recs)
    assert a_pub + a_priv == pytest.approx(0.5 * mean_d, rel=1e-12)
