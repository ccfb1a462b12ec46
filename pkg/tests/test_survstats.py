import numpy as np
import pytest
from scipy import stats

from phfcox.survstats import (kaplan_meier, km_svg, log_rank_test, median_risk_split,
                              split_log_rank, write_km_csv)

# six subjects: A = 1, 3, 5+ ; B = 2, 4+, 6
TA, EA = [1, 3, 5], [1, 1, 0]
TB, EB = [2, 4, 6], [1, 0, 1]


def test_log_rank_hand_oracle():
    # event times 1, 2, 3, 6: E_A = 3/6 + 2/5 + 2/4 + 0 = 1.4, O_A = 2
    # V = 1/4 + 6/25 + 1/4 + 0 = 0.74
    res = log_rank_test(TA, EA, TB, EB)
    assert res.observed[0] == 2 and res.expected[0] == pytest.approx(1.4, abs=1e-12)
    assert res.variance == pytest.approx(0.74, abs=1e-12)
    assert res.statistic == pytest.approx(0.36 / 0.74, abs=1e-10)
    assert res.p_value == pytest.approx(stats.chi2.sf(0.36 / 0.74, 1), abs=1e-10)


def test_km_hand_oracle():
    km = kaplan_meier(TA, EA)
    np.testing.assert_allclose(km.times, [1, 3])
    np.testing.assert_allclose(km.survival, [2 / 3, 1 / 3], atol=1e-12)
    # Greenwood: S^2 * sum d / (n (n - d))
    np.testing.assert_allclose(km.variance, [(4 / 9) / 6, (1 / 9) * (1 / 6 + 1 / 2)], atol=1e-12)
    assert km.at(0.5) == 1.0 and km.at(3.5) == pytest.approx(1 / 3)


def test_km_examples():
    np.testing.assert_allclose(kaplan_meier([1, 2, 3], [1, 1, 1]).survival, [2 / 3, 1 / 3, 0])
    km = kaplan_meier([1, 2, 3], [0, 1, 1])
    np.testing.assert_allclose(km.survival, [1 / 2, 0])
    assert km.at(1.5) == 1.0
    assert kaplan_meier([1, 2], [0, 0]).times.size == 0


def test_km_without_censoring_is_empirical():
    rng = np.random.default_rng(0)
    t = rng.exponential(size=30)
    km = kaplan_meier(t, np.ones(30))
    for x in np.quantile(t, [0.1, 0.5, 0.9]):
        assert km.at(x) == pytest.approx(np.mean(t > x))


def test_log_rank_identity_and_symmetry():
    assert log_rank_test(TA, EA, TA, EA).p_value == 1.0
    a, b = log_rank_test(TA, EA, TB, EB), log_rank_test(TB, EB, TA, EA)
    assert a.statistic == pytest.approx(b.statistic) and a.p_value == pytest.approx(b.p_value)
    res = log_rank_test([1, 2], [0, 0], [3], [0])
    assert (res.statistic, res.p_value) == (0.0, 1.0)


def test_permutation_type_one_error():
    rng = np.random.default_rng(7)
    t = rng.exponential(size=80)
    e = (rng.uniform(size=80) < 0.8).astype(int)
    hits = 0
    for _ in range(200):
        g = rng.permutation(80) < 40
        hits += log_rank_test(t[g], e[g], t[~g], e[~g]).p_value < 0.05
    assert 0.01 <= hits / 200 <= 0.10


def test_median_split_conventions():
    s = median_risk_split([1, 2, 3, 4])
    assert sorted(s.high.tolist()) == [2, 3] and sorted(s.low.tolist()) == [0, 1]
    r = np.random.default_rng(1).permutation(133).astype(float)
    s = median_risk_split(r)
    assert (s.high.size, s.low.size) == (67, 66)
    assert median_risk_split([5, 5, 5]).degenerate
    with pytest.raises(ValueError):
        median_risk_split([1])


def test_split_log_rank_deterministic_and_degenerate():
    t, e = np.arange(1, 7), np.ones(6)
    a = split_log_rank([1, 2, 3, 4, 5, 6], t, e)[1]
    b = split_log_rank([1, 2, 3, 4, 5, 6], t, e)[1]
    assert a == b
    assert split_log_rank(np.zeros(6), t, e)[1].p_value == 1.0


def test_km_outputs(tmp_path):
    curves = {"high": kaplan_meier(TA, EA), "low": kaplan_meier(TB, EB)}
    write_km_csv(tmp_path / "km.csv", curves)
    lines = (tmp_path / "km.csv").read_text().splitlines()
    assert lines[0] == "group,time,survival,lower,upper,ci"
    assert len(lines) == 1 + 3 + 3
    svg = km_svg(curves, 0.04)
    assert svg.startswith("<svg") and svg.count("<polyline") == 2 and "p = 0.04" in svg
