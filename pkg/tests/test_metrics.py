import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from geosim.metrics import (
    BYTES_PER_GB,
    CostReport,
    DataCenterCost,
    Metrics,
    StatAccumulator,
    hour_bucket,
    transfer_cost,
    vm_cost,
)
from geosim.traffic import Request


def finished(rid, ub, dc, t0, rt, st=0.1, weight=1000):
    return Request(rid, ub, 0, weight, 100, 1.0, t0, t_arrive_dc=t0 + 0.01, t_complete=t0 + 0.01 + st,
                   t_response=t0 + rt, dc=dc)


def test_single_weighted_sample():
    m = Metrics(["UB1"], ["DC1"])
    m.record_response(finished(0, "UB1", "DC1", 0.0, 0.5))
    acc = m.by_user_base["UB1"]
    assert acc.count == 1000
    assert acc.mean == pytest.approx(0.5)


def test_two_samples():
    m = Metrics(["UB1"], ["DC1"])
    m.record_response(finished(0, "UB1", "DC1", 0.0, 0.2))
    m.record_response(finished(1, "UB1", "DC1", 1.0, 0.6))
    acc = m.response
    assert (acc.mean, acc.min, acc.max) == (pytest.approx(0.4), pytest.approx(0.2), pytest.approx(0.6))


def test_empty_accumulator_renders_as_missing():
    acc = StatAccumulator()
    assert acc.mean is None
    assert acc.as_dict() == {"count": 0, "avg": None, "min": None, "max": None}
    assert "n/a" in repr(acc)


def test_unset_timestamps_are_a_fault():
    m = Metrics(["u"], ["d"])
    with pytest.raises(ValueError):
        m.record_response(Request(0, "u", 0, 1, 1, 1.0, 0.0, dc="d"))


samples = st.lists(st.tuples(st.sampled_from(["A", "B", "C"]), st.floats(0, 86400 * 2),
                             st.floats(0.001, 5.0), st.integers(1, 1000)), min_size=1, max_size=200)


@given(samples)
def test_aggregate_invariants(rows):
    m = Metrics(["A", "B", "C"], ["D"])
    for i, (ub, t0, rt, w) in enumerate(rows):
        m.record_response(finished(i, ub, "D", t0, rt, st=rt / 2, weight=w))
    accs = [a for a in m.by_user_base.values() if a.count]
    assert m.response.count == sum(a.count for a in accs)
    assert m.response.min == min(a.min for a in accs)
    assert m.response.max == max(a.max for a in accs)
    weighted = sum(a.mean * a.count for a in accs) / sum(a.count for a in accs)
    assert m.response.mean == pytest.approx(weighted, rel=1e-9)
    for name, buckets in m.hourly.buckets.items():
        assert sum(b.count for b in buckets) == m.by_user_base[name].count
    for acc in [m.response, m.processing, *accs]:
        assert acc.min <= acc.mean <= acc.max


def test_hour_bucket():
    assert hour_bucket(0.0) == 0
    assert hour_bucket(3599.999) == 0
    assert hour_bucket(16 * 3600) == 16
    assert hour_bucket(86400 + 5 * 3600 + 1) == 5
    assert hour_bucket(86399.9999999) == 23


def test_vm_cost():
    assert vm_cost([3600.0] * 25, 0.10) == pytest.approx(2.50)
    assert vm_cost([], 0.10) == 0.0
    assert vm_cost([1800.0], 0.10) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        vm_cost([1.0], -1)


def test_transfer_cost():
    assert transfer_cost(BYTES_PER_GB, 0.10) == pytest.approx(0.10)
    assert transfer_cost(0, 0.10) == 0.0


@given(st.lists(st.tuples(st.floats(0, 1e4), st.floats(0, 1e4)), max_size=10))
def test_cost_additivity(pairs):
    report = CostReport(tuple(DataCenterCost(f"D{i}", a, b) for i, (a, b) in enumerate(pairs)))
    assert report.grand_total == report.vm_total + report.transfer_total
    assert math.isclose(report.grand_total, sum(d.total for d in report.data_centers), rel_tol=1e-12, abs_tol=1e-12)
    for d in report.data_centers:
        assert d.total == d.vm_cost + d.transfer_cost
