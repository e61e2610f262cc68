"""Lattice first passage: DP against brute force, plus the continuous model."""

from __future__ import annotations

import math

import numpy as np
import pytest

from batchq import distributions as dist
from batchq.percolation import (IdentityCheck, JumpField, PathQuery,
                                WeightField, continuous_first_passage,
                                enumerate_first_passage, estimate_time_constant,
                                first_passage, sample_jump_field,
                                tandem_identity_check)
from batchq.streams import RandomStream


def test_unit_weights_two_by_two():
    field = WeightField(np.ones((2, 2)))
    assert first_passage(field, PathQuery((0, 0), (1, 1))) == 2.0
    assert enumerate_first_passage(field, PathQuery((0, 0), (1, 1))) == 2.0


def test_three_column_worked_example():
    # weights by (column, row): [[1,5],[4,0],[9,2]]; best path rows (0,1,1) costs 3
    w = np.array([[1, 5], [4, 0], [9, 2]]).T
    field = WeightField(w)
    q = PathQuery((0, 0), (2, 1))
    assert enumerate_first_passage(field, q) == 3.0
    assert first_passage(field, q) == 3.0


def test_single_row_is_the_row_sum():
    st = RandomStream(3)
    w = st.uniforms(12).reshape(1, 12)
    field = WeightField(w)
    assert first_passage(field, PathQuery((2, 0), (9, 0))) == pytest.approx(w[0, 2:10].sum())


def test_all_zero_weights():
    field = WeightField(np.zeros((4, 6)))
    assert first_passage(field, PathQuery((0, 0), (5, 3))) == 0.0


def test_dp_equals_bruteforce_on_random_fields():
    stream = RandomStream(101)
    for i in range(300):
        st = stream.substream(i)
        rows = 1 + int(st.uniform() * 8)
        cols = 1 + int(st.uniform() * 8)
        if cols == 1:
            rows = 1
        field = WeightField(np.floor(st.uniforms(rows * cols) * 6).reshape(rows, cols))
        for pinned in (True, False):
            q = PathQuery((0, 0), (cols - 1, rows - 1), pinned=pinned)
            assert first_passage(field, q) == enumerate_first_passage(field, q)


def test_query_validation():
    field = WeightField(np.ones((3, 3)))
    with pytest.raises(ValueError):
        PathQuery((2, 0), (1, 0))
    with pytest.raises(ValueError):
        first_passage(field, PathQuery((0, 0), (3, 1)))
    with pytest.raises(ValueError, match="no pinned path"):
        first_passage(field, PathQuery((1, 0), (1, 2), pinned=True))
    # the free variant does allow a single-column multi-row query
    assert first_passage(field, PathQuery((1, 0), (1, 2), pinned=False)) == 1.0
    with pytest.raises(ValueError, match="too many paths"):
        enumerate_first_passage(WeightField(np.ones((40, 40))),
                                PathQuery((0, 0), (39, 39)))


def test_monotonicity_in_weights():
    stream = RandomStream(55)
    for i in range(100):
        st = stream.substream(i)
        w = np.floor(st.uniforms(30) * 4).reshape(5, 6)
        q = PathQuery((0, 0), (5, 4))
        base = first_passage(WeightField(w.copy()), q)
        w[int(st.uniform() * 5), int(st.uniform() * 6)] += 1.5
        assert first_passage(WeightField(w), q) >= base - 1e-12


def test_subadditivity_through_a_corner():
    stream = RandomStream(56)
    k, r = 4, 3
    for i in range(100):
        st = stream.substream(i)
        field = WeightField(st.uniforms((2 * r + 1) * (2 * k + 1)).reshape(2 * r + 1, 2 * k + 1))
        whole = first_passage(field, PathQuery((0, 0), (2 * k, 2 * r)))
        first = first_passage(field, PathQuery((0, 0), (k, r)))
        second = first_passage(field, PathQuery((k + 1, r), (2 * k, 2 * r)))
        assert whole <= first + second + 1e-12


def test_weight_field_csv_round_trip(tmp_path):
    w = np.arange(12, dtype=float).reshape(3, 4)
    field = WeightField(w)
    path = tmp_path / "field.csv"
    field.to_csv(path)
    back = WeightField.from_csv(path)
    assert np.array_equal(back.weights, w)


# --- continuous model -------------------------------------------------------

def test_continuous_single_row_pays_everything():
    jf = JumpField(times=[np.array([0.5, 1.25, 2.0])],
                   weights=[np.array([1.0, 2.0, 4.0])], horizon=3.0)
    assert continuous_first_passage(jf, 0.0, 3.0, 0, 0) == 7.0
    assert continuous_first_passage(jf, 1.0, 3.0, 0, 0) == 6.0


def test_continuous_two_row_worked_example():
    jf = JumpField(times=[np.array([1.0]), np.array([2.0])],
                   weights=[np.array([5.0]), np.array([3.0])], horizon=3.0)
    got = continuous_first_passage(jf, 0.0, 3.0, 0, 1)
    # oracle: one switch time u per inter-event interval
    s0 = lambda u: 5.0 * (u >= 1.0)
    s1 = lambda u: 3.0 * (u >= 2.0)
    candidates = [s0(u) - s0(0.0) + s1(3.0) - s1(u) for u in (0.5, 1.5, 2.5)]
    assert got == min(candidates) == 3.0


def test_continuous_empty_window():
    jf = JumpField(times=[np.array([]), np.array([])],
                   weights=[np.array([]), np.array([])], horizon=5.0)
    assert continuous_first_passage(jf, 0.0, 5.0, 0, 1) == 0.0


def test_continuous_validation():
    jf = JumpField(times=[np.array([1.0])], weights=[np.array([2.0])], horizon=3.0)
    with pytest.raises(ValueError):
        continuous_first_passage(jf, 2.0, 1.0, 0, 0)
    with pytest.raises(ValueError):
        continuous_first_passage(jf, 0.0, 2.0, 0, 1)
    with pytest.raises(ValueError):
        JumpField(times=[np.array([2.0, 1.0])], weights=[np.array([1.0, 1.0])], horizon=3.0)
    with pytest.raises(ValueError):
        JumpField(times=[np.array([1.0])], weights=[np.array([0.0])], horizon=3.0)


def test_continuous_switch_point_insensitivity():
    stream = RandomStream(77)
    for i in range(30):
        st = stream.substream(i)
        jf = sample_jump_field(4, 8.0, dist.exponential(1.0), st)
        base = continuous_first_passage(jf, 0.0, 8.0, 0, 3)
        merged = sorted((t, r, k) for r in range(4) for k, t in enumerate(jf.times[r]))
        times2 = [t.copy() for t in jf.times]
        for pos, (t, r, k) in enumerate(merged):
            nxt = merged[pos + 1][0] if pos + 1 < len(merged) else 8.0
            times2[r][k] = t + 0.4 * (nxt - t)
        jf2 = JumpField(times=times2, weights=jf.weights, horizon=8.0)
        assert continuous_first_passage(jf2, 0.0, 8.0, 0, 3) == pytest.approx(base, abs=1e-9)
        # decreasing a weight cannot increase the infimum
        w2 = [w.copy() for w in jf.weights]
        if len(w2[i % 4]):
            w2[i % 4][0] *= 0.3
            jf3 = JumpField(times=jf.times, weights=w2, horizon=8.0)
            assert continuous_first_passage(jf3, 0.0, 8.0, 0, 3) <= base + 1e-9


# --- estimates and the identity ----------------------------------------------

def test_estimate_deterministic_and_thread_invariant():
    spec = dist.exponential(1.0)
    e1 = estimate_time_constant(spec, 1.5, 60, 8, RandomStream(5))
    e2 = estimate_time_constant(spec, 1.5, 60, 8, RandomStream(5))
    e3 = estimate_time_constant(spec, 1.5, 60, 8, RandomStream(5), threads=4)
    assert e1 == e2 == e3
    assert e1.ci_lo <= e1.mean <= e1.ci_hi


def test_estimate_flat_region_small():
    est = estimate_time_constant(dist.bernoulli(0.5), 0.4, 100, 20, RandomStream(6))
    assert est.mean <= 0.02


def test_estimate_validation():
    with pytest.raises(ValueError):
        estimate_time_constant(dist.exponential(1.0), 0.0, 50, 5, RandomStream(0))
    with pytest.raises(ValueError):
        estimate_time_constant(dist.exponential(1.0), 1.0, 5, 5, RandomStream(0))
    with pytest.raises(ValueError):
        estimate_time_constant(dist.exponential(1.0), 1.0, 50, 1, RandomStream(0))


def test_identity_single_stage_is_lindley():
    stream = RandomStream(200)
    for i in range(100):
        res = tandem_identity_check(dist.ber_geom(0.4, 0.5), [dist.ber_geom(0.6, 0.45)],
                                    window=30, stream=stream.substream(i))
        assert res.equal, res


def test_identity_multi_stage_exact():
    stream = RandomStream(201)
    for i in range(200):
        r_count = 1 + (i % 4)
        res = tandem_identity_check(dist.ber_geom(1 / 3, 2 / 3),
                                    [dist.ber_geom(1 / 2, 1 / 2)] * r_count,
                                    window=50, stream=stream.substream(i))
        assert res.equal, (i, res)


def test_identity_zero_arrivals():
    res = tandem_identity_check(dist.deterministic(0),
                                [dist.ber_geom(0.5, 0.5)] * 3,
                                window=20, stream=RandomStream(7))
    assert res.equal and res.lhs == 0.0 and res.rhs == 0.0
    assert isinstance(res, IdentityCheck)


def test_identity_heterogeneous_and_unstable_services():
    # the identity is pathwise, so it holds regardless of stability
    stream = RandomStream(202)
    services = [dist.geom_zero(0.7), dist.bernoulli(0.4), dist.deterministic(1)]
    for i in range(100):
        res = tandem_identity_check(dist.ber_geom(0.5, 0.5), services,
                                    window=40, stream=stream.substream(i))
        assert res.equal, (i, res)
