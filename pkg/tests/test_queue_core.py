"""Slot dynamics, stationary laws, fixed points, and the chain oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

from batchq import distributions as dist
from batchq.queue_core import (QueueParams, check_condition,
                               check_continuous_condition, excursion_loglik,
                               markov_oracle, match_arrival_bernoulli,
                               path_max_X, simulate, solve_arrival,
                               stationary_law, step, suggested_burn_in,
                               verify_detailed_balance)
from batchq.stats import EmpiricalPmf, chi_square_gof
from batchq.streams import RandomStream

MAIN = QueueParams(p=1 / 3, alpha=2 / 3, q=1 / 2, beta=1 / 2)


def test_step_examples():
    assert step(3, 2, 4) == (1, 4, 0)
    assert step(0, 0, 5) == (0, 0, 5)
    assert step(1, 0, 3) == (0, 1, 2)
    with pytest.raises(ValueError):
        step(-1, 0, 0)
    with pytest.raises(ValueError):
        step(0, -2, 0)


def test_deterministic_queue_stays_empty():
    tr = simulate(dist.deterministic(1), dist.deterministic(1), 500, seed=0)
    assert np.all(tr.x == 0)
    assert np.all(tr.d == 1)


def test_trace_invariants_discrete_and_continuous():
    tr = simulate(dist.ber_geom(0.4, 0.5), dist.ber_geom(0.6, 0.4), 20_000, seed=3)
    tr.check_invariants()
    trc = simulate(dist.ber_exp(0.3, 1.0), dist.ber_exp(0.5, 0.5), 20_000, seed=4)
    trc.check_invariants(atol=1e-12)
    assert trc.a.dtype == np.float64


def test_trace_slots_and_final_i_absent():
    tr = simulate(dist.ber_geom(0.4, 0.5), dist.geom_zero(0.5), 50, seed=5)
    rec = tr.slot(10)
    assert rec.y == rec.x + rec.a
    assert rec.i == tr.u[10] + tr.a[11]
    assert tr.slot(49).i is None
    with pytest.raises(IndexError):
        tr.slot(50)


def test_trace_csv(tmp_path):
    tr = simulate(dist.ber_geom(0.4, 0.5), dist.geom_zero(0.5), 5, seed=6)
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "n,A,S,X,Y,D,U,I,T"
    assert len(lines) == 6
    assert lines[-1].split(",")[7] == ""  # I is absent on the final slot


def test_unstable_parameters_allowed():
    tr = simulate(dist.geom_plus(0.3), dist.bernoulli(0.4), 5000, seed=7)
    assert tr.x[-1] > 100  # the queue grows without bound


def test_path_max_examples():
    assert path_max_X([0, 0, 0], [1, 1, 1]) == 0
    assert path_max_X([3, 0], [1, 1]) == 1
    with pytest.raises(ValueError):
        path_max_X([1, 2], [1])


def test_path_max_equals_iterated_step():
    stream = RandomStream(42)
    for i in range(300):
        st = stream.substream(i)
        n = 1 + int(st.uniform() * 20)
        a = dist.sample_n(dist.ber_geom(0.5, 0.4), st, n)
        s = dist.sample_n(dist.ber_geom(0.6, 0.5), st, n)
        x = 0
        for k in range(n):
            x, _, _ = step(x, int(a[k]), int(s[k]))
        assert path_max_X(a, s) == x


def test_check_condition():
    assert abs(check_condition(MAIN)) <= 1e-12
    for a in (0.3, 0.5, 0.8):
        for b in (0.2, 0.6, 0.9):
            geom_pair = QueueParams(p=1 - a, alpha=a, q=1 - b, beta=b)
            assert abs(check_condition(geom_pair)) <= 1e-12
    assert abs(check_condition(QueueParams(0.2, 0.9, 0.5, 0.5))) > 0.1


def test_continuous_condition():
    assert check_continuous_condition(1 / 3, 1.0, 1 / 2, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert check_continuous_condition(0.3, 1.7, 0.3, 1.7) == 0.0
    assert abs(check_continuous_condition(0.2, 1.0, 0.5, 1.0)) > 0.1
    with pytest.raises(ValueError):
        check_continuous_condition(0.2, -1.0, 0.5, 1.0)


def test_solve_arrival_examples():
    p, a = solve_arrival(0.5, 0.5, 0.5)
    assert p == pytest.approx(1 / 3, abs=1e-12)
    assert a == pytest.approx(2 / 3, abs=1e-12)
    p, a = solve_arrival(0.6, 0.3, 1.0)
    root = 3 / (3 + math.sqrt(14))
    assert p == pytest.approx(root, abs=1e-12)
    assert a == pytest.approx(root, abs=1e-12)
    with pytest.raises(ValueError, match="unstable intensity"):
        solve_arrival(0.5, 0.5, 1.0)
    with pytest.raises(ValueError):
        solve_arrival(0.5, 0.5, 0.0)


def test_solve_arrival_roundtrip_grid():
    for q in (0.3, 0.5, 0.7, 0.9):
        for b in (0.2, 0.5, 0.6, 0.8):
            mu = q / b
            for frac in (0.1, 0.5, 0.9):
                lam = frac * mu
                p, a = solve_arrival(q, b, lam)
                params = QueueParams(p=p, alpha=a, q=q, beta=b)
                assert abs(p / a - lam) <= 1e-12
                assert abs(check_condition(params)) <= 1e-10
                lam1 = p * (p / (1 - p) * (1 - q) / q * (1 - b) / b + 1)
                lam2 = (1 - a) * b * q / (a * a * (1 - b - q) + a * b * q)
                assert abs(lam1 - lam) <= 1e-10
                assert abs(lam2 - lam) <= 1e-10


def test_stationary_law_values():
    law = stationary_law(MAIN)
    assert law.c == pytest.approx(0.5, abs=1e-12)
    assert law.gamma == pytest.approx(1 / 3, abs=1e-12)
    assert law.y_bernoulli == pytest.approx(2 / 3, abs=1e-12)
    assert law.mean_x == pytest.approx(1.5, abs=1e-12)
    assert law.mean_y == pytest.approx(law.mean_x + MAIN.p / MAIN.alpha, abs=1e-12)


def test_stationary_law_rejects_off_family():
    with pytest.raises(ValueError, match="markov_oracle"):
        stationary_law(QueueParams(0.2, 0.9, 0.5, 0.5))
    with pytest.raises(ValueError, match="unstable"):
        stationary_law(QueueParams(p=0.6, alpha=0.3, q=0.3, beta=0.6))


def test_stationary_law_vs_oracle():
    pi = markov_oracle(MAIN.arrival_spec, MAIN.service_spec, K=200)
    law = stationary_law(MAIN)
    ref = np.array([law.x_pmf(k) for k in range(len(pi))])
    assert np.abs(pi - ref).max() <= 1e-10


def test_geom_zero_pair_law_matches_simulation():
    params = QueueParams(p=1 - 0.6, alpha=0.6, q=1 - 0.4, beta=0.4)
    law = stationary_law(params)
    assert law.c == pytest.approx(0.4 / 0.6 * 0.4 / 0.6, abs=1e-12)
    assert law.gamma == pytest.approx((0.6 - 0.4) / 0.6, abs=1e-12)
    tr = simulate(params.arrival_spec, params.service_spec, 600_000, seed=21)
    emp = EmpiricalPmf.from_samples(tr.x[10_000::25], cutoff=25)
    assert chi_square_gof(emp, law.x_pmf, level=0.01).passed


def test_bernoulli_limit_of_stationary_law():
    p_, q_ = 0.3, 0.6
    alpha = 1 - 1e-9
    t = alpha / (1 - alpha) * p_ / (1 - p_) * (1 - q_) / q_
    beta = t / (1 + t)
    law = stationary_law(QueueParams(p=p_, alpha=alpha, q=q_, beta=beta))
    assert law.c == pytest.approx(p_ * (1 - q_) / (q_ * (1 - p_)), rel=1e-6)
    pi = markov_oracle(dist.bernoulli(p_), dist.bernoulli(q_), K=100)
    ref = np.array([law.x_pmf(k) for k in range(len(pi))])
    assert np.abs(pi - ref).max() <= 1e-7


def test_detailed_balance_residuals():
    sets = [(0.5, 0.5, 2 / 3), (0.6, 0.3, 0.5), (0.7, 0.4, 0.55),
            (0.4, 0.2, 0.5), (0.8, 0.45, 0.75)]
    for q, b, a in sets:
        params = QueueParams(p=match_arrival_bernoulli(a, q, b), alpha=a, q=q, beta=b)
        assert verify_detailed_balance(params, K=30) <= 1e-12
    assert verify_detailed_balance(QueueParams(0.2, 0.9, 0.5, 0.5), K=30) > 1e-6


def test_excursion_single_slot_self_reversed():
    ll_f = excursion_loglik(MAIN, [2], [2])
    ll_r = excursion_loglik(MAIN, [2], [2])
    assert ll_f == ll_r
    # direct product oracle: log pmf_A(2) + log P(S >= 2)
    expect = math.log(dist.pmf(MAIN.arrival_spec, 2)) + math.log(dist.sf(MAIN.service_spec, 2))
    assert ll_f == pytest.approx(expect, abs=1e-12)


def test_excursion_reversal_iff_condition():
    fwd = excursion_loglik(MAIN, [2, 0], [1, 1])
    rev = excursion_loglik(MAIN, [1, 1], [0, 2])
    assert fwd == pytest.approx(rev, abs=1e-12)
    off = QueueParams(0.2, 0.9, 0.5, 0.5)
    assert abs(excursion_loglik(off, [2, 0], [1, 1])
               - excursion_loglik(off, [1, 1], [0, 2])) > 1e-6


def test_excursion_geom_zero_closed_form():
    params = QueueParams(p=0.4, alpha=0.6, q=0.3, beta=0.7)
    a_seq, d_seq = [3, 0, 1], [1, 1, 2]
    ll = excursion_loglik(params, a_seq, d_seq)
    n, sa, sd = 3, 4, 4
    closed = (n * math.log(0.6) + sa * math.log(0.4)
              + (n - 1) * math.log(0.7) + sd * math.log(0.3))
    assert ll == pytest.approx(closed, abs=1e-12)


def test_excursion_shape_validation():
    with pytest.raises(ValueError):
        excursion_loglik(MAIN, [2, 0], [1, 2])  # totals differ
    with pytest.raises(ValueError):
        excursion_loglik(MAIN, [1, 1], [1, 1])  # hits zero in the middle
    with pytest.raises(ValueError):
        excursion_loglik(MAIN, [0, 2], [1, 1])  # a_1 = 0
    with pytest.raises(ValueError):
        excursion_loglik(MAIN, [2], [])


def test_oracle_general_service_shapes():
    # 0/1 arrivals with general service: the queue law is plain geometric
    pi = markov_oracle(dist.bernoulli(0.3), dist.bernoulli(0.6), K=120)
    ratios = pi[1:40] / pi[0:39]
    assert ratios.max() - ratios.min() <= 1e-10
    # BerGeom arrivals with deterministic service: constant ratio above 0
    pi = markov_oracle(dist.ber_geom(0.3, 0.5), dist.deterministic(1), K=200)
    ratios = pi[2:31] / pi[1:30]
    assert ratios.max() - ratios.min() <= 1e-8


def test_oracle_rejects_bad_input():
    with pytest.raises(RuntimeError, match="increase K"):
        markov_oracle(dist.ber_geom(0.45, 0.5), dist.deterministic(1), K=25)
    with pytest.raises(ValueError, match="discrete"):
        markov_oracle(dist.exponential(1.0), dist.deterministic(1), K=50)
    with pytest.raises(ValueError, match="unstable"):
        markov_oracle(dist.geom_plus(0.3), dist.bernoulli(0.5), K=50)
    with pytest.raises(ValueError, match="pmf"):
        markov_oracle(dist.bernoulli(0.2), np.array([0.5, 0.4]), K=50)


def test_queue_params_validation_and_burn_in():
    with pytest.raises(ValueError):
        QueueParams(p=0.0, alpha=0.5, q=0.5, beta=0.5)
    assert MAIN.is_stable
    assert MAIN.arrival_rate == pytest.approx(0.5)
    assert suggested_burn_in(0.5, 1.0) == 10_000
    assert suggested_burn_in(0.99, 1.0) == 10_000
    assert suggested_burn_in(0.999, 1.0) == 100_000
    with pytest.raises(ValueError):
        suggested_burn_in(1.0, 1.0)
