import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stickygas.errors import ParameterError, WindowError
from stickygas.exact import (MergingTimes, all_merging_times, count_clusters,
                             f_value, h_value, last_collision, merging_time,
                             windowed_time)
from stickygas.model import Configuration, IncrementModel, sample_id

EXP = IncrementModel.exponential()


def _cfg_from_gaps(gaps):
    gaps = np.asarray(gaps, dtype=np.float64)
    n = gaps.size
    return Configuration(n=n, positions=np.cumsum(gaps) / n, increments=gaps,
                         model_tag="id", seed=0)


# ---------------------------------------------------------------------------
# the weighted gap average

def test_h_single_pair_is_the_boundary_gap():
    x = np.array([0.3, 1.7, 0.4, 2.2])
    for j in (1, 2, 3):
        assert h_value(1, j, 1, x) == x[j]


def test_h_all_ones_is_exactly_one():
    x = np.ones(40)
    for j in (1, 10, 20, 39):
        for p in range(1, 40 - j):
            for q in range(1, j + 1):
                assert h_value(p, j, q, x) == 1.0


def test_h_hand_expanded_case():
    # p=2, q=1 with boundary gap 1 and next right gap 4:
    # 2/3 * (4/2 + 0 + 1) = 2, worked out by hand from the definition.
    x = np.array([9.0, 9.0, 1.0, 4.0])
    assert h_value(2, 2, 1, x) == pytest.approx(2.0, abs=1e-15)


def test_h_bounds_checking():
    x = np.ones(5)
    with pytest.raises(IndexError):
        h_value(5, 1, 1, x)  # needs slot 5 of 0..4
    with pytest.raises(IndexError):
        h_value(1, 2, 3, x)  # needs slot 0, reserved for the origin offset
    with pytest.raises(IndexError):
        h_value(1, 0, 1, x)
    with pytest.raises(IndexError):
        h_value(1, 5, 1, x)
    with pytest.raises(ParameterError):
        h_value(0, 2, 1, x)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=6, max_size=12),
       st.integers(1, 4), st.integers(1, 2))
def test_h_is_convex_combination_of_gaps(gaps, p, q):
    x = np.array(gaps)
    j = q + 1
    if j + p - 1 > x.size - 1:
        return
    h = h_value(p, j, q, x)
    window = x[j - q + 1: j + p]
    assert window.min() - 1e-12 <= h <= window.max() + 1e-12


def test_f_is_zero_at_sqrt_h_and_decreasing():
    rng = np.random.default_rng(0)
    x = rng.exponential(size=20)
    for (p, j, q) in [(1, 3, 1), (4, 6, 3), (7, 10, 5)]:
        h = h_value(p, j, q, x)
        assert f_value(p, j, q, 0.0, x) >= 0.0
        assert abs(f_value(p, j, q, math.sqrt(h), x)) < 1e-12
        assert f_value(p, j, q, 0.5, x) > f_value(p, j, q, 1.5, x)


# ---------------------------------------------------------------------------
# merging times

def test_two_body_closed_form():
    # Gap X/n with relative acceleration 2/n closes at sqrt(X): 0.81 -> 0.9.
    cfg = _cfg_from_gaps([0.37, 0.81])
    mt = merging_time(cfg, 1)
    assert mt.time == pytest.approx(0.9, abs=1e-15)
    assert (mt.k, mt.l) == (1, 1)


def test_merging_time_against_double_loop_oracle():
    # Brute-force minimization straight off h_value guards the index map.
    for r in range(25):
        cfg = sample_id(EXP, 12, 1000 + r)
        x = cfg.spacings()
        for j in range(1, 12):
            best, arg = np.inf, None
            for k in range(1, 12 - j + 1):
                for l in range(1, j + 1):
                    h = h_value(k, j, l, x)
                    if h < best:
                        best, arg = h, (k, l)
            mt = merging_time(cfg, j)
            assert mt.time == pytest.approx(math.sqrt(best), abs=1e-14)
            assert (mt.k, mt.l) == arg


def test_deterministic_times_bitwise_one_with_lexicographic_argmin():
    for n in (2, 7, 64):
        cfg = sample_id(IncrementModel.deterministic(), n, 0)
        times = all_merging_times(cfg)
        assert np.all(times.values == 1.0)
        for j in (1, n // 2, n - 1):
            mt = merging_time(cfg, max(j, 1))
            assert mt.time == 1.0
            assert (mt.k, mt.l) == (1, 1)


def test_all_merging_times_shape_and_support_bounds():
    for model in (EXP, IncrementModel.uniform_interval(0.4),
                  IncrementModel.pareto_shifted(5.0, 0.25)):
        cfg = sample_id(model, 60, 17)
        times = all_merging_times(cfg)
        assert len(times) == 59
        x = cfg.spacings()
        assert np.all(times.values >= math.sqrt(model.mu) - 1e-12)
        assert np.all(times.values <= np.sqrt(x[1:]) + 1e-12)


def test_merging_time_index_errors():
    cfg = sample_id(EXP, 10, 3)
    with pytest.raises(IndexError):
        merging_time(cfg, 0)
    with pytest.raises(IndexError):
        merging_time(cfg, 10)


def test_oracle_caps():
    det = IncrementModel.deterministic()
    with pytest.warns(UserWarning):
        all_merging_times(sample_id(det, 513, 0))
    with pytest.raises(ParameterError):
        all_merging_times(sample_id(det, 4097, 0))


# ---------------------------------------------------------------------------
# windowed times

def test_window_one_is_sqrt_boundary_gap():
    cfg = sample_id(EXP, 30, 8)
    x = cfg.spacings()
    for j in (1, 14, 29):
        assert windowed_time(cfg, j, 1).value == pytest.approx(
            math.sqrt(x[j]), abs=1e-15)


def test_windows_shrink_and_bound_the_true_time():
    cfg = sample_id(EXP, 64, 21)
    j = 32
    full = merging_time(cfg, j).time
    prev = np.inf
    for m in (1, 2, 4, 8, 16, 32):
        w = windowed_time(cfg, j, m).value
        assert w <= prev + 1e-15
        assert w >= full - 1e-15
        prev = w
    # Full feasible window on both sides coincides with the minimization.
    assert windowed_time(cfg, j, 32).value == pytest.approx(full, abs=1e-14)


def test_window_refuses_out_of_range_radii():
    cfg = sample_id(EXP, 20, 5)
    with pytest.raises(WindowError):
        windowed_time(cfg, 3, 4)
    with pytest.raises(WindowError):
        windowed_time(cfg, 18, 3)
    with pytest.raises(WindowError):
        windowed_time(cfg, 10, 0)


def test_orientation_reweighting_identity():
    # Left-block minimum rewritten as an integrated walk of the reversed
    # gaps: the two forms agree pathwise, not just in law.
    rng = np.random.default_rng(6)
    for _ in range(50):
        j = int(rng.integers(2, 9))
        x = rng.exponential(size=j + 2)
        t2 = float(rng.uniform(0.0, 1.2)) ** 2
        direct = min(
            sum((l - i) * (x[j - i] - t2) for i in range(1, l)) / l
            + (x[j] - t2)
            for l in range(1, j + 1))
        w = np.concatenate([[x[j]], x[j - 1: 0: -1]])  # boundary gap first
        d = np.cumsum(np.cumsum(w - t2))
        assert (direct >= 0) == (d[: j].min() >= 0)
        assert min(d[: j]) == pytest.approx(
            min(l * (sum((l - i) * (x[j - i] - t2) for i in range(1, l)) / l
                     + (x[j] - t2)) for l in range(1, j + 1)), abs=1e-10)


# ---------------------------------------------------------------------------
# counting

def test_count_clusters_cases():
    times = MergingTimes(values=np.array([0.5, 1.2, 0.8]), n=4)
    assert count_clusters(times, 0.9) == 2
    assert count_clusters(times, 0.0) == 4
    assert count_clusters(times, 1.2) == 1
    assert count_clusters(times, 5.0) == 1
    with pytest.raises(ParameterError):
        count_clusters(times, -0.1)


def test_count_is_nonincreasing_step_function():
    cfg = sample_id(EXP, 40, 2)
    times = all_merging_times(cfg)
    grid = np.linspace(0, 1.5, 200)
    counts = [count_clusters(times, float(t)) for t in grid]
    assert counts[0] == 40
    assert counts[-1] == 1
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    # Strictness: just below a merging time the pair still counts.
    t0 = float(times.values.min())
    assert count_clusters(times, np.nextafter(t0, 0.0)) == 40
    assert count_clusters(times, t0) == 39


def test_last_collision():
    times = MergingTimes(values=np.array([0.5, 1.2, 0.8]), n=4)
    assert last_collision(times) == 1.2
    cfg = _cfg_from_gaps([1.0, 0.49])
    only = all_merging_times(cfg)
    assert last_collision(only) == pytest.approx(0.7, abs=1e-15)
