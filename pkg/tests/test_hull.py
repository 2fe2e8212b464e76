import numpy as np
import pytest

from stickygas import exact
from stickygas.dynamics import simulate, state_at
from stickygas.errors import ParameterError
from stickygas.hull import (HullProfile, cluster_count_at, cluster_count_curve,
                            merging_time_bisect)
from stickygas.model import (Configuration, IncrementModel, derive_seed,
                             sample_coupled_pair, sample_id, sample_uniform)

EXP = IncrementModel.exponential()


def test_profile_prefix_structure():
    cfg = sample_uniform(10, 4)
    prof = HullProfile.from_configuration(cfg)
    assert prof.prefix[0] == 0.0
    assert np.allclose(np.diff(prof.prefix), cfg.positions)
    assert prof.spacing(3) == pytest.approx(
        10 * (cfg.positions[3] - cfg.positions[2]), abs=1e-12)


def test_deterministic_step_counts():
    for n in (5, 100):
        cfg = sample_id(IncrementModel.deterministic(), n, 0)
        prof = HullProfile.from_configuration(cfg)
        assert cluster_count_at(prof, 0.0) == n
        assert cluster_count_at(prof, 0.5) == n
        assert cluster_count_at(prof, 0.99) == n
        assert cluster_count_at(prof, 1.0) == 1
        assert cluster_count_at(prof, 1.5) == 1


def test_deterministic_tie_with_dyadic_inputs():
    # n = 4 makes every phi value dyadic, so the collinearity at the
    # collapse time is exact in floating point, exercising the tie path.
    cfg = sample_id(IncrementModel.deterministic(), 4, 0)
    prof = HullProfile.from_configuration(cfg)
    phi = prof.prefix - np.arange(5) ** 2 / 8.0
    assert np.all(np.diff(phi, 2) == 0.0)
    assert cluster_count_at(prof, 1.0) == 1


def test_reduction_matches_direct_counts_on_200_random_draws():
    # Mandatory validation of the hull reduction against the direct
    # minimization before anything else trusts it.
    grid = 0.05 * np.arange(29)  # 0, 0.05, ..., 1.4
    for r in range(200):
        n = (8, 16, 24)[r % 3]
        cfg = sample_id(EXP, n, derive_seed(777, r))
        times = exact.all_merging_times(cfg)
        prof = HullProfile.from_configuration(cfg)
        for t in grid:
            assert cluster_count_at(prof, float(t)) == exact.count_clusters(
                times, float(t))


def test_curve_monotone_with_step_endpoints():
    cfg = sample_id(EXP, 50, 6)
    prof = HullProfile.from_configuration(cfg)
    t_last = exact.last_collision(exact.all_merging_times(cfg))
    curve = cluster_count_curve(prof, np.array([0.0, t_last + 1e-9]))
    assert curve.tolist() == [50, 1]
    grid = np.linspace(0.0, 1.4, 60)
    counts = cluster_count_curve(prof, grid)
    assert np.all(np.diff(counts) <= 0)
    with pytest.raises(ParameterError):
        cluster_count_curve(prof, np.array([0.5, 0.2]))


def test_curve_matches_dynamics_replay():
    rng = np.random.default_rng(8)
    for r in range(20):
        n = int(rng.integers(5, 50))
        cfg = sample_id(EXP, n, derive_seed(88, r))
        prof = HullProfile.from_configuration(cfg)
        log = simulate(cfg)
        grid = np.sort(rng.uniform(0.0, 1.3, size=6))
        for t in grid:
            assert cluster_count_at(prof, float(t)) == len(state_at(log, cfg, float(t)))


def test_bisect_two_body():
    x = np.array([0.3, 0.64])
    cfg = Configuration(n=2, positions=np.cumsum(x) / 2, increments=x,
                        model_tag="id", seed=0)
    prof = HullProfile.from_configuration(cfg)
    assert merging_time_bisect(prof, 1, 1e-12) == pytest.approx(0.8, abs=1e-10)


def test_bisect_deterministic():
    cfg = sample_id(IncrementModel.deterministic(), 20, 0)
    prof = HullProfile.from_configuration(cfg)
    for j in (1, 10, 19):
        assert merging_time_bisect(prof, j, 1e-10) == pytest.approx(1.0, abs=1e-9)
    # With the exact support bound the bracket degenerates to the answer.
    assert merging_time_bisect(prof, 10, 1e-10, mu=1.0) == 1.0


def test_bisect_against_exact_oracle():
    cfg = sample_id(EXP, 50, 19)
    te = exact.all_merging_times(cfg).values
    prof = HullProfile.from_configuration(cfg)
    tb = np.array([merging_time_bisect(prof, j, 1e-10) for j in range(1, 50)])
    assert np.max(np.abs(tb - te)) < 1e-9


def test_bisect_with_positive_support_bracket():
    model = IncrementModel.uniform_interval(0.3)
    cfg = sample_id(model, 40, 23)
    te = exact.all_merging_times(cfg).values
    prof = HullProfile.from_configuration(cfg)
    tb = np.array([merging_time_bisect(prof, j, 1e-10, mu=model.mu)
                   for j in range(1, 40)])
    assert np.max(np.abs(tb - te)) < 1e-9


def test_bisect_input_validation():
    prof = HullProfile.from_configuration(sample_id(EXP, 10, 0))
    with pytest.raises(IndexError):
        merging_time_bisect(prof, 0, 1e-9)
    with pytest.raises(IndexError):
        merging_time_bisect(prof, 10, 1e-9)
    with pytest.raises(ParameterError):
        merging_time_bisect(prof, 3, 0.0)
    with pytest.raises(ParameterError):
        merging_time_bisect(prof, 3, 1e-9, mu=100.0)


def test_scale_coupling_of_counts():
    poisson, uniform, beta = sample_coupled_pair(400, 31)
    pp = HullProfile.from_configuration(poisson)
    pu = HullProfile.from_configuration(uniform)
    for t in np.linspace(0.0, 1.2, 25):
        assert (cluster_count_at(pu, float(t))
                == cluster_count_at(pp, float(beta * t)))


def test_count_small_system():
    prof = HullProfile.from_configuration(sample_uniform(2, 14))
    assert cluster_count_at(prof, 0.0) == 2
    assert cluster_count_at(prof, 10.0) == 1
