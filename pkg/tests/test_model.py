import math

import numpy as np
import pytest

from stickygas import exact, hull
from stickygas.errors import ModelMismatchError, ParameterError
from stickygas.model import (Configuration, IncrementModel,
                             couple_uniform_from_poisson, derive_seed,
                             generator, sample_coupled_pair, sample_id,
                             sample_uniform)

EXP = IncrementModel.exponential()


def test_deterministic_positions_are_quarters():
    cfg = sample_id(IncrementModel.deterministic(), 4, 12345)
    assert np.array_equal(cfg.positions, np.array([0.25, 0.5, 0.75, 1.0]))
    assert cfg.model_tag == "id"


def test_exponential_tagged_poisson_and_deterministic_in_seed():
    a = sample_id(EXP, 1000, 77)
    b = sample_id(EXP, 1000, 77)
    c = sample_id(EXP, 1000, 78)
    assert a.model_tag == "poisson"
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.increments, b.increments)
    assert not np.array_equal(a.positions, c.positions)


def test_exponential_sample_mean_near_one():
    # CLT self-test on the generator: 4 sigma with unit variance.
    cfg = sample_id(EXP, 1000, 5)
    assert abs(cfg.increments.mean() - 1.0) <= 4.0 / math.sqrt(1000)


def test_uniform_sorted_and_median_split():
    cfg = sample_uniform(10_000, 11)
    assert np.all(np.diff(cfg.positions) >= 0)
    assert cfg.increments is None
    # DKW-style self-test on the generator.
    frac = np.mean(cfg.positions <= 0.5)
    assert abs(frac - 0.5) <= 0.02


def test_uniform_is_sorted_raw_uniforms():
    cfg = sample_uniform(3, 222)
    from stickygas.model import ROLE_CONFIG
    raw = generator(222, ROLE_CONFIG).random(3)
    assert np.array_equal(cfg.positions, np.sort(raw))


@pytest.mark.parametrize("model", [
    IncrementModel.uniform_interval(0.3),
    IncrementModel.uniform_interval(0.0),
    IncrementModel.pareto_shifted(5.0, 0.2),
    IncrementModel.deterministic(),
])
def test_min_gap_respects_essential_infimum(model):
    cfg = sample_id(model, 100_000, 9)
    assert cfg.spacings().min() >= model.mu


def test_increment_means_are_one():
    for model in (IncrementModel.uniform_interval(0.5),
                  IncrementModel.pareto_shifted(6.0, 0.1), EXP):
        x = model.sample(generator(13), 200_000)
        assert abs(x.mean() - 1.0) < 0.02


def test_moment_order():
    assert IncrementModel.pareto_shifted(4.5).moment_order == 4.5
    assert EXP.moment_order == math.inf
    assert IncrementModel.uniform_interval(0.1).moment_order == math.inf


def test_parameter_validation():
    with pytest.raises(ParameterError):
        IncrementModel.uniform_interval(1.0)
    with pytest.raises(ParameterError):
        IncrementModel.uniform_interval(-0.1)
    with pytest.raises(ParameterError):
        IncrementModel.pareto_shifted(1.0)
    with pytest.raises(ParameterError):
        IncrementModel.pareto_shifted(3.0, 1.5)
    with pytest.raises(ParameterError):
        IncrementModel("gamma", (), 0.0)
    with pytest.raises(ParameterError):
        sample_id(EXP, 1, 0)
    with pytest.raises(ParameterError):
        sample_uniform(1, 0)
    with pytest.raises(ParameterError):
        Configuration(n=3, positions=np.array([0.5, 0.2, 0.9]),
                      increments=None, model_tag="uniform", seed=0)


def test_uniform_spacings_reconstruct_positions():
    cfg = sample_uniform(50, 3)
    rebuilt = np.cumsum(cfg.spacings()) / cfg.n
    assert np.allclose(rebuilt, cfg.positions, atol=1e-12)


def test_couple_rejects_wrong_model_and_bad_gap():
    with pytest.raises(ModelMismatchError):
        couple_uniform_from_poisson(sample_uniform(10, 0), 1.0)
    with pytest.raises(ParameterError):
        couple_uniform_from_poisson(sample_id(EXP, 10, 0), 0.0)


def test_couple_identity_scaling():
    # Gaps of (n-1)/n with an extra gap of 1 give a walk value of exactly
    # n one step past the end, so the rescaling is the identity.
    n = 8
    x = np.full(n, (n - 1) / n)
    cfg = Configuration(n=n, positions=np.cumsum(x) / n, increments=x,
                        model_tag="poisson", seed=0)
    coupled, beta = couple_uniform_from_poisson(cfg, 1.0)
    assert beta == 1.0
    assert np.allclose(coupled.positions, cfg.positions, atol=1e-15)


def test_coupled_positions_land_in_unit_interval():
    poisson, uniform, beta = sample_coupled_pair(500, 21)
    assert uniform.positions[0] > 0.0
    assert uniform.positions[-1] < 1.0
    assert beta > 0.0
    assert uniform.model_tag == "uniform"


def test_coupled_pair_poisson_member_matches_plain_sampler():
    poisson, _, _ = sample_coupled_pair(200, 99)
    plain = sample_id(EXP, 200, 99)
    assert np.array_equal(poisson.positions, plain.positions)


def test_coupled_merging_times_rescale():
    poisson, uniform, beta = sample_coupled_pair(50, 4)
    tp = exact.all_merging_times(poisson).values
    tu = exact.all_merging_times(uniform).values
    assert np.max(np.abs(tu * beta - tp)) < 1e-9


def test_coupled_counts_identical_through_time_change():
    for r in range(5):
        poisson, uniform, beta = sample_coupled_pair(300, derive_seed(31, r))
        pp = hull.HullProfile.from_configuration(poisson)
        pu = hull.HullProfile.from_configuration(uniform)
        for t in np.linspace(0.0, 1.3, 14):
            assert (hull.cluster_count_at(pu, float(t))
                    == hull.cluster_count_at(pp, float(beta * t)))


def test_derive_seed_is_path_sensitive_and_stable():
    assert derive_seed(7, 1, 5) != derive_seed(7, 5, 1)
    assert derive_seed(7, 1, 5) == derive_seed(7, 1, 5)
    assert derive_seed(7) != derive_seed(8)
    assert 0 <= derive_seed(2**63, 3) < 2**64


def test_configurations_are_read_only():
    cfg = sample_id(EXP, 10, 1)
    with pytest.raises(ValueError):
        cfg.positions[0] = 5.0
