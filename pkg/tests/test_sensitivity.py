import math

import numpy as np
import pytest

from relsens import distributions as d
from relsens import limit_state as ls, sampling as sp, sensitivity as sens, transform as tr
from relsens.errors import DegenerateVariance, EmptyBatch, IndexOutOfRange, InvalidStep
from relsens.form import alpha_to_linear_indices

from conftest import LINEAR_A, linear_model


@pytest.fixture(scope="module")
def mc_batch():
    m = linear_model()
    batch, _ = sp.run(m.limit_state, m.transform, sp.SamplingPlan("mcs", 100_000, seed=0))
    return batch


def test_scale_factors():
    dp, dm = sens.scale_factors(0.1)
    assert dp == pytest.approx(1.0488088, abs=1e-7)
    assert dm == pytest.approx(0.9534626, abs=1e-7)
    assert sens.scale_factors(0.01)[0] == pytest.approx(1.0049876, abs=1e-7)
    for dv in (0.01, 0.2, 3.0):
        dp, dm = sens.scale_factors(dv)
        assert dp * dm == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("dv", [0.0, -0.1, math.nan, math.inf])
def test_invalid_step(dv):
    with pytest.raises(InvalidStep):
        sens.scale_factors(dv)


def test_modified_covariance_examples():
    c = sens.modified_covariance(np.eye(3), 0, math.sqrt(1.1))
    assert c[0, 0] == pytest.approx(1.1, abs=1e-15)
    assert np.array_equal(c[1:, 1:], np.eye(2)) and not c[0, 1:].any()
    c0 = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.0]])
    assert np.array_equal(sens.modified_covariance(c0, 2, 1.0), c0)
    c1 = sens.modified_covariance(c0[:2, :2], 1, 2.0)
    assert c1.tolist() == [[1.0, 1.0], [1.0, 4.0]]
    assert np.all(np.linalg.eigvalsh(c1) > 0)
    with pytest.raises(IndexOutOfRange):
        sens.modified_covariance(c0, 3, 1.1)


def test_modified_covariance_is_dcd():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    c0 = a @ a.T + 4 * np.eye(4)
    for i in range(4):
        dd = np.eye(4)
        dd[i, i] = 1.3
        assert np.allclose(sens.modified_covariance(c0, i, 1.3), dd @ c0 @ dd, rtol=0, atol=1e-15)


def test_indices_sum_to_one(mc_batch):
    r = sens.reliability_sensitivities(mc_batch, 0.1)
    assert abs(r.indices.sum() - 1.0) < 1e-12
    assert r.negative == bool(np.any(r.dpf_dvar < 0)) and not r.all_safe


def test_reweighting_identity(mc_batch):
    n = mc_batch.n
    for k in range(mc_batch.dim):
        plus, minus = sens.perturbed_log_densities(mc_batch, k, 0.1)
        for lp in (plus, minus):
            assert abs(np.exp(lp - mc_batch.log_fs).mean() - 1.0) < 4 / math.sqrt(n)


def test_single_variable_index():
    t = tr.build([d.normal()])
    batch, _ = sp.run(ls.linear(1.0, [-1.0]), t, sp.SamplingPlan("mcs", 2000, seed=2))
    assert sens.reliability_sensitivities(batch).indices.tolist() == [1.0]


def test_permutation_equivariance(mc_batch):
    perm = np.array([3, 0, 4, 2, 1])
    b = mc_batch
    cov = np.eye(5)
    permuted = sp.SampleBatch(b.u[:, perm], b.g, b.log_f0, b.log_fs, b.plan, cov[np.ix_(perm, perm)])
    r = sens.reliability_sensitivities(b)
    rp = sens.reliability_sensitivities(permuted)
    assert np.allclose(rp.indices, r.indices[perm], rtol=0, atol=1e-12)


def test_all_safe_flag():
    t = tr.build([d.normal(), d.normal()])
    batch, _ = sp.run(ls.linear(50.0, [1.0, 1.0]), t, sp.SamplingPlan("mcs", 1000))
    r = sens.reliability_sensitivities(batch)
    assert r.all_safe and r.flagged
    assert np.all(r.dpf_dvar == 0.0) and np.all(np.isnan(r.indices))


def test_negative_derivative_flag():
    # failure only in a thin band around the origin: more spread means fewer failures
    t = tr.build([d.normal(), d.normal()])
    g = ls.LimitState(lambda x: x[:, 0] ** 2 - 0.01, ("a", "b"))
    batch, _ = sp.run(g, t, sp.SamplingPlan("mcs", 50_000, seed=1))
    r = sens.reliability_sensitivities(batch)
    assert r.dpf_dvar[0] < 0 and r.negative and r.flagged


def test_empty_batch():
    b = sp.SampleBatch(np.empty((0, 2)), np.empty(0), np.empty(0), np.empty(0),
                       sp.SamplingPlan("mcs", 1), np.eye(2))
    with pytest.raises(EmptyBatch):
        sens.reliability_sensitivities(b)


def test_linear_sobol():
    assert np.allclose(sens.linear_sobol(LINEAR_A, np.ones(5)), [0.64, 0.25, 0.09, 0.01, 0.01], atol=1e-12)
    assert np.allclose(sens.linear_sobol([1, 1], [1, 2]), [0.2, 0.8], atol=1e-15)
    a, s = np.array([0.3, -2.0, 1.1]), np.array([2.0, 0.5, 1.5])
    assert np.allclose(sens.linear_sobol(a, s), alpha_to_linear_indices(a * s), atol=1e-15)
    with pytest.raises(DegenerateVariance):
        sens.linear_sobol([0.0, 0.0], [1.0, 1.0])


def test_correlated_inputs_against_closed_form():
    # g = b + c.z with z ~ N(0, C): dPf/d(d_k^2) is proportional to c_k (C c)_k
    c = np.array([-0.8, -0.5, -0.3])
    cov = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, -0.3], [0.0, -0.3, 1.0]])
    t = tr.build([d.normal() for _ in c], cov)
    b = 2.5
    expected = c * (cov @ c) / (c @ cov @ c)
    z_star = -b * cov @ c / (c @ cov @ c)
    g = ls.linear(b, c)
    runs = []
    for seed in range(20):
        batch, _ = sp.run(g, t, sp.SamplingPlan("is", 20_000, seed, z_star))
        runs.append(sens.reliability_sensitivities(batch, 0.05).indices)
    assert np.allclose(np.mean(runs, axis=0), expected, atol=0.01)
