import warnings

import numpy as np
import pytest

from harvest_dde import (
    Constant,
    Cosine,
    HistorySegment,
    ModelParams,
    NotConverged,
    equilibrium,
    find_periodic,
    period_map,
    persistence_bounds,
)
from harvest_dde.periodic import default_segment_size, default_step, periodicity_residual, theta_max

from conftest import const_params

# Picard residual trace of the cosine-K scenario from the halved-step (h = 1/1024) oracle run
ORACLE_TRACE_HEAD = [2.037720e-02, 1.999543e-03, 1.131166e-03, 6.394422e-04]
ORACLE_ITERATIONS = 24


@pytest.fixture
def b1_params():
    return const_params(K=2.0, theta=0.5, T=1.0)


def seg_const(value, params):
    th = theta_max(params)
    return HistorySegment.from_function(value, th, default_segment_size(th, default_step(params)))


class TestSegment:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            HistorySegment(np.array([1.0, 0.0, 1.0]), 0.5)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            HistorySegment(np.array([1.0]), 0.5)

    def test_history_interpolates(self):
        seg = HistorySegment(np.array([1.0, 2.0, 3.0]), 1.0)
        hist = seg.to_history()
        assert hist(-0.25) == pytest.approx(2.5)
        assert hist(0.0) == 3.0

    def test_aligned_default_size(self):
        assert default_step(const_params(theta=0.25, T=1.0)) == 1 / 512
        assert default_segment_size(0.25, 1 / 512) == 257
        assert default_segment_size(0.375, 1 / 512) == 385
        assert default_segment_size(0.3, 1 / 512) == 257


class TestPeriodMap:
    def test_equilibrium_fixed(self):
        p = const_params(theta=0.5, T=1.0)
        out = period_map(p, seg_const(1.0, p))
        assert np.max(np.abs(out.samples - 1.0)) <= 1e-10

    def test_monotone_approach(self):
        p = const_params(theta=0.5, T=1.0)
        out = period_map(p, seg_const(0.5, p))
        assert np.all(out.samples > 0.5) and np.all(out.samples < 1.0)
        halved = period_map(p, seg_const(0.5, p), h=default_step(p) / 2)
        assert np.max(np.abs(out.samples - halved.samples)) < 1e-10

    def test_nonpositive_seed(self):
        with pytest.raises(ValueError):
            HistorySegment.from_function(Constant(-1.0), 0.5, 10)


class TestFindPeriodic:
    def test_constant_b1(self, b1_params):
        res = find_periodic(b1_params, 1.0, max_iter=200, tol=1e-8)
        assert res.converged and res.residual <= 1e-8
        assert np.max(np.abs(res.final_segment.samples - equilibrium(b1_params))) <= 1e-8
        assert res.periodicity_residual <= 1e-7

    def test_two_seeds_agree(self, b1_params):
        a = find_periodic(b1_params, 1.0, tol=1e-8)
        try:
            b = find_periodic(b1_params, 100.0, tol=1e-8)
        except NotConverged:
            return
        assert np.max(np.abs(a.final_segment.samples - b.final_segment.samples)) <= 10 * 1e-8

    def test_cosine_K(self, cosine_K_params):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = find_periodic(cosine_K_params, 1.0, max_iter=200, tol=1e-8)
        assert res.converged
        assert res.iterations == ORACLE_ITERATIONS
        np.testing.assert_allclose(res.trace[:4], ORACLE_TRACE_HEAD, rtol=1e-5)
        ts, ys = res.trajectory_one_period.sample(4)
        assert ys.max() - ys.min() > 0.02
        assert res.periodicity_residual <= 1e-7
        rep = persistence_bounds(cosine_K_params, res.final_segment.terminal, 1.0)
        assert np.all(ys >= rep.lower - 1e-6) and np.all(ys <= rep.upper + 1e-6)

    def test_neither_warns(self, cosine_K_params):
        with pytest.warns(RuntimeWarning, match="neither"):
            find_periodic(cosine_K_params, 1.0, max_iter=60, tol=1e-6)

    def test_not_converged(self, b1_params):
        with pytest.raises(NotConverged) as info:
            find_periodic(b1_params, 1.0, max_iter=3, tol=1e-12)
        assert info.value.iterations == 3
        assert len(info.value.trace) == 3
        assert info.value.residual > 1e-12

    def test_periodicity_check_independent(self, b1_params):
        res = find_periodic(b1_params, 1.0, tol=1e-10)
        assert periodicity_residual(b1_params, res.final_segment) <= 1e-9

    def test_b2_case(self):
        p = const_params(r=1.5, K=1.0, theta=0.5, T=1.0)
        res = find_periodic(p, 0.2, tol=1e-9)
        assert np.max(np.abs(res.final_segment.samples - equilibrium(p))) < 1e-8

    def test_iterates_positive(self):
        p = ModelParams(gamma=3, r=Cosine(4, 1, 2, 0.25), eta=Constant(1), K=Cosine(1.5, 0.5, 2, 0.75),
                        theta=Constant(0.5), T=1.0)
        res = find_periodic(p, 0.3, tol=1e-8, max_iter=400)
        assert np.all(res.trajectory_one_period.N > 0)
        assert np.all(res.final_segment.samples > 0)
