import numpy as np
import pytest
import sympy as sp
from scipy.integrate import solve_ivp

from harvest_dde import (
    Constant,
    Cosine,
    History,
    IntegrationConfig,
    InvalidDelay,
    ModelParams,
    OutOfRange,
    PositivityLoss,
    SeasonalPulse,
    integrate,
    integrate_generic,
)
from harvest_dde import dde_core

from conftest import const_params, linear_test_exact


def linear_test(h, t_end=3.0):
    return integrate_generic(lambda t, y, y_lag: -y_lag, Constant(1.0), History(Constant(1.0), 1.0),
                             IntegrationConfig(h=h, t_end=t_end))


@pytest.fixture(scope="module")
def exp_history_exact():
    """Method-of-steps closed form of y' = -y(t-1) with y = e^t on t <= 0, built symbolically."""
    t, s = sp.symbols("t s")
    piece, y0, fns = sp.exp(t), sp.Integer(1), []
    for k in range(3):
        yk = y0 - sp.integrate(piece.subs(t, s - 1), (s, k, t))
        fns.append(sp.lambdify(t, yk, "numpy"))
        y0, piece = yk.subs(t, k + 1), yk

    def exact(x):
        x = np.asarray(x, dtype=float)
        return np.select([x <= 1, x <= 2], [fns[0](x), fns[1](x)], fns[2](x))

    return exact


class TestLinearTestSystem:
    @pytest.mark.parametrize("t,expected", [(1.0, 0.0), (2.0, -0.5), (3.0, -1 / 6)])
    def test_breaking_point_values(self, t, expected):
        assert linear_test(1 / 64)(t) == pytest.approx(expected, abs=1e-8)

    def test_dense_output_midpoint(self):
        assert linear_test(1 / 64)(0.5) == pytest.approx(0.5, abs=1e-10)

    def test_dense_output_everywhere(self):
        ts = np.linspace(0, 3, 1201)
        assert np.max(np.abs(linear_test(1 / 16)(ts) - linear_test_exact(ts))) < 1e-12

    def test_order_nonpolynomial_history(self, exp_history_exact):
        ts = np.linspace(0, 3, 769)
        errs = []
        for k in (3, 4, 5, 6):
            tr = integrate_generic(lambda t, y, y_lag: -y_lag, Constant(1.0), History(np.exp, 1.0),
                                   IntegrationConfig(h=2.0**-k, t_end=3.0))
            errs.append(np.max(np.abs(tr(ts) - exp_history_exact(ts))))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(ratios >= 8), ratios


class TestTrajectory:
    def test_nodes_exact(self, eq_params):
        tr = integrate(eq_params, History(Constant(0.5), 0.5), IntegrationConfig(1 / 32, 5))
        for ti, Ni, _ in tr.nodes[::7]:
            assert tr(ti) == Ni

    def test_history_lookup(self):
        tr = integrate(const_params(), History(Constant(0.7), 0.7), IntegrationConfig(1 / 32, 2))
        assert tr(-3.0) == 0.7
        assert tr(0.0) == 0.7

    def test_out_of_range(self, eq_params, unit_history):
        tr = integrate(eq_params, unit_history, IntegrationConfig(1 / 32, 2))
        with pytest.raises(OutOfRange):
            tr(2.5)

    def test_equispaced(self, eq_params, unit_history):
        tr = integrate(eq_params, unit_history, IntegrationConfig(1 / 32, 2))
        assert np.all(np.diff(tr.t) == 1 / 32)

    def test_immutable(self, eq_params, unit_history):
        tr = integrate(eq_params, unit_history, IntegrationConfig(1 / 32, 2))
        with pytest.raises(ValueError):
            tr.N[0] = 3.0

    def test_csv(self, tmp_path, eq_params):
        tr = integrate(eq_params, History(Constant(0.5), 0.5), IntegrationConfig(0.25, 1))
        p = tmp_path / "traj.csv"
        tr.to_csv(p, oversample=2)
        lines = p.read_text().splitlines()
        assert lines[0] == "t,N"
        assert len(lines) == 1 + 9
        t, N = map(float, lines[3].split(","))
        assert t == 0.25 and N == tr.N[1]


class TestHarvestModel:
    def test_equilibrium_stays(self, eq_params, unit_history):
        tr = integrate(eq_params, unit_history, IntegrationConfig(1 / 64, 100))
        assert np.max(np.abs(tr.N - 1.0)) <= 1e-9

    def test_approach_to_equilibrium(self, eq_params):
        hist = History(Constant(0.5), 0.5)
        tr = integrate(eq_params, hist, IntegrationConfig(1 / 64, 50))
        half = integrate(eq_params, hist, IntegrationConfig(1 / 128, 50))
        late = tr.t >= 10
        assert np.all(tr.N[late] >= np.exp(-0.5)) and np.all(tr.N[late] <= np.exp(0.5))
        assert abs(tr.N[-1] - half.N[-1]) < 1e-6
        assert abs(tr.N[-1] - 1.0) < 1e-6

    def test_grid_refinement_consistency(self):
        # C measured once at 0.06 over h = 1/16 .. 1/128 and pinned at 0.1
        p = ModelParams(gamma=2, r=Cosine(2, 0.5, 2, 0.25), eta=Constant(1), lam=SeasonalPulse(),
                        K=Cosine(1, 0.25, 2, 0.75), theta=Constant(0.25), T=1)
        hist = History(Constant(0.8), 0.8)
        for k in (4, 5, 6, 7):
            h = 2.0**-k
            a = integrate(p, hist, IntegrationConfig(h, 20))
            b = integrate(p, hist, IntegrationConfig(h / 2, 20))
            assert np.max(np.abs(a.N - b.N[::2])) <= 0.1 * h**3

    def test_backends_agree(self):
        if dde_core._march_hill_ext is None:
            pytest.skip("compiled kernel unavailable")
        p = ModelParams(gamma=1.5, r=Cosine(2, 0.5, 2, 0.25), eta=Constant(1), lam=SeasonalPulse(),
                        K=Cosine(1, 0.25, 2, 0.75), theta=Cosine(0.3, 0.1, 2, 0.0), T=1)
        hist = History(Constant(0.6), 0.9)
        cfg = IntegrationConfig(1 / 64, 30)
        a = integrate(p, hist, cfg, backend="python")
        b = integrate(p, hist, cfg, backend="cython")
        np.testing.assert_allclose(a.N, b.N, rtol=0, atol=1e-13)
        np.testing.assert_allclose(a.D, b.D, rtol=0, atol=1e-13)

    def test_zero_delay_matches_ode(self):
        p = ModelParams(gamma=2, r=Cosine(2, 0.5, 2, 0.25), eta=Constant(1),
                        K=Cosine(1, 0.25, 2, 0.75), theta=Constant(0.0))
        sol = solve_ivp(lambda t, y: [(p.r(t) / (1 + (y[0] / p.K(t)) ** 2) - p.b(t)) * y[0]],
                        (0, 10), [0.5], rtol=1e-12, atol=1e-14, dense_output=True)
        tr = integrate(p, History(Constant(0.5), 0.5), IntegrationConfig(1 / 64, 10))
        assert np.max(np.abs(tr.N - sol.sol(tr.t)[0])) < 1e-8

    def test_delay_shorter_than_step(self):
        p = ModelParams(gamma=2, r=Cosine(2, 0.5, 2, 0.25), eta=Constant(1),
                        K=Cosine(1, 0.25, 2, 0.75), theta=Constant(0.01))
        hist = History(Constant(0.5), 0.5)
        fine = integrate(p, hist, IntegrationConfig(1 / 1024, 10))
        coarse = integrate(p, hist, IntegrationConfig(1 / 64, 10))
        assert np.max(np.abs(coarse.N - fine(coarse.t))) < 1e-6

    def test_positivity_loss(self):
        # b = 30 wipes out the stock faster than an RK4 step of 0.5 can follow
        p = const_params(r=31.0, eta=30.0, K=1e-3, theta=1.0)
        with pytest.raises(PositivityLoss) as info:
            integrate(p, History(Constant(1.0), 1.0), IntegrationConfig(0.5, 5))
        assert info.value.t > 0

    def test_positivity_floor(self, eq_params):
        with pytest.raises(PositivityLoss):
            integrate(eq_params, History(Constant(0.5), 0.5),
                      IntegrationConfig(1 / 64, 5, positivity_floor=0.6))

    def test_invalid_delay(self):
        p = const_params(theta=-0.5)
        with pytest.raises(InvalidDelay):
            integrate(p, History(Constant(1.0), 1.0), IntegrationConfig(1 / 64, 1))

    @pytest.mark.parametrize("backend", ["python", "cython"])
    def test_every_node_positive(self, backend):
        if backend == "cython" and dde_core._march_hill_ext is None:
            pytest.skip("compiled kernel unavailable")
        p = ModelParams(gamma=4, r=Constant(5), eta=Constant(1), K=Constant(1), theta=Constant(1.5))
        tr = integrate(p, History(Constant(0.05), 0.05), IntegrationConfig(1 / 64, 60), backend=backend)
        assert np.all(tr.N > 0)
