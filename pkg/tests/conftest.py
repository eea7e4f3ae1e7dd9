import numpy as np
import pytest

from harvest_dde import Constant, Cosine, History, ModelParams


def const_params(r=2.0, eta=1.0, lam=0.0, K=1.0, gamma=1.0, theta=0.5, T=None):
    return ModelParams(gamma=gamma, r=Constant(r), eta=Constant(eta), lam=Constant(lam),
                       K=Constant(K), theta=Constant(theta), T=T)


def linear_test_exact(t):
    """Closed form of y' = -y(t-1), y = 1 on t <= 0, on [0, 3] (method of steps by hand)."""
    t = np.asarray(t, dtype=float)
    return np.select(
        [t <= 0, t <= 1, t <= 2],
        [1.0, 1.0 - t, t**2 / 2 - 2 * t + 1.5],
        -t**3 / 6 + 1.5 * t**2 - 4 * t + 17 / 6,
    )


@pytest.fixture
def eq_params():
    return const_params()


@pytest.fixture
def cosine_K_params():
    return ModelParams(gamma=1.0, r=Constant(2.0), eta=Constant(1.0), K=Cosine(1.0, 0.25, 2.0, 0.75),
                       theta=Constant(0.25), T=1.0)


@pytest.fixture
def unit_history():
    return History(Constant(1.0), 1.0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.call_report = rep


@pytest.fixture
def criterion(request, capsys):
    """Print one PASS/FAIL line for an acceptance criterion after the test body runs."""
    yield
    rep = getattr(request.node, "call_report", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    label = request.node.get_closest_marker("criterion")
    name = label.args[0] if label else request.node.name
    with capsys.disabled():
        print(f"\n[{status}] {name}")
