import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_density(rng: np.random.Generator, d: int = 3, rank: int | None = None) -> np.ndarray:
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def ket_strategy(d: int = 3):
    """Unnormalized complex vectors bounded away from zero."""
    comp = st.floats(-1, 1, allow_nan=False)
    return st.lists(st.tuples(comp, comp), min_size=d, max_size=d).map(
        lambda pairs: np.array([a + 1j * b for a, b in pairs])
    ).filter(lambda v: np.linalg.norm(v) > 1e-3)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion reported in the summary")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_terminal_summary(terminalreporter):
    results = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and getattr(rep, "when", None) in ("setup", "call"):
                key = tuple(props["criterion"])
                ok = rep.outcome == "passed"
                results[key] = results.get(key, True) and ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(results.items()):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
