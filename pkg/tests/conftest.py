import pytest

from cosyflat.families import build_kappa0, build_kappa_nonzero, build_product, build_z2, default_domain

ACCEPTANCE: list[tuple[int, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    ACCEPTANCE.append((number, title, "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, verdict in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d} {verdict}: {title}")


@pytest.fixture(scope="session")
def domain():
    return default_domain()


@pytest.fixture(scope="session")
def grid(domain):
    return domain.grid((5, 5, 5))


@pytest.fixture(scope="session")
def coarse_grid(domain):
    return domain.grid((3, 3, 3))


@pytest.fixture(scope="session")
def z2():
    return build_z2(1.0)


@pytest.fixture(scope="session")
def kappa_neg():
    return build_kappa_nonzero(-1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def kappa0():
    return build_kappa0("1+x^2", 1.0, 2.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def product_flat():
    return build_product(0.0)


@pytest.fixture(scope="session")
def product_curved():
    return build_product(1.0)


@pytest.fixture(scope="session")
def all_families(z2, kappa_neg, kappa0, product_flat, product_curved):
    return {
        "z2": z2,
        "kappa_nonzero": kappa_neg,
        "kappa0": kappa0,
        "product_flat": product_flat,
        "product_curved": product_curved,
    }
