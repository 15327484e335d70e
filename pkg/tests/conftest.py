import pytest

from ttdyn.inputs import load_automorphism, load_system, load_toprep


def naive_reduce(w):
    """Repeatedly scan for an adjacent inverse pair and delete it."""
    w = list(w)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] != w[i + 1] and w[i].lower() == w[i + 1].lower():
                del w[i:i + 2]
                changed = True
                break
    return "".join(w)


@pytest.fixture(scope="session")
def gold():
    return load_toprep("f3gold.json")


@pytest.fixture(scope="session")
def gold_inv():
    return load_toprep("f3gold_inv.json")


@pytest.fixture(scope="session")
def twist():
    return load_toprep("f4twist.json")


@pytest.fixture(scope="session")
def twist_inv():
    return load_toprep("f4twist_inv.json")


@pytest.fixture(scope="session")
def fib():
    return load_toprep("fib2.json")


@pytest.fixture(scope="session")
def k_a():
    return load_system("k_a.json")


@pytest.fixture(scope="session")
def gold_aut():
    return load_automorphism("f3gold.json")


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
