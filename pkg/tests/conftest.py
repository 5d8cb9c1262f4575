import os

import pytest


def pytest_configure(config):
    # a shared cache keeps repeated runs fast; override with TWISTLAB_CACHE_DIR
    os.environ.setdefault("TWISTLAB_CACHE_DIR", os.path.join(str(config.rootpath), ".twistlab-cache"))


@pytest.fixture(scope="session")
def curve():
    from twistlab.curve import default_curve

    return default_curve()


@pytest.fixture(scope="session")
def cls17(curve):
    from twistlab.discriminants import TwistClass

    return TwistClass(curve, 1, 17)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in range(1, 11):
        ok, detail = RESULTS.get(num, (False, "did not complete"))
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
