import importlib

import numpy as np
import pytest

from nrsector.operators import paper_generator, standard_fleet

P_VALUES = (1.1, 1.5, 2.0, 3.0, 4.0, 10.0)


def _kernel_modules():
    mods = [pytest.param(importlib.import_module("nrsector._fallback"), id="python")]
    try:
        mods.append(pytest.param(importlib.import_module("nrsector._kernels"), id="compiled"))
    except ImportError:
        mods.append(pytest.param(None, id="compiled",
                                 marks=pytest.mark.skip(reason="extension not built")))
    return mods


@pytest.fixture(params=_kernel_modules())
def kernels(request):
    return request.param


@pytest.fixture(scope="session")
def two_atom():
    return paper_generator()


@pytest.fixture(scope="session")
def fleet():
    return standard_fleet()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
