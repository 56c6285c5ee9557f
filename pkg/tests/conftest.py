import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from meshbool import kernel


def pytest_addoption(parser):
    parser.addoption(
        "--backend",
        default=None,
        help="restrict kernel backend parametrization (native or python)",
    )


@pytest.fixture(params=["native", "python"])
def backend(request):
    """Run a test under each available kernel backend."""
    name = request.param
    forced = request.config.getoption("--backend")
    if forced and name != forced:
        pytest.skip(f"backend restricted to {forced}")
    if name not in kernel.available_backends():
        pytest.skip(f"backend {name} not built")
    previous = kernel.backend_name()
    kernel.use_backend(name)
    yield name
    kernel.use_backend(previous)
