import os
import sys

# Must be set before config is imported: the engine binds at import time.
os.environ["DATABASE_URL"] = "sqlite:///:memory:"
os.environ.setdefault("FFINCIDENCE_WORKERS", "1")

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import pytest

from app.engine.gf_module import build_field, field_for_order


@pytest.fixture(scope="session")
def gf2():
    return build_field(2)


@pytest.fixture(scope="session")
def gf3():
    return build_field(3)


@pytest.fixture(scope="session")
def gf4():
    return build_field(2, 2)


@pytest.fixture(scope="session")
def gf5():
    return build_field(5)


@pytest.fixture(params=[2, 3, 4, 5], scope="session")
def small_field(request):
    return field_for_order(request.param)
