import sys
import numpy as np
import pytest

from weatdebias import _accel
from weatdebias.vecspace import Embedding, WordSet
from weatdebias.weat import WeatTest


def emb(mapping):
    """Embedding from {word: vector} in insertion order."""
    return Embedding(list(mapping), np.array(list(mapping.values()), dtype=float))


def random_weat(rng, n_x, n_y, n_a, n_b, dim):
    """Random embedding plus a WEAT test over disjoint word sets."""
    names = ([f"x{i}" for i in range(n_x)] + [f"y{i}" for i in range(n_y)]
             + [f"a{i}" for i in range(n_a)] + [f"b{i}" for i in range(n_b)])
    e = Embedding(names, rng.standard_normal((len(names), dim)))
    t = WeatTest(
        WordSet("X", names[:n_x]),
        WordSet("Y", names[n_x:n_x + n_y]),
        WordSet("A", names[n_x + n_y:n_x + n_y + n_a]),
        WordSet("B", names[n_x + n_y + n_a:]),
        class_name="c",
    )
    return e, t


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    prev = _accel.get_backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(prev)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
