import numpy as np
import pytest

from rwre_duality import _fallback
from rwre_duality.environment import IID, EnvironmentWindow, LogUniform, Uniform

try:
    from rwre_duality import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [pytest.param(_fallback, id="python")]
BACKENDS.append(pytest.param(_ckernels, id="cython",
                             marks=pytest.mark.skipif(_ckernels is None, reason="extension not built")))

P_MODEL = IID(Uniform(0.05, 0.95))
C_MODEL = IID(LogUniform(0.1, 10.0))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def constant_env(p, lo=-50, hi=50):
    return EnvironmentWindow(lo, np.full(hi - lo + 1, p))
