import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermibell import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _table(seed, shape=(24, 48)):
    return np.random.default_rng(seed).uniform(-1, 1, shape)


def _brute_force(f):
    best = -1.0
    for i in range(f.shape[0]):
        for i2 in range(f.shape[0]):
            for j in range(f.shape[1]):
                for j2 in range(f.shape[1]):
                    best = max(best, abs(f[i, j] - f[i, j2]) + abs(f[i2, j] + f[i2, j2]))
    return best


@pytest.mark.parametrize("seed", range(3))
def test_grid_search_matches_brute_force(seed):
    f = _table(seed, (5, 7))
    v, i, i2, j, j2 = _kernels.grid_search(f, backend="numpy")
    assert v == pytest.approx(_brute_force(f), abs=1e-15)
    assert v == pytest.approx(abs(f[i, j] - f[i, j2]) + abs(f[i2, j] + f[i2, j2]), abs=1e-15)


@given(st.integers(0, 2**31))
def test_grid_search_numpy_matches_loops(seed):
    f = _table(seed)
    assert _kernels._grid_search_numpy(f) == pytest.approx(_kernels._grid_search_loops(f))


@needs_numba
@given(st.integers(0, 2**31))
def test_grid_backends_identical(seed):
    f = _table(seed)
    assert _kernels.grid_search(f, backend="numpy") == _kernels.grid_search(f, backend="numba")


@needs_numba
@given(st.integers(0, 2**31))
def test_ascent_backends_agree(seed):
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(3, 3))
    x0 = rng.uniform(0, math.pi, 8)
    v1, x1 = _kernels.coordinate_ascent(t, x0, backend="numpy")
    v2, x2 = _kernels.coordinate_ascent(t, x0, backend="numba")
    assert v1 == pytest.approx(v2, abs=1e-12)
    # maximizers form a manifold, so only each backend's own point is checked
    for v, x in ((v1, x1), (v2, x2)):
        assert float(_kernels._chsh_at_numpy(t, x[None, :])[0]) == pytest.approx(v, abs=1e-12)


def test_ascent_never_decreases_and_converges_on_singlet_tensor():
    t = -np.eye(3)
    x0 = np.full(8, 0.4)
    start = float(_kernels._chsh_at_numpy(t, x0[None, :])[0])
    v, x = _kernels.coordinate_ascent(t, x0, backend="numpy")
    assert v >= start
    assert v == pytest.approx(2 * math.sqrt(2), abs=1e-9)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.grid_search(_table(0), backend="cuda")


def test_env_flag_disables_numba():
    code = "from fermibell import _kernels; print(_kernels.USE_NUMBA, _kernels._pick(None))"
    env = dict(os.environ, FERMIBELL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    assert out == ["False", "numpy"]
