import os
import subprocess
import sys

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpgstreak import kernels
from qpgstreak._accel import USE_NUMBA

needs_numba = pytest.mark.skipif(not USE_NUMBA, reason="numba unavailable or disabled")


def direct_circular(c, p):
    n = c.size
    return np.array([sum(c[j] * p[(m - j + n // 2) % n] for j in range(n)) for m in range(n)])


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_circular_convolution_numpy_matches_definition(log_n, seed):
    n = 2**log_n
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    p = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.allclose(kernels.circular_convolve_centered_np(c, p), direct_circular(c, p),
                       atol=1e-12)


@needs_numba
@given(st.integers(1, 9), st.integers(0, 2**31))
def test_circular_convolution_numba_matches_numpy(log_n, seed):
    n = 2**log_n
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    p = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = kernels.circular_convolve_centered_nb(c, p)
    b = kernels.circular_convolve_centered_np(c, p)
    assert np.allclose(a, b, atol=1e-10)
    assert np.allclose(kernels.circular_convolve_centered(c, p, use_numba=True), b, atol=1e-10)


def test_circular_convolution_shape_check():
    with pytest.raises(ValueError):
        kernels.circular_convolve_centered(np.ones(4), np.ones(8))


def profile_case(seed, n_nodes=40, n_dk=64):
    rng = np.random.default_rng(seed)
    z = np.sort(rng.uniform(0, 2e4, n_nodes))
    z[3] = z[2]  # a zero-width segment (step)
    g = rng.normal(size=n_nodes) + 1j * rng.normal(size=n_nodes)
    g[10:14] = 0
    dk = np.concatenate([rng.normal(0, 1e-2, n_dk), [0.0, 1e-9, -1e-7]])
    return dk, z, g


@given(st.integers(0, 2**31))
def test_filon_numpy_is_exact_for_linear_segments(seed):
    dk, z, g = profile_case(seed, n_nodes=6, n_dk=8)
    got = kernels.filon_profile_np(dk, z, g)
    # independent: each linear segment integrated in closed form at 30 digits
    mp.mp.dps = 30
    exp = np.zeros(dk.size, complex)
    for i, k in enumerate(dk):
        k = mp.mpf(float(k))
        acc = mp.mpc(0)
        for a, b, ga, gb in zip(z[:-1], z[1:], g[:-1], g[1:]):
            a, b = mp.mpf(float(a)), mp.mpf(float(b))
            if b == a:
                continue
            ga, gb = mp.mpc(complex(ga)), mp.mpc(complex(gb))
            if k == 0:
                acc += (b - a) * (ga + gb) / 2
                continue
            ea, eb = mp.expj(k * a), mp.expj(k * b)
            slope = (gb - ga) / (b - a)
            # int (ga + slope (z - a)) e^{jkz} dz
            acc += (gb * eb - ga * ea) / (1j * k) - slope * (eb - ea) / (1j * k) ** 2
        exp[i] = complex(acc)
    scale = np.sum(np.abs(g[:-1]) * np.diff(z))
    assert np.max(np.abs(got - exp)) < 1e-10 * scale


@needs_numba
@given(st.integers(0, 2**31))
def test_filon_numba_matches_numpy(seed):
    dk, z, g = profile_case(seed)
    a = kernels.filon_profile_nb(dk, z, g)
    b = kernels.filon_profile_np(dk, z, g)
    scale = np.sum(np.abs(g[:-1]) * np.diff(z))
    assert np.max(np.abs(a - b)) < 1e-12 * scale


@given(st.integers(0, 2**31), st.integers(1, 12))
def test_binned_std_numpy_matches_loop(seed, nbins):
    rng = np.random.default_rng(seed)
    bins = np.sort(rng.integers(0, nbins, 50))
    vals = rng.normal(size=50)
    got = kernels.binned_std_np(vals, bins, nbins)
    for b in np.unique(bins):
        members = vals[bins == b]
        want = members.std(ddof=1) if members.size > 1 else 0.0
        assert np.allclose(got[bins == b], want, atol=1e-12)


@needs_numba
@given(st.integers(0, 2**31), st.integers(1, 12))
def test_binned_std_numba_matches_numpy(seed, nbins):
    rng = np.random.default_rng(seed)
    bins = rng.integers(0, nbins, 80)
    vals = rng.normal(size=80) * 1e3
    assert np.allclose(kernels.binned_std_nb(vals, bins, nbins),
                       kernels.binned_std_np(vals, bins, nbins), rtol=1e-12, atol=1e-9)


def test_env_flag_disables_numba():
    env = dict(os.environ, QPGSTREAK_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c",
                          "from qpgstreak._accel import USE_NUMBA; print(USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
