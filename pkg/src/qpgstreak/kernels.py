"""Hot numeric kernels.

Every kernel exists twice: a numba-compiled loop (``*_nb``) and a vectorised
numpy version (``*_np``). The public names dispatch on
:data:`qpgstreak._accel.USE_NUMBA`; both variants are importable directly so
tests and ``benchmarks/`` can compare them.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

_SERIES_CUTOFF = 0.1
_SERIES_TERMS = 14


# ---------------------------------------------------------------------------
# oscillatory integral of a piecewise-linear profile
# ---------------------------------------------------------------------------

@njit
def _psi_phi_scalar(x):
    # psi0 = int_0^1 exp(jxs) ds ; phi = int_0^1 s exp(jxs) ds
    if abs(x) < _SERIES_CUTOFF:
        psi0 = 0.0 + 0.0j
        phi = 0.0 + 0.0j
        term = 1.0 + 0.0j  # (jx)^n / n!
        for n in range(_SERIES_TERMS):
            psi0 += term / (n + 1)
            phi += term / (n + 2)
            term = term * (1j * x) / (n + 1)
        return psi0, phi
    e = np.exp(1j * x)
    psi0 = (e - 1.0) / (1j * x)
    phi = (e * (1.0 - 1j * x) - 1.0) / (x * x)
    return psi0, phi


@njit
def filon_profile_nb(dk, z, g):
    n = dk.shape[0]
    m = z.shape[0] - 1
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        k = dk[i]
        acc = 0.0 + 0.0j
        for s in range(m):
            h = z[s + 1] - z[s]
            if h <= 0.0:
                continue
            ga = g[s]
            gb = g[s + 1]
            if ga == 0.0 and gb == 0.0:
                continue
            psi0, phi = _psi_phi_scalar(k * h)
            acc += np.exp(1j * k * z[s]) * h * (ga * psi0 + (gb - ga) * phi)
        out[i] = acc
    return out


def _psi_phi_np(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    psi0 = np.empty(x.shape, dtype=complex)
    phi = np.empty(x.shape, dtype=complex)
    xs = np.where(small, 1.0, x)
    e = np.exp(1j * xs)
    psi0[...] = (e - 1.0) / (1j * xs)
    phi[...] = (e * (1.0 - 1j * xs) - 1.0) / (xs * xs)
    if np.any(small):
        xv = x[small]
        p0 = np.zeros(xv.shape, dtype=complex)
        p1 = np.zeros(xv.shape, dtype=complex)
        term = np.ones(xv.shape, dtype=complex)
        for n in range(_SERIES_TERMS):
            p0 += term / (n + 1)
            p1 += term / (n + 2)
            term = term * (1j * xv) / (n + 1)
        psi0[small] = p0
        phi[small] = p1
    return psi0, phi


def filon_profile_np(dk, z, g, chunk=2048):
    dk = np.asarray(dk, dtype=float)
    z = np.asarray(z, dtype=float)
    g = np.asarray(g, dtype=complex)
    h = np.diff(z)
    ga, gb = g[:-1], g[1:]
    keep = (h > 0) & ((ga != 0) | (gb != 0))
    h, za, ga, gb = h[keep], z[:-1][keep], ga[keep], gb[keep]
    out = np.empty(dk.shape, dtype=complex)
    for start in range(0, dk.size, chunk):
        k = dk[start:start + chunk, None]
        psi0, phi = _psi_phi_np(k * h[None, :])
        seg = np.exp(1j * k * za[None, :]) * h * (ga * psi0 + (gb - ga) * phi)
        out[start:start + chunk] = seg.sum(axis=1)
    return out


def filon_profile(dk, z, g):
    """``sum_s int_{z_s}^{z_s+1} g_lin(z) exp(j dk z) dz`` for every ``dk``.

    ``g_lin`` is the linear interpolant of the samples ``g`` at nodes ``z``;
    the oscillatory factor is integrated exactly, so piecewise-constant and
    piecewise-linear profiles carry no quadrature error.
    """
    dk = np.ascontiguousarray(dk, dtype=np.float64).ravel()
    z = np.ascontiguousarray(z, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.complex128)
    if USE_NUMBA:
        return filon_profile_nb(dk, z, g)
    return filon_profile_np(dk, z, g)


# ---------------------------------------------------------------------------
# centred circular convolution on a periodic time grid
# ---------------------------------------------------------------------------

@njit
def circular_convolve_centered_nb(c, p):
    n = c.shape[0]
    half = n // 2
    # unroll p once so the inner loop is a contiguous dot product:
    # q[i] = p[(i - n + 1 + half) mod n], out[m] = sum_j c[j] q[m - j + n - 1]
    q = np.empty(2 * n - 1, dtype=np.complex128)
    for i in range(2 * n - 1):
        q[i] = p[(i - n + 1 + half) % n]
    out = np.zeros(n, dtype=np.complex128)
    for m in range(n):
        acc = 0.0 + 0.0j
        base = m + n - 1
        for j in range(n):
            acc += c[j] * q[base - j]
        out[m] = acc
    return out


def circular_convolve_centered_np(c, p):
    n = c.shape[0]
    half = n // 2
    # q[i] = p[(i + half) mod n] for i in -(n-1) .. n-1
    i = np.arange(-(n - 1), n)
    q = p[(i + half) % n]
    full = np.convolve(c, q)
    return full[n - 1:2 * n - 1]


def circular_convolve_centered(c, p, use_numba=False):
    """``out[m] = sum_j c[j] p[(m - j + n/2) mod n]``.

    Direct O(n^2) evaluation (no transforms) of the circular convolution of
    two profiles sampled on the same centred, periodic time grid.
    ``np.convolve`` already runs a compiled loop and beats the numba variant
    by about 2x (see ``benchmarks/``), so it is used unless ``use_numba``
    is forced.
    """
    c = np.ascontiguousarray(c, dtype=np.complex128)
    p = np.ascontiguousarray(p, dtype=np.complex128)
    if c.shape != p.shape:
        raise ValueError("operands must have equal length")
    if use_numba and USE_NUMBA:
        return circular_convolve_centered_nb(c, p)
    return circular_convolve_centered_np(c, p)


# ---------------------------------------------------------------------------
# per-bin sample standard deviation
# ---------------------------------------------------------------------------

@njit
def binned_std_nb(values, bins, nbins):
    count = np.zeros(nbins)
    mean = np.zeros(nbins)
    m2 = np.zeros(nbins)
    for i in range(values.shape[0]):
        b = bins[i]
        count[b] += 1.0
        delta = values[i] - mean[b]
        mean[b] += delta / count[b]
        m2[b] += delta * (values[i] - mean[b])
    std = np.zeros(nbins)
    for b in range(nbins):
        if count[b] > 1.0:
            std[b] = np.sqrt(m2[b] / (count[b] - 1.0))
    out = np.empty(values.shape[0])
    for i in range(values.shape[0]):
        out[i] = std[bins[i]]
    return out


def binned_std_np(values, bins, nbins):
    count = np.bincount(bins, minlength=nbins).astype(float)
    total = np.bincount(bins, weights=values, minlength=nbins)
    mean = np.divide(total, count, out=np.zeros(nbins), where=count > 0)
    dev2 = np.bincount(bins, weights=(values - mean[bins]) ** 2, minlength=nbins)
    var = np.divide(dev2, count - 1.0, out=np.zeros(nbins), where=count > 1)
    return np.sqrt(var)[bins]


def binned_std(values, bins, nbins):
    """Sample standard deviation (ddof=1) of each bin, broadcast back to its members.

    Bins with a single member get 0.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    bins = np.ascontiguousarray(bins, dtype=np.int64)
    if USE_NUMBA:
        return binned_std_nb(values, bins, int(nbins))
    return binned_std_np(values, bins, int(nbins))
