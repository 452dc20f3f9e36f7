"""Frequency grids, spectral amplitudes and the time <-> frequency transform.

Sign convention: frequency -> time uses ``exp(+j omega t)``,

    s(t) = 1/sqrt(2 pi) * integral A(omega) exp(+j (omega - omega_c) t) d omega,

discretised so that ``sum |A|^2 d omega == sum |s|^2 dt`` holds exactly
(unitary in the continuous-energy sense). Time samples sit on
``t_m = (m - N/2) dt`` and detunings on ``(k - N/2) d omega``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Ambiguous, GridMismatch, GridTooNarrow, NoPeak
from .units import TWO_PI, bandwidth_nm_to_omega, wavelength_to_omega

_SQRT_2PI = np.sqrt(TWO_PI)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency grid (rad/ps) centred on ``center``."""

    center: float
    spacing: float
    count: int

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        n = int(self.count)
        if n < 2 or n & (n - 1):
            raise ValueError(f"grid count must be a power of two >= 2, got {self.count}")
        object.__setattr__(self, "count", n)

    @classmethod
    def for_window(cls, center, window_ps, count=2**14):
        """Grid whose implied time window is ``window_ps``."""
        return cls(center=float(center), spacing=TWO_PI / window_ps, count=count)

    @property
    def detuning(self):
        return (np.arange(self.count) - self.count // 2) * self.spacing

    @property
    def omega(self):
        return self.center + self.detuning

    @property
    def time_window(self):
        return TWO_PI / self.spacing

    @property
    def dt(self):
        return TWO_PI / (self.spacing * self.count)

    @property
    def times(self):
        return (np.arange(self.count) - self.count // 2) * self.dt

    @property
    def span(self):
        return self.omega[0], self.omega[-1]

    def shifted(self, center):
        return FrequencyGrid(center=float(center), spacing=self.spacing, count=self.count)


@dataclass
class SpectralAmplitude:
    grid: FrequencyGrid
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.count,):
            raise GridMismatch(
                f"{self.values.shape[0] if self.values.ndim else 0} samples for a "
                f"{self.grid.count}-point grid"
            )

    @property
    def omega(self):
        return self.grid.omega

    @property
    def intensity(self):
        return np.abs(self.values) ** 2

    @property
    def energy(self):
        return float(np.sum(self.intensity) * self.grid.spacing)

    def normalized(self):
        e = self.energy
        if not e > 0:
            raise ValueError("cannot normalise a zero-energy spectrum")
        return SpectralAmplitude(self.grid, self.values / np.sqrt(e), dict(self.metadata))

    def centroid(self):
        w = self.intensity
        return float(np.sum(self.omega * w) / np.sum(w))


@dataclass
class TemporalProfile:
    """Complex envelope sampled at ``t0 + m dt`` (ps)."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)

    @property
    def times(self):
        return self.t0 + np.arange(self.values.shape[0]) * self.dt

    @property
    def intensity(self):
        return np.abs(self.values) ** 2

    @property
    def energy(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.dt)

    def normalized(self):
        return TemporalProfile(self.t0, self.dt, self.values / np.sqrt(self.energy))


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def gaussian_spectrum(grid: FrequencyGrid, center_um, fwhm_um) -> SpectralAmplitude:
    """Unit-energy Gaussian amplitude with intensity FWHM ``fwhm_um`` at ``center_um``.

    The wavelength FWHM is converted to angular frequency at the centre
    wavelength. Raises :class:`GridTooNarrow` when +-3 sigma of the amplitude
    does not fit in the grid.
    """
    if not fwhm_um > 0:
        raise ValueError("bandwidth must be positive")
    w0 = wavelength_to_omega(center_um)
    dw = bandwidth_nm_to_omega(center_um, fwhm_um)
    lo, hi = grid.span
    if not lo <= w0 <= hi:
        raise GridTooNarrow(f"centre {w0:.6g} rad/ps outside grid [{lo:.6g}, {hi:.6g}]")
    sigma_amp = dw / (2.0 * np.sqrt(np.log(2.0)))
    if w0 - 3 * sigma_amp < lo or w0 + 3 * sigma_amp > hi:
        raise GridTooNarrow(
            f"+-3 sigma support ({6 * sigma_amp:.4g} rad/ps) exceeds grid span "
            f"[{lo:.6g}, {hi:.6g}]"
        )
    values = np.exp(-2.0 * np.log(2.0) * (grid.omega - w0) ** 2 / dw**2)
    meta = {"shape": "gaussian", "center_um": center_um, "fwhm_um": fwhm_um,
            "fwhm_omega": dw}
    return SpectralAmplitude(grid, values, meta).normalized()


def pdc_heralded_marginal(grid, center_um, signal_fwhm_um, pdc_pump_fwhm_um,
                          decorrelation_fwhm_um=0.003):
    """Heralded-photon marginal of a spectrally decorrelated PDC source.

    Modelled as a transform-limited Gaussian; the PDC pump bandwidth only
    feeds the ``decorrelated`` flag in the metadata.
    """
    f = gaussian_spectrum(grid, center_um, signal_fwhm_um)
    f.metadata.update(
        pdc_pump_fwhm_um=pdc_pump_fwhm_um,
        decorrelated=bool(abs(pdc_pump_fwhm_um - decorrelation_fwhm_um) <= 1e-12),
    )
    return f


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def to_time_domain(f: SpectralAmplitude) -> TemporalProfile:
    grid = f.grid
    n = grid.count
    s = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(f.values))) * (n * grid.spacing / _SQRT_2PI)
    return TemporalProfile(t0=-(n // 2) * grid.dt, dt=grid.dt, values=s)


def to_frequency_domain(s: TemporalProfile, grid: FrequencyGrid) -> SpectralAmplitude:
    n = grid.count
    if s.values.shape != (n,) or not np.isclose(s.dt, grid.dt, rtol=1e-12, atol=0):
        raise GridMismatch("temporal profile is not sampled on this grid's time axis")
    a = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(s.values))) * (grid.dt / _SQRT_2PI)
    return SpectralAmplitude(grid, a)


# ---------------------------------------------------------------------------
# widths
# ---------------------------------------------------------------------------

def fwhm(profile, dt=None, x=None):
    """Full width at half maximum of an intensity curve.

    ``profile`` is a :class:`TemporalProfile` (width in ps), a
    :class:`SpectralAmplitude` (width in rad/ps) or a real intensity array,
    in which case pass either the sample spacing ``dt`` or the abscissa ``x``.
    Crossings are the outermost half-maximum crossings, linearly
    interpolated.
    """
    if isinstance(profile, TemporalProfile):
        y, x = profile.intensity, profile.times
    elif isinstance(profile, SpectralAmplitude):
        y, x = profile.intensity, profile.omega
    else:
        y = np.asarray(profile, dtype=float)
        if x is None:
            x = np.arange(y.size) * (1.0 if dt is None else dt)
        x = np.asarray(x, dtype=float)
    peak = y.max()
    if not np.isfinite(peak) or np.all(y == y[0]):
        raise NoPeak("intensity is flat")
    half = 0.5 * peak
    above = np.flatnonzero(y >= half)
    i0, i1 = above[0], above[-1]
    if i0 == 0 or i1 == y.size - 1:
        raise Ambiguous("intensity does not fall below half maximum inside the window")
    left = x[i0 - 1] + (half - y[i0 - 1]) * (x[i0] - x[i0 - 1]) / (y[i0] - y[i0 - 1])
    right = x[i1] + (half - y[i1]) * (x[i1 + 1] - x[i1]) / (y[i1 + 1] - y[i1])
    return float(right - left)
