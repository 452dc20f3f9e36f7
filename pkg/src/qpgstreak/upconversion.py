"""Converted-field spectrum and temporal envelope of the up-conversion
process, evaluated two independent ways, plus efficiency bookkeeping.

Direct path::

    A(w) = L * C(w) * Phi(dk0 + alpha w)        s(t) = FT[A](t)

Convolution path::

    s(t) = FT[C] (*) FT[Phi]                    (direct O(N^2) time convolution)

``C(w) = int F1(w - w2) F2(w2) exp(-j w2 tau) dw2`` is the spectral overlap,
``w`` the detuning from the output carrier and ``alpha = k'_out - k'_in``.
The overall scale is not physical: outputs are unit energy and the raw
energy is kept in ``metadata["raw_energy"]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import GridMismatch
from .fields import (FrequencyGrid, SpectralAmplitude, TemporalProfile, fwhm,
                     to_time_domain)
from .phasematching import (Process, carrier_mismatch, group_velocity_mismatch,
                            phasematching_function)
from .units import TWO_PI, bandwidth_omega_to_um, omega_to_wavelength

_SQRT_2PI = math.sqrt(TWO_PI)


def output_grid(f1: SpectralAmplitude, f2: SpectralAmplitude) -> FrequencyGrid:
    return f1.grid.shifted(f1.grid.center + f2.grid.center)


def _check_grids(f1, f2, grid_out):
    g1, g2 = f1.grid, f2.grid
    if not (g1.count == g2.count == grid_out.count):
        raise GridMismatch("input, pump and output grids need equal point counts")
    if not (np.isclose(g1.spacing, g2.spacing, rtol=1e-12, atol=0)
            and np.isclose(g1.spacing, grid_out.spacing, rtol=1e-12, atol=0)):
        raise GridMismatch("input, pump and output grids need equal spacing")
    if abs(grid_out.center - (g1.center + g2.center)) > 1e-6 * g1.spacing:
        raise GridMismatch("output grid must be centred on the sum of input and pump centres")


def spectral_overlap(f1: SpectralAmplitude, f2: SpectralAmplitude, grid_out: FrequencyGrid,
                     delay_ps=0.0) -> SpectralAmplitude:
    """``C(w) = int F1(w - w2) F2(w2) exp(-j w2 tau) dw2`` on ``grid_out``.

    ``w2`` in the delay factor is the pump detuning. Linear convolution via
    zero-padded FFTs, so nothing wraps around.
    """
    _check_grids(f1, f2, grid_out)
    n = grid_out.count
    b = f2.values * np.exp(-1j * f2.grid.detuning * delay_ps)
    size = 2 * n
    full = np.fft.ifft(np.fft.fft(f1.values, size) * np.fft.fft(b, size))[:2 * n - 1]
    c = full[n // 2:n // 2 + n] * grid_out.spacing
    return SpectralAmplitude(grid_out, c, {"kind": "spectral_overlap", "delay_ps": delay_ps})


def phasematching_factor(p: Process, grid_out: FrequencyGrid, alpha=None, dk0=None):
    """``Phi(dk0 + alpha w)`` sampled on the output detuning axis."""
    alpha = group_velocity_mismatch(p) if alpha is None else alpha
    dk0 = carrier_mismatch(p) if dk0 is None else dk0
    # alpha [ps/mm] * w [rad/ps] -> rad/mm -> rad/um
    x = dk0 + alpha * grid_out.detuning * 1e-3
    return SpectralAmplitude(grid_out, phasematching_function(p, x),
                             {"kind": "phasematching", "alpha_ps_per_mm": alpha, "dk0": dk0})


def output_spectral_amplitude(p: Process, f1, f2, grid_out=None, alpha=None, dk0=None):
    """Unit-energy converted-field spectrum on ``grid_out``."""
    grid_out = output_grid(f1, f2) if grid_out is None else grid_out
    overlap = spectral_overlap(f1, f2, grid_out, p.delay_ps)
    phi = phasematching_factor(p, grid_out, alpha, dk0)
    raw = p.length_mm * overlap.values * phi.values
    raw_energy = float(np.sum(np.abs(raw) ** 2) * grid_out.spacing)
    meta = {"raw_energy": raw_energy, "alpha_ps_per_mm": phi.metadata["alpha_ps_per_mm"],
            "dk0": phi.metadata["dk0"], "length_mm": p.length_mm}
    return SpectralAmplitude(grid_out, raw / math.sqrt(raw_energy), meta)


def temporal_envelope_direct(p: Process, f1, f2, grid_out=None, alpha=None, dk0=None):
    return to_time_domain(output_spectral_amplitude(p, f1, f2, grid_out, alpha, dk0))


def temporal_envelope_convolution(p: Process, f1, f2, grid_out=None, alpha=None, dk0=None):
    """Envelope as the time convolution of FT[overlap] and FT[phase matching]."""
    grid_out = output_grid(f1, f2) if grid_out is None else grid_out
    overlap = spectral_overlap(f1, f2, grid_out, p.delay_ps)
    phi = phasematching_factor(p, grid_out, alpha, dk0)
    c_t = to_time_domain(overlap)
    p_t = to_time_domain(phi)
    conv = kernels.circular_convolve_centered(c_t.values, p_t.values) * (grid_out.dt / _SQRT_2PI)
    raw = p.length_mm * conv
    raw_energy = float(np.sum(np.abs(raw) ** 2) * grid_out.dt)
    return TemporalProfile(c_t.t0, c_t.dt, raw / math.sqrt(raw_energy))


def phasematching_time_response(p: Process, grid_out: FrequencyGrid):
    """FT of the phase-matching factor alone: a top-hat of duration |alpha| L."""
    return to_time_domain(phasematching_factor(p, grid_out))


def overlap_time_response(f1, f2, grid_out=None, delay_ps=0.0):
    """FT of the spectral overlap alone."""
    grid_out = output_grid(f1, f2) if grid_out is None else grid_out
    return to_time_domain(spectral_overlap(f1, f2, grid_out, delay_ps))


def edge_to_edge(s: TemporalProfile):
    """Width between the half-amplitude points of ``|s|``.

    For a top-hat blurred by a short coherence time this sits on the true
    edges, whereas the half-maximum points of ``|s|^2`` move inwards.
    """
    return fwhm(np.abs(s.values), x=s.times)


def relative_l2(a, b):
    a = np.asarray(getattr(a, "values", a))
    b = np.asarray(getattr(b, "values", b))
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class ConversionResult:
    output_spectrum: SpectralAmplitude
    output_time: TemporalProfile
    fwhm_time: float
    edge_to_edge: float
    fwhm_spectrum_omega: float
    fwhm_spectrum_um: float
    compression_achieved: float
    input_fwhm_omega: float
    alpha_ps_per_mm: float
    equivalence_l2: float | None = None
    output_time_convolution: TemporalProfile | None = None
    extras: dict = field(default_factory=dict)

    def summary(self):
        d = {
            "fwhm_time_ps": self.fwhm_time,
            "edge_to_edge_ps": self.edge_to_edge,
            "fwhm_spectrum_rad_per_ps": self.fwhm_spectrum_omega,
            "fwhm_spectrum_nm": self.fwhm_spectrum_um * 1e3,
            "input_fwhm_rad_per_ps": self.input_fwhm_omega,
            "compression_achieved": self.compression_achieved,
            "alpha_ps_per_mm": self.alpha_ps_per_mm,
        }
        if self.equivalence_l2 is not None:
            d["direct_vs_convolution_rel_l2"] = self.equivalence_l2
        d.update(self.extras)
        return d


def simulate(p: Process, f1, f2, grid_out=None, both_paths=True):
    """Run the direct path (and optionally the convolution path) and collect widths."""
    grid_out = output_grid(f1, f2) if grid_out is None else grid_out
    spec = output_spectral_amplitude(p, f1, f2, grid_out)
    s = to_time_domain(spec)
    s_conv = None
    err = None
    if both_paths:
        s_conv = temporal_envelope_convolution(p, f1, f2, grid_out)
        err = relative_l2(s_conv, s)
    d_out = fwhm(spec)
    d_in = fwhm(f1)
    lam_out = omega_to_wavelength(grid_out.center)
    return ConversionResult(
        output_spectrum=spec,
        output_time=s,
        fwhm_time=fwhm(s),
        edge_to_edge=edge_to_edge(s),
        fwhm_spectrum_omega=d_out,
        fwhm_spectrum_um=bandwidth_omega_to_um(lam_out, d_out),
        compression_achieved=d_in / d_out,
        input_fwhm_omega=d_in,
        alpha_ps_per_mm=spec.metadata["alpha_ps_per_mm"],
        equivalence_l2=err,
        output_time_convolution=s_conv,
    )


# ---------------------------------------------------------------------------
# efficiency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EfficiencyBudget:
    """Conversion efficiencies and the photocathode QE ratio (output band
    over input band)."""

    internal_conversion: float
    external_conversion: float
    qe_ratio_out_vs_in: float

    def __post_init__(self):
        for name in ("internal_conversion", "external_conversion"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.external_conversion > self.internal_conversion:
            raise ValueError("external conversion cannot exceed internal conversion")
        if not self.qe_ratio_out_vs_in >= 0:
            raise ValueError("QE ratio must be non-negative")


def detection_improvement(b: EfficiencyBudget):
    """Gain in detected signal from converting before the camera."""
    return b.external_conversion * b.qe_ratio_out_vs_in


def approx_string(value, digits=2):
    """``271 -> '≈ 270'``: round to ``digits`` significant figures."""
    if value == 0 or not math.isfinite(value):
        return f"≈ {value}"
    rounded = round(value, digits - 1 - int(math.floor(math.log10(abs(value)))))
    if rounded == int(rounded):
        return f"≈ {int(rounded)}"
    return f"≈ {rounded:g}"
