"""Quasi-phase-matched sum-frequency generation: phase mismatch, poling
period, phase-matching functions and the geometry of the joint transfer
function.

Wavenumbers are in rad/um, crystal lengths in mm, poling periods in um,
frequencies in rad/ps.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import cotdg

from . import kernels
from .dispersion import DispersionModel, inverse_group_velocity, wavenumber
from .errors import (DegenerateSlope, MissingPolingPeriod, NoSolution, PhysicsError,
                     QuadratureUnderResolved)
from .units import TWO_PI, omega_to_wavelength, wavelength_to_omega


class NegativeGratingWarning(UserWarning):
    """First-order QPM needs a grating vector of the opposite sign."""


def output_wavelength(input_um, pump_um):
    """Energy-conserving sum-frequency wavelength, um."""
    if not (input_um > 0 and pump_um > 0):
        raise ValueError("wavelengths must be positive")
    return 1.0 / (1.0 / input_um + 1.0 / pump_um)


@dataclass(frozen=True)
class Wave:
    wavelength_um: float
    axis: str

    @property
    def omega(self):
        return wavelength_to_omega(self.wavelength_um)


# ---------------------------------------------------------------------------
# nonlinearity profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearityProfile:
    """Relative nonlinearity g(z) along the crystal, z in mm.

    ``uniform``: g = 1 on [0, L].
    ``piecewise``: g = amplitudes[i] on [z_breaks[i], z_breaks[i+1]).
    ``tabulated``: samples (z, g) joined linearly; g may be complex, which is
    how a position-dependent phase error (e.g. a drifting local mismatch) is
    expressed.
    """

    representation: str = "uniform"
    z: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.representation not in ("uniform", "piecewise", "tabulated"):
            raise ValueError(f"unknown profile representation {self.representation!r}")
        z = tuple(float(v) for v in self.z)
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "values", vals)
        if self.representation == "piecewise":
            if len(z) != len(vals) + 1 or len(vals) == 0:
                raise ValueError("piecewise profile needs len(z_breaks) == len(amplitudes) + 1")
        if self.representation == "tabulated":
            if len(z) != len(vals) or len(z) < 2:
                raise ValueError("tabulated profile needs >= 2 (z, g) samples")
        if self.representation != "uniform":
            if np.any(np.diff(z) < 0):
                raise ValueError("profile abscissae must be non-decreasing")
            if not np.all(np.isfinite(np.abs(vals))):
                raise ValueError("profile values must be finite")

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def truncated(cls, effective_length_mm, length_mm):
        """g = 1 on [0, L_eff], 0 on (L_eff, L]."""
        if not 0 < effective_length_mm <= length_mm:
            raise ValueError("need 0 < L_eff <= L")
        if effective_length_mm == length_mm:
            return cls.piecewise((0.0, length_mm), (1.0,))
        return cls.piecewise((0.0, effective_length_mm, length_mm), (1.0, 0.0))

    @classmethod
    def piecewise(cls, z_breaks, amplitudes):
        return cls("piecewise", tuple(z_breaks), tuple(amplitudes))

    @classmethod
    def tabulated(cls, z, g):
        return cls("tabulated", tuple(np.asarray(z, float)), tuple(np.asarray(g).ravel()))

    @property
    def is_uniform(self):
        return self.representation == "uniform"

    def check_support(self, length_mm):
        if self.representation == "uniform":
            return
        if self.z[0] < -1e-12 or self.z[-1] > length_mm * (1 + 1e-12):
            raise PhysicsError(
                f"profile support [{self.z[0]}, {self.z[-1]}] mm exceeds crystal [0, {length_mm}]"
            )

    def nodes(self, length_mm):
        """Nodes (z mm, g) of the piecewise-linear representation."""
        if self.representation == "uniform":
            return np.array([0.0, length_mm]), np.array([1.0, 1.0], dtype=complex)
        if self.representation == "tabulated":
            return np.array(self.z), np.array(self.values)
        zb = np.array(self.z)
        a = np.array(self.values)
        z = np.repeat(zb, 2)[1:-1]
        g = np.repeat(a, 2)
        return z, g

    def evaluate(self, z_mm, length_mm):
        z_mm = np.asarray(z_mm, dtype=float)
        if self.representation == "uniform":
            return np.where((z_mm >= 0) & (z_mm <= length_mm), 1.0 + 0j, 0j)
        if self.representation == "tabulated":
            zz = np.array(self.z)
            v = np.array(self.values)
            re = np.interp(z_mm, zz, v.real, left=0.0, right=0.0)
            im = np.interp(z_mm, zz, v.imag, left=0.0, right=0.0)
            return re + 1j * im
        zb = np.array(self.z)
        a = np.array(self.values)
        idx = np.clip(np.searchsorted(zb, z_mm, side="right") - 1, 0, a.size - 1)
        inside = (z_mm >= zb[0]) & (z_mm <= zb[-1])
        return np.where(inside, a[idx], 0j)

    def describe(self):
        if self.representation == "uniform":
            return "uniform"
        if (self.representation == "piecewise" and len(self.values) == 2
                and self.values == (1, 0)):
            return f"truncated:{self.z[1]:g}mm"
        return f"{self.representation}[{len(self.values)}]"


# ---------------------------------------------------------------------------
# process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Process:
    """Sum-frequency process ``input + pump -> output``."""

    input: Wave
    pump: Wave
    output: Wave
    dispersion: dict
    length_mm: float
    poling_period_um: float | None = None
    delay_ps: float = 0.0
    profile: NonlinearityProfile = field(default_factory=NonlinearityProfile.uniform)

    def __post_init__(self):
        lhs = 1.0 / self.output.wavelength_um
        rhs = 1.0 / self.input.wavelength_um + 1.0 / self.pump.wavelength_um
        if abs(lhs - rhs) > 1e-9 * rhs:
            raise PhysicsError("carrier wavelengths violate energy conservation")
        if not self.length_mm > 0:
            raise PhysicsError("crystal length must be positive")
        period = self.poling_period_um
        if period is not None and (period == 0 or math.isnan(period)):
            raise PhysicsError("poling period must be non-zero")
        for w in (self.input, self.pump, self.output):
            if w.axis not in self.dispersion:
                raise PhysicsError(f"no dispersion model for axis {w.axis!r}")
        self.profile.check_support(self.length_mm)

    @classmethod
    def from_carriers(cls, input_um, pump_um, axes, dispersion, length_mm, **kwargs):
        """Build from input/pump wavelengths; ``axes`` = (input, pump, output)."""
        out_um = output_wavelength(input_um, pump_um)
        return cls(Wave(input_um, axes[0]), Wave(pump_um, axes[1]), Wave(out_um, axes[2]),
                   dict(dispersion), length_mm, **kwargs)

    def model(self, wave: Wave) -> DispersionModel:
        return self.dispersion[wave.axis]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def length_um(self):
        return self.length_mm * 1e3

    def ivg(self, wave: Wave):
        """Inverse group velocity of ``wave`` at its carrier, ps/mm."""
        return inverse_group_velocity(self.model(wave), wave.wavelength_um)


def group_velocity_mismatch(p: Process):
    """``alpha = k'_out - k'_in`` in ps/mm."""
    return p.ivg(p.output) - p.ivg(p.input)


def phase_mismatch(p: Process, omega_in, omega_pump, poling=True):
    """``dk = k_pump + k_input - k_output + 2 pi / Lambda`` (rad/um).

    ``omega_out = omega_in + omega_pump``. ``poling=False`` drops the grating
    term (the Lambda -> infinity limit).
    """
    omega_in = np.asarray(omega_in, dtype=float)
    omega_pump = np.asarray(omega_pump, dtype=float)
    k_in = wavenumber(p.model(p.input), omega_to_wavelength(omega_in))
    k_p = wavenumber(p.model(p.pump), omega_to_wavelength(omega_pump))
    k_out = wavenumber(p.model(p.output), omega_to_wavelength(omega_in + omega_pump))
    dk = k_p + k_in - k_out
    if poling:
        if p.poling_period_um is None:
            raise MissingPolingPeriod("process has no poling period; call solve_poling_period")
        dk = dk + TWO_PI / p.poling_period_um
    return float(dk) if np.ndim(dk) == 0 else dk


def carrier_mismatch(p: Process):
    return phase_mismatch(p, p.input.omega, p.pump.omega)


def solve_poling_period(p: Process, tol=1e-9):
    """Poling period (um) that zeroes the carrier mismatch.

    A negative result means the required grating vector points the other
    way; it is returned with a :class:`NegativeGratingWarning`.
    """
    bare = phase_mismatch(p, p.input.omega, p.pump.omega, poling=False)
    denom = -bare  # k_out - k_in - k_pump
    if abs(denom) <= tol:
        raise NoSolution("material mismatch vanishes; no finite poling period")
    period = TWO_PI / denom
    if period < 0:
        warnings.warn(f"first-order QPM requires a negative grating vector "
                      f"(Lambda = {period:.6g} um)", NegativeGratingWarning, stacklevel=2)
    return period


def with_solved_period(p: Process) -> Process:
    return p.replace(poling_period_um=solve_poling_period(p))


# ---------------------------------------------------------------------------
# phase-matching functions
# ---------------------------------------------------------------------------

def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def phasematching_amplitude(p_or_length, dk):
    """Uniform-crystal phase matching ``sinc(dk L/2) exp(j dk L/2)``.

    ``p_or_length`` is a :class:`Process` or a length in mm; ``dk`` in rad/um.
    """
    length_mm = p_or_length.length_mm if isinstance(p_or_length, Process) else p_or_length
    x = np.asarray(dk, dtype=float) * (length_mm * 1e3) / 2.0
    out = _sinc(x) * np.exp(1j * x)
    return complex(out) if np.ndim(out) == 0 else out


def phasematching_from_profile(profile: NonlinearityProfile, length_mm, dk,
                               method="filon", max_phase_step=math.pi / 4,
                               max_steps=2**22):
    """``(1/L) int_0^L g(z) exp(j dk z) dz`` for an arbitrary profile.

    ``method="filon"`` (default) integrates the trapezoidal (piecewise-
    linear) interpolant of g against the exact oscillatory factor, which is
    exact for uniform, truncated and piecewise profiles.
    ``method="trapezoid"`` is the plain composite trapezoid rule on the
    integrand, refined by doubling until the phase advance per step is at
    most ``max_phase_step``; it raises :class:`QuadratureUnderResolved` past
    ``max_steps``.
    """
    profile.check_support(length_mm)
    dk = np.asarray(dk, dtype=float)
    length_um = length_mm * 1e3
    if method == "filon":
        z_mm, g = profile.nodes(length_mm)
        out = kernels.filon_profile(dk.ravel(), z_mm * 1e3, g) / length_um
    elif method == "trapezoid":
        kmax = float(np.max(np.abs(dk))) if dk.size else 0.0
        steps = 64
        while kmax * length_um / steps > max_phase_step:
            steps *= 2
            if steps > max_steps:
                raise QuadratureUnderResolved(
                    f"phase advance per step exceeds {max_phase_step:.3g} rad "
                    f"at {max_steps} steps"
                )
        z_mm = np.linspace(0.0, length_mm, steps + 1)
        g = profile.evaluate(z_mm, length_mm)
        w = np.full(steps + 1, 1.0)
        w[0] = w[-1] = 0.5
        h = length_um / steps
        out = np.empty(dk.size, dtype=complex)
        flat = dk.ravel()
        for start in range(0, flat.size, 256):
            k = flat[start:start + 256, None]
            out[start:start + 256] = (np.exp(1j * k * z_mm[None, :] * 1e3) @ (w * g)) * h
        out /= length_um
    else:
        raise ValueError(f"unknown method {method!r}")
    out = out.reshape(dk.shape)
    return complex(out) if out.ndim == 0 else out


def phasematching_function(p: Process, dk):
    """Phase-matching function of ``p`` at mismatch ``dk`` (rad/um)."""
    if p.profile.is_uniform:
        return phasematching_amplitude(p, dk)
    return phasematching_from_profile(p.profile, p.length_mm, dk)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def phasematching_slope(p: Process, tol=1e-12):
    """``d omega_out / d omega_in`` along the dk = 0 contour."""
    kp, ki, ko = p.ivg(p.pump), p.ivg(p.input), p.ivg(p.output)
    if abs(kp - ko) <= tol:
        raise DegenerateSlope("pump and output inverse group velocities coincide")
    return (kp - ki) / (kp - ko)


def phasematching_angle(p: Process):
    """Angle (degrees) of the dk = 0 contour from the omega_in axis in the
    (omega_in, omega_out) plane. 0 means flat phase matching."""
    return math.degrees(math.atan(phasematching_slope(p)))


def wavelength_plane_angle(p: Process):
    """Same contour drawn in the (lambda_in, lambda_out) plane, degrees.

    Uses the Jacobian ``d lambda_out / d lambda_in =
    (lambda_out / lambda_in)^2 d omega_out / d omega_in``.
    """
    ratio = (p.output.wavelength_um / p.input.wavelength_um) ** 2
    return math.degrees(math.atan(ratio * phasematching_slope(p)))


def compression_factor(theta_deg):
    """``1 / |tan(theta)|``; infinite for flat phase matching (theta = 0).

    Degree-argument cotangent, so 45 degrees gives exactly 1.
    """
    if not -90.0 < theta_deg < 90.0:
        raise ValueError("phase-matching angle must lie in (-90, 90) degrees")
    if theta_deg == 0.0:
        return math.inf
    return abs(float(cotdg(theta_deg)))


# ---------------------------------------------------------------------------
# joint transfer function
# ---------------------------------------------------------------------------

@dataclass
class JointTransferMap:
    omega_in: np.ndarray
    omega_out: np.ndarray
    values: np.ndarray  # shape (len(omega_out), len(omega_in))

    @property
    def magnitude(self):
        return np.abs(self.values)

    def output_marginal(self, input_amplitude):
        """Output amplitude for an input spectrum sampled on ``omega_in``."""
        d_in = self.omega_in[1] - self.omega_in[0]
        return self.values @ np.asarray(input_amplitude) * d_in


def _sample_spectrum(spec, omega):
    x = spec.omega
    re = np.interp(omega, x, spec.values.real, left=0.0, right=0.0)
    im = np.interp(omega, x, spec.values.imag, left=0.0, right=0.0)
    return re + 1j * im


def joint_transfer_function(p: Process, pump, omega_in, omega_out):
    """``G(w_in, w_out) = F2(w_out - w_in) * Phi(dk(w_in, w_out - w_in))``.

    ``pump`` is a :class:`~qpgstreak.fields.SpectralAmplitude` (linearly
    interpolated) and ``omega_in``/``omega_out`` are 1-D axes or grids with an
    ``omega`` attribute. The mismatch uses the full dispersion, not its
    linearisation.
    """
    w_in = np.asarray(getattr(omega_in, "omega", omega_in), dtype=float)
    w_out = np.asarray(getattr(omega_out, "omega", omega_out), dtype=float)
    wi, wo = np.meshgrid(w_in, w_out)
    wp = wo - wi
    f2 = _sample_spectrum(pump, wp)
    g = np.zeros(wi.shape, dtype=complex)
    live = f2 != 0
    if np.any(live):
        dk = phase_mismatch(p, wi[live], wp[live])
        g[live] = f2[live] * phasematching_function(p, dk)
    return JointTransferMap(w_in, w_out, g)


def ridge_angle(jtf: JointTransferMap, threshold=0.5):
    """Orientation (degrees) of the |G| ridge, from per-column maxima.

    Columns whose peak is below ``threshold`` times the global peak are
    ignored; the maximum is refined by a parabola through its neighbours.
    """
    mag = jtf.magnitude
    peak = mag.max()
    xs, ys = [], []
    d_out = jtf.omega_out[1] - jtf.omega_out[0]
    for j in range(mag.shape[1]):
        col = mag[:, j]
        i = int(np.argmax(col))
        if col[i] < threshold * peak or i == 0 or i == col.size - 1:
            continue
        a, b, c = col[i - 1], col[i], col[i + 1]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        xs.append(jtf.omega_in[j])
        ys.append(jtf.omega_out[i] + shift * d_out)
    if len(xs) < 3:
        raise PhysicsError("ridge too short to fit an orientation")
    slope = np.polyfit(xs, ys, 1)[0]
    return math.degrees(math.atan(slope))
