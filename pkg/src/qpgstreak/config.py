"""Scenario configuration: flat ``section.key = value`` text files.

Grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines
are ignored; every key must be one of :data:`KEYS`. Later ``--set``
overrides replace file values. Errors carry the offending line number.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .dispersion import load_models
from .errors import ConfigError
from .fields import FrequencyGrid, gaussian_spectrum, pdc_heralded_marginal
from .io import read_table_csv
from .phasematching import NonlinearityProfile, Process, with_solved_period
from .streak_camera import CATHODES, StreakCameraModel
from .units import bandwidth_nm_to_omega, bandwidth_omega_to_um, wavelength_to_omega
from .upconversion import EfficiencyBudget


@dataclass(frozen=True)
class Key:
    name: str
    kind: type
    default: object
    unit: str
    help: str


def _k(name, kind, default, unit, help):
    return Key(name, kind, default, unit, help)


_CAM = StreakCameraModel()

KEYS = {k.name: k for k in [
    _k("seed", int, 1, "-", "RNG seed; the background image uses seed + 1"),
    _k("source.wavelength_um", float, 1.545, "um", "heralded-photon centre wavelength"),
    _k("source.bandwidth_nm", float, 6.0, "nm", "heralded-photon intensity FWHM"),
    _k("source.pdc_pump_bandwidth_nm", float, 3.0, "nm", "PDC pump bandwidth (metadata)"),
    _k("source.decorrelation_bandwidth_nm", float, 3.0, "nm",
       "PDC pump bandwidth that yields a decorrelated state"),
    _k("source.mean_photon_number", float, 0.2, "photons/pulse", "mean photon number"),
    _k("source.heralding_efficiency", float, 0.13, "fraction", "heralding efficiency"),
    _k("pump.wavelength_um", float, 0.854, "um", "converter pump centre wavelength"),
    _k("pump.bandwidth_nm", str, "matched", "nm|matched",
       "pump intensity FWHM; 'matched' copies the input bandwidth in frequency"),
    _k("process.input_axis", str, "ordinary", "axis", "input polarisation axis"),
    _k("process.pump_axis", str, "extraordinary", "axis", "pump polarisation axis"),
    _k("process.output_axis", str, "ordinary", "axis", "output polarisation axis"),
    _k("process.length_mm", float, 27.0, "mm", "crystal length"),
    _k("process.poling_period_um", str, "auto", "um|auto", "poling period; auto solves dk = 0"),
    _k("process.delay_ps", float, 0.0, "ps", "input-pump delay tau"),
    _k("process.profile", str, "uniform", "spec",
       "uniform | truncated:<L>mm | piecewise:<z0,z1,..>;<a0,a1,..> (mm) | "
       "tabulated:<csv with z_mm,g_re[,g_im]>"),
    _k("process.dispersion_file", str, "builtin", "path", "dispersion coefficient file"),
    _k("process.model_ordinary", str, "linbo3_zelmon_o", "name", "model for the ordinary axis"),
    _k("process.model_extraordinary", str, "linbo3_zelmon_e", "name",
       "model for the extraordinary axis"),
    _k("process.offset_ordinary", float, 0.0, "index", "waveguide index offset, ordinary"),
    _k("process.offset_extraordinary", float, 0.0152484109, "index",
       "waveguide index offset, extraordinary (default gives input/pump GV matching)"),
    _k("grid.points", int, 2**14, "-", "frequency grid points (power of two)"),
    _k("grid.window_ps", float, 512.0, "ps", "time window of the frequency grid"),
    _k("efficiency.internal", float, 0.615, "fraction", "internal conversion efficiency"),
    _k("efficiency.external", float, 0.271, "fraction", "external conversion efficiency"),
    _k("efficiency.baseline_cathode", str, "s1", "s1|green",
       "cathode that would see the unconverted input"),
    _k("efficiency.qe_input_um", float, 1.55, "um", "wavelength for the baseline QE"),
    _k("efficiency.qe_output_um", float, 0.55, "um", "wavelength for the converted QE"),
    _k("camera.cathode", str, "s1", "s1|green", "photocathode QE preset"),
    _k("camera.irf_fwhm_ps", float, _CAM.irf_fwhm, "ps", "Gaussian IRF FWHM"),
    _k("camera.sweep_window_ps", float, _CAM.sweep_window, "ps", "time span of all rows"),
    _k("camera.n_rows", int, _CAM.n_rows, "pixels", "time pixels"),
    _k("camera.n_cols", int, _CAM.n_cols, "pixels", "spatial pixels"),
    _k("camera.t_origin_ps", float, _CAM.t_origin, "ps", "time at the leading edge of row 0"),
    _k("camera.spot_sigma_px", float, _CAM.spatial_spot_sigma, "pixels", "spatial spot sigma"),
    _k("camera.mcp_gain", float, _CAM.mcp_gain, "counts/photoelectron", "MCP gain"),
    _k("camera.mcp_gain_max", float, _CAM.mcp_gain_max, "counts/photoelectron", "max MCP gain"),
    _k("camera.cathode_noise_threshold", float, _CAM.cathode_noise_threshold, "fraction",
       "gain fraction above which cathode noise appears"),
    _k("camera.cathode_noise_rate", float, _CAM.cathode_noise_rate,
       "photoelectrons/pixel/s", "cathode noise at maximum gain"),
    _k("camera.readout_noise", float, _CAM.readout_noise_sigma, "counts/pixel/exposure",
       "readout noise sigma"),
    _k("camera.dark_rate", float, _CAM.dark_rate, "photoelectrons/pixel/s", "dark rate"),
    _k("camera.rep_rate_mhz", float, _CAM.rep_rate, "MHz", "synchroscan repetition rate"),
    _k("camera.exposure_s", float, _CAM.exposure_s, "s", "exposure time per frame"),
    _k("camera.n_exposures", int, _CAM.n_exposures, "-", "accumulated exposures"),
    _k("analysis.roi_lo", int, 103, "pixel", "first ROI column (inclusive)"),
    _k("analysis.roi_hi", int, 153, "pixel", "last ROI column (exclusive)"),
    _k("analysis.bin_width_ps", float, 5.0, "ps", "error-bar bin width"),
    _k("design.map_points", int, 201, "-", "transfer-map points per axis"),
    _k("design.map_span", float, 3.0, "input FWHMs", "transfer-map half span"),
]}


def keys_help():
    width = max(len(k) for k in KEYS)
    lines = ["config keys (key = default [unit]: description):"]
    for k in KEYS.values():
        lines.append(f"  {k.name:<{width}} = {k.default} [{k.unit}]: {k.help}")
    return "\n".join(lines)


def _convert(key, raw, lineno=None, source=None):
    spec = KEYS.get(key)
    if spec is None:
        raise ConfigError(f"unknown config key {key!r}", lineno, source)
    try:
        if spec.kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if spec.kind is float:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {spec.kind.__name__}, got {raw!r}",
                          lineno, source) from None
    return raw.strip()


def parse_config(text, source="<string>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, source)
        values[key] = _convert(key, value, lineno, source)
    return values


def preset_path(name):
    return resources.files("qpgstreak").joinpath(f"presets/{name}.cfg")


class ScenarioConfig:
    """Typed view over the flat key set with builders for the physics objects."""

    def __init__(self, values=None, source=None):
        self.values = {k.name: k.default for k in KEYS.values()}
        self.values.update(values or {})
        self.source = source
        self._models = None

    @classmethod
    def load(cls, path=None, overrides=()):
        values = {}
        source = None
        if path is not None:
            p = Path(path)
            if not p.exists():
                text = preset_path(str(path)).read_text("utf-8") if \
                    preset_path(str(path)).is_file() else None
                if text is None:
                    raise ConfigError(f"config file {path} not found")
                source = f"preset:{path}"
            else:
                text = p.read_text("utf-8")
                source = str(p)
            values = parse_config(text, source)
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override must be key=value, got {item!r}")
            key, value = (s.strip() for s in item.split("=", 1))
            values[key] = _convert(key, value, source="--set")
        return cls(values, source)

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key, value):
        self.values[key] = _convert(key, str(value), source="override")

    def items(self):
        return self.values.items()

    # -- builders ---------------------------------------------------------
    def dispersion(self):
        if self._models is None:
            self._models = load_models(self["process.dispersion_file"])
        out = {}
        for axis in ("ordinary", "extraordinary"):
            name = self[f"process.model_{axis}"]
            if name not in self._models:
                raise ConfigError(f"process.model_{axis}: unknown model {name!r}")
            out[axis] = self._models[name].with_offset(
                self._models[name].offset + self[f"process.offset_{axis}"])
        return out

    def profile(self):
        spec = self["process.profile"]
        length = self["process.length_mm"]
        return parse_profile(spec, length)

    def process(self, solve=True):
        axes = (self["process.input_axis"], self["process.pump_axis"], self["process.output_axis"])
        for a in axes:
            if a not in ("ordinary", "extraordinary"):
                raise ConfigError(f"unknown polarisation axis {a!r}")
        period = self["process.poling_period_um"]
        p = Process.from_carriers(
            self["source.wavelength_um"], self["pump.wavelength_um"], axes, self.dispersion(),
            self["process.length_mm"], delay_ps=self["process.delay_ps"],
            profile=self.profile(),
        )
        if period == "auto":
            return with_solved_period(p) if solve else p
        try:
            return p.replace(poling_period_um=float(period))
        except ValueError:
            raise ConfigError(f"process.poling_period_um: expected number or auto, got {period!r}")

    def grids(self):
        w_in = wavelength_to_omega(self["source.wavelength_um"])
        w_p = wavelength_to_omega(self["pump.wavelength_um"])
        g_in = FrequencyGrid.for_window(w_in, self["grid.window_ps"], self["grid.points"])
        return g_in, g_in.shifted(w_p), g_in.shifted(w_in + w_p)

    def pump_bandwidth_nm(self):
        raw = self["pump.bandwidth_nm"]
        if raw == "matched":
            dw = bandwidth_nm_to_omega(self["source.wavelength_um"],
                                       self["source.bandwidth_nm"] * 1e-3)
            return bandwidth_omega_to_um(self["pump.wavelength_um"], dw) * 1e3
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"pump.bandwidth_nm: expected number or 'matched', got {raw!r}")

    def spectra(self):
        g_in, g_p, _ = self.grids()
        f1 = pdc_heralded_marginal(
            g_in, self["source.wavelength_um"], self["source.bandwidth_nm"] * 1e-3,
            self["source.pdc_pump_bandwidth_nm"] * 1e-3,
            self["source.decorrelation_bandwidth_nm"] * 1e-3,
        )
        f2 = gaussian_spectrum(g_p, self["pump.wavelength_um"], self.pump_bandwidth_nm() * 1e-3)
        return f1, f2

    def camera(self):
        cathode = self["camera.cathode"]
        if cathode not in CATHODES:
            raise ConfigError(f"camera.cathode: unknown preset {cathode!r}")
        return StreakCameraModel(
            irf_fwhm=self["camera.irf_fwhm_ps"], qe_table=CATHODES[cathode],
            sweep_window=self["camera.sweep_window_ps"], n_rows=self["camera.n_rows"],
            n_cols=self["camera.n_cols"], t_origin=self["camera.t_origin_ps"],
            spatial_spot_sigma=self["camera.spot_sigma_px"], mcp_gain=self["camera.mcp_gain"],
            mcp_gain_max=self["camera.mcp_gain_max"],
            cathode_noise_threshold=self["camera.cathode_noise_threshold"],
            cathode_noise_rate=self["camera.cathode_noise_rate"],
            readout_noise_sigma=self["camera.readout_noise"], dark_rate=self["camera.dark_rate"],
            rep_rate=self["camera.rep_rate_mhz"], exposure_s=self["camera.exposure_s"],
            n_exposures=self["camera.n_exposures"],
        )

    def budget(self):
        base = self["efficiency.baseline_cathode"]
        if base not in CATHODES:
            raise ConfigError(f"efficiency.baseline_cathode: unknown preset {base!r}")
        baseline = StreakCameraModel(qe_table=CATHODES[base])
        qe_in = baseline.qe(self["efficiency.qe_input_um"])
        qe_out = self.camera().qe(self["efficiency.qe_output_um"])
        if qe_in == 0:
            raise ConfigError("baseline cathode has zero QE at the input wavelength")
        return EfficiencyBudget(self["efficiency.internal"], self["efficiency.external"],
                                qe_out / qe_in)

    def photons_per_pulse(self):
        """Converted photons per pulse reaching the cathode."""
        return (self["source.mean_photon_number"] * self["source.heralding_efficiency"]
                * self["efficiency.external"])


def parse_profile(spec, length_mm):
    """``uniform`` | ``truncated:<L>mm`` | ``piecewise:z0,z1,..;a0,a1,..`` |
    ``tabulated:<csv path>``."""
    spec = spec.strip()
    try:
        if spec == "uniform":
            return NonlinearityProfile.uniform()
        kind, _, arg = spec.partition(":")
        if kind == "truncated":
            leff = float(arg.strip().removesuffix("mm"))
            return NonlinearityProfile.truncated(leff, length_mm)
        if kind == "piecewise":
            zs, amps = arg.split(";")
            return NonlinearityProfile.piecewise([float(v) for v in zs.split(",")],
                                                 [float(v) for v in amps.split(",")])
        if kind == "tabulated":
            table = read_table_csv(arg)
            g = table["g_re"] + 1j * table.get("g_im", np.zeros_like(table["g_re"]))
            return NonlinearityProfile.tabulated(table["z_mm"], g)
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"process.profile: cannot parse {spec!r}: {exc}") from None
    raise ConfigError(f"process.profile: unknown profile {spec!r}")
