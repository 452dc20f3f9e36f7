"""Streak-camera instrument model: Gaussian IRF, photocathode QE, synchroscan
accumulation and seeded CCD image synthesis.

Images are ``n_rows x n_cols`` with time running down the rows; row ``i``
covers ``[t_origin + i tpp, t_origin + (i + 1) tpp)`` where ``tpp`` is the
time per pixel.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CalibrationMismatch, DimensionMismatch, FormatError, OutOfRange
from .fields import TemporalProfile
from .io import encode_counts, read_keyvalue, read_pgm, write_keyvalue, write_pgm, write_table_csv
from .units import FWHM_PER_SIGMA

# (wavelength um, quantum efficiency)
S1_QE = (
    (0.40, 2.0e-3), (0.55, 3.0e-3), (0.80, 4.0e-3), (1.00, 1.0e-3),
    (1.20, 1.0e-4), (1.55, 3.0e-6), (1.65, 1.0e-6),
)
GREEN_QE = (
    (0.40, 0.20), (0.55, 0.30), (0.70, 0.10), (0.90, 0.0), (1.65, 0.0),
)
CATHODES = {"s1": S1_QE, "green": GREEN_QE}


@dataclass(frozen=True)
class StreakCameraModel:
    irf_fwhm: float = 5.0                 # ps
    qe_table: tuple = S1_QE
    sweep_window: float = 256.0           # ps over n_rows
    n_rows: int = 512
    n_cols: int = 256
    t_origin: float = -128.0              # ps, leading edge of row 0
    spatial_spot_sigma: float = 10.0      # pixels
    spot_center: float | None = None      # pixels, default mid-chip
    mcp_gain: float = 10.0                # counts per photoelectron
    mcp_gain_max: float = 15.0
    cathode_noise_threshold: float = 2.0 / 3.0   # fraction of max gain
    cathode_noise_rate: float = 1.0       # photoelectrons/pixel/s at max gain
    readout_noise_sigma: float = 350.0    # counts/pixel/exposure
    dark_rate: float = 0.01               # photoelectrons/pixel/s
    rep_rate: float = 80.165              # MHz
    exposure_s: float = 10.0
    n_exposures: int = 32

    def __post_init__(self):
        if not self.irf_fwhm > 0:
            raise ValueError("irf_fwhm must be positive")
        table = tuple((float(l), float(q)) for l, q in self.qe_table)
        object.__setattr__(self, "qe_table", table)
        lam = [l for l, _ in table]
        if len(table) < 2 or np.any(np.diff(lam) <= 0):
            raise ValueError("QE table needs >= 2 entries with increasing wavelength")
        if any(not 0.0 <= q <= 1.0 for _, q in table):
            raise ValueError("QE entries must lie in [0, 1]")
        if not (self.sweep_window > 0 and self.n_rows > 0 and self.n_cols > 0):
            raise ValueError("sweep window and image dimensions must be positive")
        if self.n_exposures < 1 or self.exposure_s < 0:
            raise ValueError("need n_exposures >= 1 and exposure_s >= 0")
        for name in ("mcp_gain", "readout_noise_sigma", "dark_rate", "cathode_noise_rate",
                     "rep_rate", "spatial_spot_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def time_per_pixel(self):
        return self.sweep_window / self.n_rows

    @property
    def row_edges(self):
        return self.t_origin + np.arange(self.n_rows + 1) * self.time_per_pixel

    @property
    def row_times(self):
        return self.t_origin + (np.arange(self.n_rows) + 0.5) * self.time_per_pixel

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def qe(self, wavelength_um):
        """Piecewise-linear QE; outside the table is an error."""
        lam = np.array([l for l, _ in self.qe_table])
        q = np.array([v for _, v in self.qe_table])
        if not lam[0] <= wavelength_um <= lam[-1]:
            raise OutOfRange(wavelength_um, (lam[0], lam[-1]), "QE table")
        return float(np.interp(wavelength_um, lam, q))

    def excess_cathode_rate(self):
        """Cathode noise switched on above the gain threshold, photoelectrons/pixel/s."""
        frac = self.mcp_gain / self.mcp_gain_max if self.mcp_gain_max > 0 else 0.0
        over = max(0.0, frac - self.cathode_noise_threshold)
        span = max(1e-12, 1.0 - self.cathode_noise_threshold)
        return self.cathode_noise_rate * over / span

    def background_mean(self):
        """Mean background counts per pixel over the full accumulation."""
        rate = self.dark_rate + self.excess_cathode_rate()
        return rate * self.exposure_s * self.n_exposures * self.mcp_gain

    def snapshot(self):
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "qe_table":
                v = [x for pair in v for x in pair]
            out[f.name] = v
        return out


@dataclass
class StreakImage:
    counts: np.ndarray
    time_per_pixel: float
    t_origin: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.ndim != 2:
            raise DimensionMismatch("streak image counts must be 2-D")
        if not np.all(np.isfinite(self.counts)):
            raise ValueError("streak image counts must be finite")

    @property
    def shape(self):
        return self.counts.shape

    @property
    def row_times(self):
        return self.t_origin + (np.arange(self.counts.shape[0]) + 0.5) * self.time_per_pixel

    def same_calibration(self, other):
        return (np.isclose(self.time_per_pixel, other.time_per_pixel, rtol=1e-12, atol=0)
                and np.isclose(self.t_origin, other.t_origin, rtol=0, atol=1e-9))


# ---------------------------------------------------------------------------
# signal
# ---------------------------------------------------------------------------

def _intensity(s: TemporalProfile):
    v = s.values
    return np.abs(v) ** 2 if np.iscomplexobj(v) else np.asarray(v, dtype=float)


def apply_irf(s: TemporalProfile, irf_fwhm) -> TemporalProfile:
    """Convolve an intensity profile with a unit-area Gaussian of FWHM ``irf_fwhm`` (ps).

    Complex input is converted to intensity first. The kernel is normalised
    to unit sum on the sample grid and applied circularly, so the integrated
    intensity is preserved. The returned profile holds intensity (real), not
    an amplitude.
    """
    if not irf_fwhm > 0:
        raise ValueError("irf_fwhm must be positive")
    y = _intensity(s)
    n = y.size
    sigma = irf_fwhm / FWHM_PER_SIGMA
    lag = (np.arange(n) - n // 2) * s.dt
    kernel = np.exp(-0.5 * (lag / sigma) ** 2)
    kernel = np.fft.ifftshift(kernel / kernel.sum())
    out = np.fft.irfft(np.fft.rfft(y) * np.fft.rfft(kernel), n)
    return TemporalProfile(s.t0, s.dt, out)


def expected_signal(s: TemporalProfile, model: StreakCameraModel, wavelength_um,
                    photons_per_pulse):
    """Expected counts per time row for the whole accumulation.

    ``s`` is an intensity profile (complex envelopes are squared); it is
    normalised to unit area, so only its shape matters.
    """
    qe = model.qe(wavelength_um)
    y = np.clip(_intensity(s), 0.0, None)
    total = y.sum() * s.dt
    if not total > 0:
        return np.zeros(model.n_rows)
    # cumulative area at sample boundaries t_m + dt/2
    edges_t = s.t0 + (np.arange(y.size + 1) - 0.5) * s.dt
    cum = np.concatenate(([0.0], np.cumsum(y) * s.dt)) / total
    at_rows = np.interp(model.row_edges, edges_t, cum)
    # FFT round-off can leave ~1e-17 negative lobes
    frac = np.clip(np.diff(at_rows), 0.0, None)
    scale = (photons_per_pulse * qe * model.rep_rate * 1e6 * model.exposure_s
             * model.n_exposures * model.mcp_gain)
    return frac * scale


def column_weights(model: StreakCameraModel):
    cols = np.arange(model.n_cols)
    center = (model.n_cols - 1) / 2.0 if model.spot_center is None else model.spot_center
    if model.spatial_spot_sigma == 0:
        w = (cols == int(round(center))).astype(float)
    else:
        w = np.exp(-0.5 * ((cols - center) / model.spatial_spot_sigma) ** 2)
    return w / w.sum()


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

def _row_rng(seed, row):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(row),)))


def _synth_row(row, expected_row, seed, read_sigma, gain):
    rng = _row_rng(seed, row)
    # shot noise on photoelectrons, then a noiseless MCP gain
    if gain > 0:
        counts = gain * rng.poisson(expected_row / gain).astype(float)
    else:
        counts = np.zeros(expected_row.shape)
    if read_sigma > 0:
        counts += np.round(rng.normal(0.0, read_sigma, expected_row.shape))
    return counts


def synthesize_image(signal_1d, model: StreakCameraModel, seed, workers=1) -> StreakImage:
    """Seeded noisy CCD image for an expected per-row signal.

    ``signal_1d`` is in counts (photoelectrons times MCP gain). Each row
    draws from its own stream derived from ``(seed, row)``, so the result
    does not depend on ``workers``. Readout noise is rounded to whole counts
    (ADU).
    """
    signal_1d = np.asarray(signal_1d, dtype=float)
    if signal_1d.shape != (model.n_rows,):
        raise DimensionMismatch(
            f"signal has {signal_1d.size} rows, camera has {model.n_rows}"
        )
    if np.any(signal_1d < 0):
        raise ValueError("expected signal must be non-negative")
    expected = signal_1d[:, None] * column_weights(model)[None, :] + model.background_mean()
    read_sigma = model.readout_noise_sigma * np.sqrt(model.n_exposures)
    rows = range(model.n_rows)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(lambda r: _synth_row(r, expected[r], seed, read_sigma, model.mcp_gain), rows))
    else:
        out = [_synth_row(r, expected[r], seed, read_sigma, model.mcp_gain) for r in rows]
    return StreakImage(np.vstack(out), model.time_per_pixel, model.t_origin,
                       {"seed": int(seed), "model": model.snapshot()})


def synthesize_background(model: StreakCameraModel, seed, workers=1) -> StreakImage:
    return synthesize_image(np.zeros(model.n_rows), model, seed, workers)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".cal")


def save_image(img: StreakImage, path, kind="streak"):
    """Write ``path`` (16-bit PGM) and ``path.cal`` (calibration sidecar)."""
    pixels, offset, scale = encode_counts(img.counts)
    write_pgm(path, pixels, comment=f"qpgstreak {kind}")
    items = {
        "kind": kind,
        "rows": img.counts.shape[0],
        "cols": img.counts.shape[1],
        "time_per_pixel_ps": img.time_per_pixel,
        "t_origin_ps": img.t_origin,
        "count_offset": offset,
        "count_scale": scale,
    }
    if "seed" in img.metadata:
        items["seed"] = img.metadata["seed"]
    for key, value in img.metadata.get("model", {}).items():
        items[f"model.{key}"] = value
    write_keyvalue(sidecar_path(path), items)


def load_image(path) -> StreakImage:
    pixels = read_pgm(path)
    cal_path = sidecar_path(path)
    if not cal_path.exists():
        raise FormatError(f"missing calibration sidecar {cal_path}")
    cal = read_keyvalue(cal_path)
    try:
        rows, cols = int(cal["rows"]), int(cal["cols"])
        tpp = float(cal["time_per_pixel_ps"])
        t0 = float(cal["t_origin_ps"])
        offset = float(cal["count_offset"])
        scale = float(cal["count_scale"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad calibration sidecar {cal_path}: {exc}") from None
    if pixels.shape != (rows, cols):
        raise FormatError(
            f"image is {pixels.shape[0]}x{pixels.shape[1]}, sidecar says {rows}x{cols}"
        )
    meta = {k[6:]: v for k, v in cal.items() if k.startswith("model.")}
    meta = {"model": meta}
    if "seed" in cal:
        meta["seed"] = int(cal["seed"])
    return StreakImage(offset + scale * pixels.astype(float), tpp, t0, meta)


def export_image_csv(img: StreakImage, path):
    rows, cols = np.indices(img.counts.shape)
    write_table_csv(path, {
        "row": rows.ravel(), "col": cols.ravel(),
        "t_ps": img.row_times[rows.ravel()], "counts": img.counts.ravel(),
    })


def check_compatible(a: StreakImage, b: StreakImage):
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    if not a.same_calibration(b):
        raise CalibrationMismatch("images have different time calibrations")
