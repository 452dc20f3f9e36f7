"""Refractive index, wavenumber and inverse group velocity per crystal axis.

Models are read from a flat key-value file (see ``data/linbo3.disp`` for the
grammar). Wavelengths are vacuum wavelengths in um.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, OutOfRange
from .units import C_MM_PER_PS, TWO_PI

AXES = ("ordinary", "extraordinary", "constant")

#: central-difference step for the finite-difference derivative, um
FD_STEP_UM = 1e-4


@dataclass(frozen=True)
class DispersionModel:
    name: str
    coefficients: tuple
    validity_range: tuple
    axis: str = "extraordinary"
    offset: float = 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        lo, hi = (float(v) for v in self.validity_range)
        object.__setattr__(self, "validity_range", (lo, hi))
        if not 0 < lo < hi:
            raise ConfigError(f"model {self.name!r}: bad validity range {self.validity_range}")
        if self.axis == "constant":
            if len(coeffs) != 1:
                raise ConfigError(f"model {self.name!r}: constant axis takes one coefficient")
            if coeffs[0] + self.offset < 1.0:
                raise ConfigError(f"model {self.name!r}: index below 1")
        else:
            if len(coeffs) == 0 or len(coeffs) % 2:
                raise ConfigError(
                    f"model {self.name!r}: Sellmeier coefficients come in (A, B) pairs"
                )
            if any(lo**2 <= b <= hi**2 for b in coeffs[1::2]):
                raise ConfigError(f"model {self.name!r}: pole inside validity range")
            lam = np.linspace(lo, hi, 257)
            n = self._index(lam)
            if not np.all(np.isfinite(n)) or np.any(n <= 1.0):
                raise ConfigError(f"model {self.name!r}: n <= 1 inside validity range")

    # -- evaluation -------------------------------------------------------
    def _check(self, lam, strict=False):
        lam = np.asarray(lam, dtype=float)
        lo, hi = self.validity_range
        if strict:
            bad = (lam - FD_STEP_UM < lo) | (lam + FD_STEP_UM > hi)
        else:
            bad = (lam < lo) | (lam > hi)
        if np.any(bad) or np.any(~np.isfinite(lam)):
            first = lam[bad | ~np.isfinite(lam)].ravel()[0] if lam.ndim else float(lam)
            raise OutOfRange(float(first), self.validity_range, f"model {self.name!r}")
        return lam

    def _index(self, lam):
        if self.axis == "constant":
            return np.full(np.shape(lam), self.coefficients[0] + self.offset)
        l2 = np.asarray(lam, dtype=float) ** 2
        n2 = np.ones_like(l2)
        for a, b in zip(self.coefficients[0::2], self.coefficients[1::2]):
            n2 = n2 + a * l2 / (l2 - b)
        return np.sqrt(n2) + self.offset

    def _dn_dlambda(self, lam):
        if self.axis == "constant":
            return np.zeros(np.shape(lam))
        lam = np.asarray(lam, dtype=float)
        l2 = lam**2
        n_bare = self._index(lam) - self.offset
        dn2 = np.zeros_like(l2)
        for a, b in zip(self.coefficients[0::2], self.coefficients[1::2]):
            dn2 = dn2 - 2.0 * a * b * lam / (l2 - b) ** 2
        return dn2 / (2.0 * n_bare)

    def with_offset(self, offset):
        return dataclasses.replace(self, offset=float(offset))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def refractive_index(model: DispersionModel, wavelength):
    """Refractive index at ``wavelength`` (um); scalar or array."""
    lam = model._check(wavelength)
    return _scalar(model._index(lam))


def wavenumber(model: DispersionModel, wavelength):
    """``k = 2 pi n / lambda`` in rad/um."""
    lam = model._check(wavelength)
    return _scalar(TWO_PI * model._index(lam) / lam)


def group_index(model: DispersionModel, wavelength, method="analytic"):
    lam = model._check(wavelength, strict=True)
    if method == "analytic":
        dn = model._dn_dlambda(lam)
    elif method == "fd":
        dn = (model._index(lam + FD_STEP_UM) - model._index(lam - FD_STEP_UM)) / (2 * FD_STEP_UM)
    else:
        raise ValueError(f"unknown derivative method {method!r}")
    return _scalar(model._index(lam) - lam * dn)


def inverse_group_velocity(model: DispersionModel, wavelength, method="analytic", step=None):
    """``dk/domega`` at the carrier of ``wavelength``, in ps/mm.

    ``method="analytic"`` differentiates the Sellmeier form exactly;
    ``method="fd"`` uses a central difference in wavelength with step
    :data:`FD_STEP_UM` (or ``step``).
    """
    if method == "fd" and step is not None:
        lam = model._check(wavelength, strict=True)
        dn = (model._index(lam + step) - model._index(lam - step)) / (2 * step)
        return _scalar((model._index(lam) - lam * dn) / C_MM_PER_PS)
    return _scalar(np.asarray(group_index(model, wavelength, method)) / C_MM_PER_PS)


# ---------------------------------------------------------------------------
# coefficient files
# ---------------------------------------------------------------------------

_REQUIRED = ("name", "axis", "coefficients", "validity")


def _floats(value, key, lineno, source):
    try:
        return tuple(float(v) for v in value.split(",") if v.strip() != "")
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated decimals, got {value!r}",
                          lineno, source) from None


def parse_models(text: str, source: str = "<string>") -> dict:
    """Parse dispersion-model blocks; errors carry line numbers."""
    models = {}
    block = None
    block_line = None

    def close():
        if block is None:
            return
        missing = [k for k in _REQUIRED if k not in block]
        if missing:
            raise ConfigError(f"model block missing {', '.join(missing)}", block_line, source)
        validity = block["validity"]
        if len(validity) != 2:
            raise ConfigError("validity takes exactly two values", block_line, source)
        try:
            model = DispersionModel(
                name=block["name"],
                coefficients=block["coefficients"],
                validity_range=validity,
                axis=block["axis"],
                offset=block.get("offset", 0.0),
            )
        except ConfigError as exc:
            raise ConfigError(str(exc), block_line, source) from None
        if model.name in models:
            raise ConfigError(f"duplicate model name {model.name!r}", block_line, source)
        models[model.name] = model

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[model]":
            close()
            block, block_line = {}, lineno
            continue
        if block is None:
            raise ConfigError("statement outside a [model] block", lineno, source)
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in block:
            raise ConfigError(f"duplicate key {key!r}", lineno, source)
        if key in ("name", "axis"):
            block[key] = value
        elif key in ("coefficients", "validity"):
            block[key] = _floats(value, key, lineno, source)
        elif key == "offset":
            vals = _floats(value, key, lineno, source)
            if len(vals) != 1:
                raise ConfigError("offset takes one value", lineno, source)
            block[key] = vals[0]
        else:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
    close()
    return models


def load_models(path=None) -> dict:
    """Load a coefficient file; ``None`` loads the shipped LiNbO3 set."""
    if path is None or str(path) == "builtin":
        text = resources.files("qpgstreak").joinpath("data/linbo3.disp").read_text("utf-8")
        return parse_models(text, "builtin:linbo3.disp")
    path = Path(path)
    return parse_models(path.read_text("utf-8"), str(path))


def constant_model(n0, name=None, validity_range=(0.1, 100.0)):
    return DispersionModel(
        name=name or f"constant_{n0:g}", coefficients=(n0,),
        validity_range=validity_range, axis="constant",
    )
