"""Internal unit system: um (wavelength, poling period), mm (crystal length),
ps (time), rad/ps (angular frequency), rad/um (wavenumber), ps/mm (inverse
group velocity)."""
import math

C_UM_PER_PS = 299.792458
C_MM_PER_PS = 0.299792458
TWO_PI = 2.0 * math.pi
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def wavelength_to_omega(wavelength_um):
    """Vacuum wavelength (um) -> angular frequency (rad/ps)."""
    return TWO_PI * C_UM_PER_PS / wavelength_um


def omega_to_wavelength(omega):
    """Angular frequency (rad/ps) -> vacuum wavelength (um)."""
    return TWO_PI * C_UM_PER_PS / omega


def bandwidth_nm_to_omega(center_um, fwhm_um):
    """Wavelength FWHM (um) at ``center_um`` -> angular-frequency FWHM (rad/ps).

    First-order conversion ``|d omega| = 2 pi c / lambda^2 |d lambda|``.
    """
    return TWO_PI * C_UM_PER_PS * fwhm_um / center_um**2


def bandwidth_omega_to_um(center_um, fwhm_omega):
    return fwhm_omega * center_um**2 / (TWO_PI * C_UM_PER_PS)
