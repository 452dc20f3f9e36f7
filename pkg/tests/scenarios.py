"""Conversion scenarios shared by the equivalence tests."""
import numpy as np

from qpgstreak.config import ScenarioConfig
from qpgstreak.phasematching import NonlinearityProfile


def chirped_profile(length_mm=27.0, n=201, rate=2e-3):
    z = np.linspace(0.0, length_mm, n)
    taper = 0.6 + 0.4 * np.cos(np.pi * (z / length_mm - 0.5))
    return NonlinearityProfile.tabulated(z, taper * np.exp(1j * rate * (z * 1e3) ** 2
                                                             / (length_mm * 1e3)))


def scenarios():
    """``(name, process, f1, f2, alpha_override)`` tuples."""
    out = []
    base = ScenarioConfig.load("paper_type2")
    p = base.process()
    f1, f2 = base.spectra()
    out.append(("matched_uniform", p, f1, f2, None))
    out.append(("matched_truncated_23mm",
                p.replace(profile=NonlinearityProfile.truncated(23.0, 27.0)), f1, f2, None))
    out.append(("matched_chirped_profile", p.replace(profile=chirped_profile()), f1, f2, None))
    out.append(("matched_delay_3ps", p.replace(delay_ps=3.0), f1, f2, None))
    out.append(("matched_negative_alpha", p, f1, f2, -0.8))
    t0 = ScenarioConfig.load("type0_17deg")
    q = t0.process()
    g1, g2 = t0.spectra()
    out.append(("type0_uniform", q, g1, g2, None))
    out.append(("type0_step_profile",
                q.replace(profile=NonlinearityProfile.piecewise((0, 9, 18, 27), (1, 0.5, 1))),
                g1, g2, None))
    return out
