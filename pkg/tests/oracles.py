"""Frozen reference values.

Each value was computed outside the package (40-digit mpmath evaluation of
the Sellmeier sums with numerical differentiation, or an independent
Nelder-Mead fit) and is pinned here so regressions show up as diffs.
"""
import math

# congruent LiNbO3 (Zelmon) at 1.545 um and 1.55 um, no waveguide offset
N_O_1545 = 2.2112807850094492
N_E_1545 = 2.1377042262011249
N_O_1550 = 2.2111110086535738
N_E_1550 = 2.1375596497855564

# matched type-II process: 1.545 o + 0.854 e(+0.0152484109) -> o
OUTPUT_UM = 0.54999166319299708
IVG_INPUT = 7.5512520730854677
IVG_PUMP = 7.5512520730303516
IVG_OUTPUT = 8.5214587687339723
ALPHA = 0.97020669564850458
POLING_UM = 4.5703450628069036

# type-0, 1.545 e + 0.924232 e -> e
TYPE0_ANGLE_DEG = -17.000012626459375
TYPE0_POLING_UM = 9.2465347533114263
TYPE0_ALPHA = 0.71648895634449142

COMPRESSION_17 = 1.0 / math.tan(math.radians(17.0))  # 3.2708526...

# 6 nm at 1.545 um; transform-limited intensity FWHM = 4 ln2 / dw
DW_6NM_FIRST_ORDER = 2 * math.pi * 299.792458 * 0.006 / 1.545**2
TL_FWHM_6NM = 4 * math.log(2) / DW_6NM_FIRST_ORDER  # ~0.5856 ps

# least-squares Gaussian (with offset) fitted to rect(27 ps) * gaussian(5 ps),
# sampled every 0.5 ps on [-100, 100] ps; Nelder-Mead on the summed squares
RECT27_IRF5_GAUSS_FWHM = 23.1227866
RECT27_IRF5_DIRECT_FWHM = 27.0
RECT27_IRF5_QUADRATURE = math.sqrt(27.0**2 + 5.0**2)  # 27.459
