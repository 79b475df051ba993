"""Reference designs and objective values for the two ten-bar benchmark cases.

Metric-case areas are in units of 1e-2 m^2 (the configs carry
``area_unit_scale = 0.01``); imperial-case areas are in in^2.
"""

import numpy as np

# Minimum-mass case (steel, metric).
METRIC_START_AREA = 0.761
METRIC_TS_AREAS = np.array([1.022, 0.168, 0.601, 0.341, 0.168, 0.168, 0.361, 0.679, 0.361, 0.168])
METRIC_TS_MASS = 1103.8          # kg
METRIC_PRIOR_TS_AREAS = np.array([0.761, 0.268, 0.761, 0.363, 0.168, 0.168, 0.418, 0.646, 0.418, 0.168])
METRIC_PRIOR_TS_MASS = 1112.1    # kg, earlier tabu search result used as the bar to beat

# Three-objective case (aluminium, imperial).
IMPERIAL_TS_AREAS = np.array([33.5, 1.25, 33.5, 10.55, 1.8, 0.1, 32.3, 32.5, 14.0, 1.85])
IMPERIAL_SA_AREAS = np.array([33.4896, 1.4392, 33.4996, 11.1137, 1.3353, 0.1002,
                              32.8076, 33.4843, 13.2201, 1.9814])
IMPERIAL_TS_OBJECTIVES = {"mass": 7062.14, "frequency_hz": 28.427, "displacement": 4.38}
IMPERIAL_SA_OBJECTIVES = {"mass": 7064.16, "frequency_hz": 28.515, "displacement": 4.41}
