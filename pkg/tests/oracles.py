"""Reference values from direct high-precision summation (mpmath, 30-40 digits).

They were computed once outside the package and are frozen here, so the
tests do not share code with the implementation.
"""

# (1 - y) * sum_{k >= 0} y^(k^2), the masked-family phi0 error at y = s/(s+1)
MASKED_ERROR = {
    9: 0.3230272513530309,
    99: 0.093400486122085372,
    999: 0.028517947798387322,
    9999: 0.0089120476913337994,
}

# 1 - e^-10 * sum_k 10^(k^2)/(k^2)!, Borel masked transform of phi0 at y = 10
BOREL_MASKED_Y10 = 0.8337458649002121

# e^{2(e^-1 - 1)} = S_2(phi2; 1)
SZASZ_2_2_1 = 0.28245356385054034

# e^{e^-1 - 1} = S_1(phi1; 1)
SZASZ_1_1_1 = 0.53146360538661567

# S_m(1/(1+x); x0) by direct summation
SZASZ_RATIONAL = {
    (5, 1.0): 0.52614126283523512,
    (20, 0.5): 0.6740684826937805,
    (50, 3.0): 0.25094340513604067,
}

BETA_1 = 0.63212055882855768
ETH_1 = 0.43233235838169365
BETA_1E6 = 0.99999950000016667

# m = 10, xi = 1 in the beta inequality chain
HOLHOS_10_1 = {"beta": 0.95162581964, "left": 0.0182333219887,
               "mid": 0.018236877441, "right": 0.0182481768076}

# (1 - y) sum_m y^m a_m S_{m+1}(phi1; 1), masked, y = 0.9
MASKED_F9_PHI1_XI1 = 0.26572008146667491

# int_0^inf e^{-y/9}/9 (1 + e^{-2y}) dy
ALTERNATING_F9 = 1.0 + 1.0 / 19.0
