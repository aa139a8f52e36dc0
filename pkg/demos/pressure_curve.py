"""
The pressure function near zero
================================

P(beta) is the log of the leading root of the truncated determinant for the
weighted operator. It vanishes at 0 and its slope there is the Lyapunov
exponent, which gives an estimate that does not go through alpha' at all.
"""
import mpmath as mp

from lyapdet import paper_example, pressure_estimate
from lyapdet.traces import orbit_terms

mp.mp.dps = 64
T, g, c = paper_example()
N = 8
terms = [orbit_terms(T, g, c, n) for n in range(1, N + 1)]  # reuse across betas

for beta in ["-1", "-0.5", "0", "0.5", "1"]:
    print(f"P({beta:>4}) = {mp.nstr(pressure_estimate(T, g, c, beta, N, terms), 20)}")

h = mp.mpf("1e-8")
slope = (pressure_estimate(T, g, c, h, N, terms) - pressure_estimate(T, g, c, -h, N, terms)) / (2 * h)
print("slope at 0:", mp.nstr(slope, 15))
