"""
Two systems with a known answer
===============================

A constant cocycle has exponent log of its leading eigenvalue, and a scalar
cocycle on a Bernoulli measure just averages the logs. Both are good sanity
checks for the trace machinery, since the periodic-orbit sums are nontrivial
even though the answer is not.
"""
import mpmath as mp

import lyapdet
from lyapdet import ConstantCocycle, ConstantG, TableCocycle, TransitionMatrix

mp.mp.dps = 50
T = TransitionMatrix.full(2)
half = ConstantG("1/2")

cat = ConstantCocycle([[2, 1], [1, 1]])
rep = lyapdet.estimate(T, half, cat, N=8)
print("cat map  :", mp.nstr(rep.final, 30))
print("exact    :", mp.nstr(mp.log((3 + mp.sqrt(5)) / 2), 30))

scalar = TableCocycle(1, {"0": [[2]], "1": [[3]]})
rep = lyapdet.estimate(T, half, scalar, N=8)
print("scalar   :", mp.nstr(rep.final, 30))
print("exact    :", mp.nstr(mp.log(6) / 2, 30))

# entropy of the golden-mean shift is log of the golden ratio
golden = TransitionMatrix([[1, 1], [1, 0]])
print("golden-mean entropy:", mp.nstr(lyapdet.topological_entropy(golden), 20), mp.nstr(mp.log(mp.phi), 20))
