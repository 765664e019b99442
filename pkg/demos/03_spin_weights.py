"""Restricted spin weights and what they predict for a single group element.

For SO(2, n) only two weight coordinates survive restriction to the split
torus. Spin weights restrict to (+-x1 +- x2)/2, each with multiplicity
2**(n-1) after counting the even Clifford algebra. Below this is checked on
one random product of four reflections.
"""

import math

import numpy as np

from k3lyap import clifford as cl, rootsys

print(rootsys.format_table("B", 3))
print()

n = 3
rng = np.random.default_rng(5)
alg = cl.CliffordAlgebra(n)
h = cl.CliffordGroupElement.from_vectors(alg, [alg.random_vector(rng) for _ in range(4)])
M = np.array(cl.conjugation_matrix(h), dtype=float)
S = np.array(cl.spin_matrix(h), dtype=float) / math.sqrt(abs(float(h.norm)))

x = np.sort(np.log(np.abs(np.linalg.eigvals(M))))[::-1]
print("standard log-moduli:", np.round(x, 4))
print("predicted spin values:", np.round([(x[0] + x[1]) / 2, (x[0] - x[1]) / 2], 4),
      f"each times {2 ** (n - 1)} with signs")
spin = np.sort(np.log(np.abs(np.linalg.eigvals(S))))[::-1]
print("spin log-moduli:", np.round(spin, 4))
