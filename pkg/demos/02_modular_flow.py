"""Oseledets spectrum of a few cocycles over the modular geodesic flow.

The standard SL2 cocycle has exponents (1/2, -1/2) in the raw time
normalization. Functorial constructions rescale them predictably: sym2 gives
(1, 0, -1), and the second exterior power of two copies gives a top exponent
of 1 with a cluster of zeros. The spin lift of sym2 goes back to SL2-sized
exponents.
"""

from k3lyap import hypflow as hf, lyapunov as ly

P = hf.preset("modular")
base = ly.standard_cocycle(P)
cocycles = {
    "standard": base,
    "sym2": ly.sym2(base),
    "wedge2(rho+rho)": ly.wedge2(ly.direct_sum(base, base)),
    "spin(sym2)": ly.spin_lift(ly.sym2(base)),
}

cfg = ly.EstimatorConfig(total_time=20_000, burn_in=500, trajectories=2, seed=1)
for name, c in cocycles.items():
    est = ly.estimate_spectrum(c, cfg)
    vals = " ".join(f"{v:+.3f}" for v in est.values)
    print(f"{name:16s} raw [{vals}]  top se {est.stderrs[0]:.1e}")
