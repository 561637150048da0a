"""Star-triangle flip on the 10-face patch: energy before/after for random boundary data."""

import argparse

import numpy as np

from quadlin.coeffs import CoefficientFamily
from quadlin.pluri import corner_patch, flip_energy_invariance

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--draws", type=int, default=5)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

rng = np.random.default_rng(args.seed)
g = corner_patch()
bnd = [v for v in g.black if not g.is_interior(v)]
for fam in (CoefficientFamily.rectangular(1.0, 0.4), CoefficientFamily.degenerate(0.4)):
    for _ in range(args.draws):
        before, after, rel = flip_energy_invariance(g, 0, fam, {v: rng.normal() for v in bnd})
        print(f"{fam.regime:12s} E_before {before: .12f}  E_after {after: .12f}  rel {rel:.1e}")
