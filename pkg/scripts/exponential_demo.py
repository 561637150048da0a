"""Discrete exponential on a square grid: growth, reality and face residuals per regime."""

import argparse

import numpy as np

from quadlin.coeffs import CoefficientFamily
from quadlin.quadeq import discrete_exponential, face_residuals
from quadlin.quadgraph import gen_square_grid, write_svg

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--n", type=int, default=8)
ap.add_argument("--lam", type=float, default=0.9)
ap.add_argument("--tau0", type=float, default=1.0)
ap.add_argument("--svg", help="write the rectangular field to this SVG file")
args = ap.parse_args()

g = gen_square_grid(args.n, 0.2, 1.7)
fams = {
    "rectangular": CoefficientFamily.rectangular(args.tau0, 0.4),
    "rhombic": CoefficientFamily.rhombic(args.tau0, 2.95),
    "degenerate": CoefficientFamily.degenerate(0.4),
}
for label, fam in fams.items():
    e = discrete_exponential(g, fam, args.lam, 0)
    mags = np.array([abs(e[v]) for v in g.vertices])
    res = np.max(np.abs(face_residuals(g, fam, e, normalize=True)))
    print(f"{label:12s} |e| in [{mags.min():.3e}, {mags.max():.3e}]  max face residual {res:.2e}")
    if args.svg and label == "rectangular":
        write_svg(g, args.svg, field=e)
        print(f"wrote {args.svg}")
