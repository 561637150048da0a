"""Acceptance criteria, one test per criterion.

Every test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities (visible with or without ``-s``) and then asserts at the stated
tolerance.  All randomness is drawn from per-criterion seeded generators.
"""

import math

import numpy as np
import pytest

from quadlin.coeffs import CoefficientFamily, lemma_margin, lemma_margin_closed_form
from quadlin.identities import functional_suite, symmetry_suite, theta_suite
from quadlin.laplace import (
    EIG_REL_TOL,
    assemble,
    dirichlet_energy,
    energy_gradient,
    positivity_certificate,
    quad_form,
    residual,
    solve_dirichlet,
)
from quadlin.pluri import (
    CubeWeights2,
    D_squared,
    GaugeField,
    PlaquetteWeights3,
    action_Sijk,
    check_4d_consistency,
    classical_star_triangle,
    complete_square_residual,
    corner_patch,
    corner_system,
    elliptic_special_solution,
    flip_energy_invariance,
    gauge_construct,
    image_condition_residual,
    nu_loop_product,
    proportionality_defect,
    solve_corner,
    three_field_map,
    two_field_F,
    two_field_G,
    white_sign_choices,
)
from quadlin.quadeq import (
    FieldAssignment,
    PerturbedFamily,
    backlund,
    check_3d_consistency,
    cube_map_defect,
    discrete_exponential,
    exponential_along_path,
    face_residuals,
    tetrahedron_check,
)
from quadlin.quadgraph import gen_square_grid
from quadlin.theta import ThetaParams

TAU0S = (0.5, 1.0, 2.0)
LAM = 0.9
RHOMBIC_LAMBDA0 = 2.95


def families(lambda0=0.4):
    out = [CoefficientFamily.rectangular(t, lambda0) for t in TAU0S]
    out += [CoefficientFamily.rhombic(t, RHOMBIC_LAMBDA0) for t in TAU0S]
    out.append(CoefficientFamily.degenerate(lambda0))
    return out


def name(fam):
    return fam.regime if fam.tau0 is None else f"{fam.regime}(tau0={fam.tau0:g})"


def rng_for(criterion: int):
    return np.random.default_rng(np.random.SeedSequence([20261019, criterion]))


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title} -- {detail}")
        return ok

    return emit


def near_pi(d, margin):
    r = np.mod(np.asarray(d) - math.pi, 2 * math.pi)
    return bool(np.any(np.minimum(r, 2 * math.pi - r) < margin))


def cube_labels(rng, fam, margin=0.15):
    """Labels whose differences stay away from 0 and pi (zeros and poles of f)."""
    while True:
        L = rng.uniform(0, 2 * math.pi, 3)
        diffs = [L[i] - L[j] for i in range(3) for j in range(i + 1, 3)]
        bad = any(near_pi(d, margin) or near_pi(d + math.pi, margin) for d in diffs)
        if fam.regime == "rhombic":
            bad = bad or near_pi(L - fam.lambda0, margin) or near_pi(L + math.pi - fam.lambda0, margin)
        if not bad:
            return tuple(L)


def cz(rng, n):
    return tuple(complex(z) for z in rng.normal(size=n) + 1j * rng.normal(size=n))


# ---------------------------------------------------------------------------------


def test_criterion_01_theta_identities(verdict):
    rng = rng_for(1)
    worst, parts = 0.0, {}
    for t in TAU0S:
        for p in (ThetaParams.rectangular(t), ThetaParams.rhombic(t)):
            rep = theta_suite(p, rng, 500)
            for k, v in rep.residuals.items():
                parts[k] = max(parts.get(k, 0.0), v)
            worst = max(worst, rep.max_residual)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in sorted(parts.items()))
    ok = verdict(1, "theta identity suite (500 points, 6 moduli)", worst < 1e-10,
                 f"max {worst:.2e} < 1e-10 [{detail}]")
    assert ok


def test_criterion_02_functional_equations(verdict):
    rng = rng_for(2)
    worst, by = 0.0, {}
    for fam in families():
        rep = functional_suite(fam, rng, 500)
        by[name(fam)] = rep.max_residual
        worst = max(worst, rep.max_residual)
    ok = verdict(2, "fff / fhh / g0-sum equations (500 draws x 7 families)", worst < 1e-10,
                 f"max {worst:.2e} < 1e-10")
    assert ok, by


def test_criterion_03_symmetry_constraints(verdict):
    rng = rng_for(3)
    worst, parts = 0.0, {}
    for fam in families():
        rep = symmetry_suite(fam, rng, 200)
        for k, v in rep.residuals.items():
            parts[k] = max(parts.get(k, 0.0), v)
        worst = max(worst, rep.max_residual)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in sorted(parts.items()))
    ok = verdict(3, "symmetries, decompositions, star masses (200 draws)", worst < 1e-10,
                 f"max {worst:.2e} < 1e-10 [{detail}]")
    assert ok


def test_criterion_04_three_dimensional_consistency(verdict):
    rng = rng_for(4)
    spread = tet = shift = 0.0
    control = math.inf
    for fam in families():
        for _ in range(100):
            lab = cube_labels(rng, fam)
            init = cz(rng, 4)
            spread = max(spread, check_3d_consistency(fam, lab, init)[1])
            r, s = tetrahedron_check(fam, lab, init)
            tet, shift = max(tet, abs(r)), max(shift, s)
            a, b, _ = lab
            control = min(control, cube_map_defect(PerturbedFamily(fam, 1.01, a - b), lab))
    ok = spread < 1e-9 and tet < 1e-9 and shift < 1e-10 and control > 1e-3
    verdict(4, "3D consistency (100 cubes x 7 families)", ok,
            f"spread {spread:.1e} < 1e-9, tetrahedron {tet:.1e} < 1e-9, "
            f"x0-shift {shift:.1e} < 1e-10, perturbed min {control:.1e} > 1e-3")
    assert ok


def test_criterion_05_discrete_exponential(verdict):
    rng = rng_for(5)
    g = gen_square_grid(8, 0.2, 1.7)
    ci = g.coord_index()
    v0 = ci[(0, 0)]
    agree = spread = face = reality = lap = 0.0
    zero = FieldAssignment.zeros(g.vertices)
    for fam in families():
        e = discrete_exponential(g, fam, LAM, v0)
        rel = lambda z, v: abs(z - e[v]) / max(1.0, abs(e[v]))  # noqa: E731
        bk = backlund(g, fam, zero, LAM, (v0, 1.0))
        agree = max(agree, max(rel(bk[v], v) for v in g.vertices))
        # other spanning trees and explicit lattice paths
        for _ in range(4):
            perm = dict(zip(sorted(g.vertices), rng.permutation(len(g.vertices))))
            alt = backlund(g, fam, zero, LAM, (v0, 1.0), order=lambda t: perm[t[0]])
            spread = max(spread, max(rel(alt[v], v) for v in g.vertices))
        for _ in range(20):
            m, n = rng.integers(0, 9, 2)
            steps = rng.permutation([0] * m + [1] * n)
            pt, path = [0, 0], [v0]
            for s in steps:
                pt[s] += 1
                path.append(ci[tuple(pt)])
            spread = max(spread, rel(exponential_along_path(g, fam, LAM, path), path[-1]))
        face = max(face, float(np.max(np.abs(face_residuals(g, fam, e, normalize=True)))))
        if fam.regime == "rectangular":
            reality = max(reality, max(abs(e[v].imag) / abs(e[v]) for v in g.black))
            reality = max(reality, max(abs(e[v].real) / abs(e[v]) for v in g.white))
        L = assemble(g, fam)
        for v, r in residual(L, e).items():
            support = [u for u in L.row(v)] + [v]
            lap = max(lap, abs(r) / max(1.0, max(abs(e[u]) for u in support)))
    ok = agree < 1e-10 and spread < 1e-10 and face < 1e-9 and reality < 1e-10 and lap < 1e-9
    verdict(5, "discrete exponential on 8x8 grid (7 families)", ok,
            f"product vs Backlund {agree:.1e}, path spread {spread:.1e} (< 1e-10), "
            f"face residual {face:.1e} < 1e-9, reality {reality:.1e} < 1e-10, "
            f"Laplace residual {lap:.1e} < 1e-9 (all relative to local field size)")
    assert ok


def test_criterion_06_positivity(verdict):
    rng = rng_for(6)
    phis = np.linspace(0.2, math.pi - 0.2, 25)
    offsets = np.linspace(0, 2 * math.pi, 12, endpoint=False)
    ratio = {"g0": math.inf, "gg": math.inf}
    gg_det = 0.0
    for t in TAU0S:
        fam = CoefficientFamily.rectangular(t, 0.4)
        for a in offsets:
            for phi in phis:
                for form in ("g0", "gg"):
                    Q = quad_form(fam, (a, a + phi), form)
                    lo = np.linalg.eigvalsh(Q)[0]
                    ratio[form] = min(ratio[form], lo / abs(np.trace(Q)))
                    if form == "gg":
                        gg_det = max(gg_det, abs(np.linalg.det(Q)) / np.trace(Q) ** 2)
    rect_ok = all(r > EIG_REL_TOL for r in ratio.values())
    # rhombic regime: indefinite quads must be detected
    g = gen_square_grid(4, 0.2, 1.7)
    rhombic_found = all(
        positivity_certificate(g, CoefficientFamily.rhombic(t, RHOMBIC_LAMBDA0), "g0").indefinite_faces
        for t in TAU0S
    )
    # margins from both lemmas against their closed forms
    a = np.linspace(0.05, math.pi - 0.05, 200)
    margin = 0.0
    for t in TAU0S:
        for fam in (CoefficientFamily.rectangular(t), CoefficientFamily.rhombic(t)):
            m = lemma_margin(a, fam)
            margin = max(margin, float(np.max(np.abs(m - lemma_margin_closed_form(a, fam)))))
            assert np.all(m > 0)
    # energy gradient against central finite differences
    fd = 0.0
    for fam in families():
        x = {v: rng.normal() for v in g.black}
        for v in rng.choice(g.black, 3, replace=False):
            for form in ("g0", "gg"):
                exact = energy_gradient(g, fam, x, form)[v]
                xp, xm = dict(x), dict(x)
                xp[v] += 1e-6
                xm[v] -= 1e-6
                num = (dirichlet_energy(g, fam, xp, form) - dirichlet_energy(g, fam, xm, form)) / 2e-6
                fd = max(fd, abs(num - exact) / max(1.0, abs(exact)))
    ok = rect_ok and rhombic_found and margin < 1e-10 and fd < 1e-6
    verdict(6, "per-quad positivity, lemma margins, energy gradient", ok,
            f"rectangular min eig/trace: g0 {ratio['g0']:.2e}, gg {ratio['gg']:.2e} "
            f"(need > {EIG_REL_TOL:g}; gg det/trace^2 <= {gg_det:.1e}: complete square, rank 1); "
            f"rhombic indefinite detected {rhombic_found}; margins {margin:.1e} < 1e-10; "
            f"gradient vs FD {fd:.1e} < 1e-6")
    assert ok


def test_criterion_07_dirichlet_solve(verdict):
    g = gen_square_grid(8, 0.2, 1.7)
    worst = 0.0
    for t in TAU0S:
        fam = CoefficientFamily.rectangular(t, 0.4)
        e = discrete_exponential(g, fam, LAM, 0)
        L = assemble(g, fam)
        sol = solve_dirichlet(L, {v: e[v] for v in L.boundary}, fam)
        worst = max(worst, max(abs(sol[v] - e[v]) / abs(e[v]) for v in L.interior))
    deg = CoefficientFamily.degenerate()
    L0 = assemble(g, deg)
    const = solve_dirichlet(L0, {v: 1.0 for v in L0.boundary}, deg)
    cerr = max(abs(z - 1) for z in const.values.values())
    ok = worst < 1e-8 and cerr < 1e-10
    verdict(7, "Dirichlet solve on 8x8 grid", ok,
            f"exponential reproduction (per-vertex relative) {worst:.1e} < 1e-8; "
            f"q=0 constants {cerr:.1e} < 1e-10")
    assert ok


def test_criterion_08_two_field_map(verdict):
    rng = rng_for(8)
    gf = fg = d2 = rank = S = 0.0
    for _ in range(200):
        w = CubeWeights2(cz(rng, 3), cz(rng, 3))
        wk = two_field_F(w)
        sc = 1 + max(map(abs, w.a + w.c))
        gf = max(gf, min(two_field_G(wk, s).max_diff(w) for s in (1, -1)) / sc)
        t = CubeWeights2(cz(rng, 3), cz(rng, 3), False)
        for s in (1, -1):
            fg = max(fg, two_field_F(two_field_G(t, s)).max_diff(t) / (1 + max(map(abs, t.a + t.c))))
        ref = wk.a[0] * wk.a[1] * wk.a[2] * w.S
        d2 = max(d2, abs(D_squared(wk) - ref) / (1 + abs(ref)))
        rank = max(rank, proportionality_defect(corner_system(w, wk)))
        xs = cz(rng, 3)
        x0 = solve_corner(w, *xs)
        scale = (1 + max(abs(v) for v in (x0,) + xs)) ** 2 * sc
        S = max(S, abs(action_Sijk(w, wk, (x0,) + xs)) / scale)
    four = {"black": 0.0, "white": 0.0}
    for _ in range(100):
        init = {(p, q): cz(rng, 2) for p in range(4) for q in range(p + 1, 4)}
        four["black"] = max(four["black"], check_4d_consistency(init, "black"))
        for signs in white_sign_choices():
            four["white"] = max(four["white"], check_4d_consistency(init, "white", signs))
    ok = gf < 1e-10 and fg < 1e-10 and d2 < 1e-11 and rank < 1e-10 and S < 1e-9
    ok = ok and max(four.values()) < 1e-9
    verdict(8, "two-field star-triangle map", ok,
            f"G.F {gf:.1e}, F.G {fg:.1e} (< 1e-10), D^2 {d2:.1e} < 1e-11, rank-1 defect {rank:.1e} "
            f"< 1e-10, S {S:.1e} < 1e-9, 4D black {four['black']:.1e} / white (16 signs) "
            f"{four['white']:.1e} < 1e-9 (relative)")
    assert ok


def test_criterion_09_elliptic_special_solution(verdict):
    rng = rng_for(9)
    err = prod = 0.0
    for fam in families(0.0):
        n = 0
        while n < 50:
            p1, p2 = rng.uniform(0.05, math.pi - 0.05, 2)
            p3 = 2 * math.pi - p1 - p2
            if not 0.05 < p3 < math.pi - 0.05:
                continue
            star, flipped = elliptic_special_solution((p1, p2, p3), fam)
            err = max(err, two_field_F(star).max_diff(flipped))
            prod = max(prod, max(abs(star.a[m] * flipped.a[m] - 1) for m in range(3)))
            n += 1
    ok = err < 1e-10 and prod < 1e-11
    verdict(9, "elliptic special solution (50 triples x 7 families)", ok,
            f"map error {err:.1e} < 1e-10, a*a_k - 1 {prod:.1e} < 1e-11")
    assert ok


def test_criterion_10_flip_invariance(verdict):
    rng = rng_for(10)
    g = corner_patch()
    bnd = [v for v in g.black if not g.is_interior(v)]
    worst = 0.0
    for fam in families(0.4):
        for _ in range(20):
            boundary = {v: rng.normal() for v in bnd}
            worst = max(worst, flip_energy_invariance(g, 0, fam, boundary)[2])
    ok = worst < 1e-8
    verdict(10, "Dirichlet energy across a star-triangle flip (10-face patch)", ok,
            f"max relative difference {worst:.1e} < 1e-8 over 20 boundaries x 7 families")
    assert ok


def test_criterion_11_three_field_map(verdict):
    rng = rng_for(11)
    sq = img = gauge = nu = 0.0
    for _ in range(200):
        a, b = cz(rng, 3), cz(rng, 3)
        ws = [PlaquetteWeights3(a[m], b[m], a[m] ** 2 / b[m]) for m in range(3)]
        out = three_field_map(ws)
        scale = 1 + max(abs(z) for w in out for z in (w.a, w.b, w.c)) ** 2
        sq = max(sq, complete_square_residual(out) * (1 + max(abs(w.a) for w in out) ** 2) / scale)
        img = max(img, image_condition_residual(out))
        A = cz(rng, 3)
        rho = GaugeField(dict(zip(("0", "12", "23", "31"), cz(rng, 4))))
        star, flipped = gauge_construct(A, rho)
        got = three_field_map(star)
        s2 = 1 + max(abs(z) for w in flipped for z in (w.a, w.b, w.c))
        gauge = max(gauge, max(abs(o.a - f.a) + abs(o.b - f.b) + abs(o.c - f.c)
                               for o, f in zip(got, flipped)) / s2)
        nu = max(nu, nu_loop_product(star, flipped))
    A = cz(rng, 3)
    star, _ = gauge_construct(A, GaugeField({"0": 1, "12": 1, "23": 1, "31": 1}))
    exact = [w.a for w in three_field_map(star)] == list(classical_star_triangle(A))
    ok = sq < 1e-12 and img < 1e-12 and gauge < 1e-11 and nu < 1e-11 and exact
    verdict(11, "three-field map and gauge classification (200 draws)", ok,
            f"bc=a^2 {sq:.1e}, image condition {img:.1e} (< 1e-12), gauge map {gauge:.1e}, "
            f"nu loops {nu:.1e} (< 1e-11), rho=1 classical exact {exact}")
    assert ok


def test_criterion_12_degenerate_limit(verdict):
    a = np.linspace(0.1 + 1e-9, math.pi - 0.1 - 1e-9, 400)
    worst = 0.0
    for q in (1e-8, 1e-10):
        fam = CoefficientFamily(ThetaParams.from_nome(q))
        t = np.tan(a / 2)
        worst = max(worst, float(np.max(np.abs(fam.f(a) - t))), float(np.max(np.abs(fam.g0(a) - t))))
    g = gen_square_grid(8, 0.2, 1.7)
    L = assemble(g, CoefficientFamily.degenerate())
    const = max(abs(r) for r in residual(L, {v: 1.0 for v in g.black}).values())
    ok = worst < 1e-7 and const < 1e-12
    verdict(12, "degenerate limit", ok,
            f"|f - tan|, |g0 - tan| at q <= 1e-8: {worst:.1e} < 1e-7; "
            f"q=0 Laplacian on constants {const:.1e} < 1e-12")
    assert ok
