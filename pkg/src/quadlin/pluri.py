"""Star-triangle maps for black-vertex 2-forms and their consistency properties.

Cube weights are stored in the cyclic order ``(ij, jk, ki)``.  On the star
side (black base point ``n``) they are ``a^{ij}, c^{ij}``; on the flipped
side they are ``a^{ij}_k, c^{ij}_k`` on the parallel plaquettes through the
opposite corner.
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FlipError, InconclusiveError, PoleError
from .quadgraph import QuadGraph, gen_from_stepped_surface, star_triangle_flip

__all__ = [
    "DENOM_TOL",
    "PlaquetteWeights2",
    "CubeWeights2",
    "PlaquetteWeights3",
    "GaugeField",
    "two_field_F",
    "two_field_G",
    "D_squared",
    "classical_star_triangle",
    "classical_triangle_star",
    "check_4d_consistency",
    "white_sign_choices",
    "corner_system",
    "proportionality_defect",
    "action_Sijk",
    "solve_corner",
    "elliptic_special_solution",
    "three_field_map",
    "complete_square_residual",
    "image_condition_residual",
    "gauge_construct",
    "nu_loop_product",
    "corner_patch",
    "flip_energy_invariance",
    "weights_to_json",
    "weights_from_json",
]

DENOM_TOL = 1e-12


@dataclass(frozen=True)
class PlaquetteWeights2:
    a: complex
    c: complex

    def reversed(self) -> "PlaquetteWeights2":
        """Weights of the oppositely oriented plaquette."""
        return PlaquetteWeights2(-self.a, -self.c)


@dataclass(frozen=True)
class CubeWeights2:
    """Two-field weights on the three plaquettes ``(ij, jk, ki)`` of one side of a cube."""

    a: tuple
    c: tuple
    black_base: bool = True

    def __post_init__(self):
        if len(self.a) != 3 or len(self.c) != 3:
            raise DomainError("cube weights need three a and three c values")
        object.__setattr__(self, "a", tuple(complex(z) for z in self.a))
        object.__setattr__(self, "c", tuple(complex(z) for z in self.c))

    @classmethod
    def from_plaquettes(cls, pw, black_base=True) -> "CubeWeights2":
        return cls(tuple(p.a for p in pw), tuple(p.c for p in pw), black_base)

    @property
    def plaquettes(self):
        return tuple(PlaquetteWeights2(a, c) for a, c in zip(self.a, self.c))

    @property
    def S(self) -> complex:
        return sum(self.c)

    def max_diff(self, other: "CubeWeights2", a_sign: int = 1) -> float:
        da = max(abs(x - a_sign * y) for x, y in zip(self.a, other.a))
        dc = max(abs(x - y) for x, y in zip(self.c, other.c))
        return max(da, dc)

    def to_list(self):
        return [
            {"a": {"re": a.real, "im": a.imag}, "c": {"re": c.real, "im": c.imag}}
            for a, c in zip(self.a, self.c)
        ]


@dataclass(frozen=True)
class PlaquetteWeights3:
    a: complex
    b: complex
    c: complex

    def square_residual(self) -> float:
        return abs(self.b * self.c - self.a * self.a)


@dataclass(frozen=True)
class GaugeField:
    """Nonzero gauge values at black lattice points."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.values.items():
            if v == 0:
                raise DomainError(f"gauge vanishes at {k}")

    def __getitem__(self, key):
        return self.values[key]


def _cyc(m):
    return (m + 1) % 3, (m + 2) % 3


def two_field_F(w: CubeWeights2, half: float = 0.5) -> CubeWeights2:
    """Star -> triangle map on ``(a, c)`` weights.

    ``half`` is the prefactor of the c-update, exposed only for sensitivity probes.
    """
    a, c = w.a, w.c
    S = sum(c)
    if abs(S) < DENOM_TOL:
        raise ZeroDivisionError("c^{ij} + c^{jk} + c^{ki} vanishes")
    ak, ck = [], []
    for m in range(3):
        p, q = _cyc(m)
        ak.append(a[p] * a[q] / S)
        ck.append(half * (c[p] + c[q] - c[m] - (a[p] ** 2 + a[q] ** 2 - a[m] ** 2) / S))
    return CubeWeights2(tuple(ak), tuple(ck), not w.black_base)


def D_squared(wk: CubeWeights2) -> complex:
    """The expanded square of ``D`` in terms of flipped weights."""
    A, C = wk.a, wk.c
    return (
        (A[0] * A[1]) ** 2
        + (A[1] * A[2]) ** 2
        + (A[2] * A[0]) ** 2
        + 2 * A[0] * A[1] * A[2] * sum(C)
    )


def two_field_G(wk: CubeWeights2, sign: int = 1) -> CubeWeights2:
    """Triangle -> star map; ``sign`` selects the branch ``D = sign * sqrt(D^2)``."""
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    A, C = wk.a, wk.c
    if min(abs(x) for x in A) < DENOM_TOL:
        raise ZeroDivisionError("flipped a-weight vanishes; inverse is singular")
    D2 = D_squared(wk)
    if abs(D2) < DENOM_TOL:
        raise ZeroDivisionError("D^2 vanishes (branch point)")
    D = sign * cmath.sqrt(D2)
    a, c = [], []
    for m in range(3):
        p, q = _cyc(m)
        c.append(C[p] + C[q] + A[p] * A[q] / A[m])
        a.append(D / A[m])
    return CubeWeights2(tuple(a), tuple(c), not wk.black_base)


def classical_star_triangle(a) -> tuple:
    """``a^{ij}_k = a^{jk} a^{ki} / (a^{ij} + a^{jk} + a^{ki})``."""
    s = sum(a)
    if abs(s) < DENOM_TOL:
        raise ZeroDivisionError("star weights sum to zero")
    return tuple(a[_cyc(m)[0]] * a[_cyc(m)[1]] / s for m in range(3))


def classical_triangle_star(ak) -> tuple:
    """Rational inverse of :func:`classical_star_triangle`."""
    num = ak[0] * ak[1] + ak[1] * ak[2] + ak[2] * ak[0]
    return tuple(num / ak[m] for m in range(3))


# --- 4D consistency -----------------------------------------------------------

def _unit(m, dim=4):
    return tuple(1 if i == m else 0 for i in range(dim))


def _add(*pts):
    return tuple(sum(c) for c in zip(*pts))


class _LatticeWeights:
    """Weights on oriented plaquettes ``(point, (p, q))``; ``(q, p)`` reads negated."""

    def __init__(self):
        self.store: dict = {}

    def put(self, pt, p, q, a, c):
        if p < q:
            self.store[(pt, (p, q))] = (complex(a), complex(c))
        else:
            self.store[(pt, (q, p))] = (-complex(a), -complex(c))

    def get(self, pt, p, q):
        if p < q:
            return self.store[(pt, (p, q))]
        a, c = self.store[(pt, (q, p))]
        return -a, -c

    def cube(self, pt, i, j, k, black_base):
        pw = [self.get(pt, i, j), self.get(pt, j, k), self.get(pt, k, i)]
        return CubeWeights2(tuple(x[0] for x in pw), tuple(x[1] for x in pw), black_base)


def _triples(dim=4):
    return list(itertools.combinations(range(dim), 3))


def _apply(wts: _LatticeWeights, out: _LatticeWeights, base, triple, fn):
    i, j, k = triple
    res = fn(wts.cube(base, i, j, k, True))
    # results live on the plaquettes parallel to (ij, jk, ki), shifted by e_k, e_i, e_j
    out.put(_add(base, _unit(k)), i, j, res.a[0], res.c[0])
    out.put(_add(base, _unit(i)), j, k, res.a[1], res.c[1])
    out.put(_add(base, _unit(j)), k, i, res.a[2], res.c[2])


def check_4d_consistency(
    init: dict,
    base: str = "black",
    signs=None,
    F=two_field_F,
    return_detail: bool = False,
):
    """Maximal relative discrepancy of the two routes around a 4D cube.

    ``init`` maps ``(p, q)`` with ``p < q`` in ``range(4)`` to ``(a, c)``.  For a
    black base F is applied in the four cubes at the base and G in the four
    opposite cubes, and squares of the ``a`` results are compared; for a white
    base G comes first (branch signs ``signs[triple]``) and full equality of
    ``a`` and ``c`` is required.  ``signs`` maps each of the four triples to
    ``+1``/``-1`` for the G applications (default all ``+1``).
    """
    if base not in ("black", "white"):
        raise DomainError("base must be 'black' or 'white'")
    signs = dict(signs or {})
    origin = (0, 0, 0, 0)
    w0 = _LatticeWeights()
    for (p, q), (a, c) in init.items():
        w0.put(origin, p, q, a, c)
    first = _LatticeWeights()
    try:
        for t in _triples():
            if base == "black":
                _apply(w0, first, origin, t, F)
            else:
                s = signs.get(t, 1)
                _apply(w0, first, origin, t, lambda w, s=s: two_field_G(w, s))
        second: dict = {}
        for ell in range(4):
            shifted = _add(origin, _unit(ell))
            for t in _triples():
                if ell in t:
                    continue
                out = _LatticeWeights()
                if base == "black":
                    _apply(first, out, shifted, t, lambda w: two_field_G(w, signs.get((ell, t), 1)))
                else:
                    _apply(first, out, shifted, t, F)
                for key, val in out.store.items():
                    second.setdefault(key, []).append(val)
    except ZeroDivisionError as exc:
        raise InconclusiveError(f"singular intermediate value: {exc}") from exc

    worst = 0.0
    detail = {}
    for key, vals in second.items():
        if len(vals) != 2:
            raise InconclusiveError(f"plaquette {key} reached {len(vals)} times")
        (a1, c1), (a2, c2) = vals
        if base == "black":
            da = abs(a1 * a1 - a2 * a2) / max(1.0, abs(a1) ** 2, abs(a2) ** 2)
        else:
            da = abs(a1 - a2) / max(1.0, abs(a1), abs(a2))
        dc = abs(c1 - c2) / max(1.0, abs(c1), abs(c2))
        detail[key] = max(da, dc)
        worst = max(worst, da, dc)
    if return_detail:
        return worst, detail
    return worst


def white_sign_choices():
    """All branch-sign assignments for the four G-cubes of a white-based 4D cube."""
    ts = _triples()
    for bits in itertools.product((1, -1), repeat=len(ts)):
        yield dict(zip(ts, bits))


# --- corner equations -------------------------------------------------------------

def corner_system(w: CubeWeights2, wk: CubeWeights2) -> np.ndarray:
    """Coefficient rows of the four corner equations in ``(x, x_ij, x_jk, x_ki)``.

    Rows are the derivatives of :func:`action_Sijk` with respect to ``x``,
    ``x_ij``, ``x_jk``, ``x_ki``.
    """
    a, c = w.a, w.c
    A, C = wk.a, wk.c
    return np.array(
        [
            [-(c[0] + c[1] + c[2]), a[0], a[1], a[2]],
            [a[0], C[1] + C[2] - c[0], -A[2], -A[1]],
            [a[1], -A[2], C[0] + C[2] - c[1], -A[0]],
            [a[2], -A[1], -A[0], C[0] + C[1] - c[2]],
        ],
        dtype=complex,
    )


def proportionality_defect(rows: np.ndarray) -> float:
    """Largest 2x2 minor between any two rows, each scaled to unit maximal entry."""
    R = np.asarray(rows, dtype=complex)
    norms = np.max(np.abs(R), axis=1, keepdims=True)
    if np.any(norms == 0):
        R = R[norms[:, 0] > 0]
        norms = norms[norms[:, 0] > 0]
    R = R / norms
    worst = 0.0
    for r1, r2 in itertools.combinations(range(R.shape[0]), 2):
        for c1, c2 in itertools.combinations(range(R.shape[1]), 2):
            m = R[r1, c1] * R[r2, c2] - R[r1, c2] * R[r2, c1]
            worst = max(worst, abs(m))
    return worst


def action_Sijk(w: CubeWeights2, wk: CubeWeights2, x) -> complex:
    """Exterior derivative of the 2-form over one cube at the black values ``(x, x_ij, x_jk, x_ki)``."""
    x0, xij, xjk, xki = (complex(v) for v in x)
    a, c = w.a, w.c
    A, C = wk.a, wk.c
    flipped = (
        0.5 * C[0] * (xki ** 2 + xjk ** 2) - A[0] * xki * xjk
        + 0.5 * C[1] * (xij ** 2 + xki ** 2) - A[1] * xij * xki
        + 0.5 * C[2] * (xij ** 2 + xjk ** 2) - A[2] * xij * xjk
    )
    star = sum(0.5 * c[m] * (x0 ** 2 + xm ** 2) - a[m] * x0 * xm for m, xm in enumerate((xij, xjk, xki)))
    return flipped - star


def solve_corner(w: CubeWeights2, xij, xjk, xki) -> complex:
    """Center value ``x`` solving the first corner equation."""
    S = w.S
    if abs(S) < DENOM_TOL:
        raise ZeroDivisionError("vanishing star mass")
    return (w.a[0] * xij + w.a[1] * xjk + w.a[2] * xki) / S


# --- elliptic special solution ---------------------------------------------------

def elliptic_special_solution(phis, fam, tol: float = 1e-10):
    """Star weights ``(f(phi), g0(phi))`` and flipped weights ``(f(pi-phi), g0(pi-phi))``."""
    phis = tuple(float(p) for p in phis)
    if len(phis) != 3 or abs(sum(phis) - 2 * math.pi) > tol:
        raise DomainError("angles must be three and sum to 2 pi")
    for p in phis:
        if abs(math.sin(p)) < 1e-12:
            raise PoleError(f"angle {p} is a multiple of pi", p)
    star = CubeWeights2(
        tuple(complex(fam.f(p)) for p in phis), tuple(complex(fam.g0(p)) for p in phis), True
    )
    flipped = CubeWeights2(
        tuple(complex(fam.f(math.pi - p)) for p in phis),
        tuple(complex(fam.g0(math.pi - p)) for p in phis),
        False,
    )
    return star, flipped


# --- three-field map --------------------------------------------------------------

def complete_square_residual(ws) -> float:
    return max(abs(w.b * w.c - w.a * w.a) / (abs(w.a) ** 2 + 1) for w in ws)


def three_field_map(ws, check_tol: float = 1e-10):
    """Forward three-field star-triangle map on ``(12, 23, 31)`` triples."""
    ws = tuple(ws)
    if len(ws) != 3:
        raise DomainError("need three plaquette weights")
    if complete_square_residual(ws) > check_tol:
        raise DomainError("input violates b c = a^2")
    a = [w.a for w in ws]
    b = [w.b for w in ws]
    c = [w.c for w in ws]
    B = sum(b)
    if abs(B) < DENOM_TOL:
        raise ZeroDivisionError("b^{12} + b^{23} + b^{31} vanishes")
    out = []
    for m in range(3):
        p, q = _cyc(m)
        out.append(PlaquetteWeights3(a[p] * a[q] / B, c[p] * b[q] / B, b[p] * c[q] / B))
    return tuple(out)


def image_condition_residual(ws) -> complex:
    bprod = ws[0].b * ws[1].b * ws[2].b
    cprod = ws[0].c * ws[1].c * ws[2].c
    return abs(bprod - cprod) / (1 + abs(bprod))


def gauge_construct(A, rho: GaugeField):
    """Three-field weights from classical weights ``A`` and a gauge ``rho``.

    ``rho`` must provide keys ``"0"``, ``"12"``, ``"23"``, ``"31"`` (the four
    black points of the cube).  ``A`` are the star weights; the flipped
    weights are their classical star-triangle image.
    """
    A = tuple(complex(z) for z in A)
    Ak = classical_star_triangle(A)
    r0 = rho["0"]
    rs = (rho["12"], rho["23"], rho["31"])
    star = tuple(
        PlaquetteWeights3(A[m] / (r0 * rs[m]), A[m] / r0 ** 2, A[m] / rs[m] ** 2) for m in range(3)
    )
    flipped = []
    for m in range(3):
        # plaquette ij flipped connects x_jk and x_ki
        r_jk, r_ki = rs[(m + 1) % 3], rs[(m + 2) % 3]
        flipped.append(
            PlaquetteWeights3(Ak[m] / (r_jk * r_ki), Ak[m] / r_jk ** 2, Ak[m] / r_ki ** 2)
        )
    return star, tuple(flipped)


def nu_loop_product(star, flipped) -> complex:
    """Product of ``nu`` around the closed black loops of one cube (should be 1 for every loop).

    Returns the worst deviation ``|prod - 1|`` over the three triangles
    ``n -> n_ij -> n_ki -> n`` style loops built from one star and one flipped edge.
    """
    worst = 0.0
    nu = [w.b / w.c for w in star]  # n -> n_ij
    nuk = [w.b / w.c for w in flipped]  # n_jk -> n_ki across plaquette ij
    # loop n -> n_jk -> n_ki -> n for each m
    for m in range(3):
        jk, ki = (m + 1) % 3, (m + 2) % 3
        prod = nu[jk] * nuk[m] / nu[ki]
        worst = max(worst, abs(prod - 1))
    # loop around the flipped triangle n_12 -> n_23 -> n_31 -> n_12
    prod = 1.0
    for m in range(3):
        prod *= nuk[m]
    worst = max(worst, abs(prod - 1))
    return worst


# --- flip invariance of the Dirichlet energy ----------------------------------------

def corner_patch(alphas=(0.1, 2.2, 4.3)) -> QuadGraph:
    """Ten-face patch in ``Z^3``: three walls of a 2x2x2 box meeting at the black origin.

    The far plaquette of two walls is removed, leaving the origin (three
    faces, flippable) and the center of the third wall as interior black
    vertices.
    """
    plaq = []
    for i, j in ((0, 1), (1, 2), (2, 0)):
        for s in range(2):
            for t in range(2):
                n = [0, 0, 0]
                n[i] = s
                n[j] = t
                plaq.append((tuple(n), (i, j)))
    drop = {((0, 1, 1), (1, 2)), ((1, 0, 1), (2, 0))}
    plaq = [p for p in plaq if p not in drop]
    return gen_from_stepped_surface(plaq, alphas)


def flip_energy_invariance(g: QuadGraph, v: int, fam, boundary, fam_after=None):
    """Dirichlet energies of the harmonic extensions before and after flipping at ``v``.

    ``boundary`` maps the boundary black vertices of ``g`` (other than ones
    removed by the flip) to values.  Energies use the g0-form with the family's
    elliptic weights; ``fam_after`` may substitute different weights on the
    flipped graph (sensitivity probe).  Returns ``(E_before, E_after, rel_diff)``.
    """
    from .laplace import assemble, dirichlet_energy, solve_dirichlet

    if g.color(v) != "b":
        raise FlipError("energy invariance is stated for flips at black vertices")
    g2 = star_triangle_flip(g, v)
    out = []
    for graph, fm in ((g, fam), (g2, fam_after or fam)):
        L = assemble(graph, fm)
        bvals = {u: complex(boundary[u]) for u in L.boundary}
        sol = solve_dirichlet(L, bvals, fm)
        full = dict(bvals)
        full.update(sol.values)
        out.append(dirichlet_energy(graph, fm, full, "g0"))
    e1, e2 = (complex(e) for e in out)
    rel = abs(e1 - e2) / max(abs(e1), abs(e2), 1e-300) if (e1 or e2) else 0.0
    return out[0], out[1], rel


# --- serialization -----------------------------------------------------------------

def weights_to_json(ws) -> str:
    """Serialize ``CubeWeights2`` or a sequence of ``PlaquetteWeights3``."""
    def cx(z):
        z = complex(z)
        return {"re": z.real, "im": z.imag}

    if isinstance(ws, CubeWeights2):
        return json.dumps([{"a": cx(a), "c": cx(c)} for a, c in zip(ws.a, ws.c)])
    return json.dumps([{"a": cx(w.a), "b": cx(w.b), "c": cx(w.c)} for w in ws])


def weights_from_json(text: str, black_base: bool = True):
    data = json.loads(text)

    def cx(d):
        return complex(d["re"], d["im"])

    if data and "b" in data[0]:
        return tuple(PlaquetteWeights3(cx(d["a"]), cx(d["b"]), cx(d["c"])) for d in data)
    return CubeWeights2(tuple(cx(d["a"]) for d in data), tuple(cx(d["c"]) for d in data), black_base)
