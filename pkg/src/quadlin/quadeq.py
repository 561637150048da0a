"""The three-leg linear quad-equation on rhombic quad-graphs.

For a face ``(x0, x1, x12, x2)`` with labels ``(alpha, beta)`` the equation reads

    f(alpha - beta) x12 - g(alpha, beta) x0 - i (h(beta) x2 - h(alpha) x1) = 0.

The same relation centered at any other corner is obtained by relabelling the
face from that corner; all routines below go through :func:`_solve_face`.

A Bäcklund transform lives on the upper copy of the graph, where the colors
are exchanged: ``v+`` is white for black ``v``.  Fields therefore carry a
``layer`` bit; on layer 1 each face is read from its white corner ``x1`` with
labels ``(alpha + pi, beta)``, i.e. as the rhombus ``(x1, x0, x2, x12)``.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .errors import (
    DomainError,
    PoleError,
    PropagationError,
    ResidualError,
    SingularFaceError,
)
from .quadgraph import QuadGraph, angle_mod

__all__ = [
    "SINGULAR_TOL",
    "FieldAssignment",
    "CubeLabels",
    "PerturbedFamily",
    "quad_residual",
    "centered_residuals",
    "solve_for_vertex",
    "face_view",
    "face_residuals",
    "propagate",
    "grid_cauchy_vertices",
    "check_3d_consistency",
    "cube_map_defect",
    "tetrahedron_check",
    "backlund",
    "backlund_residuals",
    "discrete_exponential",
    "exponential_along_path",
]

SINGULAR_TOL = 1e-12
DOMAINS = ("full", "black", "white")


@dataclass(frozen=True)
class FieldAssignment:
    """Complex values on (a subset of) the vertices of a quad-graph."""

    values: MappingProxyType
    domain: str = "full"
    layer: int = 0  # 1: colors exchanged (Bäcklund layer)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise DomainError(f"unknown field domain {self.domain!r}")
        if self.layer not in (0, 1):
            raise DomainError("layer must be 0 or 1")
        vals = {int(k): complex(v) for k, v in dict(self.values).items()}
        object.__setattr__(self, "values", MappingProxyType(vals))

    @classmethod
    def of(cls, values: dict, domain: str = "full", layer: int = 0) -> "FieldAssignment":
        return cls(MappingProxyType(dict(values)), domain, layer)

    @classmethod
    def zeros(cls, ids, domain: str = "full") -> "FieldAssignment":
        return cls.of({v: 0j for v in ids}, domain)

    def __getitem__(self, v: int) -> complex:
        return self.values[v]

    def __contains__(self, v) -> bool:
        return v in self.values

    def __len__(self) -> int:
        return len(self.values)

    def ids(self) -> list[int]:
        return sorted(self.values)

    def array(self, ids=None) -> np.ndarray:
        ids = self.ids() if ids is None else ids
        return np.array([self.values[v] for v in ids], dtype=complex)

    def max_abs(self) -> float:
        return max((abs(z) for z in self.values.values()), default=0.0)

    def restrict(self, ids, domain: str | None = None) -> "FieldAssignment":
        return FieldAssignment.of(
            {v: self.values[v] for v in ids}, domain or self.domain, self.layer
        )

    def scaled(self, c: complex) -> "FieldAssignment":
        return FieldAssignment.of(
            {v: c * z for v, z in self.values.items()}, self.domain, self.layer
        )

    def __add__(self, other: "FieldAssignment") -> "FieldAssignment":
        if set(self.values) != set(other.values):
            raise DomainError("fields are defined on different vertex sets")
        return FieldAssignment.of(
            {v: z + other.values[v] for v, z in self.values.items()}, self.domain, self.layer
        )

    def check_domain(self, g: QuadGraph) -> bool:
        want = {"full": set(g.vertices), "black": set(g.black), "white": set(g.white)}[self.domain]
        return set(self.values) <= want

    def max_diff(self, other: "FieldAssignment") -> float:
        common = set(self.values) & set(other.values)
        return max((abs(self.values[v] - other.values[v]) for v in common), default=0.0)

    # {"domain": ..., "values": [{"id", "re", "im"}]}
    def to_dict(self) -> dict:
        d = {
            "domain": self.domain,
            "values": [{"id": v, "re": z.real, "im": z.imag} for v, z in sorted(self.values.items())],
        }
        if self.layer:
            d["layer"] = self.layer
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "FieldAssignment":
        return cls.of(
            {int(e["id"]): complex(e["re"], e["im"]) for e in d["values"]},
            d.get("domain", "full"),
            int(d.get("layer", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "FieldAssignment":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "re", "im"])
        for v, z in sorted(self.values.items()):
            w.writerow([v, repr(z.real), repr(z.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, domain: str = "full") -> "FieldAssignment":
        rows = csv.DictReader(io.StringIO(text))
        return cls.of({int(r["id"]): complex(float(r["re"]), float(r["im"])) for r in rows}, domain)


@dataclass(frozen=True)
class CubeLabels:
    alpha: float
    beta: float
    gamma: float

    def __iter__(self):
        return iter((self.alpha, self.beta, self.gamma))


class PerturbedFamily:
    """Stand-in family with ``f`` scaled by ``factor`` near given argument values.

    ``at`` is one angle or a sequence of angles; matching is modulo ``pi``
    so a perturbation at ``alpha - beta`` reaches every face of a cube that
    carries the label pair.  Used as a sensitivity probe: ``g`` is rebuilt
    from the perturbed ``f`` so the symmetry relations still hold while the
    functional equation breaks.
    """

    def __init__(self, fam, factor: float = 1.01, at=0.0, width: float = 1e-9):
        self.fam = fam
        self.factor = factor
        self.at = tuple(np.atleast_1d(np.asarray(at, dtype=float)))
        self.width = width

    def _hit(self, z) -> bool:
        for at in self.at:
            d = angle_mod(float(np.real(z)) - at) % math.pi
            if min(d, math.pi - d) < self.width:
                return True
        return False

    def f(self, alpha):
        val = self.fam.f(alpha)
        return val * self.factor if self._hit(alpha) else val

    def h(self, alpha):
        return self.fam.h(alpha)

    def g(self, alpha, beta):
        return self.f(alpha - beta) * self.h(alpha) * self.h(beta)

    def g0(self, alpha):
        return self.fam.g0(alpha)


def _coeffs(fam, a, b):
    """``(f(a-b), g(a,b), h(a), h(b))`` as Python complex numbers."""
    return (
        complex(fam.f(a - b)),
        complex(fam.g(a, b)),
        complex(fam.h(a)),
        complex(fam.h(b)),
    )


def quad_residual(fam, labels, values) -> complex:
    """Residual of the quad-equation on a face ``(x0, x1, x12, x2)``."""
    a, b = labels
    x0, x1, x12, x2 = (complex(v) for v in values)
    fab, gab, ha, hb = _coeffs(fam, a, b)
    return fab * x12 - gab * x0 - 1j * (hb * x2 - ha * x1)


def centered_residuals(fam, labels, values) -> tuple[complex, complex, complex, complex]:
    """The equation centered at ``x0``, ``x12``, ``x1``, ``x2`` (in that order)."""
    a, b = labels
    pi = math.pi
    x0, x1, x12, x2 = values
    return (
        quad_residual(fam, (a, b), (x0, x1, x12, x2)),
        quad_residual(fam, (a + pi, b + pi), (x12, x2, x0, x1)),
        quad_residual(fam, (b + pi, a), (x1, x12, x2, x0)),
        quad_residual(fam, (a + pi, b), (x2, x12, x1, x0)),
    )


def _solve_face(fam, labels, values, target: int) -> complex:
    """Solve the face equation for corner ``target`` (0: x0, 1: x1, 2: x12, 3: x2)."""
    a, b = labels
    fab, gab, ha, hb = _coeffs(fam, a, b)
    coef = (-gab, 1j * ha, fab, -1j * hb)
    lead = coef[target]
    if abs(lead) < SINGULAR_TOL:
        raise SingularFaceError(f"leading coefficient {lead} vanishes")
    rest = sum(c * complex(values[k]) for k, c in enumerate(coef) if k != target)
    return -rest / lead


def solve_for_vertex(fam, labels, known, target: str = "x12") -> complex:
    """Value at ``target`` making the face residual vanish.

    ``known`` maps the three other corner names (``x0, x1, x12, x2``) to values.
    """
    names = ("x0", "x1", "x12", "x2")
    if target not in names:
        raise DomainError(f"unknown corner {target!r}")
    vals = [0j if n == target else complex(known[n]) for n in names]
    return _solve_face(fam, labels, vals, names.index(target))


def face_view(g: QuadGraph, k: int, layer: int = 0):
    """Labels and corner ids of face ``k`` as seen on the given layer."""
    x0, x1, x12, x2 = g.faces[k]
    a, b = g.face_labels(k)
    if layer == 0:
        return (a, b), (x0, x1, x12, x2)
    return (a + math.pi, b), (x1, x0, x2, x12)


def face_residuals(
    g: QuadGraph, fam, x: FieldAssignment, layer: int | None = None, normalize: bool = False
) -> np.ndarray:
    """Residual on every face; with ``normalize`` divided by the largest corner modulus.

    The equation is linear, so the normalized residual is the scale-free
    measure to use for fields spanning many orders of magnitude.
    """
    layer = x.layer if layer is None else layer
    out = np.empty(len(g.faces), dtype=complex)
    for k in range(len(g.faces)):
        labels, ids = face_view(g, k, layer)
        vals = [x[v] for v in ids]
        out[k] = quad_residual(fam, labels, vals)
        if normalize:
            out[k] /= max(1.0, max(abs(v) for v in vals))
    return out


def grid_cauchy_vertices(g: QuadGraph) -> list[int]:
    """Vertices on the two coordinate axes of a lattice-realized graph (an L-shaped staircase)."""
    coords = {v: d.coord for v, d in g.vertices.items() if d.coord is not None}
    if len(coords) != len(g.vertices):
        raise PropagationError("graph has no lattice coordinates")
    lo = [min(c[i] for c in coords.values()) for i in range(len(next(iter(coords.values()))))]
    return sorted(v for v, c in coords.items() if any(ci == li for ci, li in zip(c, lo)))


def propagate(
    g: QuadGraph, fam, cauchy: dict, tol: float = 1e-9, layer: int = 0
) -> FieldAssignment:
    """Extend Cauchy data face by face.

    Faces are processed in sweeps in order of face id; each sweep fills every
    face with exactly one unknown corner.  Faces whose four corners are given
    are checked against the equation.
    """
    vals = {int(v): complex(z) for v, z in cauchy.items()}
    scale = 1.0 + max((abs(z) for z in vals.values()), default=0.0)
    pending = set(range(len(g.faces)))
    while pending:
        progressed = False
        for k in sorted(pending):
            labels, face = face_view(g, k, layer)
            missing = [i for i, v in enumerate(face) if v not in vals]
            if len(missing) > 1:
                continue
            corner = [vals.get(v, 0j) for v in face]
            if missing:
                vals[face[missing[0]]] = _solve_face(fam, labels, corner, missing[0])
                scale = max(scale, 1.0 + abs(vals[face[missing[0]]]))
            elif abs(quad_residual(fam, labels, corner)) > tol * scale:
                raise ResidualError(f"Cauchy data violates the equation on face {k}")
            pending.discard(k)
            progressed = True
        if not progressed:
            raise PropagationError(
                f"{len(pending)} faces cannot be determined from the given data"
            )
    missing_v = set(g.vertices) - set(vals)
    if missing_v:
        raise PropagationError(f"vertices {sorted(missing_v)[:5]} not reached")
    return FieldAssignment.of(vals, layer=layer)


def _cube(fam, labels, init):
    a, b, c = labels
    pi = math.pi
    x0, x1, x2, x3 = (complex(v) for v in init)
    # lower faces, centered at the black corner x0
    x12 = _solve_face(fam, (a, b), (x0, x1, 0, x2), 2)
    x23 = _solve_face(fam, (b, c), (x0, x2, 0, x3), 2)
    x13 = _solve_face(fam, (c, a), (x0, x3, 0, x1), 2)
    # upper faces, centered at the black corners x12, x23, x13; x123 is white
    via12 = _solve_face(fam, (b + pi, c), (x12, x1, x13, 0), 3)
    via23 = _solve_face(fam, (c + pi, a), (x23, x2, x12, 0), 3)
    via13 = _solve_face(fam, (a + pi, b), (x13, x3, x23, 0), 3)
    return (x12, x23, x13), (via12, via23, via13)


def check_3d_consistency(fam, labels, init):
    """Three values of ``x123`` on an elementary cube and their maximal spread.

    ``init = (x0, x1, x2, x3)`` with black ``x0`` and white ``x1, x2, x3``
    reached along labels ``alpha, beta, gamma``.
    """
    _, tops = _cube(fam, tuple(labels), init)
    spread = max(abs(u - v) for u in tops for v in tops)
    return tops, spread


def cube_map_defect(fam, labels) -> float:
    """Discrepancy of the three routes as linear maps ``(x0, x1, x2, x3) -> x123``.

    The cube map is linear, so the largest spread over the four basis
    initial vectors bounds the spread for every initial value; unlike a single
    random draw it cannot vanish by accidental cancellation.
    """
    return max(check_3d_consistency(fam, labels, np.eye(4)[i])[1] for i in range(4))


def tetrahedron_check(fam, labels, init, x0_alt=None):
    """Residual of the symmetric tetrahedron relation and the ``x0``-dependence of ``x123``.

    Returns ``(residual, x0_shift)`` where ``x0_shift`` is the change of
    ``x123`` when ``x0`` is replaced by ``x0_alt`` (default ``x0 + 1``).
    """
    a, b, c = labels
    x0, x1, x2, x3 = (complex(v) for v in init)
    tops, _ = check_3d_consistency(fam, labels, init)
    x123 = tops[0]
    fab, fbc, fca = (complex(fam.f(u)) for u in (a - b, b - c, c - a))
    res = fbc * x1 + fca * x2 + fab * x3 - fab * fbc * fca * x123
    if x0_alt is None:
        x0_alt = x0 + 1.0
    tops2, _ = check_3d_consistency(fam, labels, (x0_alt, x1, x2, x3))
    return res, abs(tops2[0] - x123)


def _vertical(g: QuadGraph, b: int, w: int, layer: int):
    """Center, neighbour and label of the edge ``(b, w)`` for a field on ``layer``."""
    a = g.edges[(b, w)]
    if layer == 0:
        return b, w, a
    return w, b, a + math.pi


def backlund(
    g: QuadGraph, fam, x: FieldAssignment, lam: float, seed, tol: float = 1e-9, order=None
) -> FieldAssignment:
    """Bäcklund transform with parameter ``lam`` fixed by ``seed = (vertex, value)``.

    Each edge ``(c, n)`` (``c`` black on the layer of ``x``) carries the
    vertical quad ``(c, n, n+, c+)`` with labels ``(alpha, lam)``.  The result
    lives on the opposite layer.  Values spread over edges breadth-first from the seed; ``order`` optionally
    gives a permutation used to sort neighbours, which selects a different
    spanning tree.
    """
    scale = 1.0 + x.max_abs()
    if x.max_abs() > 0:
        res = face_residuals(g, fam, x, x.layer)
        if np.max(np.abs(res)) > tol * scale:
            raise ResidualError("input field does not solve the quad-equation")
    adj: dict[int, list[tuple[int, int, float]]] = {v: [] for v in g.vertices}
    for (b, w), a in g.edges.items():
        adj[b].append((w, b, w))
        adj[w].append((b, b, w))
    for v in adj:
        adj[v].sort(key=(order or (lambda t: t[0])))
    v0, z0 = seed
    xp = {int(v0): complex(z0)}
    queue = deque([int(v0)])
    while queue:
        v = queue.popleft()
        for u, b, w in adj[v]:
            if u in xp:
                continue
            c, n, a = _vertical(g, b, w, x.layer)
            try:
                if u == n:
                    xp[u] = _solve_face(fam, (a, lam), (x[c], x[n], 0, xp[c]), 2)
                else:
                    xp[u] = _solve_face(fam, (a, lam), (x[c], x[n], xp[n], 0), 3)
            except PoleError as exc:
                raise PoleError(f"edge {(b, w)}: {exc}", (b, w)) from exc
            queue.append(u)
    return FieldAssignment.of(xp, layer=1 - x.layer)


def backlund_residuals(g: QuadGraph, fam, x: FieldAssignment, xp: FieldAssignment, lam: float):
    """Residuals of all vertical quads ``(c, n, n+, c+)``."""
    out = []
    for b, w in sorted(g.edges):
        c, n, a = _vertical(g, b, w, x.layer)
        out.append(quad_residual(fam, (a, lam), (x[c], x[n], xp[n], xp[c])))
    return np.array(out, dtype=complex)


def exponential_along_path(g: QuadGraph, fam, lam: float, path) -> complex:
    """Product formula ``i^m * (1 or h(lam)) * prod 1/f(alpha_k - lam)`` along a vertex path."""
    val = 1 + 0j
    for u, v in zip(path, path[1:]):
        if (u, v) not in g.edges and (v, u) not in g.edges:
            raise DomainError(f"{(u, v)} is not an edge")
        alpha = cmath.phase(g.pos(v) - g.pos(u))
        try:
            val *= 1j / complex(fam.f(alpha - lam))
        except PoleError as exc:
            raise PoleError(f"edge {(u, v)}: {exc}", (u, v)) from exc
    end = path[-1]
    if g.color(end) == "w":
        val *= complex(fam.h(lam))
    return val


def discrete_exponential(g: QuadGraph, fam, lam: float, v0: int) -> FieldAssignment:
    """Discrete exponential normalized to 1 at the black vertex ``v0``.

    Computed along a breadth-first spanning tree; path independence is a
    property checked separately.  Being the Bäcklund transform of the zero
    solution, the result lives on layer 1.
    """
    if g.color(v0) != "b":
        raise DomainError("the exponential is normalized at a black vertex")
    adj: dict[int, list[int]] = {v: [] for v in g.vertices}
    for b, w in g.edges:
        adj[b].append(w)
        adj[w].append(b)
    vals = {v0: 1 + 0j}
    queue = deque([v0])
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if v in vals:
                continue
            alpha = cmath.phase(g.pos(v) - g.pos(u))
            try:
                step = 1j / complex(fam.f(alpha - lam))
            except PoleError as exc:
                raise PoleError(f"edge {(u, v)}: {exc}", (u, v)) from exc
            # the h(lam) factor sits on white vertices only
            hl = complex(fam.h(lam))
            if g.color(v) == "w":
                vals[v] = vals[u] * step * hl
            else:
                vals[v] = vals[u] * step / hl
            queue.append(v)
    return FieldAssignment.of(vals, layer=1)
