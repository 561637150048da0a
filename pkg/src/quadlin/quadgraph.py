"""Bipartite rhombically embedded quad-graphs.

Every face is stored as ``(x0, x1, x12, x2)`` with ``x0``, ``x12`` black and
``x1 - x0 = exp(i alpha)``, ``x2 - x0 = exp(i beta)``, where the rhombus
angle ``beta - alpha`` at the black vertices lies in ``(0, pi)`` modulo
``2 pi``.  Edges are directed black -> white and carry the angle of
``white - black`` in ``[0, 2 pi)``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType

from .errors import FlipError, GeometryError, TopologyError

__all__ = [
    "ANGLE_TOL",
    "GEOM_TOL",
    "Vertex",
    "QuadGraph",
    "BlackStar",
    "Violation",
    "angle_mod",
    "angle_close",
    "gen_square_grid",
    "gen_from_stepped_surface",
    "gen_black_star",
    "star_triangle_flip",
    "black_stars",
    "validate",
    "same_embedding",
    "write_svg",
]

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-9
GEOM_TOL = 1e-9


def angle_mod(a: float) -> float:
    """Reduce an angle to ``[0, 2 pi)``."""
    r = math.fmod(a, TWO_PI)
    if r < 0:
        r += TWO_PI
    if r >= TWO_PI - 1e-15:
        r = 0.0
    return r


def angle_close(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    d = angle_mod(a - b)
    return d < tol or TWO_PI - d < tol


def _arg(z: complex) -> float:
    return angle_mod(cmath.phase(z))


@dataclass(frozen=True)
class Vertex:
    id: int
    pos: complex
    color: str  # "b" | "w"
    coord: tuple | None = None  # lattice point when realized as a quad-surface


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass(frozen=True)
class BlackStar:
    """Interior black vertex with its counterclockwise fan of rhombi."""

    center: int
    fan: tuple  # ((opposite black id, (alpha_k, alpha_k+1)), ...)

    @property
    def labels(self):
        return [pair for _, pair in self.fan]

    @property
    def neighbors(self):
        return [opp for opp, _ in self.fan]


@dataclass(frozen=True)
class QuadGraph:
    """Immutable quad-graph; operations return new instances."""

    vertices: MappingProxyType
    edges: MappingProxyType  # (black id, white id) -> label
    faces: tuple  # ((x0, x1, x12, x2), ...)
    _incidence: MappingProxyType = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        inc: dict[int, list[int]] = {v: [] for v in self.vertices}
        for k, face in enumerate(self.faces):
            for v in face:
                inc.setdefault(v, []).append(k)
        object.__setattr__(
            self, "_incidence", MappingProxyType({v: tuple(ks) for v, ks in inc.items()})
        )

    @classmethod
    def build(cls, vertices, edges, faces) -> "QuadGraph":
        return cls(
            MappingProxyType(dict(vertices)),
            MappingProxyType(dict(edges)),
            tuple(tuple(f) for f in faces),
        )

    # basic queries
    def pos(self, v: int) -> complex:
        return self.vertices[v].pos

    def color(self, v: int) -> str:
        return self.vertices[v].color

    @property
    def black(self) -> list[int]:
        return sorted(v for v, d in self.vertices.items() if d.color == "b")

    @property
    def white(self) -> list[int]:
        return sorted(v for v, d in self.vertices.items() if d.color == "w")

    def faces_at(self, v: int) -> tuple:
        return self._incidence.get(v, ())

    def label(self, b: int, w: int) -> float:
        return self.edges[(b, w)]

    def face_labels(self, k: int) -> tuple[float, float]:
        x0, x1, _, x2 = self.faces[k]
        return self.edges[(x0, x1)], self.edges[(x0, x2)]

    def face_angle(self, k: int) -> float:
        """Rhombus angle at the black vertices, in ``(0, pi)``."""
        a, b = self.face_labels(k)
        return angle_mod(b - a)

    def vertex_angle(self, v: int, k: int) -> float:
        x0, x1, x12, x2 = self.faces[k]
        phi = self.face_angle(k)
        return phi if v in (x0, x12) else math.pi - phi

    def is_interior(self, v: int) -> bool:
        ks = self.faces_at(v)
        if len(ks) < 3:
            return False
        total = sum(self.vertex_angle(v, k) for k in ks)
        if abs(total - TWO_PI) > 1e-7:
            return False
        count: dict[int, int] = {}
        for k in ks:
            for u in _face_neighbors(self.faces[k], v):
                count[u] = count.get(u, 0) + 1
        return all(c == 2 for c in count.values())

    def interior_black(self) -> list[int]:
        return [v for v in self.black if self.is_interior(v)]

    def boundary_black(self) -> list[int]:
        return [v for v in self.black if not self.is_interior(v)]

    def black_edges(self) -> list[tuple[int, int]]:
        """Black diagonals ``(x0, x12)`` of all faces."""
        return [(f[0], f[2]) for f in self.faces]

    def find_vertex(self, z: complex, tol: float = 1e-6) -> int:
        for v, d in self.vertices.items():
            if abs(d.pos - z) < tol:
                return v
        raise KeyError(f"no vertex at {z}")

    def coord_index(self) -> dict:
        return {d.coord: v for v, d in self.vertices.items() if d.coord is not None}

    # serialization
    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v, "pos": [d.pos.real, d.pos.imag], "color": d.color}
                | ({"coord": list(d.coord)} if d.coord is not None else {})
                for v, d in sorted(self.vertices.items())
            ],
            "edges": [
                {"from": b, "to": w, "alpha": a} for (b, w), a in sorted(self.edges.items())
            ],
            "faces": [list(f) for f in self.faces],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "QuadGraph":
        verts = {
            int(v["id"]): Vertex(
                int(v["id"]),
                complex(v["pos"][0], v["pos"][1]),
                v["color"],
                tuple(v["coord"]) if "coord" in v else None,
            )
            for v in d["vertices"]
        }
        edges = {(int(e["from"]), int(e["to"])): float(e["alpha"]) for e in d["edges"]}
        return cls.build(verts, edges, [tuple(int(x) for x in f) for f in d["faces"]])

    @classmethod
    def from_json(cls, text: str) -> "QuadGraph":
        return cls.from_dict(json.loads(text))


def _face_neighbors(face, v):
    i = face.index(v)
    return face[(i + 1) % 4], face[(i - 1) % 4]


class _Builder:
    """Accumulates vertices and rhombi, deduplicating vertices by key."""

    def __init__(self):
        self.vertices: dict[int, Vertex] = {}
        self.keys: dict = {}
        self.faces: list[tuple] = []
        self.edges: dict[tuple[int, int], float] = {}

    def vertex(self, key, pos: complex, color: str, coord=None, vid=None) -> int:
        if key in self.keys:
            return self.keys[key]
        if vid is None:
            vid = max(self.vertices, default=-1) + 1
        self.vertices[vid] = Vertex(vid, complex(pos), color, coord)
        self.keys[key] = vid
        return vid

    def add_existing(self, vert: Vertex, key):
        self.vertices[vert.id] = vert
        self.keys[key] = vert.id

    def quad(self, cycle) -> tuple:
        """Add a rhombus given its four vertex ids in cyclic order."""
        cycle = list(cycle)
        colors = [self.vertices[v].color for v in cycle]
        if colors[0] != "b":
            cycle = cycle[1:] + cycle[:1]
            colors = colors[1:] + colors[:1]
        if colors != ["b", "w", "b", "w"]:
            raise GeometryError(f"face {cycle} is not black/white alternating")
        b, wa, b2, wb = cycle
        pb = self.vertices[b].pos
        la = _arg(self.vertices[wa].pos - pb)
        lb = _arg(self.vertices[wb].pos - pb)
        phi = angle_mod(lb - la)
        if phi < ANGLE_TOL or abs(phi - math.pi) < ANGLE_TOL or TWO_PI - phi < ANGLE_TOL:
            raise GeometryError(f"degenerate rhombus at face {cycle}")
        face = (b, wa, b2, wb) if phi < math.pi else (b, wb, b2, wa)
        self.faces.append(face)
        for bb in (face[0], face[2]):
            for ww in (face[1], face[3]):
                self.edges[(bb, ww)] = _arg(self.vertices[ww].pos - self.vertices[bb].pos)
        return face

    def graph(self) -> QuadGraph:
        used = {v for f in self.faces for v in f}
        verts = {v: d for v, d in self.vertices.items() if v in used}
        return QuadGraph.build(verts, self.edges, self.faces)


def gen_from_stepped_surface(plaquettes, alphas) -> QuadGraph:
    """Realize a monotone quad-surface in ``Z^m`` as a rhombic quad-graph.

    ``plaquettes`` is an iterable of ``(n, (i, j))`` with ``n`` a lattice point
    and ``i != j`` coordinate directions; the plaquette spans ``n``,
    ``n + e_i``, ``n + e_i + e_j``, ``n + e_j``.  Lattice points with even
    coordinate sum are black.
    """
    alphas = [float(a) for a in alphas]
    m = len(alphas)
    if m < 2:
        raise GeometryError("need at least two directions")
    units = [cmath.exp(1j * a) for a in alphas]
    for i, j in combinations(range(m), 2):
        if abs(math.sin(alphas[i] - alphas[j])) < ANGLE_TOL:
            raise GeometryError(f"directions {i} and {j} are parallel")

    bld = _Builder()
    seen = set()
    lattice_edges: dict[frozenset, int] = {}

    def point(n):
        pos = sum((c * u for c, u in zip(n, units)), 0j)
        return bld.vertex(n, pos, "b" if sum(n) % 2 == 0 else "w", coord=n)

    for n, (i, j) in plaquettes:
        n = tuple(int(c) for c in n)
        if len(n) != m or i == j or not (0 <= i < m and 0 <= j < m):
            raise TopologyError(f"bad plaquette {(n, (i, j))}")
        ni = tuple(c + (k == i) for k, c in enumerate(n))
        nj = tuple(c + (k == j) for k, c in enumerate(n))
        nij = tuple(c + (k == j) for k, c in enumerate(ni))
        key = frozenset((n, ni, nij, nj))
        if key in seen:
            raise TopologyError(f"duplicate plaquette at {n} in directions {(i, j)}")
        seen.add(key)
        ids = [point(x) for x in (n, ni, nij, nj)]
        for a, b in ((n, ni), (ni, nij), (nij, nj), (nj, n)):
            e = frozenset((a, b))
            lattice_edges[e] = lattice_edges.get(e, 0) + 1
            if lattice_edges[e] > 2:
                raise TopologyError(f"lattice edge {tuple(e)} shared by more than two plaquettes")
        bld.quad(ids)

    g = bld.graph()
    _check_monotone(g)
    return g


def _check_monotone(g: QuadGraph):
    by_pos: dict = {}
    for v, d in g.vertices.items():
        key = (round(d.pos.real, 7), round(d.pos.imag, 7))
        if key in by_pos:
            raise TopologyError(f"vertices {by_pos[key]} and {v} project to the same point")
        by_pos[key] = v
    for v in g.vertices:
        sectors = []
        for k in g.faces_at(v):
            u1, u2 = _face_neighbors(g.faces[k], v)
            a1 = _arg(g.pos(u1) - g.pos(v))
            a2 = _arg(g.pos(u2) - g.pos(v))
            # sector swept counterclockwise, always the one of size < pi
            if angle_mod(a2 - a1) > math.pi:
                a1, a2 = a2, a1
            sectors.append((a1, angle_mod(a2 - a1)))
        total = sum(s for _, s in sectors)
        if total > TWO_PI + 1e-7:
            raise TopologyError(f"faces overlap around vertex {v}")
        for (s1, w1), (s2, w2) in combinations(sectors, 2):
            if _sectors_overlap(s1, w1, s2, w2):
                raise TopologyError(f"faces overlap around vertex {v}")


def _sectors_overlap(s1, w1, s2, w2, tol=1e-7):
    d = angle_mod(s2 - s1)
    if d < w1 - tol:
        return True
    d = angle_mod(s1 - s2)
    return d < w2 - tol


def gen_square_grid(n: int, alpha: float = 0.0, beta: float = math.pi / 2) -> QuadGraph:
    """``n x n`` rhombic grid spanned by ``exp(i alpha)`` and ``exp(i beta)``."""
    if n < 1:
        raise GeometryError("grid size must be positive")
    if abs(math.sin(beta - alpha)) < ANGLE_TOL:
        raise GeometryError("beta - alpha must avoid 0 and pi")
    plaq = [((k, l), (0, 1)) for k in range(n) for l in range(n)]
    return gen_from_stepped_surface(plaq, (alpha, beta))


def gen_black_star(labels) -> QuadGraph:
    """Rhombic fan around a black vertex at 0 with white neighbours ``exp(i a_k)``.

    ``labels`` must be increasing counterclockwise with consecutive gaps in
    ``(0, pi)`` summing to ``2 pi``.
    """
    labels = [float(a) for a in labels]
    gaps = [angle_mod(labels[(k + 1) % len(labels)] - labels[k]) for k in range(len(labels))]
    if any(not (0 < s < math.pi) for s in gaps) or abs(sum(gaps) - TWO_PI) > 1e-9:
        raise GeometryError("fan angles must lie in (0, pi) and sum to 2 pi")
    bld = _Builder()
    key = lambda z: (round(z.real, 9), round(z.imag, 9))  # noqa: E731
    c = bld.vertex(key(0j), 0j, "b")
    units = [cmath.exp(1j * a) for a in labels]
    ws = [bld.vertex(key(u), u, "w") for u in units]
    for k in range(len(units)):
        z = units[k] + units[(k + 1) % len(units)]
        b = bld.vertex(key(z), z, "b")
        bld.quad([c, ws[k], b, ws[(k + 1) % len(units)]])
    return bld.graph()


def black_stars(g: QuadGraph) -> list[BlackStar]:
    """One counterclockwise fan per interior black vertex."""
    out = []
    for v in g.black:
        if not g.is_interior(v):
            continue
        out.append(_star(g, v))
    return out


def _star(g: QuadGraph, v: int) -> BlackStar:
    entries = []
    for k in g.faces_at(v):
        x0, x1, x12, x2 = g.faces[k]
        if v == x0:
            first, second, opp = x1, x2, x12
        else:
            first, second, opp = x2, x1, x0
        entries.append((g.label(v, first), g.label(v, second), opp, first, second))
    entries.sort()
    by_first = {e[3]: e for e in entries}
    fan = []
    cur = entries[0]
    for _ in range(len(entries)):
        fan.append((cur[2], (cur[0], cur[1])))
        cur = by_first[cur[4]]
    return BlackStar(v, tuple(fan))


def validate(g: QuadGraph, tol: float = GEOM_TOL) -> list[Violation]:
    """All invariant violations; empty when the graph is a valid rhombic quad-graph."""
    out = []
    for (b, w), a in g.edges.items():
        if b not in g.vertices or w not in g.vertices:
            out.append(Violation("topology", f"edge {(b, w)} has a missing endpoint"))
            continue
        if g.color(b) != "b" or g.color(w) != "w":
            out.append(Violation("bipartite", f"edge {(b, w)} does not join black to white"))
        d = g.pos(w) - g.pos(b)
        if abs(abs(d) - 1) > tol or abs(d - cmath.exp(1j * a)) > tol:
            out.append(Violation("embedding", f"edge {(b, w)} label {a} disagrees with geometry"))
    for k, face in enumerate(g.faces):
        x0, x1, x12, x2 = face
        if [g.color(v) for v in face] != ["b", "w", "b", "w"]:
            out.append(Violation("bipartite", f"face {k} colors are not b,w,b,w"))
            continue
        for b, w in ((x0, x1), (x0, x2), (x12, x1), (x12, x2)):
            if (b, w) not in g.edges:
                out.append(Violation("topology", f"face {k} edge {(b, w)} missing"))
        p0, p1, p12, p2 = (g.pos(v) for v in face)
        if abs((p1 - p0) - (p12 - p2)) > tol or abs((p2 - p0) - (p12 - p1)) > tol:
            out.append(Violation("face", f"face {k} opposite edges are not parallel"))
        phi = angle_mod(cmath.phase(p2 - p0) - cmath.phase(p1 - p0))
        if not (tol < phi < math.pi - tol):
            out.append(Violation("orientation", f"face {k} is not positively oriented"))
    return out


def star_triangle_flip(g: QuadGraph, v: int) -> QuadGraph:
    """Replace the three rhombi around ``v`` by the three rhombi of the flipped hexagon.

    ``v`` may be black (star -> triangle, new white center) or white (the
    inverse move).  Rhombus angles ``phi_k`` at the black vertices become
    ``pi - phi_k``.
    """
    if v not in g.vertices:
        raise FlipError(f"no vertex {v}")
    ks = g.faces_at(v)
    if len(ks) != 3:
        raise FlipError(f"vertex {v} has {len(ks)} faces, need 3")
    if not g.is_interior(v):
        raise FlipError(f"vertex {v} is not an interior vertex with angle sum 2 pi")
    center = g.pos(v)
    nbrs = sorted(
        {u for k in ks for u in _face_neighbors(g.faces[k], v)},
        key=lambda u: _arg(g.pos(u) - center),
    )
    opp = {}
    for k in ks:
        face = g.faces[k]
        i = face.index(v)
        u1, u2 = face[(i + 1) % 4], face[(i - 1) % 4]
        opp[frozenset((u1, u2))] = face[(i + 2) % 4]
    new_pos = center + sum(g.pos(u) - center for u in nbrs)
    new_color = "w" if g.color(v) == "b" else "b"

    bld = _Builder()
    for u, d in g.vertices.items():
        if u != v:
            bld.add_existing(d, u)
    vid = max(g.vertices) + 1
    c = bld.vertex("new", new_pos, new_color, vid=vid)
    drop = set(ks)
    for k, face in enumerate(g.faces):
        if k not in drop:
            bld.faces.append(face)
    bld.edges = {e: a for e, a in g.edges.items() if v not in e}
    for k in range(3):
        n0, n1, n2 = nbrs[k], nbrs[(k + 1) % 3], nbrs[(k + 2) % 3]
        o01 = opp[frozenset((n0, n1))]
        o12 = opp[frozenset((n1, n2))]
        bld.quad([n1, o01, c, o12])
    return bld.graph()


def same_embedding(g1: QuadGraph, g2: QuadGraph, tol: float = 1e-9) -> bool:
    """Equality up to vertex ids: same colored points and same faces."""
    def key(z):
        return (round(z.real / tol) * tol, round(z.imag / tol) * tol)

    def canon(g):
        verts = {}
        for v, d in g.vertices.items():
            verts[v] = (round(d.pos.real, 7), round(d.pos.imag, 7))
        vs = sorted((verts[v], g.color(v)) for v in g.vertices)
        fs = sorted(tuple(sorted(verts[v] for v in f)) for f in g.faces)
        return vs, fs

    return canon(g1) == canon(g2)


def write_svg(g: QuadGraph, path=None, field=None, scale: float = 40.0, highlight=()) -> str:
    """SVG drawing: black vertices filled, white hollow, unit edges as segments.

    ``field`` optionally maps vertex ids to values; vertices are then tinted
    by the real part.  Returns the SVG text and writes it when ``path`` is given.
    """
    xs = [d.pos.real for d in g.vertices.values()]
    ys = [d.pos.imag for d in g.vertices.values()]
    pad = 1.0
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    w, h = (x1 - x0) * scale, (y1 - y0) * scale

    def xy(z):
        return (z.real - x0) * scale, (y1 - z.imag) * scale

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
        f'viewBox="0 0 {w:.1f} {h:.1f}">',
        '<g stroke="#444" stroke-width="1.5">',
    ]
    for (b, wv) in sorted(g.edges):
        (ax, ay), (bx, by) = xy(g.pos(b)), xy(g.pos(wv))
        lines.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}"/>')
    lines.append("</g>")
    hl = set(highlight)
    if hl:
        lines.append('<g stroke="#c33" stroke-width="3">')
        for k in sorted(hl):
            x0_, _, x12_, _ = g.faces[k]
            (ax, ay), (bx, by) = xy(g.pos(x0_)), xy(g.pos(x12_))
            lines.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}"/>')
        lines.append("</g>")
    vmin = vmax = None
    if field:
        vals = [complex(z).real for z in field.values()]
        vmin, vmax = min(vals), max(vals)
    r = 0.12 * scale
    for v, d in sorted(g.vertices.items()):
        cx, cy = xy(d.pos)
        fill = "#000" if d.color == "b" else "#fff"
        if field and v in field and vmax > vmin:
            t = (complex(field[v]).real - vmin) / (vmax - vmin)
            fill = f"rgb({int(255 * t)},60,{int(255 * (1 - t))})"
        lines.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" fill="{fill}" '
            f'stroke="#000" stroke-width="1.5"><title>{v}</title></circle>'
        )
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
