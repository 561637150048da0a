import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadlin.errors import FlipError, GeometryError, TopologyError
from quadlin.pluri import corner_patch
from quadlin.quadgraph import (
    QuadGraph,
    angle_close,
    angle_mod,
    black_stars,
    gen_black_star,
    gen_from_stepped_surface,
    gen_square_grid,
    same_embedding,
    star_triangle_flip,
    validate,
    write_svg,
)


def test_square_grid_counts():
    g = gen_square_grid(8)
    assert (len(g.vertices), len(g.faces), len(g.interior_black())) == (81, 64, 25)
    g2 = gen_square_grid(2, 0.2, 1.7)
    assert (len(g2.vertices), len(g2.faces), len(g2.black)) == (9, 4, 5)
    assert g2.interior_black() == [2]
    assert g2.boundary_black() == [0, 5, 6, 8]
    assert validate(g2) == []


def test_grid_labels_and_angles():
    g = gen_square_grid(3, 0.2, 1.7)
    for k in range(len(g.faces)):
        mod_pi = sorted(round(lab % math.pi, 9) for lab in g.face_labels(k))
        assert mod_pi == [0.2, 1.7]
        # the black diagonal alternates between the two diagonals of the checkerboard
        phi = g.face_angle(k)
        assert phi == pytest.approx(1.5) or phi == pytest.approx(math.pi - 1.5)


def test_grid_size_must_be_positive():
    with pytest.raises(GeometryError):
        gen_square_grid(0)


@given(n=st.integers(1, 5), a=st.floats(0, 2 * math.pi), phi=st.floats(0.1, math.pi - 0.1))
def test_grid_always_valid(n, a, phi):
    g = gen_square_grid(n, a, a + phi)
    assert validate(g) == []
    assert len(g.vertices) == (n + 1) ** 2


def test_json_round_trip_keeps_coordinates():
    g = gen_square_grid(3)
    h = QuadGraph.from_json(g.to_json())
    assert h == g
    assert h.vertices[0].coord == (0, 0)


def test_corner_patch_structure():
    g = corner_patch()
    assert (len(g.vertices), len(g.faces)) == (17, 10)
    assert g.interior_black() == [0, 2]
    assert len(g.faces_at(0)) == 3
    assert validate(g) == []


def test_flip_replaces_angles_and_is_involutive():
    g = corner_patch()
    before = sorted(g.face_angle(k) for k in g.faces_at(0))
    f = star_triangle_flip(g, 0)
    new = max(f.vertices)
    assert f.color(new) == "w" and 0 not in f.vertices
    after = sorted(f.face_angle(k) for k in f.faces_at(new))
    assert after == pytest.approx(sorted(math.pi - p for p in before))
    assert validate(f) == []
    assert same_embedding(star_triangle_flip(f, new), g)


def test_flip_rejections():
    g = corner_patch()
    with pytest.raises(FlipError):
        star_triangle_flip(g, 2)  # four faces
    with pytest.raises(FlipError):
        star_triangle_flip(g, 12)  # boundary
    with pytest.raises(FlipError):
        star_triangle_flip(g, 999)


def test_black_star_fan():
    s = gen_black_star((0.0, 1.0, 2.5, 4.0, 5.0))
    assert validate(s) == []
    (star,) = black_stars(s)
    assert star.center == 0
    assert len(star.fan) == 5
    labels = [lab[0] for _, lab in star.fan]
    assert labels == pytest.approx([0.0, 1.0, 2.5, 4.0, 5.0])


def test_stepped_surface_rejects_duplicates():
    with pytest.raises(TopologyError):
        gen_from_stepped_surface([((0, 0, 0), (0, 1)), ((0, 0, 0), (0, 1))], (0.1, 2.2, 4.3))


def test_validate_reports_corruption():
    d = gen_square_grid(2, 0.2, 1.7).to_dict()
    d["vertices"][3]["pos"][0] += 0.3
    kinds = {v.kind for v in validate(QuadGraph.from_dict(d))}
    assert "embedding" in kinds
    d = gen_square_grid(2).to_dict()
    d["vertices"][1]["color"] = "b"
    kinds = {v.kind for v in validate(QuadGraph.from_dict(d))}
    assert "bipartite" in kinds


def test_orientation_violation():
    g = gen_square_grid(1)
    x0, x1, x12, x2 = g.faces[0]
    bad = QuadGraph.build(g.vertices, g.edges, [(x0, x2, x12, x1)])
    assert any(v.kind == "orientation" for v in validate(bad))


def test_angle_helpers():
    assert angle_mod(-0.5) == pytest.approx(2 * math.pi - 0.5)
    assert angle_close(0.0, 2 * math.pi)


def test_svg(tmp_path):
    g = gen_square_grid(2)
    text = write_svg(g, tmp_path / "g.svg", field={0: 1.0, 2: 3.0}, highlight=[0])
    assert text.startswith("<svg") and text.count("<circle") == 9
    assert 'fill="#000"' in text and 'fill="#fff"' in text
    assert (tmp_path / "g.svg").read_text() == text
