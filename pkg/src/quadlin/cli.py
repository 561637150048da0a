"""Command-line frontend: ``quadlin identities|graph|solve|startriangle``.

Exit codes: 0 when all checks pass, 1 when a check fails, 2 on usage or
configuration errors.  JSON reports are written with sorted keys, and every
random draw comes from one seeded generator, so identical invocations
produce byte-identical output.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from . import laplace, pluri, quadeq, quadgraph
from .coeffs import CoefficientFamily
from .errors import (
    DomainError,
    InconclusiveError,
    PoleError,
    PropagationError,
    QuadlinError,
    ResidualError,
    SolverError,
)
from .identities import run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    """Everything that determines the output of one invocation."""

    subcommand: str
    regime: str = "rectangular"
    tau0: float | None = 1.0
    lambda0: float = 0.0
    seed: int = 0
    tol: float | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def family(self) -> CoefficientFamily:
        try:
            tau0 = None if self.regime == "degenerate" else self.tau0
            return CoefficientFamily.make(self.regime, tau0, self.lambda0)
        except (QuadlinError, ValueError, TypeError) as exc:
            raise click.UsageError(f"invalid family: {exc}") from exc

    def rngs(self, n: int):
        """``n`` independent generators split off the run seed."""
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(n)]


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _finish(report: dict, cfg: RunConfig):
    """Attach the run configuration, write the report and exit with the pass status."""
    report = dict(report, config=asdict(cfg))
    _emit(_dumps(report), cfg.out)
    sys.exit(EXIT_OK if report.get("pass", True) else EXIT_FAIL)


def family_options(f):
    opts = [
        click.option("--regime", type=click.Choice(["rectangular", "rhombic", "degenerate"]),
                     default="rectangular", show_default=True),
        click.option("--tau0", type=float, default=1.0, show_default=True),
        click.option("--lambda0", type=float, default=0.0, show_default=True),
        click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True),
        click.option("--tol", type=float, default=None, help="Override the pass tolerance."),
        click.option("--out", type=click.Path(dir_okay=False), default=None),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _cfg(sub, regime, tau0, lambda0, seed, tol, out, **extra) -> RunConfig:
    if tol is not None and not tol > 0:
        raise click.UsageError("--tol must be positive")
    return RunConfig(sub, regime, tau0, lambda0, seed, tol, out, extra)


@click.group()
@click.version_option(package_name="quadlin")
def main():
    """Linear integrable quad-equations on rhombic quad-graphs."""


# --- identities -----------------------------------------------------------------------


@main.command()
@click.option("--suite", type=click.Choice(["theta", "functional", "lemmas", "all"]), default="all",
              show_default=True)
@click.option("--samples", type=click.IntRange(min=1), default=500, show_default=True)
@family_options
def identities(suite, samples, regime, tau0, lambda0, seed, tol, out):
    """Randomized identity suites for theta functions and coefficients."""
    cfg = _cfg("identities", regime, tau0, lambda0, seed, tol, out, suite=suite, samples=samples)
    fam = cfg.family()
    tol = cfg.tol if cfg.tol is not None else 1e-10
    names = ["theta", "functional", "lemmas"] if suite == "all" else [suite]
    if fam.regime == "degenerate" and suite == "all":
        names = ["functional", "lemmas", "degenerate"]
    reports = []
    for name, rng in zip(names, cfg.rngs(len(names))):
        reports.extend(run_suite(name, fam, rng, samples))
    if not reports:
        raise click.UsageError(f"suite {suite!r} is not defined for the {fam.regime} regime")
    parts = [r.to_dict(tol) for r in reports]
    worst = max(p["max_residual"] for p in parts)
    _finish(
        {"suite": suite, "samples": samples, "max_residual": worst, "tol": tol,
         "pass": worst < tol, "parts": parts},
        cfg,
    )


# --- graph ------------------------------------------------------------------------------


@main.group()
def graph():
    """Generate, flip and validate quad-graphs."""


def _write_graph(g, out, fmt, highlight=()):
    if fmt == "svg":
        _emit(quadgraph.write_svg(g, highlight=highlight), out)
    else:
        _emit(g.to_json(sort_keys=True, indent=1) + "\n", out)


def _load_graph(path) -> quadgraph.QuadGraph:
    try:
        return quadgraph.QuadGraph.from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise click.UsageError(f"cannot read graph {path}: {exc}") from exc


@graph.command("gen")
@click.argument("kind", type=click.Choice(["square", "corner", "star"]))
@click.argument("n", type=int, required=False, default=4)
@click.option("--alpha", type=float, default=0.0, show_default=True)
@click.option("--beta", type=float, default=math.pi / 2, show_default=True)
@click.option("--labels", type=str, default=None, help="Comma-separated angles (corner: 3, star: any).")
@click.option("--format", "fmt", type=click.Choice(["json", "svg"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def graph_gen(kind, n, alpha, beta, labels, fmt, out):
    """Generate a square grid of N x N faces, the ten-face corner patch, or a black star."""
    try:
        lab = tuple(float(t) for t in labels.split(",")) if labels else None
        if kind == "square":
            g = quadgraph.gen_square_grid(n, alpha, beta)
        elif kind == "corner":
            g = pluri.corner_patch(lab) if lab else pluri.corner_patch()
        else:
            g = quadgraph.gen_black_star(lab or (0.0, 2.0, 4.0))
    except (QuadlinError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc
    _write_graph(g, out, fmt)


@graph.command("flip")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.argument("vertex", type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Flipped graph JSON; an SVG overlay is written next to it.")
def graph_flip(path, vertex, out):
    """Star-triangle flip at VERTEX."""
    g = _load_graph(path)
    try:
        g2 = quadgraph.star_triangle_flip(g, vertex)
    except QuadlinError as exc:
        click.echo(f"flip failed: {exc}", err=True)
        sys.exit(EXIT_FAIL)
    new_faces = [k for k, f in enumerate(g2.faces) if max(g2.vertices) in f]
    _write_graph(g2, out, "json")
    if out:
        quadgraph.write_svg(g2, str(Path(out).with_suffix(".svg")), highlight=new_faces)


@graph.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def graph_validate(path):
    """Check bipartiteness, rhombic embedding, orientation and topology."""
    g = _load_graph(path)
    viol = quadgraph.validate(g)
    report = {"path": str(path), "violations": [asdict(v) for v in viol], "pass": not viol}
    click.echo(_dumps(report), nl=False)
    sys.exit(EXIT_OK if not viol else EXIT_FAIL)


# --- solve ------------------------------------------------------------------------------


def _read_field(path):
    text = Path(path).read_text()
    if path.endswith(".csv"):
        return quadeq.FieldAssignment.from_csv(text)
    return quadeq.FieldAssignment.from_json(text)


@main.command()
@click.argument("what", type=click.Choice(["quad", "laplace", "exp"]))
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--data", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Cauchy data (quad) or boundary values (laplace), JSON or CSV.")
@click.option("--lam", type=float, default=0.9, show_default=True,
              help="Spectral parameter of the exponential.")
@click.option("--v0", type=int, default=None, help="Base black vertex (default: smallest black id).")
@click.option("--layer", type=click.IntRange(0, 1), default=0, show_default=True)
@click.option("--paths", type=click.IntRange(min=1), default=8, show_default=True,
              help="Random spanning trees for the path-independence check.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@family_options
def solve(what, graph_path, data, lam, v0, layer, paths, fmt, regime, tau0, lambda0, seed, tol,
          out):
    """Propagate the quad-equation, solve a Dirichlet problem or build the discrete exponential.

    The field goes to --out (or stdout); the residual summary is printed on
    stdout when --out is given and on stderr otherwise.
    """
    cfg = _cfg("solve", regime, tau0, lambda0, seed, tol, out, what=what, lam=lam, v0=v0,
               layer=layer, data=data)
    fam = cfg.family()
    g = _load_graph(graph_path)
    tol = cfg.tol if cfg.tol is not None else 1e-8
    if v0 is None:
        v0 = min(g.black)
    try:
        if what == "quad":
            field_, summary = _solve_quad(g, fam, data, layer, tol)
        elif what == "exp":
            field_, summary = _solve_exp(g, fam, lam, v0, paths, cfg, tol)
        else:
            field_, summary = _solve_laplace(g, fam, data, lam, v0, tol)
    except (PropagationError, ResidualError, PoleError, SolverError) as exc:
        report = {"pass": False, "error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SolverError):
            report["condition"] = exc.condition
        click.echo(_dumps(report), nl=False, err=True)
        sys.exit(EXIT_FAIL)
    except (DomainError, KeyError) as exc:
        raise click.UsageError(str(exc)) from exc
    text = field_.to_csv() if fmt == "csv" else field_.to_json(sort_keys=True, indent=1) + "\n"
    _emit(text, out)
    summary = dict(summary, config=asdict(cfg))
    click.echo(_dumps(summary), nl=False, err=not out)
    sys.exit(EXIT_OK if summary["pass"] else EXIT_FAIL)


def _solve_quad(g, fam, data, layer, tol):
    if data:
        cauchy = _read_field(data).values
    else:
        cauchy = {v: 0j for v in quadeq.grid_cauchy_vertices(g)}
    x = quadeq.propagate(g, fam, cauchy, tol=tol, layer=layer)
    res = quadeq.face_residuals(g, fam, x, layer)
    rel = float(np.max(np.abs(res), initial=0.0)) / (1.0 + x.max_abs())
    return x, {"what": "quad", "max_face_residual": rel, "pass": rel < tol}


def _solve_exp(g, fam, lam, v0, paths, cfg, tol):
    x = quadeq.discrete_exponential(g, fam, lam, v0)
    ids = x.ids()
    ref = x.array(ids)
    scale = np.abs(ref) + 1.0
    zero = quadeq.FieldAssignment.zeros(g.vertices)
    spread = 0.0
    for rng in cfg.rngs(paths):
        perm = {v: p for v, p in zip(sorted(g.vertices), rng.permutation(len(g.vertices)))}
        alt = quadeq.backlund(g, fam, zero, lam, (v0, 1.0), order=lambda t: perm[t[0]])
        spread = max(spread, float(np.max(np.abs(alt.array(ids) - ref) / scale)))
    res = quadeq.face_residuals(g, fam, x, x.layer)
    face = float(np.max(np.abs(res) / (1.0 + x.max_abs()), initial=0.0))
    ok = spread < tol and face < tol
    return x, {"what": "exp", "lam": lam, "v0": v0, "path_spread": spread,
               "max_face_residual": face, "pass": ok}


def _solve_laplace(g, fam, data, lam, v0, tol):
    L = laplace.assemble(g, fam)
    reference = None
    if data:
        bvals = _read_field(data).values
    else:
        reference = quadeq.discrete_exponential(g, fam, lam, v0)
        bvals = {v: reference[v] for v in L.boundary}
    sol = laplace.solve_dirichlet(L, bvals, fam)
    full = {v: complex(bvals[v]) for v in L.boundary}
    full.update(sol.values)
    x = quadeq.FieldAssignment.of(full, "black")
    res = laplace.residual(L, full)
    rel = max((abs(r) for r in res.values()), default=0.0) / (1.0 + x.max_abs())
    summary = {"what": "laplace", "max_row_residual": rel, "interior": len(L.interior)}
    ok = rel < tol
    if reference is not None:
        err = max((abs(full[v] - reference[v]) / (1 + abs(reference[v])) for v in L.interior),
                  default=0.0)
        summary["max_error_vs_exponential"] = err
        ok = ok and err < tol
    summary["pass"] = ok
    return x, summary


# --- star-triangle ----------------------------------------------------------------------


def _complex_list(text, n=3):
    try:
        vals = [complex(t.strip().replace(" ", "")) for t in text.split(",")]
    except ValueError as exc:
        raise click.BadParameter(f"cannot parse {text!r} as complex numbers") from exc
    if len(vals) != n:
        raise click.BadParameter(f"expected {n} values, got {len(vals)}")
    return vals


def _cx(z):
    z = complex(z)
    return [z.real, z.imag]


def _weights_report(w: pluri.CubeWeights2):
    return {"a": [_cx(z) for z in w.a], "c": [_cx(z) for z in w.c], "black_base": w.black_base}


def _random_init(rng):
    def z():
        return complex(rng.normal(), rng.normal())

    return {(p, q): (z(), z()) for p in range(4) for q in range(p + 1, 4)}


@main.command()
@click.argument("action", type=click.Choice(["apply", "invert", "consistency4d", "special"]))
@click.option("--a", "a_txt", default="1,1,1", show_default=True, help="Three a-weights (12,23,31).")
@click.option("--c", "c_txt", default="1,1,1", show_default=True, help="Three c-weights.")
@click.option("--sign", type=click.Choice(["1", "-1"]), default="1", help="Branch of D in the inverse map.")
@click.option("--draws", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--base", type=click.Choice(["black", "white", "both"]), default="both", show_default=True)
@click.option("--phis", default=None, help="Three rhombus angles summing to 2 pi (default 2pi/3 each).")
@family_options
def startriangle(action, a_txt, c_txt, sign, draws, base, phis, regime, tau0, lambda0, seed, tol,
                 out):
    """Two-field star-triangle map: apply, invert, 4D consistency, elliptic special solution."""
    cfg = _cfg("startriangle", regime, tau0, lambda0, seed, tol, out, action=action, a=a_txt,
               c=c_txt, sign=sign, draws=draws, base=base, phis=phis)
    try:
        if action in ("apply", "invert"):
            w = pluri.CubeWeights2(tuple(_complex_list(a_txt)), tuple(_complex_list(c_txt)),
                                   action == "apply")
            try:
                img = pluri.two_field_F(w) if action == "apply" else pluri.two_field_G(w, int(sign))
            except ZeroDivisionError as exc:
                _finish({"pass": False, "error": str(exc)}, cfg)
            back = pluri.two_field_G(img, int(sign)) if action == "apply" else pluri.two_field_F(img)
            rt = w.max_diff(back, a_sign=-1) if action == "apply" else w.max_diff(back)
            rt = min(rt, w.max_diff(back))
            t = cfg.tol if cfg.tol is not None else 1e-10
            _finish({"input": _weights_report(w), "image": _weights_report(img),
                     "round_trip_error": rt, "pass": rt < t}, cfg)
        elif action == "consistency4d":
            _consistency4d(cfg, draws, base)
        else:
            _special(cfg, phis)
    except (DomainError, PoleError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc


def _consistency4d(cfg, draws, base):
    t = cfg.tol if cfg.tol is not None else 1e-9
    (rng,) = cfg.rngs(1)
    bases = ["black", "white"] if base == "both" else [base]
    worst = {b: 0.0 for b in bases}
    skipped = 0
    for _ in range(draws):
        init = _random_init(rng)
        for b in bases:
            choices = [None] if b == "black" else list(pluri.white_sign_choices())
            for s in choices:
                try:
                    worst[b] = max(worst[b], pluri.check_4d_consistency(init, b, s))
                except InconclusiveError:
                    skipped += 1
    m = max(worst.values())
    _finish({"draws": draws, "max_discrepancy": m, "by_base": worst, "inconclusive": skipped,
             "tol": t, "pass": m < t}, cfg)


def _special(cfg, phis):
    t = cfg.tol if cfg.tol is not None else 1e-10
    angles = tuple(float(p) for p in phis.split(",")) if phis else (2 * math.pi / 3,) * 3
    fam = cfg.family()
    star, flipped = pluri.elliptic_special_solution(angles, fam)
    img = pluri.two_field_F(star)
    err = img.max_diff(flipped)
    prod = max(abs(star.a[m] * flipped.a[m] - 1) for m in range(3))
    _finish({"phis": list(angles), "map_error": err, "a_product_error": prod,
             "star": _weights_report(star), "flipped": _weights_report(flipped),
             "pass": err < t and prod < t}, cfg)


if __name__ == "__main__":  # pragma: no cover
    main()
