"""Massive Laplace-type operator on black vertices and its Dirichlet energies.

For a face with black corners ``x0``, ``x12`` and black angle
``phi = beta - alpha`` in ``(0, pi)`` the weight of the black edge is
``f(phi)`` and both corners receive mass ``g0(phi)``.  The row of an interior
black vertex is

    (sum_k g0(phi_k)) x0 - sum_k f(phi_k) x_{k,k+1},

which is the summed quad-equation around the star and the gradient of the
per-quad energy ``1/2 g0(phi)(x0^2 + x12^2) - f(phi) x0 x12``.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from .errors import DomainError, GeometryError, SolverError
from .quadeq import FieldAssignment
from .quadgraph import QuadGraph, angle_mod

__all__ = [
    "CG_RTOL",
    "LaplaceOperator",
    "PositivityCertificate",
    "assemble",
    "residual",
    "quad_form",
    "dirichlet_energy",
    "energy_gradient",
    "positivity_certificate",
    "solve_dirichlet",
    "export_operator",
]

CG_RTOL = 1e-12
EIG_REL_TOL = 1e-12  # eigenvalues below this fraction of the trace count as zero
FORMS = ("gg", "g0")


def _real_if_close(z, tol=1e-12):
    z = complex(z)
    return z.real if abs(z.imag) <= tol * (1 + abs(z.real)) else z


@dataclass(frozen=True)
class LaplaceOperator:
    """Assembled operator over all black vertices of a quad-graph.

    ``matrix`` couples every black vertex; only rows of interior vertices
    are complete stars.  ``mass`` is the g0-sum, ``mass_gg`` the
    ``sum g(alpha_{k+1}, alpha_k)`` over each star (``nan`` at the boundary).
    """

    graph: QuadGraph
    ids: tuple  # black vertex ids, matrix order
    interior: tuple
    boundary: tuple
    matrix: sp.csr_matrix
    mass: np.ndarray
    mass_gg: np.ndarray
    weights: dict  # (u, v) -> f(phi), both orientations
    regime: str

    @property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.ids)}

    def interior_index(self) -> np.ndarray:
        idx = self.index
        return np.array([idx[v] for v in self.interior], dtype=int)

    def boundary_index(self) -> np.ndarray:
        idx = self.index
        return np.array([idx[v] for v in self.boundary], dtype=int)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def row(self, v: int) -> dict:
        """Nonzero entries of the row of ``v`` as ``{vertex: coefficient}``."""
        i = self.index[v]
        r = self.matrix.getrow(i)
        return {self.ids[j]: r[0, j] for j in r.indices}

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data)


def _black_angle(g: QuadGraph, k: int) -> float:
    phi = g.face_angle(k)
    if not 0 < phi < math.pi:
        raise GeometryError(f"face {k} is not positively oriented")
    return phi


def assemble(g: QuadGraph, fam) -> LaplaceOperator:
    ids = tuple(g.black)
    idx = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    rows, cols, vals = [], [], []
    mass = np.zeros(n, dtype=complex)
    mass_gg = np.zeros(n, dtype=complex)
    weights = {}
    for k, (x0, x1, x12, x2) in enumerate(g.faces):
        phi = _black_angle(g, k)
        a, b = g.face_labels(k)
        w = complex(fam.f(phi))
        m = complex(fam.g0(phi))
        i, j = idx[x0], idx[x12]
        rows += [i, j]
        cols += [j, i]
        vals += [-w, -w]
        weights[(x0, x12)] = weights.get((x0, x12), 0) + w
        weights[(x12, x0)] = weights.get((x12, x0), 0) + w
        mass[i] += m
        mass[j] += m
        # seen from each black corner the labels (a_k, a_{k+1}) contribute g(a_{k+1}, a_k)
        mass_gg[i] += complex(fam.g(b, a))
        mass_gg[j] += complex(fam.g(b + math.pi, a + math.pi))
    rows += list(range(n))
    cols += list(range(n))
    vals += list(mass)
    data = np.array(vals, dtype=complex)
    if np.all(np.abs(data.imag) <= 1e-12 * (1 + np.abs(data.real))):
        data = data.real
        mass_out, gg_out = mass.real, mass_gg.real
    else:
        mass_out, gg_out = mass, mass_gg
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    interior = tuple(v for v in ids if g.is_interior(v))
    boundary = tuple(v for v in ids if not g.is_interior(v))
    gg_out = np.array(gg_out)
    for v in boundary:
        gg_out[idx[v]] = np.nan
    return LaplaceOperator(
        g, ids, interior, boundary, mat, np.asarray(mass_out), gg_out, weights, fam.regime
    )


def _black_vector(L: LaplaceOperator, x) -> np.ndarray:
    vals = x.values if isinstance(x, FieldAssignment) else x
    missing = [v for v in L.ids if v not in vals]
    if missing:
        raise DomainError(f"field misses black vertices {missing[:5]}")
    return np.array([complex(vals[v]) for v in L.ids], dtype=complex)


def residual(L: LaplaceOperator, x) -> dict:
    """Row residuals ``(L x)(v)`` at all interior black vertices."""
    y = L.matrix @ _black_vector(L, x)
    idx = L.index
    return {v: complex(y[idx[v]]) for v in L.interior}


def quad_form(fam, labels, form: str = "g0") -> np.ndarray:
    """Symmetric 2x2 matrix of one face's energy in ``(x0, x12)``.

    ``labels = (alpha, beta)`` are read at ``x0`` with ``beta - alpha`` in ``(0, pi)``.
    """
    a, b = labels
    phi = angle_mod(b - a)
    w = _real_if_close(fam.f(phi))
    if form == "g0":
        m = _real_if_close(fam.g0(phi))
        return np.array([[m, -w], [-w, m]])
    if form == "gg":
        m0 = _real_if_close(fam.g(b, a))
        m1 = _real_if_close(fam.g(b + math.pi, a + math.pi))
        return np.array([[m0, -w], [-w, m1]])
    raise DomainError(f"unknown energy form {form!r}")


def dirichlet_energy(g: QuadGraph, fam, x, form: str = "g0"):
    """Sum over positively oriented faces of ``1/2 X^T Q X`` with ``X = (x0, x12)``."""
    vals = x.values if isinstance(x, FieldAssignment) else x
    total = 0j
    for k, (x0, _, x12, _) in enumerate(g.faces):
        _black_angle(g, k)
        Q = quad_form(fam, g.face_labels(k), form)
        X = np.array([vals[x0], vals[x12]], dtype=complex)
        total += 0.5 * X @ Q @ X
    return _real_if_close(total, 1e-14)


def energy_gradient(g: QuadGraph, fam, x, form: str = "g0") -> dict:
    """Exact gradient of :func:`dirichlet_energy` with respect to each black value."""
    vals = x.values if isinstance(x, FieldAssignment) else x
    grad: dict[int, complex] = {v: 0j for v in g.black}
    for k, (x0, _, x12, _) in enumerate(g.faces):
        Q = quad_form(fam, g.face_labels(k), form)
        X = np.array([vals[x0], vals[x12]], dtype=complex)
        gx = Q @ X
        grad[x0] += gx[0]
        grad[x12] += gx[1]
    return grad


@dataclass(frozen=True)
class PositivityCertificate:
    form: str
    min_eigenvalues: np.ndarray  # one per face
    traces: np.ndarray

    @property
    def positive_mask(self) -> np.ndarray:
        return self.min_eigenvalues > EIG_REL_TOL * np.abs(self.traces)

    @property
    def positive(self) -> bool:
        """All faces positive definite (eigenvalues above roundoff of the trace)."""
        return bool(np.all(self.positive_mask))

    @property
    def semidefinite(self) -> bool:
        return bool(np.all(self.min_eigenvalues >= -EIG_REL_TOL * np.abs(self.traces)))

    @property
    def indefinite_faces(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.min_eigenvalues < -EIG_REL_TOL * np.abs(self.traces))]


def positivity_certificate(g: QuadGraph, fam, form: str = "g0") -> PositivityCertificate:
    """Minimum eigenvalue of every per-face 2x2 energy form."""
    eigs, traces = [], []
    for k in range(len(g.faces)):
        _black_angle(g, k)
        Q = quad_form(fam, g.face_labels(k), form)
        if np.iscomplexobj(Q):
            raise DomainError("energy form has complex coefficients; no positivity statement")
        eigs.append(np.linalg.eigvalsh(Q)[0])
        traces.append(np.trace(Q))
    return PositivityCertificate(form, np.array(eigs), np.array(traces))


def solve_dirichlet(
    L: LaplaceOperator, boundary, fam=None, method: str | None = None
) -> FieldAssignment:
    """Interior black values with ``L x = 0`` at interior rows and ``x = boundary`` on the boundary.

    Conjugate gradients with a Jacobi preconditioner are used when the
    face-wise g0 energy is positive definite (rectangular and degenerate
    regimes); otherwise a dense LU factorization.
    """
    bvals = boundary.values if isinstance(boundary, FieldAssignment) else boundary
    missing = [v for v in L.boundary if v not in bvals]
    if missing:
        raise DomainError(f"boundary data misses vertices {missing[:5]}")
    ii, bi = L.interior_index(), L.boundary_index()
    xb = np.array([complex(bvals[v]) for v in L.boundary], dtype=complex)
    A = L.matrix[ii][:, ii]
    rhs = -(L.matrix[ii][:, bi] @ xb) if len(bi) else np.zeros(len(ii), dtype=complex)
    if len(ii) == 0:
        return FieldAssignment.of({}, "black")
    if method is None:
        definite = L.regime in ("rectangular", "degenerate") and L.is_real
        if definite and fam is not None:
            definite = positivity_certificate(L.graph, fam, "g0").semidefinite
        method = "cg" if definite else "lu"
    if method == "cg":
        x = _solve_cg(A, rhs)
    elif method == "lu":
        x = _solve_lu(A.toarray(), rhs)
    else:
        raise DomainError(f"unknown method {method!r}")
    return FieldAssignment.of({v: x[k] for k, v in enumerate(L.interior)}, "black")


def _solve_cg(A, rhs):
    n = A.shape[0]
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverError("non-positive diagonal; system is not definite")
    M = LinearOperator((n, n), matvec=lambda r: r / diag, dtype=complex)
    Ac = A.astype(complex)
    out, info = cg(Ac, rhs.astype(complex), rtol=CG_RTOL, atol=0.0, maxiter=10 * n, M=M)
    if info != 0:
        raise SolverError(
            f"conjugate gradients did not converge (info={info})",
            condition=float(np.linalg.cond(A.toarray())),
        )
    return out


def _solve_lu(A, rhs):
    try:
        with warnings.catch_warnings():
            # singular factors are reported below through the condition number
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise SolverError(str(exc), condition=float(np.linalg.cond(A))) from exc
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e14:
        raise SolverError("interior system is singular", condition=cond)
    return scipy.linalg.lu_solve((lu, piv), rhs)


def export_operator(L: LaplaceOperator, path=None):
    """Matrix-market coordinate text plus a JSON sidecar mapping indices to vertex ids.

    Returns ``(mtx_text, sidecar_dict)``; with ``path`` writes ``path`` and
    ``path + '.json'``.
    """
    buf = io.BytesIO()
    scipy.io.mmwrite(buf, L.matrix.tocoo())
    text = buf.getvalue().decode()
    side = {
        "ids": list(L.ids),
        "interior": list(L.interior),
        "boundary": list(L.boundary),
        "regime": L.regime,
    }
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
        with open(str(path) + ".json", "w") as fh:
            json.dump(side, fh, sort_keys=True)
    return text, side
