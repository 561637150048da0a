"""Randomized identity suites for theta functions and coefficient families.

Each suite draws its sample points from a numpy ``Generator`` and returns a
:class:`SuiteReport` with the largest absolute residual per identity.  Angles
are kept at least ``POLE_MARGIN`` away from poles so that the residuals
measure the identities rather than cancellation near singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import (
    CoefficientFamily,
    check_fff,
    check_fhh,
    check_gsum,
    lemma_margin,
    lemma_margin_closed_form,
    rhombic_nome_reduction_check,
)
from .theta import ThetaParams, theta, theta_constants, theta_deriv

__all__ = [
    "POLE_MARGIN",
    "SuiteReport",
    "theta_suite",
    "functional_suite",
    "symmetry_suite",
    "lemma_suite",
    "degenerate_suite",
    "run_suite",
    "sample_angles",
]

POLE_MARGIN = 0.1
TWO_PI = 2 * math.pi


@dataclass
class SuiteReport:
    suite: str
    samples: int
    residuals: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def passed(self, tol: float) -> bool:
        return self.max_residual < tol

    def record(self, name: str, values):
        v = float(np.max(np.abs(values))) if np.size(values) else 0.0
        self.residuals[name] = max(self.residuals.get(name, 0.0), v)

    def to_dict(self, tol: float) -> dict:
        return {
            "suite": self.suite,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "residuals": dict(sorted(self.residuals.items())),
            "pass": self.passed(tol),
        }


def _near_pi(d, margin):
    r = np.mod(np.asarray(d) - math.pi, TWO_PI)
    return np.minimum(r, TWO_PI - r) < margin


def sample_angles(rng, n: int, k: int, fam=None, margin: float = POLE_MARGIN) -> np.ndarray:
    """``n`` rows of ``k`` angles in ``[0, 2 pi)`` whose pairwise differences avoid ``pi``.

    For rhombic families the differences to ``lambda0`` are kept away from
    ``pi`` too, where ``h`` has its poles.
    """
    out = []
    while len(out) < n:
        row = rng.uniform(0, TWO_PI, size=k)
        bad = any(_near_pi(row[i] - row[j], margin) for i in range(k) for j in range(i + 1, k))
        if fam is not None and fam.regime == "rhombic":
            bad = bad or bool(np.any(_near_pi(row - fam.lambda0, margin)))
        if not bad:
            out.append(row)
    return np.array(out)


def theta_suite(p: ThetaParams, rng, samples: int = 500) -> SuiteReport:
    """Parity, half-period shifts, quasi-periodicity, Jacobi's derivative identity,
    the quartic theta-constant relation, Fourier series and the mpmath oracle."""
    rep = SuiteReport("theta", samples)
    x = rng.uniform(-math.pi, math.pi, samples)
    y = rng.uniform(-0.4, 0.4, samples) * math.pi * p.tau.imag
    z = x + 1j * y
    th = {k: theta(k, z, p) for k in range(1, 5)}
    scale = 1 + sum(np.abs(v) for v in th.values())
    rep.record("parity", np.abs(theta(1, -z, p) + th[1]) / scale)
    for k in (2, 3, 4):
        rep.record("parity", np.abs(theta(k, -z, p) - th[k]) / scale)
    h = math.pi / 2
    rep.record("half_period", np.abs(theta(1, z + h, p) - th[2]) / scale)
    rep.record("half_period", np.abs(theta(2, z + h, p) + th[1]) / scale)
    rep.record("half_period", np.abs(theta(3, z + h, p) - th[4]) / scale)
    rep.record("half_period", np.abs(theta(4, z + h, p) - th[3]) / scale)
    # theta_3(z + pi tau) = q^{-1} e^{-2iz} theta_3(z)
    mult = np.exp(-1j * math.pi * p.tau - 2j * z)
    shifted = theta(3, z + math.pi * p.tau, p)
    rep.record("quasi_period", np.abs(shifted - mult * th[3]) / (1 + np.abs(shifted)))
    t2, t3, t4, d1 = theta_constants(p)
    rep.record("jacobi_derivative", abs(d1 - t2 * t3 * t4))
    rep.record("quartic_constants", abs(t3 ** 4 - t2 ** 4 - t4 ** 4))
    rep.record("pi_half_rule", abs(theta(2, 0.0, p) - theta(1, math.pi / 2, p)))
    if p.regime == "rectangular":
        q = p.q.real
        xr = rng.uniform(-1.2, 1.2, samples) / 2
        n = np.arange(1, 80)[:, None]
        s1 = np.tan(xr) + 4 * np.sum(
            (-1.0) ** (n - 1) * q ** (2 * n) / (1 - q ** (2 * n)) * np.sin(2 * n * xr), axis=0
        )
        s2 = np.tan(xr) + 4 * np.sum(
            (-1.0) ** n * q ** (2 * n) / (1 + q ** (2 * n)) * np.sin(2 * n * xr), axis=0
        )
        lhs1 = -theta_deriv(2, xr, p) / theta(2, xr, p)
        lhs2 = t3 * t4 * theta(1, xr, p) / theta(2, xr, p)
        rep.record("fourier", np.abs(lhs1 - s1) / (1 + np.abs(s1)))
        rep.record("fourier", np.abs(lhs2 - s2) / (1 + np.abs(s2)))
    # independent multiprecision oracle on a subset of points
    import mpmath

    qm = mpmath.exp(1j * mpmath.pi * mpmath.mpc(p.tau))
    for zz in z[: min(samples, 50)]:
        for k in range(1, 5):
            ref = complex(mpmath.jtheta(k, mpmath.mpc(zz), qm))
            rep.record("mpmath_oracle", abs(complex(theta(k, zz, p)) - ref) / (1 + abs(ref)))
    return rep


def functional_suite(fam: CoefficientFamily, rng, samples: int = 500) -> SuiteReport:
    """Four-term functional equation, the f-h consistency condition and the g0 sum rule."""
    rep = SuiteReport("functional", samples)
    A4 = sample_angles(rng, samples, 4)
    rep.record("fff", check_fff(*A4.T, fam))
    A3 = sample_angles(rng, samples, 3, fam)
    rep.record("fhh", check_fhh(*A3.T, fam))
    rep.record("gsum", check_gsum(*A3.T, fam))
    if fam.regime == "rhombic":
        a = sample_angles(rng, samples, 1)[:, 0]
        a = a[~_near_pi(a, POLE_MARGIN)]
        rep.record("rhombic_nome_reduction", rhombic_nome_reduction_check(a, fam.tau0))
    return rep


def symmetry_suite(fam: CoefficientFamily, rng, samples: int = 200) -> SuiteReport:
    """Centering symmetries, additive decompositions of g and star-mass independence of lambda0."""
    rep = SuiteReport("symmetry", samples)
    pi = math.pi
    a1 = sample_angles(rng, samples, 1, fam)[:, 0]
    a1 = a1[~_near_pi(a1 + pi - fam.lambda0, POLE_MARGIN)] if fam.regime == "rhombic" else a1
    a1 = a1[~_near_pi(a1, POLE_MARGIN) & ~_near_pi(a1 + pi, POLE_MARGIN)]
    rep.record("f_shift", fam.f(a1) * fam.f(a1 + pi) + 1)
    rep.record("f_odd", fam.f(-a1) + fam.f(a1))
    rep.record("h_shift", fam.h(a1) * fam.h(a1 + pi) - 1)
    A2 = sample_angles(rng, samples, 2, fam)
    a, b = A2.T
    g = fam.g(a, b)
    lam = fam.lambda0
    if fam.regime == "rectangular":
        dec = fam.g0(a - b) + fam.g1(b - lam) - fam.g1(a - lam)
    elif fam.regime == "rhombic":
        dec = fam.g0(a - b) + fam.g0(b - lam) - fam.g0(a - lam)
    else:
        dec = fam.g0(a - b)
    rep.record("g_decomposition", g - dec)
    rep.record("g_antisymmetry", fam.g(a, b) + fam.g(b, a))
    # star masses: m rhombus angles around a black vertex
    for _ in range(samples):
        m = int(rng.integers(3, 7))
        labels = _star_labels(rng, m)
        if fam.regime == "rhombic" and np.any(_near_pi(labels - lam, POLE_MARGIN)):
            continue
        nxt = np.roll(labels, -1)
        mass_g = np.sum(fam.g(labels, nxt))
        mass_g0 = np.sum(fam.g0(labels - nxt))
        other = fam.with_lambda0(lam + rng.uniform(-1, 1))
        if other.regime == "rhombic" and np.any(_near_pi(labels - other.lambda0, POLE_MARGIN)):
            continue
        mass_g2 = np.sum(other.g(labels, nxt))
        rep.record("star_mass", mass_g - mass_g0)
        rep.record("star_mass_lambda0", mass_g - mass_g2)
    return rep


def _star_labels(rng, m: int) -> np.ndarray:
    """Counterclockwise labels of a rhombic star: gaps in (margin, pi - margin) summing to 2 pi."""
    while True:
        gaps = rng.dirichlet(np.ones(m)) * TWO_PI
        if np.all(gaps > POLE_MARGIN) and np.all(gaps < math.pi - POLE_MARGIN):
            break
    start = rng.uniform(0, TWO_PI)
    return np.mod(start + np.concatenate([[0.0], np.cumsum(gaps[:-1])]), TWO_PI)


def lemma_suite(fam: CoefficientFamily, rng, samples: int = 200) -> SuiteReport:
    """Margins ``g0 - f`` (rectangular) or ``f - g0`` (rhombic) against their closed forms."""
    rep = SuiteReport("lemmas", samples)
    a = rng.uniform(0.05, math.pi - 0.05, samples)
    m = lemma_margin(a, fam)
    rep.record("margin_closed_form", m - lemma_margin_closed_form(a, fam))
    if fam.regime != "degenerate":
        rep.record("margin_negative_part", np.maximum(-m, 0.0))
    return rep


def degenerate_suite(rng, samples: int = 200, q: float = 1e-8) -> SuiteReport:
    """Small-nome families against ``tan(alpha/2)`` and the exact trigonometric limit."""
    rep = SuiteReport("degenerate", samples)
    a = rng.uniform(0.1, math.pi - 0.1, samples)
    small = CoefficientFamily(ThetaParams.from_nome(q))
    t = np.tan(a / 2)
    rep.record("f_small_q", small.f(a) - t)
    rep.record("g0_small_q", small.g0(a) - t)
    deg = CoefficientFamily.degenerate()
    rep.record("f_q0", deg.f(a) - t)
    rep.record("g0_q0", deg.g0(a) - t)
    return rep


def run_suite(name: str, fam: CoefficientFamily, rng, samples: int) -> list[SuiteReport]:
    """Run one named suite (or ``all``) for a family."""
    out = []
    if name in ("theta", "all") and fam.regime != "degenerate":
        out.append(theta_suite(fam.params, rng, samples))
    if name in ("functional", "all"):
        out.append(functional_suite(fam, rng, samples))
        out.append(symmetry_suite(fam, rng, samples))
    if name in ("lemmas", "all"):
        out.append(lemma_suite(fam, rng, samples))
    if name in ("degenerate", "all") and fam.regime == "degenerate":
        out.append(degenerate_suite(rng, samples))
    if not out and name not in ("theta", "functional", "lemmas", "degenerate", "all"):
        raise ValueError(f"unknown suite {name!r}")
    return out
