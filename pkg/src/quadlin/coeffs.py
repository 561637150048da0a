"""Elliptic coefficient families (f, g0, g1, h, g) of the linear quad-equation.

All families are normalized so that ``h(a) h(a + pi) = 1`` and
``f(a) f(a + pi) = -1``.  The degenerate family is the trigonometric
``q -> 0`` limit, where ``f = g0 = tan(a/2)`` and ``h = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError, RegimeError
from .theta import ThetaParams, theta, theta_constants, theta_deriv

__all__ = [
    "CoefficientFamily",
    "POLE_GUARD",
    "f",
    "g0",
    "g1",
    "h",
    "g",
    "check_fff",
    "check_fhh",
    "check_gsum",
    "rhombic_nome_reduction_check",
    "lemma_margin",
    "lemma_margin_closed_form",
]

# minimal distance of alpha/2 to a zero of theta_2 (or theta_3 for g1)
POLE_GUARD = 0.02

FAMILY_REGIMES = ("rectangular", "rhombic", "degenerate")


@dataclass(frozen=True)
class CoefficientFamily:
    """Theta parameters plus the real angle ``lambda0`` selecting ``h``."""

    params: ThetaParams
    lambda0: float = 0.0
    theta2: complex = field(init=False, repr=False)
    theta3: complex = field(init=False, repr=False)
    theta4: complex = field(init=False, repr=False)

    def __post_init__(self):
        if self.params.regime not in FAMILY_REGIMES:
            raise RegimeError(f"no coefficient family for regime {self.params.regime!r}")
        t2, t3, t4, _ = theta_constants(self.params)
        object.__setattr__(self, "lambda0", float(self.lambda0))
        object.__setattr__(self, "theta2", t2)
        object.__setattr__(self, "theta3", t3)
        object.__setattr__(self, "theta4", t4)

    @classmethod
    def rectangular(cls, tau0: float, lambda0: float = 0.0) -> "CoefficientFamily":
        return cls(ThetaParams.rectangular(tau0), lambda0)

    @classmethod
    def rhombic(cls, tau0: float, lambda0: float = 0.0) -> "CoefficientFamily":
        return cls(ThetaParams.rhombic(tau0), lambda0)

    @classmethod
    def degenerate(cls, lambda0: float = 0.0) -> "CoefficientFamily":
        return cls(ThetaParams.degenerate(), lambda0)

    @classmethod
    def make(cls, regime: str, tau0: float | None = None, lambda0: float = 0.0):
        if regime == "degenerate":
            return cls.degenerate(lambda0)
        if regime not in FAMILY_REGIMES:
            raise RegimeError(f"unknown regime {regime!r}")
        if tau0 is None:
            raise DomainError(f"regime {regime!r} needs tau0")
        return getattr(cls, regime)(tau0, lambda0)

    @property
    def regime(self) -> str:
        return self.params.regime

    @property
    def tau0(self):
        return self.params.tau0

    def with_lambda0(self, lambda0: float) -> "CoefficientFamily":
        return CoefficientFamily(self.params, lambda0)

    # JSON: {"regime": ..., "tau0": ..., "lambda0": ...}
    def to_dict(self) -> dict:
        return {"regime": self.regime, "tau0": self.tau0, "lambda0": self.lambda0}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientFamily":
        return cls.make(d["regime"], d.get("tau0"), d.get("lambda0", 0.0))

    @classmethod
    def from_json(cls, text: str) -> "CoefficientFamily":
        return cls.from_dict(json.loads(text))

    # method forms, so perturbed stand-ins can be passed where a family is expected
    def f(self, alpha):
        return f(alpha, self)

    def g0(self, alpha):
        return g0(alpha, self)

    def g1(self, alpha):
        return g1(alpha, self)

    def h(self, alpha):
        return h(alpha, self)

    def g(self, alpha, beta):
        return g(alpha, beta, self)


def _pole_guard(z, zero_offset, fam, what):
    """Raise if ``z`` is within POLE_GUARD of ``zero_offset + m*pi + n*pi*tau``."""
    w = np.asarray(z, dtype=complex) - zero_offset
    if fam.params.regime != "degenerate":
        tau = fam.params.tau
        n = np.round(w.imag / (math.pi * tau.imag))
        w = w - n * math.pi * tau
    w = w - np.round(w.real / math.pi) * math.pi
    dist = np.abs(w)
    if np.any(dist < POLE_GUARD):
        idx = int(np.argmin(dist))
        loc = np.ravel(np.asarray(z))[idx] if np.ndim(z) else z
        raise PoleError(f"{what}: argument {loc} within {POLE_GUARD} of a pole", loc)


def _cx(alpha):
    return np.asarray(alpha, dtype=complex) if np.ndim(alpha) else complex(alpha)


def f(alpha, fam: CoefficientFamily):
    """``theta_1(a/2)/theta_2(a/2)``; ``tan(a/2)`` in the degenerate limit."""
    z = _cx(alpha) / 2
    _pole_guard(z, math.pi / 2, fam, "f")
    if fam.regime == "degenerate":
        return np.tan(z)
    return theta(1, z, fam.params) / theta(2, z, fam.params)


def g0(alpha, fam: CoefficientFamily):
    """Odd companion of ``f`` with ``f(a-b) f(b-c) f(c-a) = sum of g0``."""
    z = _cx(alpha) / 2
    _pole_guard(z, math.pi / 2, fam, "g0")
    if fam.regime == "degenerate":
        return np.tan(z)
    p = fam.params
    return -theta_deriv(2, z, p) / theta(2, z, p) / (fam.theta3 * fam.theta4)


def g1(alpha, fam: CoefficientFamily):
    """``-theta_3'(a/2)/theta_3(a/2) / (theta_3 theta_4)``, rectangular only."""
    if fam.regime != "rectangular":
        raise RegimeError("g1 is defined for the rectangular regime only")
    p = fam.params
    z = _cx(alpha) / 2
    _pole_guard(z, math.pi / 2 + math.pi * p.tau / 2, fam, "g1")
    return -theta_deriv(3, z, p) / theta(3, z, p) / (fam.theta3 * fam.theta4)


def h(alpha, fam: CoefficientFamily):
    """Leg coefficient: real (rectangular), imaginary (rhombic), 1 (degenerate)."""
    a = np.asarray(alpha)
    if np.iscomplexobj(a):
        if np.any(np.abs(a.imag) > 0):
            raise DomainError("h is defined for real angles only")
        a = a.real
    a = a.astype(float)
    if np.ndim(alpha) == 0:
        a = float(a)
    if fam.regime == "degenerate":
        return np.ones_like(a, dtype=complex) if np.ndim(a) else 1 + 0j
    if fam.regime == "rhombic":
        return 1j * f(a - fam.lambda0, fam)
    z = (a - fam.lambda0) / 2
    p = fam.params
    return theta(4, z, p) / theta(3, z, p)


def g(alpha, beta, fam: CoefficientFamily):
    """Mass coefficient ``f(a-b) h(a) h(b)``."""
    return f(np.subtract(alpha, beta), fam) * h(alpha, fam) * h(beta, fam)


def check_fff(alpha, beta, gamma, delta, fam: CoefficientFamily):
    """Four-term cyclic sum that vanishes for the elliptic ``f``."""
    F = fam.f
    a, b, c, d = alpha, beta, gamma, delta
    return (
        F(a - b) * F(b - c) * F(c - a)
        + F(b - a) * F(a - d) * F(d - b)
        + F(c - b) * F(b - d) * F(d - c)
        + F(a - c) * F(c - d) * F(d - a)
    )


def check_fhh(alpha, beta, gamma, fam: CoefficientFamily):
    """Residual of the 3D-consistency condition on ``f`` and ``h``."""
    F, H = fam.f, fam.h
    a, b, c = alpha, beta, gamma
    ha, hb, hc = H(a), H(b), H(c)
    return (
        F(a - b) * ha * hb
        + F(b - c) * hb * hc
        + F(c - a) * hc * ha
        - F(a - b) * F(b - c) * F(c - a)
    )


def check_gsum(alpha, beta, gamma, fam: CoefficientFamily):
    """``f f f - (g0 + g0 + g0)`` over the three cyclic differences."""
    F, G0 = fam.f, fam.g0
    a, b, c = alpha, beta, gamma
    return F(a - b) * F(b - c) * F(c - a) - (G0(a - b) + G0(b - c) + G0(c - a))


def rhombic_nome_reduction_check(alpha, tau0: float):
    """``theta_1/theta_2(a/2, i q0)`` minus the equivalent quotient at nome ``q0**2``."""
    p = ThetaParams.rhombic(tau0)
    fam = CoefficientFamily(p)
    z = _cx(alpha) / 2
    _pole_guard(z, math.pi / 2, fam, "rhombic_nome_reduction_check")
    lhs = theta(1, z, p) / theta(2, z, p)
    p2 = ThetaParams.rectangular(2 * tau0)
    rhs = (theta(1, z, p2) * theta(3, z, p2)) / (theta(2, z, p2) * theta(4, z, p2))
    return lhs - rhs


def _check_open_interval(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(a <= 0) or np.any(a >= math.pi):
        raise DomainError("lemma margins are defined for 0 < alpha < pi")
    return a if np.ndim(alpha) else float(a)


def lemma_margin(alpha, fam: CoefficientFamily):
    """``g0 - f`` (rectangular, degenerate) or ``f - g0`` (rhombic) on ``(0, pi)``."""
    a = _check_open_interval(alpha)
    diff = g0(a, fam) - f(a, fam)
    if fam.regime == "rhombic":
        diff = -diff
    return np.real(diff) if np.ndim(a) else float(np.real(diff))


def lemma_margin_closed_form(alpha, fam: CoefficientFamily):
    """Independent series for :func:`lemma_margin` via a theta quotient at nome ``q**2``."""
    a = _check_open_interval(alpha)
    z = a / 2
    if fam.regime == "degenerate":
        return np.zeros_like(a) if np.ndim(a) else 0.0
    if fam.regime == "rectangular":
        p2 = fam.params.squared_nome()
        val = -2 * theta_deriv(3, z, p2) / theta(3, z, p2) / (fam.theta3 * fam.theta4)
    else:
        p2 = ThetaParams.rectangular(2 * fam.tau0)
        t3 = theta(3, 0.0, p2)
        val = 2 * theta_deriv(4, z, p2) / (theta(4, z, p2) * t3 * t3)
    return np.real(val) if np.ndim(a) else float(np.real(val))
