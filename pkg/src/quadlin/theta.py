"""Jacobi theta functions by truncated q-series.

Conventions follow Whittaker & Watson: with nome ``q = exp(i*pi*tau)``,

    theta_1(z) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) z)
    theta_2(z) = 2 sum_{n>=0}        q^{(n+1/2)^2} cos((2n+1) z)
    theta_3(z) = 1 + 2 sum_{n>=1}        q^{n^2} cos(2 n z)
    theta_4(z) = 1 + 2 sum_{n>=1} (-1)^n q^{n^2} cos(2 n z)

Fractional powers of ``q`` are always taken as ``exp(i*pi*tau*power)`` so the
rhombic nome ``q = i*q0`` has no branch ambiguity.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "ThetaParams",
    "theta",
    "theta_deriv",
    "theta_constants",
    "EPS_THETA",
    "MAX_TERMS",
]

EPS_THETA = 1e-13
MAX_TERMS = 200

REGIMES = ("rectangular", "rhombic", "generic", "degenerate")

# |Im z| above this multiple of -log|q| is first reduced by quasi-periodicity
_STRIP = 0.45


@dataclass(frozen=True)
class ThetaParams:
    """Modulus ``tau`` of the theta functions together with its regime.

    Use the constructors :meth:`rectangular`, :meth:`rhombic`,
    :meth:`degenerate` or :meth:`from_tau` rather than the raw initializer.
    """

    tau: complex | None
    regime: str
    q: complex = field(init=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        if self.regime == "degenerate":
            if self.tau is not None:
                raise DomainError("degenerate regime takes no tau")
            object.__setattr__(self, "q", 0j)
            return
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise DomainError(f"tau must have positive imaginary part, got {tau}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "q", cmath.exp(1j * math.pi * tau))

    @classmethod
    def rectangular(cls, tau0: float) -> "ThetaParams":
        if not tau0 > 0:
            raise DomainError("tau0 must be positive")
        return cls(1j * tau0, "rectangular")

    @classmethod
    def rhombic(cls, tau0: float) -> "ThetaParams":
        if not tau0 > 0:
            raise DomainError("tau0 must be positive")
        return cls(0.5 + 1j * tau0, "rhombic")

    @classmethod
    def degenerate(cls) -> "ThetaParams":
        return cls(None, "degenerate")

    @classmethod
    def from_tau(cls, tau: complex) -> "ThetaParams":
        tau = complex(tau)
        if abs(tau.real) < 1e-15:
            return cls(1j * tau.imag, "rectangular")
        if abs(tau.real - 0.5) < 1e-15:
            return cls(0.5 + 1j * tau.imag, "rhombic")
        return cls(tau, "generic")

    @classmethod
    def from_nome(cls, q: float, regime: str = "rectangular") -> "ThetaParams":
        """Build from the real nome ``q`` (rectangular) or ``q0`` (rhombic)."""
        if q == 0:
            return cls.degenerate()
        if not 0 < q < 1:
            raise DomainError("nome must lie in (0, 1)")
        tau0 = -math.log(q) / math.pi
        if regime == "rhombic":
            return cls.rhombic(tau0)
        return cls.rectangular(tau0)

    @property
    def tau0(self) -> float | None:
        if self.tau is None:
            return None
        return self.tau.imag

    @property
    def q0(self) -> float:
        """Modulus ``|q|``; equals ``q`` (rectangular) or ``q/i`` (rhombic)."""
        return abs(self.q)

    def squared_nome(self) -> "ThetaParams":
        """Parameters with nome ``q**2`` (``tau -> 2 tau``)."""
        if self.tau is None:
            return self
        return ThetaParams.from_tau(2 * self.tau)


def _extended() -> bool:
    return os.environ.get("QUADLIN_PRECISION", "double").lower() == "extended"


def _check_k(k):
    if k not in (1, 2, 3, 4):
        raise ValueError(f"theta index must be 1..4, got {k!r}")


def _as_array(z):
    scalar = np.ndim(z) == 0
    return np.asarray(z, dtype=complex), scalar


def _wrap(out, scalar):
    return complex(out) if scalar else out


def _degenerate(k, z, deriv):
    # strict q -> 0 limits: theta_1, theta_2 carry a q^{1/4} prefactor
    if k in (1, 2):
        return np.zeros_like(z)
    if deriv:
        return np.zeros_like(z)
    return np.ones_like(z)


def _series(k, z, tau, deriv):
    ipt = 1j * math.pi * tau
    if k in (3, 4):
        total = np.zeros_like(z) if deriv else np.ones_like(z)
        scale = np.ones(z.shape)
        n_start, half = 1, 0.0
    else:
        total = np.zeros_like(z)
        scale = np.zeros(z.shape)
        n_start, half = 0, 0.5
    sign_alt = k in (1, 4)
    for n in range(n_start, n_start + MAX_TERMS):
        m = n + half
        coeff = 2.0 * cmath.exp(ipt * m * m)
        if sign_alt and n % 2:
            coeff = -coeff
        w = 2.0 * m
        if k == 1:
            term = coeff * (w * np.cos(w * z) if deriv else np.sin(w * z))
        else:
            term = coeff * (-w * np.sin(w * z) if deriv else np.cos(w * z))
        total = total + term
        # bound the term independently of its trigonometric factor, which can
        # vanish exactly at rational multiples of pi and stop the sum too early
        bound = abs(coeff) * np.cosh(w * np.abs(z.imag)) * (w if deriv else 1.0)
        scale = scale + bound
        if n > n_start and np.all(bound <= EPS_THETA * scale):
            return total
    raise DomainError("theta series did not converge within the term cap")


def _reduce(z, tau):
    """Split ``z = w + m*pi*tau`` with ``|Im w|`` at most half a period."""
    period = math.pi * tau.imag
    m = np.zeros(z.shape)
    big = np.abs(z.imag) > _STRIP * period
    if np.any(big):
        m = np.where(big, np.round(z.imag / period), 0.0)
    return z - m * math.pi * tau, m


def _evaluate(k, z, p, deriv):
    _check_k(k)
    zz, scalar = _as_array(z)
    if p.regime == "degenerate":
        return _wrap(_degenerate(k, zz, deriv), scalar)
    if not np.all(np.isfinite(zz)):
        raise DomainError("non-finite argument")
    if _extended():
        return _wrap(_mp_evaluate(k, zz, p, deriv), scalar)
    tau = p.tau
    w, m = _reduce(zz, tau)
    if np.any(np.abs(m) > 50):
        raise DomainError("Im z too large relative to log|q|")
    val = _series(k, w, tau, False)
    if np.all(m == 0):
        out = _series(k, w, tau, True) if deriv else val
        return _wrap(out, scalar)
    # theta_k(w + m pi tau) = s^m q^{-m^2} e^{-2imw} theta_k(w)
    sign = -1.0 if k in (1, 4) else 1.0
    mult = np.exp(-1j * math.pi * tau * m * m - 2j * m * w) * np.where(m % 2 == 1, sign, 1.0)
    if not deriv:
        return _wrap(mult * val, scalar)
    dval = _series(k, w, tau, True)
    return _wrap(mult * (dval - 2j * m * val), scalar)


def _mp_evaluate(k, z, p, deriv, dps=34):
    import mpmath

    with mpmath.workdps(dps):
        q = mpmath.exp(1j * mpmath.pi * mpmath.mpc(p.tau))
        flat = [
            complex(mpmath.jtheta(k, mpmath.mpc(v), q, 1 if deriv else 0))
            for v in z.ravel()
        ]
    return np.array(flat, dtype=complex).reshape(z.shape)


def theta(k: int, z, p: ThetaParams):
    """Value of ``theta_k(z, q)``; accepts scalars or arrays for ``z``."""
    return _evaluate(k, z, p, deriv=False)


def theta_deriv(k: int, z, p: ThetaParams):
    """Derivative ``d/dz theta_k(z, q)`` from the term-wise differentiated series."""
    return _evaluate(k, z, p, deriv=True)


def theta_constants(p: ThetaParams):
    """Return ``(theta_2(0), theta_3(0), theta_4(0), theta_1'(0))``."""
    if p.regime == "degenerate":
        return (0j, 1 + 0j, 1 + 0j, 0j)
    return (
        theta(2, 0.0, p),
        theta(3, 0.0, p),
        theta(4, 0.0, p),
        theta_deriv(1, 0.0, p),
    )
