"""Sparse sums of real-power monomials in one variable.

Everything downstream of a coordinate map lives in the algebra of finite
sums  sum_k c_k * y**p_k  with real (not necessarily integer) powers.  The
representation here is deliberately exact-ish: terms are kept as
(power, coefficient) pairs, combined only when powers agree to within a
structural tolerance, and never expanded through floating-point polynomial
arithmetic that would smear the support.  The support set of these sums is
what the structure classifier reasons about, so keeping it crisp matters
more than speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

# Powers closer than this are the same power.  Coefficients smaller than
# COEFF_TOL relative to the largest coefficient in the sum are dropped.
POWER_TOL = 1e-9
COEFF_TOL = 1e-12


@dataclass(frozen=True)
class LaurentSum:
    """A finite sum of c * y**p terms, stored sorted by power."""

    terms: tuple[tuple[float, float], ...] = ()

    @staticmethod
    def from_terms(pairs: Iterable[tuple[float, float]]) -> "LaurentSum":
        """Build a normalized sum from (power, coefficient) pairs."""
        return normalize(LaurentSum(tuple((float(p), float(c)) for p, c in pairs)))

    @staticmethod
    def constant(c: float) -> "LaurentSum":
        return LaurentSum.from_terms([(0.0, c)])

    @staticmethod
    def monomial(power: float, coeff: float = 1.0) -> "LaurentSum":
        return LaurentSum.from_terms([(power, coeff)])

    @staticmethod
    def zero() -> "LaurentSum":
        return LaurentSum(())

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> tuple[float, ...]:
        return tuple(p for p, _ in self.terms)

    def coefficient(self, power: float, tol: float = POWER_TOL) -> float:
        """Coefficient at a given power, 0.0 if the power is absent."""
        for p, c in self.terms:
            if abs(p - power) <= tol:
                return c
        return 0.0

    def __add__(self, other: "LaurentSum") -> "LaurentSum":
        return normalize(LaurentSum(self.terms + other.terms))

    def __sub__(self, other: "LaurentSum") -> "LaurentSum":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, LaurentSum):
            return multiply(self, other)
        return self.scale(float(other))

    def __rmul__(self, scalar: float) -> "LaurentSum":
        return self.scale(float(scalar))

    def __neg__(self) -> "LaurentSum":
        return self.scale(-1.0)

    def scale(self, scalar: float) -> "LaurentSum":
        if scalar == 0.0:
            return LaurentSum.zero()
        return LaurentSum(tuple((p, scalar * c) for p, c in self.terms))

    def shift(self, dpower: float) -> "LaurentSum":
        """Multiply by y**dpower."""
        return LaurentSum(tuple((p + dpower, c) for p, c in self.terms))

    def __call__(self, y: float) -> float:
        return evaluate(self, y)

    def __repr__(self) -> str:
        if not self.terms:
            return "LaurentSum(0)"
        bits = [f"{c:.6g}*y^{p:g}" for p, c in self.terms]
        return "LaurentSum(" + " + ".join(bits) + ")"


def normalize(s: LaurentSum) -> LaurentSum:
    """Combine equal powers, drop relatively negligible coefficients, sort.

    Powers are merged when they agree within POWER_TOL.  A coefficient is
    dropped when its magnitude is below COEFF_TOL times the largest
    coefficient magnitude in the sum, so cancellations that are exact up to
    roundoff produce genuinely absent powers instead of 1e-17 dust that
    would pollute the support set.
    """
    if not s.terms:
        return LaurentSum(())
    ordered = sorted(s.terms, key=lambda t: t[0])
    merged: list[list[float]] = []
    for p, c in ordered:
        if merged and abs(p - merged[-1][0]) <= POWER_TOL:
            merged[-1][1] += c
        else:
            merged.append([p, c])
    peak = max(abs(c) for _, c in merged)
    if peak == 0.0:
        return LaurentSum(())
    floor = COEFF_TOL * peak
    kept = tuple((p, c) for p, c in merged if abs(c) > floor)
    return LaurentSum(kept)


def multiply(a: LaurentSum, b: LaurentSum) -> LaurentSum:
    out = []
    for pa, ca in a.terms:
        for pb, cb in b.terms:
            out.append((pa + pb, ca * cb))
    return normalize(LaurentSum(tuple(out)))


def derivative_in_y(s: LaurentSum) -> LaurentSum:
    """Term-by-term d/dy; constant terms vanish exactly."""
    out = []
    for p, c in s.terms:
        if abs(p) <= POWER_TOL:
            continue
        out.append((p - 1.0, c * p))
    return normalize(LaurentSum(tuple(out)))


def evaluate(s: LaurentSum, y: float) -> float:
    """Evaluate at a point, with the conventions the basis layer needs.

    y = 0 is legal when every power is nonnegative (0**0 counts as 1, so a
    constant term survives at the origin).  Negative y is legal only when
    every power is integral, since fractional powers of negative reals are
    off the real line.
    """
    total = 0.0
    for p, c in s.terms:
        if y == 0.0:
            if p < -POWER_TOL:
                raise ValueError(f"negative power {p:g} evaluated at y=0")
            total += c if abs(p) <= POWER_TOL else 0.0
        elif y < 0.0:
            p_int = round(p)
            if abs(p - p_int) > POWER_TOL:
                raise ValueError(f"fractional power {p:g} evaluated at y={y:g}")
            total += c * (y ** int(p_int))
        else:
            total += c * math.pow(y, p)
    return total


def supported_on(s: LaurentSum, powers: Sequence[float], tol: float = POWER_TOL) -> bool:
    """True when every term's power lies in the given set."""
    for p, _ in s.terms:
        if not any(abs(p - q) <= tol for q in powers):
            return False
    return True
