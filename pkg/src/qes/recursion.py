"""Three-term recursion data for a fixed coefficient window.

Once a (sigma, mu) window is chosen, the eigenvalue problem collapses to
eleven numbers: the window values of A, B and C - v.  Everything here is
arithmetic on those numbers.  Matching the coefficient of each basis power
gives a three-term relation among the expansion values p_n, whose shape
depends on where sigma sits in the window:

    sigma = 0     eps p_n = a_n p_n + d_n^- p_{n-1} + d_n^+ p_{n+1}
    sigma = -mu   c0v p_n = at_n p_n + (d_n^- + eps) p_{n-1} + d_n^+ p_{n+1}
    sigma = +mu   c0v p_n = at_n p_n + d_n^- p_{n-1} + (d_n^+ + eps) p_{n+1}

with at_n = a_n + c0v.  In the off-diagonal shapes the spectral variable is
the window value c0v (a potential coefficient), and the energy parameter
enters the coefficients with the opposite sign to the diagonal shape; the
reporting layers undo that sign when quoting physical energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from qes.basis import (
    DIAGONAL,
    OFFMINUS,
    OFFPLUS,
    AbcFunctions,
    StructuralError,
    StructureChoice,
    classify,
    window_coefficients,
)

# Divisors this close to zero (relative to the spectral value) mark a
# truncation boundary rather than a usable recursion step.
DIVISOR_TOL = 1e-12


class SingularRecursionError(ArithmeticError):
    """A recursion step divided by a vanishing coefficient.

    index names the coefficient argument that vanished, which for a
    constrained problem is exactly the truncation boundary.
    """

    def __init__(self, what: str, index: int):
        super().__init__(f"{what} vanishes at index {index}")
        self.what = what
        self.index = index


@dataclass(frozen=True)
class AbcCoefficients:
    """Window values of A, B, C - v at powers (sigma - mu, sigma, sigma + mu).

    Slot naming: 0 is the power sigma, minus/plus its lower and upper
    neighbors.  C0v, Cplusv, Cminusv are C - v values, so they already
    carry the free potential coefficients bound into the window.
    """

    sigma: float
    mu: float
    A0: float
    Aplus: float
    Aminus: float
    B0: float
    Bplus: float
    Bminus: float
    C0v: float
    Cplusv: float
    Cminusv: float

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite field {name}")
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu:g}")


def abc_coefficients(
    fns: AbcFunctions,
    choice: StructureChoice,
    bindings: Optional[dict[float, float]] = None,
) -> AbcCoefficients:
    """Collapse derived A, B, C and bound potential slots to window values."""
    lo, mid, hi = choice.window()
    clo, cmid, chi = window_coefficients(fns, choice, bindings or {})
    return AbcCoefficients(
        sigma=choice.sigma,
        mu=choice.mu,
        A0=fns.A.coefficient(mid),
        Aplus=fns.A.coefficient(hi),
        Aminus=fns.A.coefficient(lo),
        B0=fns.B.coefficient(mid),
        Bplus=fns.B.coefficient(hi),
        Bminus=fns.B.coefficient(lo),
        C0v=cmid,
        Cplusv=chi,
        Cminusv=clo,
    )


@dataclass(frozen=True)
class RecursionCoefficients:
    """The n-dependent coefficients of one window's three-term relation.

    a, dplus, dminus are quadratic in n.  dminus(0) exists for formula
    symmetry but no recursion reads it: every relation starts its lower
    term at n = 1.  energy_offset is a constant absorbed out of the
    potential; reported energies are recursion eigenvalues plus it.
    """

    cls: str
    abc: AbcCoefficients
    energy_offset: float = 0.0

    def a(self, n: int) -> float:
        ab = self.abc
        m = ab.mu * n
        return -(m * ((m - 1.0) * ab.A0 + ab.B0) + ab.C0v)

    def atilde(self, n: int) -> float:
        ab = self.abc
        m = ab.mu * n
        return -(m * ((m - 1.0) * ab.A0 + ab.B0))

    def dplus(self, n: int) -> float:
        ab = self.abc
        m = ab.mu * (n + 1)
        return -(m * ((m - 1.0) * ab.Aminus + ab.Bminus) + ab.Cminusv)

    def dminus(self, n: int) -> float:
        ab = self.abc
        m = ab.mu * (n - 1)
        return -(m * ((m - 1.0) * ab.Aplus + ab.Bplus) + ab.Cplusv)

    @property
    def c0v(self) -> float:
        return self.abc.C0v

    @property
    def delta_plus(self) -> float:
        """Fraction of the energy term attached to p_{n+1} (0, 1/2 or 1)."""
        return (self.abc.mu + self.abc.sigma) / (2.0 * self.abc.mu)

    @property
    def delta_minus(self) -> float:
        return (self.abc.mu - self.abc.sigma) / (2.0 * self.abc.mu)


def recursion_coefficients(
    abc: AbcCoefficients, energy_offset: float = 0.0
) -> RecursionCoefficients:
    cls = classify(abc.sigma, abc.mu)
    if cls is None:
        raise StructuralError(
            f"window (sigma={abc.sigma:g}, mu={abc.mu:g}) supports no "
            "three-term relation: sigma must be one of 0, -mu, +mu"
        )
    return RecursionCoefficients(cls=cls, abc=abc, energy_offset=energy_offset)


# ---------------------------------------------------------------------------
# symmetrization


@dataclass(frozen=True)
class OffdiagBand:
    """Off-diagonal entries of a symmetrized representation.

    squares holds the products the entries square to; values are their
    positive roots, NaN where the square is negative.  A negative square
    means the representation is complex at that index, which is a state
    to report, not an error: constraint verification reads these flags.
    """

    values: tuple[float, ...]
    squares: tuple[float, ...]
    complex_flags: tuple[bool, ...]

    @property
    def all_real(self) -> bool:
        return not any(self.complex_flags)


def _band(squares: list[float]) -> OffdiagBand:
    values = []
    flags = []
    for s in squares:
        if s < 0.0:
            values.append(math.nan)
            flags.append(True)
        else:
            values.append(math.sqrt(s))
            flags.append(False)
    return OffdiagBand(
        values=tuple(values), squares=tuple(squares), complex_flags=tuple(flags)
    )


def symmetrize_diagonal(rc: RecursionCoefficients, N: int) -> OffdiagBand:
    """b_n = sqrt(d_n^+ d_{n+1}^-) for n = 0 .. N-2."""
    if rc.cls != DIAGONAL:
        raise ValueError(f"diagonal symmetrization on class {rc.cls}")
    return _band([rc.dplus(n) * rc.dminus(n + 1) for n in range(N - 1)])


def symmetrize_offdiagonal(
    rc: RecursionCoefficients, eps: float, N: int
) -> OffdiagBand:
    """c_n(eps) for n = 0 .. N-2; the energy shifts one factor per class."""
    if rc.cls == OFFPLUS:
        squares = [(rc.dplus(n) + eps) * rc.dminus(n + 1) for n in range(N - 1)]
    elif rc.cls == OFFMINUS:
        squares = [rc.dplus(n) * (rc.dminus(n + 1) + eps) for n in range(N - 1)]
    else:
        raise ValueError(f"off-diagonal symmetrization on class {rc.cls}")
    return _band(squares)


def omega_products(
    rc: RecursionCoefficients, eps: Optional[float], nmax: int
) -> tuple[float, ...]:
    """Running rescalers Omega_0 .. Omega_nmax with Omega_0 = 1.

    Omega_{n+1}/Omega_n is the square root of the ratio of the upper
    coupling at n to the lower coupling at n+1, energy-shifted per class.
    A vanishing denominator at step m raises with that index: past a
    truncation the products are singular by construction.
    """
    if rc.cls == DIAGONAL:
        if eps is not None:
            raise ValueError("diagonal products take no energy argument")
    elif eps is None:
        raise ValueError(f"class {rc.cls} products need the energy")
    out = [1.0]
    for m in range(nmax):
        num = rc.dplus(m)
        den = rc.dminus(m + 1)
        if rc.cls == OFFPLUS:
            num += eps
        elif rc.cls == OFFMINUS:
            den += eps
        if abs(den) <= DIVISOR_TOL * max(1.0, abs(num)):
            raise SingularRecursionError("product denominator", m)
        ratio = num / den
        if ratio < 0.0:
            raise ValueError(
                f"product ratio turns negative at step {m}; "
                "the symmetrized representation is complex there"
            )
        out.append(out[-1] * math.sqrt(ratio))
    return tuple(out)


# ---------------------------------------------------------------------------
# polynomial tables


@dataclass(frozen=True)
class PolynomialTable:
    """Values p_0 .. p_nmax at one point of the spectral variable.

    normalization records which entry the table pins to 1: "first" for
    forward tables (p_0 = 1) and "last" for backward ones.  Backward
    tables also carry the residual of the one relation the downward sweep
    never used; it vanishes exactly on the spectrum.
    """

    values: tuple[float, ...]
    normalization: str
    closure_residual: Optional[float] = None

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> float:
        return self.values[n]


def evaluate_p_forward(
    rc: RecursionCoefficients,
    value: float,
    nmax: int,
    eps: Optional[float] = None,
) -> PolynomialTable:
    """Upward sweep p_0 = 1, .., p_nmax, solving each relation for its top.

    For the diagonal class `value` is the energy and `eps` must be left
    unset.  For the off-diagonal classes the sweep runs at one (c0v,
    energy) point: with `eps` unset, `value` is the energy and c0v is
    taken from the window; with `eps` given, `value` replaces c0v (the
    parameter-spectrum sweep) and `eps` is the fixed energy.
    """
    if rc.cls == DIAGONAL:
        if eps is not None:
            raise ValueError("diagonal tables take the energy as `value`")
        lam, e = None, value
    elif eps is None:
        lam, e = rc.c0v, value
    else:
        lam, e = value, eps
    guard = DIVISOR_TOL * max(1.0, abs(e))
    values = [1.0]
    prev, cur = 0.0, 1.0
    for n in range(nmax):
        div = rc.dplus(n)
        if rc.cls == OFFPLUS:
            div += e
        if abs(div) <= guard:
            raise SingularRecursionError("leading divisor", n)
        if rc.cls == DIAGONAL:
            lower = rc.dminus(n) * prev if n >= 1 else 0.0
            nxt = ((e - rc.a(n)) * cur - lower) / div
        else:
            dm = rc.dminus(n) + (e if rc.cls == OFFMINUS else 0.0)
            lower = dm * prev if n >= 1 else 0.0
            nxt = ((lam - rc.atilde(n)) * cur - lower) / div
        values.append(nxt)
        prev, cur = cur, nxt
    return PolynomialTable(values=tuple(values), normalization="first")


def evaluate_p_backward(
    rc: RecursionCoefficients, eps: float, N: int
) -> PolynomialTable:
    """Downward sweep p_{N-1} = 1, .., p_0 for the sigma = +mu class.

    Starts from p_N = 0 (the truncation) and solves each relation for its
    lowest term, so no step divides by the energy-shifted coupling.  The
    n = 0 relation is left over; its residual is recorded and vanishes
    exactly when (c0v, eps) lies on the spectrum.
    """
    if rc.cls != OFFPLUS:
        raise ValueError(f"backward evaluation is for class {OFFPLUS}, got {rc.cls}")
    if N < 1:
        raise ValueError("need at least one basis function")
    table = [0.0] * N
    table[N - 1] = 1.0
    guard = DIVISOR_TOL * max(1.0, abs(eps))
    for n in range(N - 2, -1, -1):
        j = n + 1
        div = rc.dminus(j)
        if abs(div) <= guard:
            raise SingularRecursionError("lower coupling", j)
        above = table[n + 2] if n + 2 <= N - 1 else 0.0
        table[n] = -(rc.a(j) * table[n + 1] + (rc.dplus(j) + eps) * above) / div
    p1 = table[1] if N >= 2 else 0.0
    closure = -rc.a(0) * table[0] - (rc.dplus(0) + eps) * p1
    return PolynomialTable(
        values=tuple(table), normalization="last", closure_residual=closure
    )
