"""Coordinate maps, weight families, and the coefficient functions they induce.

Substituting psi = omega(y) * sum_n p_n y^(mu n + sigma) into the scaled
stationary form -psi'' + v psi = eps psi, with y = y(x), turns the operator
into a statement about three functions of y alone:

    A = (y'/y)^2
    B = (1/y) (y'' + 2 y'^2 omega'/omega)
    C = y'^2 omega''/omega + y'' omega'/omega

where x-derivatives of y are re-expressed through y itself.  The machinery
closes when A, B and C - v are supported on the three powers
{sigma - mu, sigma, sigma + mu}.  This module builds A, B, C for a given
(map, weight) pair, enumerates the (sigma, mu) windows a support set
admits, and splits C into forced potential terms versus window slots left
to free parameters.

Bounded maps carry weights with (1 - y) or (1 + y) factors whose log
derivatives are not plain power sums.  Those live in FactorSum, which keeps
the factors symbolic through products and derivatives and only at the end
reduces everything to a Laurent part plus the single pole shape
c * y^2 / (1 - y^2) that a sinh^-2 potential term can absorb.  Any other
surviving pole is a structural error, not a numerical one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Optional

from qes.laurent import (
    COEFF_TOL,
    POWER_TOL,
    LaurentSum,
    evaluate,
    multiply,
    normalize,
)


class StructuralError(ValueError):
    """A (map, weight) pair fell outside the shapes the machinery covers."""


# ---------------------------------------------------------------------------
# factor algebra


def _integer_powers(s: LaurentSum) -> dict[int, float]:
    out: dict[int, float] = {}
    for p, c in s.terms:
        k = round(p)
        if abs(p - k) > POWER_TOL:
            raise StructuralError(f"non-integer power {p:g} inside a factor term")
        out[k] = out.get(k, 0.0) + c
    return out


def _divide_linear(s: LaurentSum, root: float) -> LaurentSum:
    """Exact quotient (s - s(root)) / (1 - root*... ).

    Divides by (1 - y) when root = +1 and by (1 + y) when root = -1, after
    subtracting the value at the root so the division is exact.  Powers must
    be integers; the quotient is built by cumulative sums over the integer
    power grid, which reproduces polynomial long division and extends to
    Laurent numerators.
    """
    c = evaluate(s, root)
    rem = s + LaurentSum.constant(-c)
    coeffs = _integer_powers(normalize(rem))
    if not coeffs:
        return LaurentSum.zero()
    lo, hi = min(coeffs), max(coeffs)
    out = []
    acc = 0.0
    # (1 - y) Q = rem forces q_p = sum_{j<=p} rem_j; against (1 + y) the
    # partial sums alternate instead: q_p = rem_p - q_{p-1}.
    for p in range(lo, hi):
        if root > 0:
            acc = acc + coeffs.get(p, 0.0)
        else:
            acc = coeffs.get(p, 0.0) - acc
        out.append((float(p), acc))
    return LaurentSum.from_terms(out)


class FactorSum:
    """Finite sums of L(y) * (1-y)^q * (1+y)^r with Laurent numerators L."""

    __slots__ = ("parts",)

    def __init__(self, parts: Optional[dict[tuple[int, int], LaurentSum]] = None):
        self.parts: dict[tuple[int, int], LaurentSum] = {}
        if parts:
            for key, num in parts.items():
                self._accumulate(key, num)

    def _accumulate(self, key: tuple[int, int], num: LaurentSum) -> None:
        if num.is_zero():
            return
        if key in self.parts:
            self.parts[key] = self.parts[key] + num
        else:
            self.parts[key] = num
        if self.parts[key].is_zero():
            del self.parts[key]

    @staticmethod
    def from_laurent(num: LaurentSum) -> "FactorSum":
        return FactorSum({(0, 0): num})

    def __add__(self, other: "FactorSum") -> "FactorSum":
        out = FactorSum(dict(self.parts))
        for key, num in other.parts.items():
            out._accumulate(key, num)
        return out

    def __mul__(self, other):
        if isinstance(other, FactorSum):
            out = FactorSum()
            for (qa, ra), na in self.parts.items():
                for (qb, rb), nb in other.parts.items():
                    out._accumulate((qa + qb, ra + rb), multiply(na, nb))
            return out
        if isinstance(other, LaurentSum):
            return self * FactorSum.from_laurent(other)
        out = FactorSum()
        for key, num in self.parts.items():
            out._accumulate(key, float(other) * num)
        return out

    __rmul__ = __mul__

    def derivative(self) -> "FactorSum":
        from qes.laurent import derivative_in_y

        out = FactorSum()
        for (q, r), num in self.parts.items():
            out._accumulate((q, r), derivative_in_y(num))
            if q != 0:
                out._accumulate((q - 1, r), (-float(q)) * num)
            if r != 0:
                out._accumulate((q, r - 1), float(r) * num)
        return out

    def evaluate(self, y: float) -> float:
        total = 0.0
        for (q, r), num in self.parts.items():
            total += evaluate(num, y) * (1.0 - y) ** q * (1.0 + y) ** r
        return total

    def _scale(self) -> float:
        peak = 0.0
        for num in self.parts.values():
            for _, c in num.terms:
                peak = max(peak, abs(c))
        return peak if peak > 0.0 else 1.0

    def reduce(self) -> tuple[LaurentSum, float]:
        """Collapse to (regular Laurent part, coefficient of y^2/(1-y^2)).

        Positive factor powers are expanded into the numerator.  Negative
        powers are peeled one order at a time: the value of the numerator
        at the pole splits off, the rest divides exactly.  Whatever pole
        residue survives must assemble into c/(1-y^2), which is c plus
        c * y^2/(1-y^2); anything else (higher-order poles, an odd residue
        at y = +-1) is structural.
        """
        tiny = 1e-10 * self._scale()
        one_minus = LaurentSum.from_terms([(0.0, 1.0), (1.0, -1.0)])
        one_plus = LaurentSum.from_terms([(0.0, 1.0), (1.0, 1.0)])
        regular = LaurentSum.zero()
        residues = {(-1, 0): 0.0, (0, -1): 0.0, (-1, -1): 0.0}
        stack = [(q, r, num) for (q, r), num in self.parts.items()]
        while stack:
            q, r, num = stack.pop()
            if num.is_zero():
                continue
            if q > 0:
                acc = num
                for _ in range(q):
                    acc = multiply(acc, one_minus)
                stack.append((0, r, acc))
                continue
            if r > 0:
                acc = num
                for _ in range(r):
                    acc = multiply(acc, one_plus)
                stack.append((q, 0, acc))
                continue
            if q == 0 and r == 0:
                regular = regular + num
                continue
            scale = max(abs(c) for _, c in num.terms)
            c_plus = evaluate(num, 1.0) if q < 0 else None
            c_minus = evaluate(num, -1.0) if r < 0 else None
            # exact divisions first: a numerator vanishing at the pole lowers
            # that factor's order with no residue, in whichever order works
            if c_plus is not None and abs(c_plus) <= 1e-9 * scale:
                stack.append((q + 1, r, _divide_linear(num, 1.0)))
                continue
            if c_minus is not None and abs(c_minus) <= 1e-9 * scale:
                stack.append((q, r + 1, _divide_linear(num, -1.0)))
                continue
            if q < -1 or r < -1:
                raise StructuralError(
                    f"pole of order ({-q},{-r}) at y=+-1 cannot be absorbed"
                )
            if q < 0:
                # q = -1, r in {0, -1}: peel the residue at y = 1; with
                # r = -1 the split piece is exactly c/(1-y^2)
                stack.append((0, r, _divide_linear(num, 1.0)))
                if abs(c_plus) > tiny:
                    residues[(-1, r)] += c_plus
                continue
            # q = 0, r = -1
            stack.append((0, 0, _divide_linear(num, -1.0)))
            if abs(c_minus) > tiny:
                residues[(0, -1)] += c_minus
        c1 = residues[(-1, 0)]
        c2 = residues[(0, -1)]
        c3 = residues[(-1, -1)]
        odd = c1 - c2
        if abs(odd) > 10.0 * tiny:
            raise StructuralError(
                f"odd pole residue {odd:.3e} at y=+-1 has no matching potential shape"
            )
        pole = c1 + c2 + c3
        if abs(pole) <= 10.0 * tiny:
            pole = 0.0
        # c/(1-y^2) = c + c y^2/(1-y^2); the constant joins the regular part
        # so the reported pole is exactly the sinh^-2 coefficient.
        regular = regular + LaurentSum.constant(pole)
        return normalize(regular), pole


# ---------------------------------------------------------------------------
# coordinate maps


@dataclass(frozen=True)
class CoordinateMap:
    """A change of variable y = y(x) with derivatives re-expressed in y.

    yprime_sq is (dy/dx)^2 and ydoubleprime is d2y/dx2, both as Laurent
    sums in y; for every map used here they are polynomial.  x_domain is
    the open interval the physical coordinate ranges over and y_domain
    its image; x_of_y inverts the map on that image.
    """

    name: str
    yprime_sq: LaurentSum
    ydoubleprime: LaurentSum
    y_of_x: Callable[[float], float] = field(compare=False)
    x_of_y: Callable[[float], float] = field(compare=False)
    x_domain: tuple[float, float] = (0.0, math.inf)
    y_domain: tuple[float, float] = (0.0, math.inf)


def identity_map() -> CoordinateMap:
    """y = x on the half line."""
    return CoordinateMap(
        name="identity",
        yprime_sq=LaurentSum.constant(1.0),
        ydoubleprime=LaurentSum.zero(),
        y_of_x=lambda x: x,
        x_of_y=lambda y: y,
        x_domain=(0.0, math.inf),
        y_domain=(0.0, math.inf),
    )


def exponential_map() -> CoordinateMap:
    """y = e^(-x) on the whole line; y'^2 = y^2, y'' = y.

    The falling orientation puts the weight's essential cutoff at
    x -> -infinity and the power decay at x -> +infinity.
    """
    return CoordinateMap(
        name="exponential",
        yprime_sq=LaurentSum.monomial(2.0),
        ydoubleprime=LaurentSum.monomial(1.0),
        y_of_x=lambda x: math.exp(-x),
        x_of_y=lambda y: -math.log(y),
        x_domain=(-math.inf, math.inf),
        y_domain=(0.0, math.inf),
    )


def saturating_exp_map() -> CoordinateMap:
    """y = 1 - e^(-x) on the half line; y' = 1 - y, y'' = y - 1."""
    return CoordinateMap(
        name="saturating_exp",
        yprime_sq=LaurentSum.from_terms([(0.0, 1.0), (1.0, -2.0), (2.0, 1.0)]),
        ydoubleprime=LaurentSum.from_terms([(0.0, -1.0), (1.0, 1.0)]),
        y_of_x=lambda x: -math.expm1(-x),
        x_of_y=lambda y: -math.log1p(-y),
        x_domain=(0.0, math.inf),
        y_domain=(0.0, 1.0),
    )


def sech_map() -> CoordinateMap:
    """y = sech x on the half line; y'^2 = y^2(1-y^2), y'' = y - 2y^3.

    The half line is the right choice even for even potentials: the
    sinh^-2 pole these weights generate sits at x = 0, so x = 0 is a
    singular endpoint exactly like the origin of a radial problem.
    """
    return CoordinateMap(
        name="sech",
        yprime_sq=LaurentSum.from_terms([(2.0, 1.0), (4.0, -1.0)]),
        ydoubleprime=LaurentSum.from_terms([(1.0, 1.0), (3.0, -2.0)]),
        y_of_x=lambda x: 1.0 / math.cosh(x),
        x_of_y=lambda y: math.acosh(1.0 / y),
        x_domain=(0.0, math.inf),
        y_domain=(0.0, 1.0),
    )


# ---------------------------------------------------------------------------
# weight families


@dataclass(frozen=True)
class WeightFamily:
    """omega(y) known through its log derivative and a pointwise evaluator."""

    name: str
    dlog: FactorSum = field(compare=False)
    omega: Callable[[float], float] = field(compare=False)
    params: tuple[tuple[str, float], ...] = ()


def power_exponential_weight(gamma: float, alpha: float, power: float) -> WeightFamily:
    """omega = y^gamma exp(-alpha y^power)."""
    dlog = FactorSum.from_laurent(
        LaurentSum.from_terms([(-1.0, gamma), (power - 1.0, -alpha * power)])
    )
    return WeightFamily(
        name="power_exponential",
        dlog=dlog,
        omega=lambda y: y**gamma * math.exp(-alpha * y**power),
        params=(("gamma", gamma), ("alpha", alpha), ("power", power)),
    )


def binomial_weight(gamma: float, alpha: float) -> WeightFamily:
    """omega = y^gamma (1-y)^alpha, for maps confined to y < 1."""
    dlog = FactorSum(
        {
            (0, 0): LaurentSum.monomial(-1.0, gamma),
            (-1, 0): LaurentSum.constant(-alpha),
        }
    )
    return WeightFamily(
        name="binomial",
        dlog=dlog,
        omega=lambda y: y**gamma * (1.0 - y) ** alpha,
        params=(("gamma", gamma), ("alpha", alpha)),
    )


def symmetric_binomial_weight(gamma: float, alpha: float) -> WeightFamily:
    """omega = y^gamma (1-y^2)^(alpha/2), for maps confined to |y| < 1."""
    dlog = FactorSum(
        {
            (0, 0): LaurentSum.monomial(-1.0, gamma),
            (-1, -1): LaurentSum.monomial(1.0, -alpha),
        }
    )
    return WeightFamily(
        name="symmetric_binomial",
        dlog=dlog,
        omega=lambda y: y**gamma * (1.0 - y * y) ** (alpha / 2.0),
        params=(("gamma", gamma), ("alpha", alpha)),
    )


# ---------------------------------------------------------------------------
# A, B, C assembly


@dataclass(frozen=True)
class AbcFunctions:
    """The three derived coefficient functions of one (map, weight) pair.

    C is split into a regular Laurent part and the coefficient of
    y^2/(1-y^2); the pole, when present, must be matched verbatim by a
    forced potential term, so it never enters the recursion window.
    """

    A: LaurentSum
    B: LaurentSum
    C: LaurentSum
    pole_csch2: float
    cmap: CoordinateMap = field(compare=False)
    weight: WeightFamily = field(compare=False)

    def support(self) -> tuple[float, ...]:
        powers: list[float] = []
        for p in self.A.support() + self.B.support():
            if not any(abs(p - q) <= POWER_TOL for q in powers):
                powers.append(p)
        return tuple(sorted(powers))


def compute_abc(cmap: CoordinateMap, weight: WeightFamily) -> AbcFunctions:
    A = multiply(cmap.yprime_sq, LaurentSum.monomial(-2.0))

    b_fs = FactorSum.from_laurent(cmap.ydoubleprime) + 2.0 * (
        weight.dlog * cmap.yprime_sq
    )
    b_fs = b_fs * LaurentSum.monomial(-1.0)
    B, b_pole = b_fs.reduce()
    if b_pole != 0.0:
        raise StructuralError(f"B acquired a pole ({b_pole:.3e}) for map {cmap.name}")

    d2log = weight.dlog * weight.dlog + weight.dlog.derivative()
    c_fs = d2log * cmap.yprime_sq + weight.dlog * cmap.ydoubleprime
    C, pole = c_fs.reduce()
    return AbcFunctions(A=A, B=B, C=C, pole_csch2=pole, cmap=cmap, weight=weight)


# ---------------------------------------------------------------------------
# structures


DIAGONAL = "diagonal"
OFFPLUS = "offplus"
OFFMINUS = "offminus"


@dataclass(frozen=True, order=True)
class StructureChoice:
    """A (sigma, mu) window placing the basis exponents at mu*n + sigma.

    cls records which recursion shape the window supports: sigma = 0 gives
    the diagonal three-term relation in the energy, sigma = +-mu the
    off-diagonal ones.  Windows with sigma outside {0, +-mu} are still
    legitimate supports but none of the recursion machinery applies; they
    keep cls = None.
    """

    sigma: float
    mu: float
    cls: Optional[str] = None

    def window(self) -> tuple[float, float, float]:
        return (self.sigma - self.mu, self.sigma, self.sigma + self.mu)


def classify(sigma: float, mu: float) -> Optional[str]:
    if abs(sigma) <= POWER_TOL:
        return DIAGONAL
    if abs(sigma - mu) <= POWER_TOL:
        return OFFPLUS
    if abs(sigma + mu) <= POWER_TOL:
        return OFFMINUS
    return None


def structure(sigma: float, mu: float) -> StructureChoice:
    if mu <= POWER_TOL:
        raise ValueError(f"mu must be positive, got {mu:g}")
    return StructureChoice(sigma=float(sigma), mu=float(mu), cls=classify(sigma, mu))


def enumerate_structures(powers) -> tuple[StructureChoice, ...]:
    """All (sigma, mu) windows covering a support set of 2 or 3 powers.

    Each power is assigned injectively to one of the slots -1, 0, +1 of
    the window {sigma - mu, sigma, sigma + mu}; solving the resulting
    linear system for (sigma, mu) and keeping mu > 0 yields the finite
    list of admissible windows.  A single-power support leaves mu free, so
    it is rejected rather than half-answered.
    """
    uniq: list[float] = []
    for p in powers:
        if not any(abs(p - q) <= POWER_TOL for q in uniq):
            uniq.append(float(p))
    uniq.sort()
    if len(uniq) < 2:
        raise ValueError("support pins no window: need at least two distinct powers")
    if len(uniq) > 3:
        raise ValueError(f"support {uniq} needs more than three window slots")
    found: list[StructureChoice] = []
    for slots in permutations((-1, 0, 1), len(uniq)):
        # power_i = sigma + slots_i * mu; two rows fix (sigma, mu), a third
        # must then agree.
        s0, s1 = slots[0], slots[1]
        det = s1 - s0
        if det == 0:
            continue
        mu = (uniq[1] - uniq[0]) / det
        sigma = uniq[0] - s0 * mu
        if mu <= POWER_TOL:
            continue
        if len(uniq) == 3 and abs(sigma + slots[2] * mu - uniq[2]) > POWER_TOL:
            continue
        cand = StructureChoice(sigma=sigma, mu=mu, cls=classify(sigma, mu))
        if not any(
            abs(cand.sigma - f.sigma) <= POWER_TOL and abs(cand.mu - f.mu) <= POWER_TOL
            for f in found
        ):
            found.append(cand)
    return tuple(sorted(found, key=lambda s: (s.mu, s.sigma)))


# ---------------------------------------------------------------------------
# potential families


@dataclass(frozen=True)
class PotentialFamily:
    """What the potential must contain and what it is free to contain.

    forced holds the C terms outside the window, which v must reproduce
    exactly for the structure to close.  pole_csch2 is the forced
    sinh^-2(x) coefficient.  free_powers are the window slots where v may
    carry an arbitrary coefficient.  A forced constant falling outside the
    window is moved to energy_offset instead of the potential: reported
    energies are recursion eigenvalues shifted by it.
    """

    forced: LaurentSum
    pole_csch2: float
    free_powers: tuple[float, float, float]
    energy_offset: float = 0.0

    def potential_laurent(self, bindings: dict[float, float]) -> LaurentSum:
        """forced terms plus bound window coefficients, as a Laurent sum."""
        extra = []
        for p, c in bindings.items():
            if not any(abs(p - q) <= POWER_TOL for q in self.free_powers):
                raise ValueError(f"power {p:g} is not a free slot of this family")
            extra.append((p, c))
        return self.forced + LaurentSum.from_terms(extra)

    def evaluate(self, bindings: dict[float, float], y: float) -> float:
        v = evaluate(self.potential_laurent(bindings), y)
        if self.pole_csch2 != 0.0:
            v += self.pole_csch2 * y * y / (1.0 - y * y)
        return v


def derive_potential_family(
    abc: AbcFunctions, choice: StructureChoice
) -> PotentialFamily:
    window = choice.window()
    forced_terms = []
    offset = 0.0
    for p, c in abc.C.terms:
        if any(abs(p - q) <= POWER_TOL for q in window):
            continue
        if abs(p) <= POWER_TOL:
            # a forced constant is a potential shift, which is an energy
            # shift; keep v free of it and move it to the reported energy
            offset = c
            continue
        forced_terms.append((p, c))
    return PotentialFamily(
        forced=LaurentSum.from_terms(forced_terms),
        pole_csch2=abc.pole_csch2,
        free_powers=window,
        energy_offset=offset,
    )


def window_coefficients(
    abc: AbcFunctions, choice: StructureChoice, bindings: dict[float, float]
) -> tuple[float, float, float]:
    """(C - v) at the window powers (sigma - mu, sigma, sigma + mu).

    Outside the window C - v vanishes by construction (forced terms and
    the pole are carried by v verbatim), so these three numbers are all
    the recursion layer ever sees of the potential.
    """

    def bound(p: float) -> float:
        for q, c in bindings.items():
            if abs(p - q) <= POWER_TOL:
                return c
        return 0.0

    lo, mid, hi = choice.window()
    return (
        abc.C.coefficient(lo) - bound(lo),
        abc.C.coefficient(mid) - bound(mid),
        abc.C.coefficient(hi) - bound(hi),
    )
