"""Discrete spectral measures and closed-form orthogonality norms.

A truncated window turns the three-term relation into a finite Jacobi
block, and the spectral theorem hands back a discrete measure: support
on the block eigenvalues, weights from squared first components of the
eigenvectors.  Sums against that measure are what the Gamma-function
norm products must reproduce, so this module carries both sides: the
measure builders (energy variable for the diagonal class, coefficient
variable at a fixed closing energy for the off-center classes), the
closed-form norms, and the checks that tie them together (orthogonality
deviation, norm contraction past the truncation, factorization of the
continued recursion).

Raw norms obey the chain identity h_n = prod_{m<=n} D_m^- / D_{m-1}^+,
forced by the relation itself: evaluating <p_{n+1}, x p_n> both ways
gives D_n^+ h_{n+1} = D_{n+1}^- h_n.  Every catalogued closed form is
stated in the orientation that identity fixes, with the prefactor
generalized where the two-parameter slice hides a coupling scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .basis import DIAGONAL, OFFMINUS, OFFPLUS
from .constraints import (
    ConstrainedProblem,
    DIAG_A,
    DIAG_B,
    OFFMINUS_ENERGY,
    OFFPLUS_ENERGY,
)
from .recursion import (
    evaluate_p_forward,
    symmetrize_diagonal,
    symmetrize_offdiagonal,
)
from .spectra import (
    RealityViolationError,
    SymTridiag,
    eigenvalues,
    eigenvector,
    energy_spectrum,
)

__all__ = [
    "GammaPoleError",
    "NoPositiveMeasureError",
    "log_gamma",
    "gamma_ratio",
    "GammaTerm",
    "NormFormula",
    "norm_formula",
    "DiscreteMeasure",
    "discrete_measure",
    "MeasureAssembly",
    "problem_measure",
    "verify_orthogonality",
    "orthogonality_deviation",
    "ZeroNormReport",
    "zero_norm_check",
    "factorization_check",
]

_ARG_LIMIT = 200.0


class GammaPoleError(ValueError):
    """A numerator Gamma argument landed on a nonpositive integer."""


class NoPositiveMeasureError(ValueError):
    """The requested polynomial family admits no positive measure."""


def _is_nonpositive_integer(x: float) -> bool:
    r = round(x)
    return r <= 0 and abs(x - r) <= 1e-12 * max(1.0, abs(x))


def log_gamma(x: float) -> float:
    """log Gamma on (0, 200], the only range the desk-scale norms need."""
    if not x > 0.0:
        raise ValueError(f"log_gamma needs a positive argument, got {x}")
    if x > _ARG_LIMIT:
        raise ValueError(f"log_gamma argument {x} exceeds the supported {_ARG_LIMIT}")
    return math.lgamma(x)


def _signed_log_gamma(x: float) -> tuple[float, float]:
    """(sign, log |Gamma(x)|) for any non-pole argument in range."""
    if abs(x) > _ARG_LIMIT:
        raise ValueError(f"Gamma argument {x} exceeds the supported {_ARG_LIMIT}")
    if x > 0.0:
        return 1.0, math.lgamma(x)
    # negative non-integer: Gamma alternates sign between the poles
    sign = 1.0 if math.floor(x) % 2 == 0 else -1.0
    return sign, math.lgamma(x)


def gamma_ratio(numerator: Sequence[float], denominator: Sequence[float]) -> float:
    """prod Gamma(numerator) / prod Gamma(denominator), sign tracked.

    A nonpositive-integer denominator argument is a pole of the
    reciprocal, so the ratio is exactly 0.  The same argument in the
    numerator has no finite value and raises.
    """
    for x in numerator:
        if _is_nonpositive_integer(x):
            raise GammaPoleError(f"numerator Gamma({x}) is a pole")
    if any(_is_nonpositive_integer(x) for x in denominator):
        return 0.0
    sign, total = 1.0, 0.0
    for x in numerator:
        s, l = _signed_log_gamma(x)
        sign *= s
        total += l
    for x in denominator:
        s, l = _signed_log_gamma(x)
        sign *= s
        total -= l
    return sign * math.exp(total)


@dataclass(frozen=True)
class GammaTerm:
    """One Gamma factor with argument step * n + offset."""

    step: float
    offset: float

    def arg(self, n: int) -> float:
        return self.step * n + self.offset


@dataclass(frozen=True)
class NormFormula:
    """Closed-form norm h_n = base^n * prod Gamma(num) / prod Gamma(den).

    Terms with step 0 are constants that cancel at n = 0, which pins the
    h_0 = 1 normalization; the post-init check enforces it.  A signed
    family sets alternating, and the sign-tracked Gamma evaluation keeps
    the product real either way.
    """

    label: str
    base: float
    numerator: tuple[GammaTerm, ...]
    denominator: tuple[GammaTerm, ...]
    alternating: bool = False

    def __post_init__(self):
        h0 = self.h(0)
        if not abs(h0 - 1.0) <= 1e-10:
            raise ValueError(f"{self.label}: h_0 = {h0}, normalization broken")

    def h(self, n: int) -> float:
        """The norm at index n; 0.0 past a denominator pole, inf past a
        numerator pole (the raw norm grows without bound there and the
        normalized coefficient p_n / sqrt(h_n) is what contracts)."""
        if n < 0:
            raise ValueError("norm index must be nonnegative")
        num = [t.arg(n) for t in self.numerator]
        den = [t.arg(n) for t in self.denominator]
        num_pole = any(_is_nonpositive_integer(x) for x in num)
        den_pole = any(_is_nonpositive_integer(x) for x in den)
        if num_pole and den_pole:
            raise GammaPoleError(f"{self.label}: poles on both sides at n={n}")
        if num_pole:
            return math.inf
        value = gamma_ratio(num, den) * self.base**n
        if self.alternating and n % 2 == 1:
            value = -value
        return value


def _slot_value(cp: ConstrainedProblem, name: str) -> float:
    return cp.problem.slot_named(name).value


def norm_formula(cp: ConstrainedProblem) -> NormFormula:
    """The catalogued closed-form norm for one constrained problem.

    Dispatch is on (problem, truncation kind); combinations without a
    catalogued product raise.  Parameter-variable norms (the energy is
    fixed and the swept coefficient carries the measure) require the
    fixed couplings to stay real, which shows up here as positivity
    conditions on the derived quantities.
    """
    prob = cp.problem
    name = prob.name
    kind = cp.constraint.kind
    N = cp.N
    ga = prob.param("gamma")
    al = prob.param("alpha")

    if name == "bender_dunne" and kind == DIAG_A:
        # classic quantization point: v1 locked to gamma (gamma - 1)
        v1 = _slot_value(cp, "v1")
        if abs(v1 - ga * (ga - 1.0)) > 1e-9 * max(1.0, abs(v1)):
            raise ValueError(
                "bender_dunne norms need v1 = gamma (gamma - 1); "
                f"got v1 = {v1}"
            )
        s = (ga + 0.5) / 2.0
        return NormFormula(
            label="bender_dunne",
            base=4.0 * al,
            numerator=(GammaTerm(0, N), GammaTerm(0, 2 * s)),
            denominator=(
                GammaTerm(1, 1.0),
                GammaTerm(-1, N),
                GammaTerm(1, 2 * s),
            ),
        )

    if name == "sextic_partner" and kind == DIAG_B:
        xi = prob.param("xi")
        if not xi > 0.0:
            raise ValueError("sextic_partner norms need xi > 0")
        return NormFormula(
            label="sextic_partner",
            base=4.0 * al,
            numerator=(
                GammaTerm(-1, N),
                GammaTerm(0, N + ga + 0.5),
                GammaTerm(1, xi),
            ),
            denominator=(
                GammaTerm(0, N),
                GammaTerm(1, N + ga + 0.5),
                GammaTerm(0, xi),
            ),
        )

    if name == "morse_rising_exp" and kind == DIAG_A:
        xi = prob.param("xi")
        beta = prob.param("beta")
        if not xi > 0.0:
            raise ValueError("morse_rising_exp norms need xi > 0")
        return NormFormula(
            label="morse_rising_exp",
            base=2.0 * al * beta**2 / xi,
            numerator=(GammaTerm(0, N),),
            denominator=(GammaTerm(-1, N),),
        )

    if name == "hyperbolic_II1" and kind == DIAG_A:
        v2 = _slot_value(cp, "v2")
        if not v2 < 0.0:
            raise ValueError("hyperbolic_II1 norms need v2 < 0")
        c = N + ga + al - 0.5
        return NormFormula(
            label="hyperbolic_II1",
            base=-4.0 / v2,
            numerator=(GammaTerm(0, N), GammaTerm(1, c)),
            denominator=(GammaTerm(-1, N), GammaTerm(0, c)),
        )

    if name == "hulthen_like_I1" and kind == OFFMINUS_ENERGY:
        v2 = _slot_value(cp, "v2")
        xisq = v2 - (N + ga) * (N + ga - 1.0)
        if not xisq > 0.0:
            raise ValueError(
                "hulthen_like_I1 parameter norms need "
                "v2 > (N + gamma)(N + gamma - 1)"
            )
        tau = math.sqrt((N + ga - 0.5) ** 2 + xisq)
        c = N + 2 * ga + 2 * al - 1.0
        return NormFormula(
            label="hulthen_like_I1",
            base=1.0,
            numerator=(
                GammaTerm(0, N),
                GammaTerm(1, c),
                GammaTerm(0, ga + tau + 0.5),
                GammaTerm(0, ga - tau + 0.5),
            ),
            denominator=(
                GammaTerm(-1, N),
                GammaTerm(0, c),
                GammaTerm(1, ga + tau + 0.5),
                GammaTerm(1, ga - tau + 0.5),
            ),
            alternating=True,
        )

    if name == "sech_II2" and kind == OFFPLUS_ENERGY:
        v1 = _slot_value(cp, "v1")
        xisq = v1 + (ga + al) * (ga + al + 1.0)
        if not xisq > 0.0:
            raise ValueError(
                "sech_II2 parameter norms need "
                "v1 > -(gamma + alpha)(gamma + alpha + 1)"
            )
        tausq = (ga + al + 0.5) ** 2 - xisq
        if tausq < 0.0:
            raise ValueError(
                "sech_II2 norms with this v1 pair the Gamma arguments "
                "off the real axis; not catalogued"
            )
        tau = math.sqrt(tausq)
        c = N + 2 * ga + 1.0
        return NormFormula(
            label="sech_II2",
            base=1.0,
            numerator=(
                GammaTerm(-1, N),
                GammaTerm(0, c),
                GammaTerm(1, ga + al + tau + 0.5),
                GammaTerm(1, ga + al - tau + 0.5),
            ),
            denominator=(
                GammaTerm(0, N),
                GammaTerm(1, c),
                GammaTerm(0, ga + al + tau + 0.5),
                GammaTerm(0, ga + al - tau + 0.5),
            ),
        )

    if name == "sech4_II3" and kind == OFFPLUS_ENERGY:
        v2 = _slot_value(cp, "v2")
        if not v2 > 0.0:
            raise ValueError("sech4_II3 parameter norms need v2 > 0")
        return NormFormula(
            label="sech4_II3",
            base=v2 / 4.0,
            numerator=(GammaTerm(-1, N), GammaTerm(0, N + ga + 1.0)),
            denominator=(GammaTerm(0, N), GammaTerm(1, N + ga + 1.0)),
        )

    raise ValueError(
        f"no closed-form norm catalogued for {name} under {kind}"
    )


@dataclass(frozen=True)
class DiscreteMeasure:
    """Point masses on the block spectrum, normalized to total mass 1.

    Weights are squared first eigenvector components, so they are
    nonnegative; a weight is exactly 0 only for support points of a
    decoupled trailing block, which the leading-block measure cannot
    see.
    """

    support: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.weights) or not self.support:
            raise ValueError("support and weights must match and be nonempty")
        if any(not math.isfinite(x) for x in self.support + self.weights):
            raise ValueError("measure entries must be finite")
        if any(w < 0.0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        for a, b in zip(self.support, self.support[1:]):
            if not a < b:
                raise ValueError("support must be strictly increasing")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"total mass {total} is not 1")

    @property
    def n(self) -> int:
        return len(self.support)

    def moment(self, k: int) -> float:
        """Integral of x^k against the measure."""
        return sum(w * x**k for x, w in zip(self.support, self.weights))


def discrete_measure(m: SymTridiag) -> DiscreteMeasure:
    """Spectral measure of the first basis vector of a Jacobi block.

    A zero coupling splits the block; the leading sub-block already
    carries total mass 1 (its first components are complete), so every
    support point of a trailing sub-block enters with weight exactly 0.
    Support collisions between sub-blocks merge.
    """
    cuts = [i for i, b in enumerate(m.offdiag) if b == 0.0]
    bounds = [0] + [c + 1 for c in cuts] + [m.n]
    points: list[tuple[float, float]] = []
    for k in range(len(bounds) - 1):
        lo, hi = bounds[k], bounds[k + 1]
        sub = SymTridiag(m.diag[lo:hi], m.offdiag[lo : hi - 1])
        for v in eigenvalues(sub):
            w = eigenvector(sub, v)[0] ** 2 if k == 0 else 0.0
            points.append((v, w))
    points.sort()
    support: list[float] = []
    weights: list[float] = []
    for v, w in points:
        if support and v - support[-1] <= 1e-12 * max(1.0, abs(v)):
            weights[-1] += w
        else:
            support.append(v)
            weights.append(w)
    return DiscreteMeasure(tuple(support), tuple(weights))


@dataclass(frozen=True)
class MeasureAssembly:
    """A measure, the polynomial table over it, and the chain norms."""

    measure: DiscreteMeasure
    polynomials: Callable[[float], Sequence[float]]
    norms: tuple[float, ...]


def _chain_norms(
    dminus: Callable[[int], float], dplus: Callable[[int], float], N: int
) -> tuple[float, ...]:
    # h ratio = b_{n-1}^2 / (d_{n-1}^+)^2, so real couplings force h > 0
    h = [1.0]
    for n in range(1, N):
        div = dplus(n - 1)
        if div == 0.0:
            raise ValueError(
                f"ladder breaks at n = {n - 1}: chain norms stop there"
            )
        h.append(h[-1] * dminus(n) / div)
    return tuple(h)


def problem_measure(cp: ConstrainedProblem) -> MeasureAssembly:
    """Measure, polynomials, and chain norms for one constrained problem.

    Diagonal truncations get the energy measure of the reduced block.
    Energy-fixing truncations get the coefficient measure: the swept
    slot enters the center relation linearly, so support points are the
    quantized coefficient values and the polynomials are evaluated along
    the coefficient at the fixed closing energy.  Off-center windows
    with a swept energy are refused: their leading pair of polynomials
    is constant in the energy, the 0-1 orthogonality integral forces
    total mass 0, and the measure can not be positive definite.
    """
    rc = cp.recursion()
    N = cp.N
    if cp.constraint.fixes_energy:
        prob = cp.problem
        if prob.param_mode != "linear":
            raise ValueError(
                f"{prob.name}: the swept coefficient acts through its "
                "square; no single-variable measure is catalogued"
            )
        eps = cp.eps_fixed
        band = symmetrize_offdiagonal(rc, eps, N)
        if not band.all_real:
            raise RealityViolationError(
                cp.reality,
                "coupling squares at the fixed energy are negative",
            )
        slot = prob.slot_named(prob.param_name)
        center = rc.c0v + slot.value
        block = SymTridiag(
            tuple(rc.atilde(n) for n in range(N)), band.values
        )
        raw = discrete_measure(block)
        # u = center - t reverses the ordering; re-sort the pairs
        pairs = sorted(
            (center - t, w) for t, w in zip(raw.support, raw.weights)
        )
        measure = DiscreteMeasure(
            tuple(u for u, _ in pairs), tuple(w for _, w in pairs)
        )

        def polynomials(u: float) -> Sequence[float]:
            return evaluate_p_forward(rc, center - u, N - 1, eps=eps).values

        if rc.cls == OFFMINUS:
            norms = _chain_norms(
                lambda n: rc.dminus(n) + eps, rc.dplus, N
            )
        else:
            norms = _chain_norms(
                rc.dminus, lambda n: rc.dplus(n) + eps, N
            )
        return MeasureAssembly(measure, polynomials, norms)

    if rc.cls != DIAGONAL:
        raise NoPositiveMeasureError(
            "energy polynomials of an off-center window start from a "
            "pair that is constant in the energy, so the orthogonality "
            "integral of p_0 against p_1 forces total mass 0: the "
            "measure can not be positive definite"
        )

    band = symmetrize_diagonal(rc, N)
    if not band.all_real:
        raise RealityViolationError(
            cp.reality,
            "coupling squares below the truncation are negative",
        )
    block = SymTridiag(tuple(rc.a(n) for n in range(N)), band.values)
    measure = discrete_measure(block)

    def polynomials(e: float) -> Sequence[float]:
        return evaluate_p_forward(rc, e, N - 1).values

    norms = _chain_norms(rc.dminus, rc.dplus, N)
    return MeasureAssembly(measure, polynomials, norms)


def verify_orthogonality(
    measure: DiscreteMeasure,
    polynomials: Callable[[float], Sequence[float]],
    norm: Union[NormFormula, Sequence[float]],
    N: int,
) -> float:
    """Worst deviation of the measure sums from delta_nm h_n.

    Every pair n, m <= N - 1 is summed against the measure and compared
    with the norm, relative to max(1, |h|) of the pair.
    """
    if isinstance(norm, NormFormula):
        hs = [norm.h(n) for n in range(N)]
    else:
        hs = [float(h) for h in norm]
        if len(hs) < N:
            raise ValueError(f"need {N} norm values, got {len(hs)}")
    tables = [polynomials(x) for x in measure.support]
    for t in tables:
        if len(t) < N:
            raise ValueError("polynomial table shorter than the window")
    worst = 0.0
    for n in range(N):
        for m in range(N):
            s = sum(
                w * t[n] * t[m] for w, t in zip(measure.weights, tables)
            )
            target = hs[n] if n == m else 0.0
            scale = max(1.0, abs(hs[n]), abs(hs[m]))
            worst = max(worst, abs(s - target) / scale)
    return worst


def orthogonality_deviation(
    cp: ConstrainedProblem, norm: Optional[NormFormula] = None
) -> float:
    """One-call orthogonality check for a constrained problem.

    With no norm given the chain norms are used, which tests the
    measure construction itself; passing a closed form tests that
    formula against the measure.
    """
    assembly = problem_measure(cp)
    hs: Union[NormFormula, Sequence[float]]
    hs = norm if norm is not None else assembly.norms
    return verify_orthogonality(
        assembly.measure, assembly.polynomials, hs, cp.N
    )


@dataclass(frozen=True)
class ZeroNormReport:
    """How the norms behave past the truncation.

    mechanisms[j] describes index start + j: "vanishes" when a
    denominator Gamma argument hits a nonpositive integer (h_n = 0),
    "diverges" when a numerator argument does (raw norm unbounded, the
    normalized coefficient p_n / sqrt(h_n) is what dies), "persists"
    when neither side poles.
    """

    label: str
    start: int
    mechanisms: tuple[str, ...]

    @property
    def all_zero(self) -> bool:
        return all(m == "vanishes" for m in self.mechanisms)

    @property
    def terminated(self) -> bool:
        return all(m in ("vanishes", "diverges") for m in self.mechanisms)


def zero_norm_check(norm: NormFormula, N: int, nmax: int) -> ZeroNormReport:
    """Classify every norm index from N through nmax.

    The truncation is supposed to kill the expansion past the window,
    and in the closed forms that shows up as a Gamma pole from index N
    on; which side of the ratio poles depends on which ladder term the
    truncation zeroed.
    """
    if nmax < N:
        raise ValueError("nmax must reach the truncation index")
    mechanisms = []
    for n in range(N, nmax + 1):
        num_pole = any(
            _is_nonpositive_integer(t.arg(n)) for t in norm.numerator
        )
        den_pole = any(
            _is_nonpositive_integer(t.arg(n)) for t in norm.denominator
        )
        if num_pole and den_pole:
            mechanisms.append("indeterminate")
        elif den_pole:
            mechanisms.append("vanishes")
        elif num_pole:
            mechanisms.append("diverges")
        else:
            mechanisms.append("persists")
    return ZeroNormReport(norm.label, N, tuple(mechanisms))


def factorization_check(cp: ConstrainedProblem, jmax: int) -> float:
    """Largest |p_{N+j}| at the spectrum, relative to the running scale.

    The recursion is continued past the window with the constrained
    coefficients left as they are; at an eigenvalue the continuation
    picks up the vanishing factor p_N, so every later entry vanishes
    with it.  Needs an unbroken ladder: a truncation that zeroes an
    upper coupling inside the continued range leaves p beyond that
    point undefined.
    """
    if jmax < 0:
        raise ValueError("jmax must be nonnegative")
    rc = cp.recursion()
    if rc.cls != DIAGONAL or cp.constraint.fixes_energy:
        raise ValueError("factorization applies to the diagonal class")
    N = cp.N
    worst = 0.0
    for e in energy_spectrum(cp).eigenvalues:
        table = evaluate_p_forward(rc, e, N + jmax).values
        scale = max(1.0, max(abs(v) for v in table[:N]))
        tail = max(abs(v) for v in table[N:])
        worst = max(worst, tail / scale)
    return worst
