"""Closed-form bound states and the independent check that they solve
the wave equation.

A truncated expansion psi(x) = omega(y) sum_{n<N} p_n y^(mu n) is
assembled from a constrained problem and one spectrum point.  Because
the weight's log derivative, the map derivatives, and the polynomial
part are all exact y-series, psi'' is available in closed form at any
interior point; the residual check therefore tests the algebra of every
other module without numerical differentiation.

One convention matters here and nowhere else.  The spectral variable
the recursion rows carry is the equation eigenvalue itself only for the
centered window; for the shifted windows the energy term of the
equation lands one row off its own basis power, and balancing the rows
forces the sweep variable to be the negated eigenvalue.  A state
therefore records energy_sign and the residual check solves

    -psi''/2 + (V - E) psi,   E = energy_sign * (eps - offset) / 2,

with V half the bound potential.  Spectra and tables keep reporting the
sweep variable; only the equation check needs the sign.

The recursion relations close the rows the expansion actually uses, but
the operator also touches one power below the basis and two above the
cut.  Whatever survives there is the boundary defect

    (-d2 + v - 2E) psi = omega(y) [ D_lo y^(sigma-mu)
                                    + D_mid y^(sigma+mu(N-1))
                                    + D_hi y^(sigma+mu N) ],

with D_lo set by the row below the basis, D_mid by the missing p_N term
of the spectrum row, and D_hi by the upward ladder of p_{N-1}.  The
spectrum condition kills D_mid, and the truncation closure kills D_hi
except under the raised window's energy closure, which cancels the
p_N column instead of the ladder.  D_lo is untouched by either: it
vanishes only when the window coefficient C - v one power below the
basis does (for the raised window, when the sweep value meets it).
Problems tuned so that all three vanish are solved pointwise; for the
rest the assembled state solves the equation only modulo those powers,
and boundary_defect quantifies them exactly.  explain_residual closes
the loop by checking the measured residual against this prediction on
the sample grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from scipy import integrate

from qes.basis import (
    DIAGONAL,
    OFFMINUS,
    OFFPLUS,
    CoordinateMap,
    FactorSum,
    PotentialFamily,
    WeightFamily,
)
from qes.constraints import OFFMINUS_ENERGY, ConstrainedProblem
from qes.laurent import LaurentSum, derivative_in_y, evaluate
from qes.recursion import (
    SingularRecursionError,
    evaluate_p_backward,
    evaluate_p_forward,
)
from qes.spectra import (
    EmptySpectrumError,
    RealityViolationError,
    energy_spectrum,
    parameter_spectrum,
)

__all__ = [
    "ClosedFormWavefunction",
    "DegenerateSampleError",
    "DefectReport",
    "DivergentNormError",
    "WavefunctionSampler",
    "assemble",
    "boundary_defect",
    "default_grid",
    "explain_residual",
    "l2_norm",
    "schrodinger_residual",
]

SPECTRUM_TOL = 1e-8

# weight decay, in e-folds, at which a tail is considered negligible;
# psi^2 is then ~ e^-80, far below any residual or quadrature tolerance
_TAIL_EFOLDS = 40.0

# residual measurements skip points where BOTH the state value and the
# residual floor have decayed below this fraction of their grid maxima.
# Near a finite y-edge reached asymptotically (the saturating maps at
# y -> 1) the stored y keeps only ulp-level knowledge of 1 - y, so the
# sampled residual there is quantization noise with a floor of the same
# size; such points cannot distinguish exact from defective and are
# excluded rather than measured.  Points where the floor alone is large
# (a boundary defect growing toward an edge) stay in, as do nodes of
# psi, whose floor is carried by psi''.
_FLOOR_CUT = 1e-6


class DegenerateSampleError(ValueError):
    """The state vanished at every sample point; nothing to measure."""


class DivergentNormError(ValueError):
    """The square integral fails at a boundary of the x-domain."""


@dataclass(frozen=True)
class ClosedFormWavefunction:
    """One assembled state: weight, map, coefficient table, and energy.

    The polynomial part is sum p_n y^(mu n) over the stored coefficients;
    eps is the reported spectrum value, offset included.  energy_sign
    says how that value enters the equation: +1 for the centered window,
    -1 for the shifted ones, whose sweep variable is the negated
    eigenvalue.  potential and bindings travel along so the residual
    check needs nothing but the state; both may be None for hand-built
    states that only want evaluation or a norm.  status records whether
    the energy (and, for energy-fixing closures, the swept coefficient)
    sat on the computed spectrum.
    """

    weight: WeightFamily
    cmap: CoordinateMap
    coefficients: tuple[float, ...]
    mu: float
    eps: float
    potential: Optional[PotentialFamily] = None
    bindings: Optional[dict[float, float]] = None
    normalization: str = "first"
    status: str = "on-spectrum"
    energy_offset: float = 0.0
    energy_sign: float = 1.0

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("a state needs at least one coefficient")
        for c in self.coefficients:
            if not math.isfinite(c):
                raise ValueError("coefficient table is not finite")
        if self.mu <= 0.0:
            raise ValueError("basis step mu must be positive")
        anchor = (
            self.coefficients[0]
            if self.normalization == "first"
            else self.coefficients[-1]
        )
        if abs(anchor - 1.0) > 1e-12:
            raise ValueError(
                f"{self.normalization!r} normalization broken: anchor "
                f"coefficient is {anchor!r}"
            )

    @property
    def N(self) -> int:
        return len(self.coefficients)

    def polynomial(self) -> LaurentSum:
        return LaurentSum.from_terms(
            [(self.mu * n, c) for n, c in enumerate(self.coefficients)]
        )


class WavefunctionSampler:
    """Pointwise psi, its exact second derivative, and the residual.

    psi'' / omega is assembled once as a factor sum:

        (omega''/omega P + 2 omega'/omega P' + P'') y'^2
        + (omega'/omega P + P') y''

    which stays exact across the weight's (1 -+ y) factors, so every
    evaluation is a finite sum of powers at the mapped y.
    """

    def __init__(self, psi: ClosedFormWavefunction):
        self.psi = psi
        poly = psi.polynomial()
        p1 = derivative_in_y(poly)
        dlog = psi.weight.dlog
        d2log = dlog * dlog + dlog.derivative()
        slope = dlog * poly + FactorSum.from_laurent(p1)
        curvature = (
            d2log * poly
            + 2.0 * (dlog * p1)
            + FactorSum.from_laurent(derivative_in_y(p1))
        )
        self._poly = poly
        self._curv = curvature * psi.cmap.yprime_sq + slope * psi.cmap.ydoubleprime

    def value(self, x: float) -> float:
        y = self.psi.cmap.y_of_x(x)
        return self.psi.weight.omega(y) * evaluate(self._poly, y)

    def second_derivative(self, x: float) -> float:
        y = self.psi.cmap.y_of_x(x)
        return self.psi.weight.omega(y) * self._curv.evaluate(y)

    def potential_value(self, x: float) -> float:
        psi = self.psi
        if psi.potential is None or psi.bindings is None:
            raise ValueError("state carries no potential; assemble it first")
        return psi.potential.evaluate(psi.bindings, psi.cmap.y_of_x(x))

    def equation_eps(self) -> float:
        """The eigenvalue the equation sees, in doubled units (2E).

        The reported eps absorbs any constant moved out of v, so the
        check against the stored potential removes that shift; the sign
        undoes the shifted windows' negated sweep variable.
        """
        return self.psi.energy_sign * (self.psi.eps - self.psi.energy_offset)

    def residual(self, x: float) -> float:
        """-psi''/2 + (V - E) psi at x, with V half the bound potential."""
        gap = 0.5 * (self.potential_value(x) - self.equation_eps())
        return -0.5 * self.second_derivative(x) + gap * self.value(x)

    def residual_floor(self, x: float) -> float:
        gap = 0.5 * abs(self.potential_value(x) - self.equation_eps())
        return max(gap * abs(self.value(x)), 0.5 * abs(self.second_derivative(x)))


def _weight_param(weight: WeightFamily, name: str) -> float:
    for key, value in weight.params:
        if key == name:
            return value
    raise KeyError(f"weight {weight.name} has no parameter {name!r}")


def _on_energy_spectrum(cp: ConstrainedProblem, eps: float, tol: float) -> bool:
    try:
        report = energy_spectrum(cp)
    except (EmptySpectrumError, RealityViolationError):
        return False
    scale = max(1.0, abs(eps))
    return any(abs(eps - e) <= tol * scale for e in report.eigenvalues)


def _swept_slot_value(cp: ConstrainedProblem) -> tuple[float, str]:
    prob = cp.problem
    if prob.param_mode == "linear":
        slot = prob.slot_named(prob.param_name)
    else:
        sigma, mu = prob.choice.sigma, prob.choice.mu
        power = sigma - mu if cp.constraint.kind == OFFMINUS_ENERGY else sigma + mu
        slot = prob.slot_at(power)
    return slot.value, slot.name


def _on_parameter_spectrum(cp: ConstrainedProblem, eps: float, tol: float) -> bool:
    if abs(eps - cp.eps_fixed) > tol * max(1.0, abs(eps)):
        return False
    try:
        spectrum = parameter_spectrum(cp)
    except (EmptySpectrumError, RealityViolationError):
        return False
    prob = cp.problem
    have, _ = _swept_slot_value(cp)
    if prob.param_mode == "linear":
        targets = spectrum.values
    else:
        targets = tuple(prob.param_square_scale * u * u for u in spectrum.values)
    scale = max(1.0, abs(have))
    return any(abs(have - t) <= tol * scale for t in targets)


def assemble(
    cp: ConstrainedProblem, eps: float, tol: float = SPECTRUM_TOL
) -> ClosedFormWavefunction:
    """The closed-form state of a constrained problem at one energy.

    For energy-fixing closures eps should be the closing energy and the
    swept coefficient should already be rebound to a parameter-spectrum
    value.  An eps (or coefficient) off the computed spectrum is not an
    error; the state is returned with status "off-spectrum" and the
    residual check will quantify the mismatch.
    """
    rc = cp.recursion()
    N = cp.N
    if cp.constraint.fixes_energy:
        on = _on_parameter_spectrum(cp, eps, tol)
    else:
        on = _on_energy_spectrum(cp, eps, tol)
    try:
        table = evaluate_p_forward(rc, eps, N - 1)
    except SingularRecursionError:
        if rc.cls != OFFPLUS:
            raise
        table = evaluate_p_backward(rc, eps, N)
    prob = cp.problem
    family = prob.potential()
    return ClosedFormWavefunction(
        weight=prob.weight,
        cmap=prob.cmap,
        coefficients=tuple(table.values),
        mu=prob.choice.mu,
        eps=eps,
        potential=family,
        bindings=prob.bindings(),
        normalization=table.normalization,
        status="on-spectrum" if on else "off-spectrum",
        energy_offset=rc.energy_offset,
        energy_sign=1.0 if rc.cls == DIAGONAL else -1.0,
    )


# ---------------------------------------------------------------------------
# sample grids


def _decay_edge(
    shrinking: Callable[[float], float], start: float, step: float
) -> float:
    """First probe, moving by doubled steps, where the weight is tail."""
    floor = math.exp(-_TAIL_EFOLDS)
    x = start
    move = step
    for _ in range(200):
        x += move
        try:
            value = shrinking(x)
        except OverflowError:
            # the map left float range; the last safe probe is certainly
            # past any tail that matters
            return x - move
        if not math.isfinite(value) or value <= floor:
            return x
        move *= 2.0
    raise ValueError("weight never decayed to the tail floor")


def _strictly_mapped(cmap: CoordinateMap, x: float) -> bool:
    lo, hi = cmap.y_domain
    y = cmap.y_of_x(x)
    return lo < y < hi


def _pull_interior(cmap: CoordinateMap, anchor: float, x: float) -> float:
    """Move x toward anchor until its image leaves the y-boundary.

    Far tails can saturate the map in floating point (y pinned at a
    finite domain edge), where the weight is fine but the curvature's
    edge factors divide by zero.  Every map here is monotone, so an
    interior endpoint keeps the whole span interior.
    """
    for _ in range(200):
        if _strictly_mapped(cmap, x):
            return x
        x = anchor + 0.9 * (x - anchor)
    raise ValueError("sample window collapsed onto a y-domain edge")


def default_grid(
    psi: ClosedFormWavefunction, count: int = 200, margin: float = 1e-2
) -> tuple[float, ...]:
    """Interior sample points, dense toward a finite singular endpoint.

    A finite domain edge is approached to within margin (in the unit
    length scale) with geometric spacing, since that is where inverse
    powers of x make the equation stiff.  Infinite edges are cut where
    the weight has decayed by _TAIL_EFOLDS e-folds, and the spacing is
    then uniform.
    """
    if count < 2:
        raise ValueError("a sample grid needs at least two points")
    lo, hi = psi.cmap.x_domain
    omega = lambda x: abs(psi.weight.omega(psi.cmap.y_of_x(x)))
    if math.isinf(lo):
        left = -_decay_edge(lambda t: omega(-t), 0.0, 1.0)
    else:
        left = lo + margin
    right = _decay_edge(omega, max(left, 0.0) + margin, 1.0)
    right = _pull_interior(psi.cmap, left, right)
    left = _pull_interior(psi.cmap, right, left)
    if right <= left:
        raise ValueError("sample window is empty; weight decays too fast")
    if math.isinf(lo):
        step = (right - left) / (count - 1)
        return tuple(left + k * step for k in range(count))
    ratio = (right / left) ** (1.0 / (count - 1))
    return tuple(left * ratio**k for k in range(count))


# ---------------------------------------------------------------------------
# the equation check


def schrodinger_residual(
    psi: ClosedFormWavefunction,
    grid: Optional[Sequence[float]] = None,
    count: int = 200,
    margin: float = 1e-2,
) -> float:
    """Largest relative residual of -psi''/2 + V psi - E psi on the grid.

    Each point is normalized by max(|V - E| |psi|, |psi''| / 2) so that
    nodes of psi do not divide zero by zero.  Points whose floor has
    decayed below _FLOOR_CUT of the grid maximum are skipped: where a
    map saturates against a finite y-edge the sampled values are pure
    quantization noise and their ratio means nothing.
    """
    if grid is None:
        grid = default_grid(psi, count=count, margin=margin)
    else:
        grid = tuple(grid)
        lo, hi = psi.cmap.x_domain
        if any(not lo < x < hi for x in grid):
            raise ValueError("sample grid leaves the open x-domain")
    if not grid:
        raise ValueError("empty sample grid")
    sampler = WavefunctionSampler(psi)
    values = [abs(sampler.value(x)) for x in grid]
    if max(values) == 0.0:
        raise DegenerateSampleError(
            "state vanishes at every sample point; move the grid"
        )
    floors = [sampler.residual_floor(x) for x in grid]
    fcut = _FLOOR_CUT * max(floors)
    vcut = _FLOOR_CUT * max(values)
    worst = 0.0
    for x, v, floor in zip(grid, values, floors):
        if floor <= fcut and v <= vcut:
            continue
        if floor == 0.0:
            continue
        worst = max(worst, abs(sampler.residual(x)) / floor)
    return worst


def boundary_defect(
    cp: ConstrainedProblem, psi: ClosedFormWavefunction
) -> tuple[tuple[float, float], ...]:
    """The three (power, coefficient) terms of (h - eps) psi / omega.

    Computed from the recursion rows themselves, so no step divides by a
    truncated coupling: the missing-p_N term is read off the last row as
    the imbalance of its known members.  The shape assumes the interior
    rows hold, which assembly guarantees; a table built by the backward
    route away from a determinant root also leaves an anchor-row
    imbalance that these three terms do not model, and explain_residual
    reports the mismatch instead of hiding it.
    """
    rc = cp.recursion()
    N = cp.N
    p = psi.coefficients
    if len(p) != N:
        raise ValueError(
            f"state carries {len(p)} coefficients but the closure uses N = {N}"
        )
    e = psi.eps - rc.energy_offset
    sigma, mu = rc.abc.sigma, rc.abc.mu
    last = p[N - 1]
    below = p[N - 2] if N >= 2 else 0.0
    if rc.cls == DIAGONAL:
        lo = -rc.abc.Cminusv * p[0]
        mid = (rc.a(N - 1) - e) * last + rc.dminus(N - 1) * below
        hi = rc.dminus(N) * last
    elif rc.cls == OFFMINUS:
        lo = -rc.abc.Cminusv * p[0]
        mid = (rc.atilde(N - 1) - rc.c0v) * last + (rc.dminus(N - 1) + e) * below
        hi = (rc.dminus(N) + e) * last
    else:
        lo = (e - rc.abc.Cminusv) * p[0]
        mid = (rc.atilde(N - 1) - rc.c0v) * last + rc.dminus(N - 1) * below
        hi = rc.dminus(N) * last
    return (
        (sigma - mu, lo),
        (sigma + mu * (N - 1), mid),
        (sigma + mu * N, hi),
    )


@dataclass(frozen=True)
class DefectReport:
    """Measured residual against the predicted boundary defect.

    measured is the grid maximum of the relative residual; agreement is
    the largest pointwise gap between the measured residual and the
    defect prediction, relative to the floor or to the prediction,
    whichever is larger.  Assembly enforces every interior row by
    construction, whatever the sweep value, so agreement stays at
    rounding level even off the spectrum; what being off-spectrum
    changes is the size of the closure terms, and with them measured.
    """

    terms: tuple[tuple[float, float], ...]
    measured: float
    agreement: float

    @property
    def explained(self) -> bool:
        return self.agreement <= 1e-8


def explain_residual(
    cp: ConstrainedProblem,
    psi: ClosedFormWavefunction,
    grid: Optional[Sequence[float]] = None,
    count: int = 200,
    margin: float = 1e-2,
) -> DefectReport:
    if grid is None:
        grid = default_grid(psi, count=count, margin=margin)
    else:
        grid = tuple(grid)
    terms = boundary_defect(cp, psi)
    shape = LaurentSum.from_terms([(q, c) for q, c in terms])
    sampler = WavefunctionSampler(psi)
    values = [abs(sampler.value(x)) for x in grid]
    floors = [sampler.residual_floor(x) for x in grid]
    fcut = _FLOOR_CUT * max(floors, default=0.0)
    vcut = _FLOOR_CUT * max(values, default=0.0)
    alive = False
    worst = 0.0
    agreement = 0.0
    for x, v, floor in zip(grid, values, floors):
        if (floor <= fcut and v <= vcut) or floor == 0.0:
            continue
        y = psi.cmap.y_of_x(x)
        # V = v/2 units halve the defect of h - eps as well
        predicted = 0.5 * psi.weight.omega(y) * evaluate(shape, y)
        measured = sampler.residual(x)
        gap = abs(measured - predicted)
        alive = True
        worst = max(worst, abs(measured) / floor)
        # near a steep edge the defect terms dwarf the floor; compare the
        # two large numbers relatively instead of against the floor
        agreement = max(agreement, gap / max(floor, abs(predicted)))
    if not alive:
        raise DegenerateSampleError(
            "state vanishes at every sample point; move the grid"
        )
    return DefectReport(terms=terms, measured=worst, agreement=agreement)


# ---------------------------------------------------------------------------
# square integrability

# how each (map, weight) pair reaches its boundaries: at the y -> 0 end
# psi ~ omega y^(mu n0) with omega ~ y^gamma, and the table below says
# whether that end is a finite x with power behavior ("power", need a
# positive exponent for the boundary condition psi -> 0) or an infinite
# tail with rate exponent ("rate", need positive decay).  The far end is
# controlled by the second weight parameter the same way.
_EDGE_RULES = {
    ("identity", "power_exponential"): (("power", "x = 0"), ("gauss", "x -> inf")),
    ("exponential", "power_exponential"): (
        ("rate", "x -> +inf"),
        ("gauss", "x -> -inf"),
    ),
    ("saturating_exp", "binomial"): (("power", "x = 0"), ("rate", "x -> inf")),
    ("sech", "symmetric_binomial"): (("rate", "x -> inf"), ("power", "x = 0")),
}


def _leading_exponent(psi: ClosedFormWavefunction) -> float:
    gamma = _weight_param(psi.weight, "gamma")
    for n, c in enumerate(psi.coefficients):
        if c != 0.0:
            return gamma + psi.mu * n
    raise DegenerateSampleError("all coefficients vanish")


def _check_integrable(psi: ClosedFormWavefunction) -> None:
    key = (psi.cmap.name, psi.weight.name)
    if key not in _EDGE_RULES:
        raise ValueError(
            f"no boundary rule for map {psi.cmap.name!r} with weight "
            f"{psi.weight.name!r}"
        )
    near, far = _EDGE_RULES[key]
    lead = _leading_exponent(psi)
    kind, where = near
    if lead <= 0.0:
        if kind == "power":
            raise DivergentNormError(
                f"boundary condition fails near {where}: psi behaves like "
                f"x^{lead:g} there and does not vanish"
            )
        raise DivergentNormError(
            f"tail {where} fails to decay: exponent {lead:g} is not positive"
        )
    alpha = _weight_param(psi.weight, "alpha")
    kind, where = far
    if alpha <= 0.0:
        if kind == "power":
            raise DivergentNormError(
                f"boundary condition fails near {where}: the edge exponent "
                f"{alpha:g} is not positive"
            )
        raise DivergentNormError(
            f"tail {where} fails to decay: weight exponent {alpha:g} is not "
            "positive"
        )


def l2_norm(psi: ClosedFormWavefunction, tol: float = 1e-10) -> float:
    """The square integral of the state over its x-domain.

    Boundary behavior is checked first from the exact exponents; the
    integral itself runs adaptively over the window where the weight is
    above its tail floor, which discards a tail bounded by e^-80 times
    the peak.
    """
    _check_integrable(psi)
    sampler = WavefunctionSampler(psi)
    lo, hi = psi.cmap.x_domain
    omega = lambda x: abs(psi.weight.omega(psi.cmap.y_of_x(x)))
    if math.isinf(lo):
        left = -_decay_edge(lambda t: omega(-t), 0.0, 1.0)
    else:
        left = lo
    right = _decay_edge(omega, (lo if math.isfinite(lo) else 0.0) + 1.0, 1.0)
    value, abserr = integrate.quad(
        lambda x: sampler.value(x) ** 2,
        left,
        right,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    if not math.isfinite(value) or abserr > tol * max(1.0, abs(value)):
        raise DivergentNormError(
            f"quadrature failed to converge: estimate {value!r}, "
            f"error {abserr:.3e}"
        )
    return value
