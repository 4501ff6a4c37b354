"""Problem catalog: named potentials wired to maps, weights, and windows.

Each builder returns a ProblemDefinition holding the coordinate map, the
weight family, the ladder window (sigma, mu), and the potential
coefficients bound to window powers.  Parameters that shape the weight
(alpha, gamma, and relatives) are required and validated; potential
coefficients default to zero, which drops the corresponding term.
Coefficients that a truncation constraint solves for, or that a
parameter spectrum quantizes, are ordinary slots here; the constraint
layer rewrites them through rebind().
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional

from .basis import (
    AbcFunctions,
    CoordinateMap,
    PotentialFamily,
    StructureChoice,
    WeightFamily,
    binomial_weight,
    compute_abc,
    derive_potential_family,
    exponential_map,
    identity_map,
    power_exponential_weight,
    saturating_exp_map,
    sech_map,
    structure,
    symmetric_binomial_weight,
)
from .recursion import RecursionCoefficients, abc_coefficients, recursion_coefficients

__all__ = [
    "MissingParameterError",
    "PROBLEM_NAMES",
    "ProblemDefinition",
    "SlotBinding",
    "UnexpectedParameterError",
    "UnknownProblemError",
    "bender_dunne_point",
    "build_problem",
]


class UnknownProblemError(KeyError):
    """Raised for a problem name that is not in the catalog."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return "unknown problem {!r} (known: {})".format(
            self.name, ", ".join(PROBLEM_NAMES)
        )


class MissingParameterError(ValueError):
    """A required physical parameter was not supplied."""

    def __init__(self, problem: str, field: str):
        super().__init__(f"{problem}: missing required parameter {field!r}")
        self.problem = problem
        self.field = field


class UnexpectedParameterError(ValueError):
    """A parameter was supplied that the problem does not accept."""

    def __init__(self, problem: str, fields: tuple[str, ...]):
        super().__init__(
            f"{problem}: unexpected parameter(s) {', '.join(fields)}"
        )
        self.problem = problem
        self.fields = fields


@dataclass(frozen=True)
class SlotBinding:
    """One potential coefficient attached to a window power."""

    power: float
    name: str
    value: float


@dataclass(frozen=True)
class ProblemDefinition:
    """A catalog potential: map + weight + window + bound coefficients.

    params records the constructor inputs after defaults and derived
    values were resolved; slots are the authoritative coefficient values
    and are what rebind() rewrites.  param_name / param_mode describe
    which coefficient a parameter spectrum quantizes and through which
    matrix shape: "linear" puts the coefficient on the diagonal of the
    reduced problem, "even" scales the off-diagonal couplings.
    two_term_reduction names the exactly solvable model reached when a
    constraint zeroes a coefficient whose ladder term is constant in n.
    """

    name: str
    cmap: CoordinateMap
    weight: WeightFamily
    choice: StructureChoice
    slots: tuple[SlotBinding, ...]
    params: tuple[tuple[str, float], ...]
    two_term_reduction: Optional[str] = None
    param_mode: Optional[str] = None
    param_name: Optional[str] = None
    # "even" mode only: the quantized slot is param_square_scale times
    # the square of the physical parameter
    param_square_scale: Optional[float] = None

    @property
    def cls(self) -> str:
        return self.choice.cls

    def bindings(self) -> dict[float, float]:
        return {s.power: s.value for s in self.slots}

    def param(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def slot_named(self, name: str) -> SlotBinding:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(f"{self.name} has no coefficient {name!r}")

    def slot_at(self, power: float) -> Optional[SlotBinding]:
        for s in self.slots:
            if abs(s.power - power) <= 1e-9:
                return s
        return None

    def rebind(self, name: str, value: float) -> "ProblemDefinition":
        """A copy with the named coefficient replaced."""
        self.slot_named(name)
        slots = tuple(
            replace(s, value=value) if s.name == name else s for s in self.slots
        )
        params = tuple(
            (k, value if k == name else v) for k, v in self.params
        )
        return replace(self, slots=slots, params=params)

    def abc_functions(self) -> AbcFunctions:
        return compute_abc(self.cmap, self.weight)

    def potential(self) -> PotentialFamily:
        return derive_potential_family(self.abc_functions(), self.choice)

    def recursion(self) -> RecursionCoefficients:
        fns = self.abc_functions()
        co = abc_coefficients(fns, self.choice, self.bindings())
        offset = self.potential().energy_offset
        return recursion_coefficients(co, energy_offset=offset)


def _resolve(
    problem: str,
    given: Mapping[str, float],
    required: tuple[str, ...],
    optional: Mapping[str, float] = {},
) -> dict[str, float]:
    unknown = tuple(sorted(set(given) - set(required) - set(optional)))
    if unknown:
        raise UnexpectedParameterError(problem, unknown)
    out: dict[str, float] = {}
    for key in required:
        if key not in given:
            raise MissingParameterError(problem, key)
        out[key] = float(given[key])
    for key, default in optional.items():
        out[key] = float(given.get(key, default))
    for key, value in out.items():
        # nan defaults are sentinels the builders replace; only values the
        # caller actually supplied must be finite
        if key in given and not math.isfinite(value):
            raise ValueError(f"{problem}: parameter {key!r} must be finite")
    return out


def _positive(problem: str, par: Mapping[str, float], *names: str) -> None:
    for name in names:
        if par[name] <= 0.0:
            raise ValueError(f"{problem}: parameter {name!r} must be positive")


def _record(par: Mapping[str, float], **extra: float) -> tuple[tuple[str, float], ...]:
    merged = dict(par)
    merged.update(extra)
    return tuple(sorted(merged.items()))


def _bender_dunne(given: Mapping[str, float]) -> ProblemDefinition:
    """Sextic potential 16 a^2 x^6 + v1 x^-2 + v2 x^2, diagonal window.

    x^2 truncation: the v2 slot closes the ladder from above.
    """
    par = _resolve(
        "bender_dunne", given, ("alpha", "gamma"), {"v1": 0.0, "v2": 0.0}
    )
    _positive("bender_dunne", par, "alpha", "gamma")
    return ProblemDefinition(
        name="bender_dunne",
        cmap=identity_map(),
        weight=power_exponential_weight(par["gamma"], par["alpha"], 4.0),
        choice=structure(0.0, 2.0),
        slots=(
            SlotBinding(-2.0, "v1", par["v1"]),
            SlotBinding(2.0, "v2", par["v2"]),
        ),
        params=_record(par),
    )


def _sextic_partner(given: Mapping[str, float]) -> ProblemDefinition:
    """Same sextic family with the oscillator term fixed by xi.

    v2 = -4 alpha (2 gamma + 3) + 16 alpha xi, so xi > 0 keeps the
    reduced representation real; the x^-2 slot is left to the
    truncation constraint.
    """
    par = _resolve("sextic_partner", given, ("alpha", "gamma", "xi"), {"v1": 0.0})
    _positive("sextic_partner", par, "alpha", "gamma")
    alpha, gamma = par["alpha"], par["gamma"]
    v2 = -4.0 * alpha * (2.0 * gamma + 3.0) + 16.0 * alpha * par["xi"]
    return ProblemDefinition(
        name="sextic_partner",
        cmap=identity_map(),
        weight=power_exponential_weight(gamma, alpha, 4.0),
        choice=structure(0.0, 2.0),
        slots=(
            SlotBinding(-2.0, "v1", par["v1"]),
            SlotBinding(2.0, "v2", v2),
        ),
        params=_record(par, v2=v2),
    )


def _morse_rising_exp(given: Mapping[str, float]) -> ProblemDefinition:
    """Morse potential plus a rising exponential.

    v(x) = alpha^2 beta^2 e^(-2 beta x) + v1 e^(-beta x) - xi e^(beta x):
    the falling coefficient v1 is what a truncation solves for; xi > 0
    is needed for a real reduced representation.  Dropping xi leaves the
    plain Morse problem, which closes after two terms.
    """
    par = _resolve(
        "morse_rising_exp",
        given,
        ("alpha", "gamma"),
        {"beta": 1.0, "xi": 0.0, "v1": 0.0},
    )
    _positive("morse_rising_exp", par, "alpha", "gamma", "beta")
    beta = par["beta"]
    v2 = -par["xi"]
    return ProblemDefinition(
        name="morse_rising_exp",
        cmap=exponential_map(),
        weight=power_exponential_weight(par["gamma"], par["alpha"], beta),
        choice=structure(0.0, beta),
        slots=(
            SlotBinding(beta, "v1", par["v1"]),
            SlotBinding(-beta, "v2", v2),
        ),
        params=_record(par, v2=v2),
        two_term_reduction="Morse",
    )


def _oscillator_inverse_quartic(given: Mapping[str, float]) -> ProblemDefinition:
    """Radial oscillator with an inverse quartic core.

    v(x) = 4 alpha^2 x^2 + v1 x^-2 + v3 x^-4 with v3 = -2 alpha xi^2.
    gamma defaults to ell + 1 and v1 to ell (ell + 1), the pairing that
    keeps the solution normalizable at the origin.  The parameter
    spectrum quantizes xi through the coupling scale, hence the "even"
    mode; zeroing v3 collapses the ladder to the oscillator.
    """
    par = _resolve(
        "oscillator_inverse_quartic",
        given,
        ("alpha", "ell"),
        {"gamma": math.nan, "v1": math.nan, "xi": 0.0},
    )
    ell = par["ell"]
    if ell < 0.0:
        raise ValueError("oscillator_inverse_quartic: parameter 'ell' must be >= 0")
    if math.isnan(par["gamma"]):
        par["gamma"] = ell + 1.0
    if math.isnan(par["v1"]):
        par["v1"] = ell * (ell + 1.0)
    _positive("oscillator_inverse_quartic", par, "alpha", "gamma")
    v3 = -2.0 * par["alpha"] * par["xi"] ** 2
    return ProblemDefinition(
        name="oscillator_inverse_quartic",
        cmap=identity_map(),
        weight=power_exponential_weight(par["gamma"], par["alpha"], 2.0),
        choice=structure(-2.0, 2.0),
        slots=(
            SlotBinding(-2.0, "v1", par["v1"]),
            SlotBinding(-4.0, "v3", v3),
        ),
        params=_record(par, v3=v3),
        two_term_reduction="harmonic oscillator",
        param_mode="even",
        param_name="xi",
        param_square_scale=-2.0 * par["alpha"],
    )


def _coulomb_plus_oscillator(given: Mapping[str, float]) -> ProblemDefinition:
    """Radial oscillator with Coulomb and centrifugal terms.

    v(x) = 4 alpha^2 x^2 + ell (ell + 1) x^-2 + v3 / x.  The Coulomb
    strength v3 sits at the window center, so the parameter spectrum
    quantizes it directly; gamma stays independent of ell and controls
    reality of the reduction.
    """
    par = _resolve(
        "coulomb_plus_oscillator", given, ("alpha", "gamma", "ell"), {"v3": 0.0}
    )
    _positive("coulomb_plus_oscillator", par, "alpha", "gamma")
    ell = par["ell"]
    if ell < 0.0:
        raise ValueError("coulomb_plus_oscillator: parameter 'ell' must be >= 0")
    v1 = ell * (ell + 1.0)
    return ProblemDefinition(
        name="coulomb_plus_oscillator",
        cmap=identity_map(),
        weight=power_exponential_weight(par["gamma"], par["alpha"], 2.0),
        choice=structure(-1.0, 1.0),
        slots=(
            SlotBinding(-2.0, "v1", v1),
            SlotBinding(-1.0, "v3", par["v3"]),
        ),
        params=_record(par, v1=v1),
        param_mode="linear",
        param_name="v3",
    )


def _morse_half_power(given: Mapping[str, float]) -> ProblemDefinition:
    """Morse potential with an extra half power exponential.

    v(x) = alpha^2 e^(-2x) + v1 e^(-x) + v2 e^(-x/2).  The half step
    ladder puts v2 at the window center: the parameter spectrum
    quantizes it at the fixed energies this class allows.
    """
    par = _resolve(
        "morse_half_power", given, ("alpha", "gamma"), {"v1": 0.0, "v2": 0.0}
    )
    _positive("morse_half_power", par, "alpha", "gamma")
    return ProblemDefinition(
        name="morse_half_power",
        cmap=exponential_map(),
        weight=power_exponential_weight(par["gamma"], par["alpha"], 1.0),
        choice=structure(0.5, 0.5),
        slots=(
            SlotBinding(1.0, "v1", par["v1"]),
            SlotBinding(0.5, "v2", par["v2"]),
        ),
        params=_record(par),
        param_mode="linear",
        param_name="v2",
    )


def _hulthen_like_i1(given: Mapping[str, float]) -> ProblemDefinition:
    """Saturating exponential well with first and second order poles.

    In y = 1 - e^(-x) the free slots are y^-1 and y^-2; v1 at the
    window center is the quantized coefficient of the parameter
    spectrum, v2 is what the truncation constraint solves for.
    """
    par = _resolve(
        "hulthen_like_I1", given, ("alpha", "gamma"), {"v1": 0.0, "v2": 0.0}
    )
    _positive("hulthen_like_I1", par, "alpha", "gamma")
    return ProblemDefinition(
        name="hulthen_like_I1",
        cmap=saturating_exp_map(),
        weight=binomial_weight(par["gamma"], par["alpha"]),
        choice=structure(-1.0, 1.0),
        slots=(
            SlotBinding(-1.0, "v1", par["v1"]),
            SlotBinding(-2.0, "v2", par["v2"]),
        ),
        params=_record(par),
        param_mode="linear",
        param_name="v1",
    )


def _hyperbolic_ii1(given: Mapping[str, float]) -> ProblemDefinition:
    """Hyperbolic well v1 sech^2 x + v2 csch^2 x plus the forced pole.

    Diagonal window in y = sech x.  Zeroing v2 removes the csch^2 slot
    and the ladder closes after two terms.
    """
    par = _resolve(
        "hyperbolic_II1", given, ("alpha", "gamma"), {"v1": 0.0, "v2": 0.0}
    )
    _positive("hyperbolic_II1", par, "alpha", "gamma")
    return ProblemDefinition(
        name="hyperbolic_II1",
        cmap=sech_map(),
        weight=symmetric_binomial_weight(par["gamma"], par["alpha"]),
        choice=structure(0.0, 2.0),
        slots=(
            SlotBinding(2.0, "v1", par["v1"]),
            SlotBinding(-2.0, "v2", par["v2"]),
        ),
        params=_record(par),
        two_term_reduction="Poschl-Teller",
    )


def _sech_ii2(given: Mapping[str, float]) -> ProblemDefinition:
    """Hyperbolic well with both sech^2 and sech powers.

    v1 sech^2 x + v2 sech x over the unit step ladder; v2 sits at the
    window center and is what the parameter spectrum quantizes.
    """
    par = _resolve("sech_II2", given, ("alpha", "gamma"), {"v1": 0.0, "v2": 0.0})
    _positive("sech_II2", par, "alpha", "gamma")
    return ProblemDefinition(
        name="sech_II2",
        cmap=sech_map(),
        weight=symmetric_binomial_weight(par["gamma"], par["alpha"]),
        choice=structure(1.0, 1.0),
        slots=(
            SlotBinding(2.0, "v1", par["v1"]),
            SlotBinding(1.0, "v2", par["v2"]),
        ),
        params=_record(par),
        param_mode="linear",
        param_name="v2",
    )


def _sech4_ii3(given: Mapping[str, float]) -> ProblemDefinition:
    """Hyperbolic well with sech^2 and sech^4 powers.

    v1 sech^2 x + v2 sech^4 x over the double step ladder.  v1 at the
    window center is quantized by the parameter spectrum; zeroing v2
    collapses the ladder to two terms.
    """
    par = _resolve("sech4_II3", given, ("alpha", "gamma"), {"v1": 0.0, "v2": 0.0})
    _positive("sech4_II3", par, "alpha", "gamma")
    return ProblemDefinition(
        name="sech4_II3",
        cmap=sech_map(),
        weight=symmetric_binomial_weight(par["gamma"], par["alpha"]),
        choice=structure(2.0, 2.0),
        slots=(
            SlotBinding(2.0, "v1", par["v1"]),
            SlotBinding(4.0, "v2", par["v2"]),
        ),
        params=_record(par),
        two_term_reduction="Poschl-Teller",
        param_mode="linear",
        param_name="v1",
    )


_BUILDERS: dict[str, Callable[[Mapping[str, float]], ProblemDefinition]] = {
    "bender_dunne": _bender_dunne,
    "sextic_partner": _sextic_partner,
    "morse_rising_exp": _morse_rising_exp,
    "oscillator_inverse_quartic": _oscillator_inverse_quartic,
    "coulomb_plus_oscillator": _coulomb_plus_oscillator,
    "morse_half_power": _morse_half_power,
    "hulthen_like_I1": _hulthen_like_i1,
    "hyperbolic_II1": _hyperbolic_ii1,
    "sech_II2": _sech_ii2,
    "sech4_II3": _sech4_ii3,
}

PROBLEM_NAMES: tuple[str, ...] = tuple(_BUILDERS)


def build_problem(name: str, params: Mapping[str, float]) -> ProblemDefinition:
    """Construct a catalog problem from explicit physical parameters."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownProblemError(name) from None
    return builder(params)


def bender_dunne_point(J: int, s: float, alpha: float = 0.25) -> ProblemDefinition:
    """The sextic problem at the classic quantization point.

    gamma = 2s - 1/2, v1 = gamma(gamma - 1), and v2 already holds the
    value the x^2 truncation at N = J would solve for, so the ladder
    closes without applying a constraint.
    """
    gamma = 2.0 * s - 0.5
    return build_problem(
        "bender_dunne",
        {
            "alpha": alpha,
            "gamma": gamma,
            "v1": gamma * (gamma - 1.0),
            "v2": -8.0 * alpha * (2.0 * J + gamma - 0.5),
        },
    )
