"""Ladder truncation: close the three-term recursion at a finite size.

Each class offers two closures.  Solving one potential coefficient
makes a ladder coefficient vanish at the truncation index, after which
the energies come from a finite tridiagonal block.  Alternatively, for
the off-diagonal classes, fixing the energy at the single value that
kills the shifted coupling closes the ladder at that one energy, and
the coefficient at the window center inherits the spectrum instead.

The solve is done numerically from two evaluations of the targeted
ladder coefficient, which is linear in any single potential
coefficient; nothing here is problem specific.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

from .basis import DIAGONAL, OFFMINUS, OFFPLUS
from .catalog import ProblemDefinition
from .recursion import (
    OffdiagBand,
    RecursionCoefficients,
    symmetrize_diagonal,
    symmetrize_offdiagonal,
)

__all__ = [
    "DIAG_A",
    "DIAG_B",
    "OFFMINUS_ENERGY",
    "OFFMINUS_PARAM",
    "OFFPLUS_ENERGY",
    "OFFPLUS_PARAM",
    "DEFAULT_MAX_SIZE",
    "KINDS_BY_CLASS",
    "ConstrainedProblem",
    "ConstraintChoice",
    "ConstraintKindError",
    "ConstraintTargetError",
    "RealityBound",
    "ReductionReport",
    "TruncationBugError",
    "apply_constraint",
    "reality_bound",
    "verify_reduction",
]

DIAG_A = "Diag-A"
DIAG_B = "Diag-B"
OFFMINUS_PARAM = "OffMinus-Param"
OFFMINUS_ENERGY = "OffMinus-Energy"
OFFPLUS_PARAM = "OffPlus-Param"
OFFPLUS_ENERGY = "OffPlus-Energy"

_KINDS = (
    DIAG_A,
    DIAG_B,
    OFFMINUS_PARAM,
    OFFMINUS_ENERGY,
    OFFPLUS_PARAM,
    OFFPLUS_ENERGY,
)

KINDS_BY_CLASS = {
    DIAGONAL: (DIAG_A, DIAG_B),
    OFFMINUS: (OFFMINUS_PARAM, OFFMINUS_ENERGY),
    OFFPLUS: (OFFPLUS_PARAM, OFFPLUS_ENERGY),
}

DEFAULT_MAX_SIZE = 64


class ConstraintKindError(ValueError):
    """Kind does not exist or does not act on the problem's class."""


class ConstraintTargetError(ValueError):
    """The targeted ladder coefficient has no adjustable coefficient."""


class TruncationBugError(RuntimeError):
    """The truncation coupling failed to vanish; the solve went wrong."""


@dataclass(frozen=True)
class ConstraintChoice:
    """Which closure to impose and at what size."""

    kind: str
    N: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConstraintKindError(
                "unknown constraint kind {!r} (known: {})".format(
                    self.kind, ", ".join(_KINDS)
                )
            )
        if not isinstance(self.N, int) or isinstance(self.N, bool) or self.N < 1:
            raise ValueError("truncation size N must be a positive integer")

    @property
    def fixes_energy(self) -> bool:
        return self.kind in (OFFMINUS_ENERGY, OFFPLUS_ENERGY)


@dataclass(frozen=True)
class RealityBound:
    """Positivity window of the reduced couplings, linear in one knob.

    quantity is a coefficient name or "energy".  lower/upper are the
    half-line endpoints, None when that side is unconstrained, and the
    matching index records which coupling square turns first at that
    edge.  Indices with a negative square that the knob cannot move are
    collected in infeasible.
    """

    quantity: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    lower_index: Optional[int] = None
    upper_index: Optional[int] = None
    infeasible: tuple[int, ...] = ()

    @property
    def direction(self) -> str:
        if self.lower is not None and self.upper is not None:
            return "between"
        if self.lower is not None:
            return ">"
        if self.upper is not None:
            return "<"
        return "free"

    def admits(self, value: float) -> bool:
        if self.infeasible:
            return False
        if self.lower is not None and value <= self.lower:
            return False
        if self.upper is not None and value >= self.upper:
            return False
        return True


@dataclass(frozen=True)
class ConstrainedProblem:
    """A problem with one closure imposed.

    problem carries the substituted coefficient for the solving kinds
    and equals base for the energy-fixing ones; exactly one of
    solved_value / eps_fixed is set.  reduces_to names, informationally,
    the exactly solvable model reached when the constraint zeroes a
    ladder coefficient for every n rather than just at the truncation.
    """

    base: ProblemDefinition
    constraint: ConstraintChoice
    problem: ProblemDefinition
    solved_name: Optional[str] = None
    solved_value: Optional[float] = None
    eps_fixed: Optional[float] = None
    reality: Optional[RealityBound] = None
    reduces_to: Optional[str] = None

    @property
    def N(self) -> int:
        return self.constraint.N

    def recursion(self) -> RecursionCoefficients:
        return self.problem.recursion()


@dataclass(frozen=True)
class ReductionReport:
    """Couplings through and past a truncation."""

    band: OffdiagBand
    truncation_index: int
    complex_below: tuple[int, ...]
    complex_tail: tuple[int, ...]

    @property
    def clean(self) -> bool:
        return not self.complex_below


# kinds whose closing condition reads the d^- band; the others read d^+
_READS_DMINUS = (DIAG_A, OFFPLUS_PARAM, OFFMINUS_ENERGY)


def _target_value(rc: RecursionCoefficients, kind: str, N: int) -> float:
    if kind in _READS_DMINUS:
        return rc.dminus(N)
    return rc.dplus(N - 1)


def _solved_slot_power(problem: ProblemDefinition, kind: str) -> float:
    # d^- is fed by the sigma+mu window slot, d^+ by the sigma-mu one
    sigma, mu = problem.choice.sigma, problem.choice.mu
    if kind in _READS_DMINUS:
        return sigma + mu
    return sigma - mu


def _free_side_power(problem: ProblemDefinition, kind: str) -> float:
    # the window edge the constraint leaves alone; reality sweeps it
    sigma, mu = problem.choice.sigma, problem.choice.mu
    if kind in _READS_DMINUS:
        return sigma - mu
    return sigma + mu


def _reduction_status(
    rc: RecursionCoefficients, kind: str, N: int, problem: ProblemDefinition
) -> Optional[str]:
    # flatness of the solved band (solving kinds) or of the band that
    # multiplies every coupling square (energy kinds) collapses the
    # ladder to two terms for all n, not just at the truncation
    if kind in (DIAG_A, OFFPLUS_PARAM, OFFPLUS_ENERGY):
        values = [rc.dminus(n) for n in range(1, N + 3)]
    else:
        values = [rc.dplus(n) for n in range(N + 3)]
    if all(abs(v) <= 1e-12 for v in values):
        return problem.two_term_reduction or "an exactly solvable two-term ladder"
    return None


def apply_constraint(
    problem: ProblemDefinition,
    choice: ConstraintChoice,
    max_size: int = DEFAULT_MAX_SIZE,
) -> ConstrainedProblem:
    """Impose one closure on a catalog problem.

    Parameter-solving kinds rewrite the coefficient feeding the targeted
    ladder term; energy-fixing kinds record the closing energy instead.
    The returned problem carries the reality bound of the reduced
    couplings.  A reduces_to note means the solve zeroed a ladder term
    identically, leaving a known exactly solvable model; that is
    reported, not treated as an error.
    """
    if choice.N > max_size:
        raise ValueError(
            f"truncation size {choice.N} exceeds the cap {max_size}; "
            "pass max_size to raise it"
        )
    allowed = KINDS_BY_CLASS[problem.cls]
    if choice.kind not in allowed:
        raise ConstraintKindError(
            "{} does not apply to the {} class of {} (allowed: {})".format(
                choice.kind, problem.cls, problem.name, ", ".join(allowed)
            )
        )
    N = choice.N
    if choice.fixes_energy:
        rc = problem.recursion()
        if choice.kind == OFFMINUS_ENERGY:
            eps = -rc.dminus(N)
        else:
            eps = -rc.dplus(N - 1)
        cp = ConstrainedProblem(
            base=problem,
            constraint=choice,
            problem=problem,
            eps_fixed=eps,
            reduces_to=_reduction_status(rc, choice.kind, N, problem),
        )
        return replace(cp, reality=reality_bound(cp))

    power = _solved_slot_power(problem, choice.kind)
    slot = problem.slot_at(power)
    if slot is None:
        raise ConstraintTargetError(
            f"{problem.name} has no coefficient at window power {power:g} "
            f"for {choice.kind} to solve"
        )
    d0 = _target_value(problem.rebind(slot.name, 0.0).recursion(), choice.kind, N)
    d1 = _target_value(problem.rebind(slot.name, 1.0).recursion(), choice.kind, N)
    slope = d1 - d0
    if abs(slope) <= 1e-12 * max(1.0, abs(d0)):
        raise ConstraintTargetError(
            f"{choice.kind} target does not respond to coefficient "
            f"{slot.name!r} of {problem.name}"
        )
    solved = -d0 / slope
    solved_problem = problem.rebind(slot.name, solved)
    rc = solved_problem.recursion()
    residual = _target_value(rc, choice.kind, N)
    if abs(residual) > 1e-9 * max(1.0, abs(d0)):
        raise TruncationBugError(
            f"target is still {residual:g} after solving {slot.name}; "
            "the dependence is not linear"
        )
    cp = ConstrainedProblem(
        base=problem,
        constraint=choice,
        problem=solved_problem,
        solved_name=slot.name,
        solved_value=solved,
        reduces_to=_reduction_status(rc, choice.kind, N, problem),
    )
    return replace(cp, reality=reality_bound(cp))


def reality_bound(cp: ConstrainedProblem) -> Optional[RealityBound]:
    """Positivity window for the couplings below the truncation.

    The coupling squares b_n^2 (or c_n^2 at the fixed energy) are linear
    in exactly one remaining knob: the coefficient on the untouched
    window edge for the solving kinds, the energy itself for the
    spectrum-producing off-diagonal kinds.  Each index n <= N-2
    contributes a half line; the reported bound is their intersection,
    found by sweeping the index range, with the index that turns first
    recorded per side.  None means there is nothing to sweep or no
    constraint at all.
    """
    choice = cp.constraint
    N = choice.N
    if N < 2:
        return None
    prob = cp.problem
    kind = choice.kind

    squares: Callable[[float], tuple[float, ...]]
    if kind in (DIAG_A, DIAG_B):
        slot = prob.slot_at(_free_side_power(prob, kind))
        if slot is None:
            return None
        quantity = slot.name

        def squares(t: float) -> tuple[float, ...]:
            return symmetrize_diagonal(prob.rebind(slot.name, t).recursion(), N).squares

    elif kind in (OFFMINUS_PARAM, OFFPLUS_PARAM):
        rc = prob.recursion()
        quantity = "energy"

        def squares(t: float) -> tuple[float, ...]:
            return symmetrize_offdiagonal(rc, t, N).squares

    else:
        slot = prob.slot_at(_free_side_power(prob, kind))
        if slot is None:
            return None
        quantity = slot.name
        eps = cp.eps_fixed

        def squares(t: float) -> tuple[float, ...]:
            return symmetrize_offdiagonal(
                prob.rebind(slot.name, t).recursion(), eps, N
            ).squares

    s0 = squares(0.0)
    s1 = squares(1.0)
    lower = upper = None
    lower_index = upper_index = None
    infeasible = []
    for n in range(N - 1):
        a = s0[n]
        b = s1[n] - a
        scale = max(1.0, abs(a), abs(b))
        if abs(b) <= 1e-12 * scale:
            if a < -1e-12 * scale:
                infeasible.append(n)
            continue
        edge = -a / b
        if b > 0.0:
            if lower is None or edge > lower:
                lower, lower_index = edge, n
        else:
            if upper is None or edge < upper:
                upper, upper_index = edge, n
    if lower is None and upper is None and not infeasible:
        return None
    return RealityBound(
        quantity=quantity,
        lower=lower,
        upper=upper,
        lower_index=lower_index,
        upper_index=upper_index,
        infeasible=tuple(infeasible),
    )


def verify_reduction(cp: ConstrainedProblem, nprobe: int) -> ReductionReport:
    """Probe the couplings through and past the truncation.

    The coupling square at the truncation index must vanish exactly; a
    nonzero value there means the constraint layer failed and raises.
    Below it, negative squares are collected in complex_below (empty
    whenever the parameters sit inside the reality bound).  Past the
    truncation the squares may go negative; those indices land in
    complex_tail and are the discarded complex part of the ladder.
    """
    N = cp.N
    if nprobe <= N:
        raise ValueError("nprobe must exceed the truncation size")
    rc = cp.recursion()
    if rc.cls == DIAGONAL:
        bands = (symmetrize_diagonal(rc, nprobe),)
    elif cp.constraint.fixes_energy:
        bands = (symmetrize_offdiagonal(rc, cp.eps_fixed, nprobe),)
    else:
        # the truncation zero is an energy-independent factor; probing
        # two energies confirms that rather than a lucky cancellation
        bands = tuple(symmetrize_offdiagonal(rc, e, nprobe) for e in (0.0, 1.0))
    for band in bands:
        scale = max(1.0, max(abs(s) for s in band.squares))
        if abs(band.squares[N - 1]) > 1e-12 * scale:
            raise TruncationBugError(
                "coupling square at the truncation index {} is {:.6e}, not "
                "zero; constraint application is inconsistent".format(
                    N - 1, band.squares[N - 1]
                )
            )
    # the coupling out of the block is zero by construction; recomputing
    # it through the evaluation pipeline can leave rounding dust, so the
    # report states the structural value
    band = bands[0]
    if band.squares[N - 1] != 0.0:
        squares = list(band.squares)
        values = list(band.values)
        flags = list(band.complex_flags)
        squares[N - 1] = 0.0
        values[N - 1] = 0.0
        flags[N - 1] = False
        band = OffdiagBand(
            values=tuple(values),
            squares=tuple(squares),
            complex_flags=tuple(flags),
        )
    complex_below = tuple(n for n in range(N - 1) if band.complex_flags[n])
    complex_tail = tuple(
        n for n in range(N, nprobe - 1) if band.complex_flags[n]
    )
    return ReductionReport(
        band=band,
        truncation_index=N - 1,
        complex_below=complex_below,
        complex_tail=complex_tail,
    )
