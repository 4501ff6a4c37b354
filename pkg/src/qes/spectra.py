"""Finite spectra from the truncated representations.

Energy spectra of diagonal-window problems come from the symmetric
tridiagonal block by three independent routes: Sturm-count bisection on
the matrix, real zeros of the characteristic determinant, and zeros of
the terminal recursion polynomial.  Their mutual agreement is part of
the verification contract, so the routes share no machinery beyond the
block itself.

Off-diagonal windows quantize through the block determinant instead.
Every matrix entry is affine in the sweep variable (the energy, or the
coefficient a fixed-energy closure leaves free), so the determinant is
assembled as an exact polynomial and its real zeros are isolated by
recursive monotone bracketing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .basis import DIAGONAL
from .constraints import OFFMINUS_ENERGY, ConstrainedProblem, RealityBound
from .recursion import symmetrize_diagonal, symmetrize_offdiagonal

__all__ = [
    "EmptySpectrumError",
    "IncompleteSpectrumError",
    "ParameterSpectrum",
    "RealityViolationError",
    "ScaledDeterminant",
    "SpectrumReport",
    "SymTridiag",
    "charpoly",
    "eigenvalues",
    "eigenvector",
    "energy_spectrum",
    "parameter_spectrum",
    "roots_of_pn",
]

_PIVMIN = 1e-290


class RealityViolationError(RuntimeError):
    """Parameters outside the reality bound: no real reduced block."""

    def __init__(self, bound: Optional[RealityBound], detail: str):
        edges = []
        if bound is not None and bound.lower is not None:
            edges.append(f"{bound.quantity} > {bound.lower:g}")
        if bound is not None and bound.upper is not None:
            edges.append(f"{bound.quantity} < {bound.upper:g}")
        tail = " and ".join(edges) if edges else "no finite edge recorded"
        super().__init__(f"{detail} (reality bound: {tail})")
        self.bound = bound


class IncompleteSpectrumError(RuntimeError):
    """Fewer real polynomial zeros than the block size."""

    def __init__(self, needed: int, found: tuple[float, ...]):
        super().__init__(
            "found {} of {} real zeros; the missing roots form complex "
            "pairs (parameters outside the reality bound); found: {}".format(
                len(found), needed, list(found)
            )
        )
        self.needed = needed
        self.found = found


class EmptySpectrumError(RuntimeError):
    """The determinant has no admissible real zeros."""

    def __init__(self, diagnostic: str):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic


@dataclass(frozen=True)
class SymTridiag:
    """Real symmetric tridiagonal matrix, stored as two bands."""

    diag: tuple[float, ...]
    offdiag: tuple[float, ...]

    def __post_init__(self):
        if len(self.diag) < 1:
            raise ValueError("matrix must have at least one row")
        if len(self.offdiag) != len(self.diag) - 1:
            raise ValueError("off-diagonal band must have N-1 entries")
        for x in self.diag + self.offdiag:
            if not math.isfinite(x):
                raise ValueError("matrix entries must be finite")

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def inf_norm(self) -> float:
        worst = 0.0
        for i, a in enumerate(self.diag):
            row = abs(a)
            if i > 0:
                row += abs(self.offdiag[i - 1])
            if i < self.n - 1:
                row += abs(self.offdiag[i])
            worst = max(worst, row)
        return worst


@dataclass(frozen=True)
class ScaledDeterminant:
    """Determinant value factored as mantissa * exp(log_scale).

    The factoring keeps the recursion finite for large blocks; zeros and
    signs are those of the true determinant.
    """

    mantissa: float
    log_scale: float

    @property
    def sign(self) -> int:
        if self.mantissa > 0.0:
            return 1
        if self.mantissa < 0.0:
            return -1
        return 0

    @property
    def value(self) -> float:
        return self.mantissa * math.exp(self.log_scale)


@dataclass(frozen=True)
class SpectrumReport:
    """Energy spectrum with per-method values.

    For diagonal windows all three methods are populated and
    cross_residual is their largest pairwise deviation; eigenvalues
    repeats the matrix-method values.  For off-diagonal windows only the
    determinant route applies, so matrix_values and pn_values are None
    and eigenvalues holds the admissible determinant zeros.
    """

    eigenvalues: tuple[float, ...]
    matrix_values: Optional[tuple[float, ...]]
    charpoly_values: Optional[tuple[float, ...]]
    pn_values: Optional[tuple[float, ...]]
    cross_residual: float
    reality: Optional[RealityBound]


@dataclass(frozen=True)
class ParameterSpectrum:
    """Coefficient values that admit a solution at the fixed energy."""

    name: str
    values: tuple[float, ...]
    eps_fixed: float


def _count_below(
    diag: tuple[float, ...], off2: tuple[float, ...], x: float
) -> int:
    # LDL^T inertia count: negative pivots of m - xI.  A vanishing pivot
    # is pushed to -pivmin before counting, so an eigenvalue exactly at
    # x lands on the lower side and the count stays monotone.
    count = 0
    d = 1.0
    for i, a in enumerate(diag):
        if i == 0:
            d = a - x
        else:
            d = (a - x) - off2[i - 1] / d
        if abs(d) < _PIVMIN:
            d = -_PIVMIN
        if d < 0.0:
            count += 1
    return count


def _charpoly_pair(m: SymTridiag, x: float) -> tuple[float, float]:
    # determinant and its x-derivative under one common rescaling, so
    # the Newton ratio survives the scaling
    dm2, dm1 = 1.0, m.diag[0] - x
    pm2, pm1 = 0.0, -1.0
    for k in range(1, m.n):
        b2 = m.offdiag[k - 1] * m.offdiag[k - 1]
        t = m.diag[k] - x
        d = t * dm1 - b2 * dm2
        p = -dm1 + t * pm1 - b2 * pm2
        dm2, dm1, pm2, pm1 = dm1, d, pm1, p
        if k % 8 == 0:
            top = max(abs(dm1), abs(dm2), abs(pm1), abs(pm2))
            if top > 1e120:
                inv = 1.0 / top
                dm1 *= inv
                dm2 *= inv
                pm1 *= inv
                pm2 *= inv
    return dm1, pm1


def charpoly(m: SymTridiag, x: float) -> ScaledDeterminant:
    """det(m - xI) by the three-term determinant recursion.

    Rescaled by the running magnitude every 8 steps; the reported
    log_scale restores the true value, and zeros are unaffected.
    """
    dm2, dm1 = 1.0, m.diag[0] - x
    log_scale = 0.0
    for k in range(1, m.n):
        b2 = m.offdiag[k - 1] * m.offdiag[k - 1]
        dm2, dm1 = dm1, (m.diag[k] - x) * dm1 - b2 * dm2
        if k % 8 == 0:
            top = max(abs(dm1), abs(dm2))
            if top > 0.0 and math.isfinite(top):
                dm1 /= top
                dm2 /= top
                log_scale += math.log(top)
    return ScaledDeterminant(dm1, log_scale)


def eigenvalues(m: SymTridiag, tol: float = 1e-12) -> tuple[float, ...]:
    """All eigenvalues, ascending, degenerate values repeated.

    Sturm-count bisection inside the Gershgorin interval, then a short
    Newton polish on the characteristic determinant.  Accuracy is
    tol * max(1, norm of m), absolute.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    n = m.n
    off2 = tuple(b * b for b in m.offdiag)
    lo = min(
        m.diag[i]
        - (abs(m.offdiag[i - 1]) if i > 0 else 0.0)
        - (abs(m.offdiag[i]) if i < n - 1 else 0.0)
        for i in range(n)
    )
    hi = max(
        m.diag[i]
        + (abs(m.offdiag[i - 1]) if i > 0 else 0.0)
        + (abs(m.offdiag[i]) if i < n - 1 else 0.0)
        for i in range(n)
    )
    pad = tol * max(1.0, abs(lo), abs(hi)) + 1e-300
    lo, hi = lo - pad, hi + pad
    tol_eff = tol * max(1.0, m.inf_norm)
    out = []
    for k in range(n):
        a, b = lo, hi
        for _ in range(90):
            if b - a <= tol_eff:
                break
            mid = 0.5 * (a + b)
            if _count_below(m.diag, off2, mid) >= k + 1:
                b = mid
            else:
                a = mid
        x = 0.5 * (a + b)
        for _ in range(4):
            f, fp = _charpoly_pair(m, x)
            if fp == 0.0 or not math.isfinite(f) or not math.isfinite(fp):
                break
            step = f / fp
            if not math.isfinite(step) or abs(step) > 4.0 * tol_eff:
                break
            y = x - step
            if y < a or y > b:
                break
            x = y
            if abs(step) <= 1e-3 * tol_eff:
                break
        out.append(x)
    return tuple(out)


def eigenvector(m: SymTridiag, value: float) -> tuple[float, ...]:
    """Unit eigenvector for one eigenvalue, first component positive.

    Forward three-term recurrence; adequate for the small blocks used
    here.  Decoupled matrices (a zero off-diagonal entry) have
    per-block eigenvectors and are refused.
    """
    if any(b == 0.0 for b in m.offdiag):
        raise ValueError(
            "zero off-diagonal entry: the block decouples and eigenvectors "
            "are not determined by the forward recurrence"
        )
    v = [1.0]
    for k in range(m.n - 1):
        below = v[k - 1] if k >= 1 else 0.0
        bprev = m.offdiag[k - 1] if k >= 1 else 0.0
        v.append(((value - m.diag[k]) * v[k] - bprev * below) / m.offdiag[k])
        top = abs(v[-1])
        if top > 1e120:
            v = [c / top for c in v]
    norm = math.sqrt(sum(c * c for c in v))
    return tuple(c / norm for c in v)


# --- polynomial helpers for the determinant routes ----------------------

def _poly_mul(p: list[float], q: list[float]) -> list[float]:
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0.0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_sub(p: list[float], q: list[float]) -> list[float]:
    out = list(p) + [0.0] * max(0, len(q) - len(p))
    for j, b in enumerate(q):
        out[j] -= b
    return out


def _poly_eval(coeffs: list[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _det_poly(
    diags: list[list[float]], squares: list[list[float]]
) -> list[float]:
    # Delta_k = diag_k * Delta_{k-1} - square_{k-1} * Delta_{k-2}, each
    # entry a small polynomial in the sweep variable
    prev = [1.0]
    cur = list(diags[0])
    for k in range(1, len(diags)):
        nxt = _poly_sub(_poly_mul(diags[k], cur), _poly_mul(squares[k - 1], prev))
        prev, cur = cur, nxt
    return cur


def _bisect_poly(
    coeffs: list[float], a: float, fa: float, b: float, fb: float, tol: float
) -> float:
    for _ in range(120):
        mid = 0.5 * (a + b)
        fm = _poly_eval(coeffs, mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        if b - a <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (a + b)


def _monotone_roots(coeffs: list[float], tol: float) -> list[float]:
    # recursive isolation: between consecutive zeros of the derivative
    # the polynomial is monotone, so each sign change brackets exactly
    # one zero and none can hide between grid points
    degree = len(coeffs) - 1
    if degree <= 0:
        return []
    if degree == 1:
        return [-coeffs[0] / coeffs[1]]
    deriv = [k * coeffs[k] for k in range(1, len(coeffs))]
    crit = _monotone_roots(deriv, tol)
    lead = coeffs[-1]
    bound = 1.0 + max(abs(c / lead) for c in coeffs[:-1])
    points = [-bound] + [c for c in sorted(crit) if -bound < c < bound] + [bound]
    vals = [_poly_eval(coeffs, x) for x in points]
    roots = []
    for i in range(len(points) - 1):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            # a critical point that is itself a zero: a multiple root,
            # reported once
            if not roots or points[i] > roots[-1]:
                roots.append(points[i])
            continue
        if fa * fb < 0.0:
            roots.append(
                _bisect_poly(coeffs, points[i], fa, points[i + 1], fb, tol)
            )
    return roots


def _lead_is_noise(work: list[float]) -> bool:
    # A leading coefficient is round-off debris when it stays negligible
    # even at the scale of the largest root of the rest of the
    # polynomial.  Comparing raw coefficients instead would amputate a
    # genuine unit lead whenever the low coefficients are large, which
    # is the normal situation for a characteristic polynomial.
    deg = len(work) - 1
    lead = abs(work[-1])
    if lead == 0.0:
        return True
    if all(c == 0.0 for c in work[:-1]):
        return False
    log_s = 0.0
    for k, c in enumerate(work[:-1]):
        if c != 0.0:
            log_s = max(log_s, math.log(abs(c) / lead) / (deg - k))
    log_lead = math.log(lead) + deg * log_s
    log_rest = max(
        math.log(abs(c)) + k * log_s
        for k, c in enumerate(work[:-1])
        if c != 0.0
    )
    return log_lead <= log_rest + math.log(1e-12)


def _real_roots(
    coeffs: list[float], tol: float, floor: float = 0.0
) -> tuple[tuple[float, ...], int]:
    """Real zeros of a polynomial plus the multiplicity of the zero at 0.

    Coefficients ascending.  Leading coefficients that are round-off
    noise are stripped; trailing ones below 1e-12 of the largest
    coefficient are deflated as roots at the origin.  Even-order zeros
    away from the origin never change sign and are not resolved; the
    determinants built here have only simple nonzero roots.  Raises
    ValueError when the whole polynomial sits below 1e-12 of `floor`
    (the caller's structural magnitude) or every coefficient dies in
    stripping.
    """
    top = max(abs(c) for c in coeffs)
    if top <= 1e-12 * floor:
        raise ValueError("polynomial is identically zero")
    work = [c / top for c in coeffs]
    while len(work) > 1 and (abs(work[-1]) <= 1e-300 or _lead_is_noise(work)):
        work.pop()
    zero_mult = 0
    while work and abs(work[0]) <= 1e-12:
        work.pop(0)
        zero_mult += 1
    if not work:
        raise ValueError("polynomial is identically zero")
    if len(work) == 1:
        return (), zero_mult
    roots = _monotone_roots(work, tol)
    return tuple(sorted(roots)), zero_mult


def _affine_squares(rc, N: int) -> tuple[list[float], list[float]]:
    # coupling squares are affine in the energy; two probes pin the line
    s0 = symmetrize_offdiagonal(rc, 0.0, N).squares
    s1 = symmetrize_offdiagonal(rc, 1.0, N).squares
    return list(s0), [b - a for a, b in zip(s0, s1)]


def _det_floor(
    base: list[float], u: list[float], w: list[float]
) -> float:
    # natural magnitude of the block determinant, used to tell a
    # structurally vanishing polynomial from one with honest small
    # coefficients
    floor = 1.0
    for n, d in enumerate(base):
        entry = max(1.0, abs(d))
        if n < len(u):
            entry = max(entry, abs(u[n]) + abs(w[n]))
        floor *= entry
    return floor


# --- the three routes for diagonal windows ------------------------------

def roots_of_pn(cp: ConstrainedProblem, tol: float = 1e-12) -> tuple[float, ...]:
    """The N real zeros of the terminal recursion polynomial.

    Clearing the three-term recurrence of its divisions turns p_k into
    det(e I - M_k) times a constant, where M_k is the leading block of
    the unsymmetrized matrix with coupling products d_j^+ d_{j+1}^-.
    The sign of that determinant is what bracketing needs, and it is
    evaluated through the elimination pivot cascade
    q_j = (e - a_j) - b2_{j-1} / q_{j-1}: a pivot crossing zero is
    pushed to -pivmin, which keeps the sign of the pair
    q_j * q_{j+1} -> -b2_j exact, so the evaluation never loses a sign
    to cancellation the way the raw determinant recurrence does.

    Brackets come from the interlacing ladder: the zeros of each level
    sit strictly between consecutive zeros of the previous one, plus one
    on each side.  At high levels a zero can approach its anchor closer
    than double precision resolves; when every coupling product is
    positive the spectrum is provably real, so such a shortfall is
    repaired by promoting the anchors farthest from the zeros already
    found.  Without positivity a missing bracket means a complex pair
    and raises with the zeros found so far.
    """
    rc = cp.recursion()
    if rc.cls != DIAGONAL:
        raise ValueError("terminal-polynomial zeros apply to the diagonal class")
    N = cp.N
    roots = [rc.a(0)]
    for k in range(2, N + 1):
        diag = [rc.a(n) for n in range(k)]
        prods = [rc.dplus(j - 1) * rc.dminus(j) for j in range(1, k)]
        pscale = max(
            1.0,
            max(abs(a) for a in diag),
            max(abs(q) for q in prods),
        )
        if abs(prods[-1]) <= 1e-13 * pscale:
            # terminal coupling vanished, level factors exactly
            roots = sorted(roots + [diag[-1]])
            continue
        positive = all(q > 0.0 for q in prods)

        def sgn(e: float) -> float:
            s = 1.0
            q = e - diag[0]
            for j in range(1, k):
                if abs(q) < _PIVMIN:
                    q = -_PIVMIN
                if q < 0.0:
                    s = -s
                q = (e - diag[j]) - prods[j - 1] / q
            if q < 0.0:
                return -s
            if q > 0.0:
                return s
            return 0.0

        # real zeros of this level are eigenvalues of the leading k-block
        # of the unsymmetrized matrix, so the row-sum norm bounds them;
        # expanding past it means the outer root is not real
        reach = 1.0 + max(
            abs(rc.a(n)) + abs(rc.dminus(n)) + abs(rc.dplus(n))
            for n in range(k)
        )
        tol_eff = tol * max(1.0, max(abs(r) for r in roots))
        span = max(1.0, roots[-1] - roots[0])
        found: list[float] = []
        anchors = [sgn(r) for r in roots]
        for r, s in zip(roots, anchors):
            if s == 0.0:
                found.append(r)

        def bisect(a: float, fa: float, b: float, fb: float) -> float:
            for _ in range(100):
                mid = 0.5 * (a + b)
                fm = sgn(mid)
                if fm == 0.0:
                    return mid
                if fa * fm < 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
                if b - a <= tol_eff:
                    break
            return 0.5 * (a + b)

        lo, step = roots[0] - span, span
        f_lo = sgn(lo)
        while f_lo * anchors[0] > 0.0 and lo > -reach:
            step *= 2.0
            lo -= step
            f_lo = sgn(lo)
        # a probe can land on a zero exactly (rational coefficients do
        # this); sign 0 is the converged root, not a failed bracket
        if f_lo == 0.0:
            found.append(lo)
        elif f_lo * anchors[0] < 0.0:
            found.append(bisect(lo, f_lo, roots[0], anchors[0]))
        for i in range(len(roots) - 1):
            fa, fb = anchors[i], anchors[i + 1]
            if fa * fb < 0.0:
                found.append(bisect(roots[i], fa, roots[i + 1], fb))
        hi, step = roots[-1] + span, span
        f_hi = sgn(hi)
        while f_hi * anchors[-1] > 0.0 and hi < reach:
            step *= 2.0
            hi += step
            f_hi = sgn(hi)
        if f_hi == 0.0:
            found.append(hi)
        elif f_hi * anchors[-1] < 0.0:
            found.append(bisect(roots[-1], anchors[-1], hi, f_hi))
        if len(found) < k and positive:
            # glued zeros: indistinguishable from their anchors in double
            # precision, so the anchor value is the converged answer
            missing = k - len(found)
            ranked = sorted(
                roots,
                key=lambda r: min((abs(r - f) for f in found), default=math.inf),
                reverse=True,
            )
            found.extend(ranked[:missing])
        if len(found) < k:
            raise IncompleteSpectrumError(k, tuple(sorted(found)))
        roots = sorted(found)
    return tuple(roots)


def _charpoly_roots(m: SymTridiag, tol: float) -> tuple[float, ...]:
    diags = [[a, -1.0] for a in m.diag]
    squares = [[b * b] for b in m.offdiag]
    coeffs = _det_poly(diags, squares)
    roots, zero_mult = _real_roots(coeffs, tol)
    return tuple(sorted(roots + (0.0,) * zero_mult))


# --- spectra ------------------------------------------------------------

def energy_spectrum(cp: ConstrainedProblem, tol: float = 1e-12) -> SpectrumReport:
    """Energies of the truncated block.

    Diagonal windows run the matrix, determinant, and terminal
    polynomial routes and report their largest disagreement.
    Off-diagonal windows solve det = 0 in the energy over the range the
    reality bound admits.
    """
    if cp.constraint.fixes_energy:
        raise ValueError(
            "energy-fixing constraints quantize a coefficient; "
            "use parameter_spectrum"
        )
    rc = cp.recursion()
    N = cp.N
    if rc.cls == DIAGONAL:
        band = symmetrize_diagonal(rc, N)
        if not band.all_real:
            raise RealityViolationError(
                cp.reality,
                "coupling squares below the truncation are negative",
            )
        m = SymTridiag(tuple(rc.a(n) for n in range(N)), band.values)
        matrix_values = eigenvalues(m, tol)
        charpoly_values = _charpoly_roots(m, tol)
        pn_values = roots_of_pn(cp, tol)
        cross = 0.0
        if len(charpoly_values) == N and len(pn_values) == N:
            for trio in zip(matrix_values, charpoly_values, pn_values):
                cross = max(cross, max(trio) - min(trio))
        else:
            cross = math.inf
        return SpectrumReport(
            eigenvalues=matrix_values,
            matrix_values=matrix_values,
            charpoly_values=charpoly_values,
            pn_values=pn_values,
            cross_residual=cross,
            reality=cp.reality,
        )
    base = [rc.atilde(n) - rc.c0v for n in range(N)]
    u, w = _affine_squares(rc, N)
    coeffs = _det_poly([[d] for d in base], [[a, b] for a, b in zip(u, w)])
    floor = _det_floor(base, u, w)
    try:
        roots, zero_mult = _real_roots(coeffs, tol, floor)
    except ValueError:
        raise EmptySpectrumError(
            "block determinant vanishes identically in the energy; the "
            "window-center coefficient decouples the block"
        ) from None
    candidates = sorted(roots + (0.0,) * zero_mult)
    bound = cp.reality
    admissible = tuple(
        r for r in candidates if bound is None or bound.admits(r)
    )
    if not admissible:
        raise EmptySpectrumError(
            "no admissible energy root: determinant zeros {} all fall "
            "outside the reality bound".format(list(candidates))
        )
    return SpectrumReport(
        eigenvalues=admissible,
        matrix_values=None,
        charpoly_values=admissible,
        pn_values=None,
        cross_residual=0.0,
        reality=bound,
    )


def parameter_spectrum(
    cp: ConstrainedProblem, tol: float = 1e-12
) -> ParameterSpectrum:
    """Coefficient values compatible with the fixed closing energy.

    Linear shape: the coefficient sits at the window center, so the
    determinant zeros are the negated eigenvalues of the fixed block.
    Even shape: the coefficient scales every coupling square linearly
    through the square of the physical parameter, so the determinant is
    expanded in that coefficient and each positive ratio maps to a pair
    of parameter values; the zero root keeps its doubled multiplicity.
    """
    if not cp.constraint.fixes_energy:
        raise ValueError(
            "parameter spectra need an energy-fixing constraint; "
            "use energy_spectrum"
        )
    prob = cp.problem
    if prob.param_mode is None:
        raise ValueError(f"{prob.name} declares no parameter spectrum")
    rc = prob.recursion()
    N = cp.N
    eps = cp.eps_fixed
    if prob.param_mode == "linear":
        band = symmetrize_offdiagonal(rc, eps, N)
        if not band.all_real:
            raise RealityViolationError(
                cp.reality,
                "coupling squares at the fixed energy are negative",
            )
        slot = prob.slot_named(prob.param_name)
        center = rc.c0v + slot.value
        m = SymTridiag(
            tuple(rc.atilde(n) - center for n in range(N)), band.values
        )
        # the + 0.0 turns a negated zero eigenvalue back into plain 0.0
        values = tuple(sorted(-e + 0.0 for e in eigenvalues(m, tol)))
        return ParameterSpectrum(prob.param_name, values, eps)
    # even shape: probe the swept slot twice to pin the affine squares
    sigma, mu = prob.choice.sigma, prob.choice.mu
    power = sigma - mu if cp.constraint.kind == OFFMINUS_ENERGY else sigma + mu
    slot = prob.slot_at(power)
    if slot is None or prob.param_square_scale is None:
        raise ValueError(
            f"{prob.name}: even-mode spectrum needs the swept slot and its "
            "square scale"
        )
    s0 = symmetrize_offdiagonal(
        prob.rebind(slot.name, 0.0).recursion(), eps, N
    ).squares
    s1 = symmetrize_offdiagonal(
        prob.rebind(slot.name, 1.0).recursion(), eps, N
    ).squares
    base = [rc.atilde(n) - rc.c0v for n in range(N)]
    u = list(s0)
    w = [b - a for a, b in zip(s0, s1)]
    coeffs = _det_poly([[d] for d in base], [[a, b] for a, b in zip(u, w)])
    try:
        roots, zero_mult = _real_roots(coeffs, tol, _det_floor(base, u, w))
    except ValueError:
        raise EmptySpectrumError(
            "block determinant vanishes identically in the swept coefficient"
        ) from None
    values = [0.0] * (2 * zero_mult)
    rejected = []
    for s in roots:
        ratio = s / prob.param_square_scale
        if ratio < 0.0:
            rejected.append(s)
            continue
        r = math.sqrt(ratio)
        values.extend((-r, r))
    if not values:
        raise EmptySpectrumError(
            "determinant zeros {} of the {} slot all map to imaginary "
            "parameter values".format(rejected, slot.name)
        )
    return ParameterSpectrum(prob.param_name, tuple(sorted(values)), eps)
