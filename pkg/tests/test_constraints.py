"""Closure solves and reality bounds, pinned by hand-derived values.

Every solved coefficient, closing energy, and threshold asserted here
was worked out from the ladder tables before the constraint module
existed.  The tests freeze those closed forms, then exercise the
generic machinery on top: linearity of the two-point solve, exactness
of the truncation zero, sharpness of the positivity edges, and the
rescaling covariance of the exponential family.
"""

import math
from dataclasses import replace

import pytest

from qes.catalog import bender_dunne_point, build_problem
from qes.constraints import (
    DIAG_A,
    DIAG_B,
    KINDS_BY_CLASS,
    OFFMINUS_ENERGY,
    OFFMINUS_PARAM,
    OFFPLUS_ENERGY,
    OFFPLUS_PARAM,
    ConstraintChoice,
    ConstraintKindError,
    ConstraintTargetError,
    TruncationBugError,
    apply_constraint,
    verify_reduction,
)
from qes.recursion import symmetrize_diagonal, symmetrize_offdiagonal


def bender(alpha=0.25, gamma=1.0, v1=0.0, v2=0.0):
    return build_problem(
        "bender_dunne", {"alpha": alpha, "gamma": gamma, "v1": v1, "v2": v2}
    )


def sextic(alpha=0.25, gamma=1.0, xi=1.375):
    return build_problem(
        "sextic_partner", {"alpha": alpha, "gamma": gamma, "xi": xi}
    )


def morse(alpha=1.0, gamma=1.0, xi=1.0, beta=1.0, v1=0.0):
    return build_problem(
        "morse_rising_exp",
        {"alpha": alpha, "gamma": gamma, "xi": xi, "beta": beta, "v1": v1},
    )


def quartic(alpha=1.0, ell=0.0, xi=1.0):
    return build_problem(
        "oscillator_inverse_quartic", {"alpha": alpha, "ell": ell, "xi": xi}
    )


def coulomb(alpha=1.0, gamma=2.0, ell=1.0, v3=0.7):
    return build_problem(
        "coulomb_plus_oscillator",
        {"alpha": alpha, "gamma": gamma, "ell": ell, "v3": v3},
    )


def halfpower(alpha=1.0, gamma=1.0, v1=0.5, v2=0.4):
    return build_problem(
        "morse_half_power", {"alpha": alpha, "gamma": gamma, "v1": v1, "v2": v2}
    )


def hulthen(alpha=0.5, gamma=1.0, v1=0.2, v2=0.3):
    return build_problem(
        "hulthen_like_I1", {"alpha": alpha, "gamma": gamma, "v1": v1, "v2": v2}
    )


def hyper1(alpha=0.6, gamma=1.1, v1=0.0, v2=-0.8):
    return build_problem(
        "hyperbolic_II1", {"alpha": alpha, "gamma": gamma, "v1": v1, "v2": v2}
    )


def sech2(alpha=0.6, gamma=1.1, v1=0.3, v2=0.2):
    return build_problem(
        "sech_II2", {"alpha": alpha, "gamma": gamma, "v1": v1, "v2": v2}
    )


def sech4(alpha=0.6, gamma=1.1, v1=0.4, v2=0.3):
    return build_problem(
        "sech4_II3", {"alpha": alpha, "gamma": gamma, "v1": v1, "v2": v2}
    )


def catalog_examples():
    return [
        bender(v1=0.4, v2=-3.0),
        sextic(),
        morse(),
        quartic(),
        coulomb(),
        halfpower(),
        hulthen(),
        hyper1(),
        sech2(),
        sech4(),
    ]


# --- choice validation -------------------------------------------------

def test_choice_validation():
    with pytest.raises(ConstraintKindError):
        ConstraintChoice("Diag-C", 2)
    with pytest.raises(ValueError):
        ConstraintChoice(DIAG_A, 0)
    with pytest.raises(ValueError):
        ConstraintChoice(DIAG_A, 2.0)
    with pytest.raises(ValueError):
        ConstraintChoice(DIAG_A, True)
    assert ConstraintChoice(OFFMINUS_ENERGY, 3).fixes_energy
    assert not ConstraintChoice(DIAG_B, 3).fixes_energy


def test_kind_must_match_window_class():
    with pytest.raises(ConstraintKindError):
        apply_constraint(coulomb(), ConstraintChoice(DIAG_A, 2))
    with pytest.raises(ConstraintKindError):
        apply_constraint(morse(), ConstraintChoice(OFFPLUS_PARAM, 2))
    with pytest.raises(ConstraintKindError):
        apply_constraint(halfpower(), ConstraintChoice(OFFMINUS_PARAM, 2))


def test_size_cap_is_configurable():
    with pytest.raises(ValueError):
        apply_constraint(morse(), ConstraintChoice(DIAG_A, 65))
    cp = apply_constraint(morse(), ConstraintChoice(DIAG_A, 65), max_size=128)
    assert cp.N == 65


def test_missing_slot_is_reported():
    prob = morse()
    pruned = replace(prob, slots=(prob.slot_named("v2"),))
    with pytest.raises(ConstraintTargetError):
        apply_constraint(pruned, ConstraintChoice(DIAG_A, 2))


# --- frozen solves, diagonal windows -----------------------------------

def test_morse_falling_coefficient():
    for beta in (1.0, 2.5):
        for gamma in (0.8, 2.2):
            for alpha in (0.7, 1.3):
                for N in (1, 2, 5):
                    cp = apply_constraint(
                        morse(alpha, gamma, 2.0, beta),
                        ConstraintChoice(DIAG_A, N),
                    )
                    want = -2.0 * alpha * beta**2 * (N - 0.5 + gamma / beta)
                    assert cp.solved_name == "v1"
                    assert cp.eps_fixed is None
                    assert cp.solved_value == pytest.approx(want, rel=1e-12)
                    assert cp.problem.slot_named("v1").value == cp.solved_value
                    assert cp.base.slot_named("v1").value == 0.0


def test_morse_two_state_instance():
    cp = apply_constraint(morse(1.0, 1.0, 1.0), ConstraintChoice(DIAG_A, 2))
    assert cp.solved_value == pytest.approx(-5.0, abs=1e-13)
    assert cp.recursion().dminus(2) == 0.0


def test_sextic_inverse_square_coefficient():
    for gamma in (1.0, 1.7):
        for alpha in (0.25, 1.0):
            for N in (2, 3, 6):
                cp = apply_constraint(
                    sextic(alpha, gamma), ConstraintChoice(DIAG_B, N)
                )
                want = (2 * N + gamma) * (2 * N + gamma - 1.0)
                assert cp.solved_name == "v1"
                assert cp.solved_value == pytest.approx(want, rel=1e-12)
                assert cp.reduces_to is None


def test_bender_oscillator_coefficient():
    for J, s in ((2, 0.75), (5, 1.5)):
        gamma = 2 * s - 0.5
        prob = bender(gamma=gamma, v1=gamma * (gamma - 1.0))
        cp = apply_constraint(prob, ConstraintChoice(DIAG_A, J))
        want = -8.0 * 0.25 * (2 * J + gamma - 0.5)
        assert cp.solved_name == "v2"
        assert cp.solved_value == pytest.approx(want, rel=1e-12)
        point = bender_dunne_point(J, s)
        assert point.slot_named("v2").value == pytest.approx(
            cp.solved_value, rel=1e-13
        )


def test_hyperbolic_inverse_sinh_coefficient():
    for gamma in (1.1, 2.0):
        for alpha in (0.6, 1.5):
            for N in (2, 4):
                cp = apply_constraint(
                    hyper1(alpha, gamma), ConstraintChoice(DIAG_A, N)
                )
                want = -(2 * N + gamma + alpha - 1.0) * (2 * N + gamma + alpha - 2.0)
                assert cp.solved_name == "v1"
                assert cp.solved_value == pytest.approx(want, rel=1e-12)


# --- frozen solves, off-diagonal windows -------------------------------

def test_coulomb_parameter_branch():
    for gamma in (2.0, 3.5):
        for N in (2, 3, 5):
            cp = apply_constraint(
                coulomb(gamma=gamma), ConstraintChoice(OFFMINUS_PARAM, N)
            )
            want = (N + gamma - 1.0) * (N + gamma)
            assert cp.solved_name == "v1"
            assert cp.solved_value == pytest.approx(want, rel=1e-12)
            assert cp.recursion().dplus(N - 1) == 0.0


def test_coulomb_energy_branch():
    for gamma in (2.0, 3.5):
        for alpha in (1.0, 0.4):
            for N in (2, 3, 5):
                cp = apply_constraint(
                    coulomb(alpha=alpha, gamma=gamma),
                    ConstraintChoice(OFFMINUS_ENERGY, N),
                )
                want = -4.0 * alpha * (N + gamma - 0.5)
                assert cp.solved_name is None
                assert cp.eps_fixed == pytest.approx(want, rel=1e-12)
                assert cp.problem is cp.base


def test_quartic_energy_branch():
    cp = apply_constraint(quartic(1.0, 0.0), ConstraintChoice(OFFMINUS_ENERGY, 4))
    assert cp.eps_fixed == pytest.approx(-30.0, abs=1e-12)
    for ell in (0.0, 1.0):
        for alpha in (1.0, 0.5):
            for N in (2, 4, 5):
                cp = apply_constraint(
                    quartic(alpha, ell), ConstraintChoice(OFFMINUS_ENERGY, N)
                )
                want = -4.0 * alpha * (2 * N + (ell + 1.0) - 1.5)
                assert cp.eps_fixed == pytest.approx(want, rel=1e-12)


def test_halfpower_branches():
    for gamma in (1.0, 1.6):
        for alpha in (1.0, 0.7):
            for N in (2, 4):
                cp = apply_constraint(
                    halfpower(alpha, gamma), ConstraintChoice(OFFPLUS_PARAM, N)
                )
                assert cp.solved_name == "v1"
                assert cp.solved_value == pytest.approx(
                    -alpha * (N + 2 * gamma), rel=1e-12
                )
                ce = apply_constraint(
                    halfpower(alpha, gamma), ConstraintChoice(OFFPLUS_ENERGY, N)
                )
                assert ce.eps_fixed == pytest.approx(
                    0.25 * (N + 2 * gamma) ** 2, rel=1e-12
                )


def test_hulthen_branches():
    for gamma in (1.0, 1.4):
        for alpha in (0.5, 1.2):
            for N in (2, 5):
                cp = apply_constraint(
                    hulthen(alpha, gamma), ConstraintChoice(OFFMINUS_PARAM, N)
                )
                assert cp.solved_name == "v2"
                assert cp.solved_value == pytest.approx(
                    (N + gamma) * (N + gamma - 1.0), rel=1e-12
                )
                ce = apply_constraint(
                    hulthen(alpha, gamma), ConstraintChoice(OFFMINUS_ENERGY, N)
                )
                assert ce.eps_fixed == pytest.approx(
                    (N + gamma + alpha - 1.0) ** 2, rel=1e-12
                )


def test_sech_branches():
    for gamma in (1.1, 2.3):
        for alpha in (0.6, 1.5):
            for N in (2, 4):
                cp = apply_constraint(
                    sech2(alpha, gamma), ConstraintChoice(OFFPLUS_PARAM, N)
                )
                assert cp.solved_name == "v1"
                assert cp.solved_value == pytest.approx(
                    -(N + gamma + alpha) * (N + gamma + alpha - 1.0), rel=1e-12
                )
                ce = apply_constraint(
                    sech2(alpha, gamma), ConstraintChoice(OFFPLUS_ENERGY, N)
                )
                assert ce.eps_fixed == pytest.approx((N + gamma) ** 2, rel=1e-12)
                ce3 = apply_constraint(
                    sech4(alpha, gamma), ConstraintChoice(OFFPLUS_ENERGY, N)
                )
                assert ce3.eps_fixed == pytest.approx(
                    (2 * N + gamma) ** 2, rel=1e-12
                )


# --- collapses to exactly solvable ladders ------------------------------

def test_two_term_reductions():
    cp = apply_constraint(morse(), ConstraintChoice(DIAG_B, 3))
    assert cp.solved_name == "v2"
    assert cp.solved_value == pytest.approx(0.0, abs=1e-13)
    assert cp.reduces_to == "Morse"
    assert cp.reality is None

    cp = apply_constraint(quartic(xi=0.9), ConstraintChoice(OFFMINUS_PARAM, 3))
    assert cp.solved_name == "v3"
    assert cp.solved_value == pytest.approx(0.0, abs=1e-13)
    assert cp.reduces_to == "harmonic oscillator"

    cp = apply_constraint(hyper1(), ConstraintChoice(DIAG_B, 3))
    assert cp.reduces_to == "Poschl-Teller"

    cp = apply_constraint(sech4(), ConstraintChoice(OFFPLUS_PARAM, 3))
    assert cp.solved_name == "v2"
    assert cp.reduces_to == "Poschl-Teller"

    cp = apply_constraint(quartic(xi=0.0), ConstraintChoice(OFFMINUS_ENERGY, 3))
    assert cp.reduces_to == "harmonic oscillator"
    assert cp.eps_fixed == pytest.approx(-4.0 * (2 * 3 + 1.0 - 1.5), rel=1e-13)

    assert apply_constraint(morse(), ConstraintChoice(DIAG_A, 3)).reduces_to is None
    assert (
        apply_constraint(coulomb(), ConstraintChoice(OFFMINUS_PARAM, 3)).reduces_to
        is None
    )


# --- the truncation zero is exact, everywhere ---------------------------

def test_round_trip_truncation_vanishes():
    for prob in catalog_examples():
        for kind in KINDS_BY_CLASS[prob.cls]:
            for N in (1, 3, 7):
                cp = apply_constraint(prob, ConstraintChoice(kind, N))
                rc = cp.recursion()
                if kind in (DIAG_A, OFFPLUS_PARAM):
                    target = rc.dminus(N)
                elif kind in (DIAG_B, OFFMINUS_PARAM):
                    target = rc.dplus(N - 1)
                elif kind == OFFMINUS_ENERGY:
                    target = rc.dminus(N) + cp.eps_fixed
                else:
                    target = rc.dplus(N - 1) + cp.eps_fixed
                assert abs(target) <= 1e-12
                report = verify_reduction(cp, N + 4)
                assert report.truncation_index == N - 1
                assert report.band.squares[N - 1] == 0.0


# --- frozen reality bounds ----------------------------------------------

def test_sextic_reality_threshold():
    for alpha, gamma, N in ((0.25, 1.0, 2), (1.0, 1.7, 4)):
        cp = apply_constraint(sextic(alpha, gamma), ConstraintChoice(DIAG_B, N))
        rb = cp.reality
        assert rb.quantity == "v2"
        assert rb.direction == ">"
        assert rb.lower == pytest.approx(-4 * alpha * (2 * gamma + 3), rel=1e-12)
        assert rb.lower_index == 0
        assert rb.upper is None
        assert rb.admits(cp.problem.slot_named("v2").value)
    inside = apply_constraint(sextic(0.25, 1.0, xi=0.01), ConstraintChoice(DIAG_B, 3))
    outside = apply_constraint(sextic(0.25, 1.0, xi=-0.01), ConstraintChoice(DIAG_B, 3))
    assert inside.reality.admits(inside.problem.slot_named("v2").value)
    assert not outside.reality.admits(outside.problem.slot_named("v2").value)


def test_morse_reality_threshold():
    cp = apply_constraint(morse(0.8, 1.3, 2.0), ConstraintChoice(DIAG_A, 4))
    rb = cp.reality
    assert rb.quantity == "v2"
    assert rb.direction == "<"
    assert rb.upper == pytest.approx(0.0, abs=1e-13)
    assert rb.upper_index == 0
    assert rb.admits(-2.0)
    assert not rb.admits(0.5)


def test_bender_reality_threshold():
    for gamma in (1.0, 2.5):
        cp = apply_constraint(bender(gamma=gamma), ConstraintChoice(DIAG_A, 3))
        rb = cp.reality
        assert rb.quantity == "v1"
        assert rb.direction == "<"
        assert rb.upper == pytest.approx((gamma + 1) * (gamma + 2), rel=1e-12)
        assert rb.upper_index == 0
        assert rb.admits(gamma * (gamma - 1.0))


def test_coulomb_energy_window():
    for alpha, gamma in ((1.0, 2.0), (0.4, 3.5)):
        cp = apply_constraint(
            coulomb(alpha, gamma), ConstraintChoice(OFFMINUS_PARAM, 4)
        )
        rb = cp.reality
        assert rb.quantity == "energy"
        assert rb.direction == ">"
        assert rb.lower == pytest.approx(-2 * alpha * (2 * gamma + 1), rel=1e-12)
        assert rb.lower_index == 0


def test_halfpower_energy_window():
    for alpha, gamma in ((1.0, 1.0), (0.7, 1.6)):
        cp = apply_constraint(
            halfpower(alpha, gamma), ConstraintChoice(OFFPLUS_PARAM, 4)
        )
        rb = cp.reality
        assert rb.quantity == "energy"
        assert rb.direction == "<"
        assert rb.upper == pytest.approx((gamma + 0.5) ** 2, rel=1e-12)
        assert rb.upper_index == 0


def test_coulomb_parameter_window():
    cp = apply_constraint(coulomb(gamma=2.0), ConstraintChoice(OFFMINUS_ENERGY, 4))
    rb = cp.reality
    assert rb.quantity == "v1"
    assert rb.direction == "<"
    assert rb.upper == pytest.approx(2.0 * 3.0, rel=1e-12)
    assert rb.upper_index == 0
    # the centrifugal pairing v1 = ell (ell + 1) sits inside iff gamma > ell
    assert rb.admits(1.0 * 2.0)
    tight = apply_constraint(
        coulomb(gamma=0.5, ell=1.0), ConstraintChoice(OFFMINUS_ENERGY, 4)
    )
    assert not tight.reality.admits(tight.problem.slot_named("v1").value)


def test_quartic_parameter_window():
    cp = apply_constraint(quartic(1.0, 0.0), ConstraintChoice(OFFMINUS_ENERGY, 4))
    rb = cp.reality
    assert rb.quantity == "v3"
    assert rb.direction == "<"
    assert rb.upper == pytest.approx(0.0, abs=1e-13)
    assert rb.admits(cp.problem.slot_named("v3").value)


def test_hulthen_parameter_window_tightens_at_the_top():
    N = 5
    cp = apply_constraint(hulthen(0.5, 1.0), ConstraintChoice(OFFMINUS_ENERGY, N))
    rb = cp.reality
    assert rb.quantity == "v2"
    assert rb.direction == ">"
    assert rb.lower == pytest.approx((N + 1.0 - 2.0) * (N + 1.0 - 1.0), rel=1e-12)
    assert rb.lower_index == N - 2


def test_sech_parameter_windows():
    cp = apply_constraint(sech2(0.6, 1.1), ConstraintChoice(OFFPLUS_ENERGY, 4))
    rb = cp.reality
    assert rb.quantity == "v1"
    assert rb.direction == ">"
    assert rb.lower == pytest.approx(-(1.7) * (2.7), rel=1e-12)
    assert rb.lower_index == 0

    cp = apply_constraint(sech4(0.6, 1.1), ConstraintChoice(OFFPLUS_ENERGY, 4))
    rb = cp.reality
    assert rb.quantity == "v2"
    assert rb.direction == ">"
    assert rb.lower == pytest.approx(0.0, abs=1e-13)


def test_no_window_below_two_states():
    assert apply_constraint(morse(), ConstraintChoice(DIAG_A, 1)).reality is None
    assert (
        apply_constraint(coulomb(), ConstraintChoice(OFFMINUS_ENERGY, 1)).reality
        is None
    )


# --- the edges are sharp, and turn at the predicted index ---------------

def test_diagonal_edge_sharpness():
    N = 4
    cp = apply_constraint(sextic(0.25, 1.0, 0.7), ConstraintChoice(DIAG_B, N))
    rb = cp.reality
    delta = 1e-6 * max(1.0, abs(rb.lower))
    inside = symmetrize_diagonal(
        cp.problem.rebind("v2", rb.lower + delta).recursion(), N
    ).squares
    assert min(inside) > 0.0
    outside = symmetrize_diagonal(
        cp.problem.rebind("v2", rb.lower - delta).recursion(), N
    ).squares
    flipped = [n for n, s in enumerate(outside) if s < 0.0]
    assert flipped and flipped[0] == rb.lower_index


def test_energy_edge_sharpness():
    N = 4
    cp = apply_constraint(coulomb(1.0, 2.0), ConstraintChoice(OFFMINUS_PARAM, N))
    rb = cp.reality
    rc = cp.recursion()
    delta = 1e-6 * max(1.0, abs(rb.lower))
    inside = symmetrize_offdiagonal(rc, rb.lower + delta, N).squares
    assert min(inside) > 0.0
    outside = symmetrize_offdiagonal(rc, rb.lower - delta, N).squares
    flipped = [n for n, s in enumerate(outside) if s < 0.0]
    assert flipped and flipped[0] == rb.lower_index


def test_top_index_edge_sharpness():
    N = 5
    cp = apply_constraint(hulthen(0.5, 1.0), ConstraintChoice(OFFMINUS_ENERGY, N))
    rb = cp.reality
    delta = 1e-6 * max(1.0, abs(rb.lower))
    inside = symmetrize_offdiagonal(
        cp.problem.rebind("v2", rb.lower + delta).recursion(), cp.eps_fixed, N
    ).squares
    assert min(inside) > 0.0
    outside = symmetrize_offdiagonal(
        cp.problem.rebind("v2", rb.lower - delta).recursion(), cp.eps_fixed, N
    ).squares
    flipped = [n for n, s in enumerate(outside) if s < 0.0]
    assert flipped == [rb.lower_index] == [N - 2]


# --- rescaling covariance of the exponential family ---------------------

def test_morse_rescaling_commutes():
    alpha, gamma, xi = 1.3, 1.7, 2.2
    for beta in (0.5, 2.0, 2.5):
        for N in (2, 4):
            cb = apply_constraint(
                morse(alpha, gamma, xi, beta), ConstraintChoice(DIAG_A, N)
            )
            c1 = apply_constraint(
                morse(alpha, gamma / beta, xi / beta**2, 1.0),
                ConstraintChoice(DIAG_A, N),
            )
            assert abs(cb.solved_value - beta**2 * c1.solved_value) <= 1e-10 * max(
                1.0, abs(cb.solved_value)
            )
            rcb, rc1 = cb.recursion(), c1.recursion()
            for n in (0, 1, 3):
                assert rcb.a(n) == pytest.approx(beta**2 * rc1.a(n), abs=1e-10)
                assert rcb.dplus(n) == pytest.approx(
                    beta**2 * rc1.dplus(n), abs=1e-10
                )
            for n in (1, 2):
                assert rcb.dminus(n) == pytest.approx(
                    beta**2 * rc1.dminus(n), abs=1e-10
                )


# --- probing past the truncation ----------------------------------------

def test_verify_morse_couplings():
    alpha, xi = 0.7, 1.3
    cp = apply_constraint(morse(alpha, 1.0, xi), ConstraintChoice(DIAG_A, 2))
    report = verify_reduction(cp, 6)
    assert report.clean
    assert report.band.values[0] == pytest.approx(math.sqrt(2 * alpha * xi), rel=1e-12)
    assert report.band.squares[1] == 0.0
    assert report.complex_below == ()
    assert report.complex_tail == (2, 3, 4)
    assert not report.band.all_real


def test_verify_bender_dunne_point():
    prob = bender_dunne_point(3, 0.75)
    cp = apply_constraint(prob, ConstraintChoice(DIAG_A, 3))
    assert cp.solved_value == pytest.approx(prob.slot_named("v2").value, rel=1e-13)
    report = verify_reduction(cp, 8)
    assert report.band.squares[2] == 0.0
    assert report.complex_below == ()
    assert report.complex_tail == (3, 4, 5, 6)


def test_verify_flags_complex_couplings_below():
    cp = apply_constraint(sextic(0.25, 1.0, xi=-0.2), ConstraintChoice(DIAG_B, 2))
    report = verify_reduction(cp, 5)
    assert report.complex_below == (0,)
    assert not report.clean
    assert report.band.complex_flags[0]
    assert math.isnan(report.band.values[0])


def test_verify_offdiagonal_probes_two_energies():
    cp = apply_constraint(coulomb(), ConstraintChoice(OFFMINUS_PARAM, 3))
    report = verify_reduction(cp, 7)
    assert report.band.squares[2] == 0.0
    assert report.truncation_index == 2


def test_verify_rejects_short_probes():
    cp = apply_constraint(morse(), ConstraintChoice(DIAG_A, 3))
    with pytest.raises(ValueError):
        verify_reduction(cp, 3)


def test_verify_catches_tampered_problems():
    cp = apply_constraint(morse(), ConstraintChoice(DIAG_A, 2))
    broken = replace(cp, problem=cp.base)
    with pytest.raises(TruncationBugError):
        verify_reduction(broken, 6)
