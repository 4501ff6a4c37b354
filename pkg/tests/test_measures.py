"""Measures, Gamma-product norms, and the checks tying them together.

Hand anchors: the 2x2 block weights 4/(17 -+ 3 sqrt 17) from the
closed-form eigenvectors (sqrt 2, lambda + 1), Gamma ratios against
direct math.gamma products, and the chain identity h_n =
prod d_m^- / d_{m-1}^+, which the relation forces by reading
<p_{n+1}, x p_n> both ways.  With the chain as the independent side,
every catalogued Gamma-product norm is then swept against the discrete
measures it is supposed to reproduce, three parameter settings per
problem, windows up to N = 10.
"""

import math

import pytest

from qes.catalog import bender_dunne_point, build_problem
from qes.constraints import (
    DIAG_A,
    DIAG_B,
    OFFMINUS_ENERGY,
    OFFMINUS_PARAM,
    OFFPLUS_ENERGY,
    OFFPLUS_PARAM,
    ConstraintChoice,
    apply_constraint,
)
from qes.measures import (
    DiscreteMeasure,
    GammaPoleError,
    GammaTerm,
    NoPositiveMeasureError,
    NormFormula,
    discrete_measure,
    factorization_check,
    gamma_ratio,
    log_gamma,
    norm_formula,
    orthogonality_deviation,
    problem_measure,
    verify_orthogonality,
    zero_norm_check,
)
from qes.recursion import SingularRecursionError, evaluate_p_forward
from qes.spectra import (
    RealityViolationError,
    SymTridiag,
    energy_spectrum,
    parameter_spectrum,
)


def constrained(name, params, kind, n):
    return apply_constraint(
        build_problem(name, params), ConstraintChoice(kind, n)
    )


def bender_diag(alpha, gamma, n):
    # v1 at the quantization point, v2 left for the truncation to solve
    return constrained(
        "bender_dunne",
        {"alpha": alpha, "gamma": gamma, "v1": gamma * (gamma - 1.0)},
        DIAG_A,
        n,
    )


def morse_diag(n, alpha=1.0, gamma=1.0, xi=1.0, beta=1.0):
    return constrained(
        "morse_rising_exp",
        {"alpha": alpha, "gamma": gamma, "xi": xi, "beta": beta},
        DIAG_A,
        n,
    )


class TestGammaMachinery:
    def test_rising_integer_ratio(self):
        assert gamma_ratio([4.0], [2.0]) == pytest.approx(6.0, rel=1e-14)

    def test_denominator_pole_is_exactly_zero(self):
        assert gamma_ratio([3.0], [0.0]) == 0.0
        assert gamma_ratio([2.5], [-4.0]) == 0.0

    def test_numerator_pole_raises(self):
        with pytest.raises(GammaPoleError):
            gamma_ratio([0.0], [1.0])
        with pytest.raises(GammaPoleError):
            gamma_ratio([2.0, -3.0], [1.0])

    def test_negative_arguments_carry_signs(self):
        assert gamma_ratio([-0.5], [1.0]) == pytest.approx(
            -2.0 * math.sqrt(math.pi), rel=1e-13
        )
        assert gamma_ratio([-1.5], [1.0]) == pytest.approx(
            4.0 * math.sqrt(math.pi) / 3.0, rel=1e-13
        )
        # Gamma(x + 1) = x Gamma(x) at x = -1.5
        assert gamma_ratio([-0.5], [-1.5]) == pytest.approx(-1.5, rel=1e-13)

    def test_against_direct_product(self):
        direct = (
            math.gamma(3.0)
            * math.gamma(5.5)
            / (math.gamma(2.0) * math.gamma(4.5))
        )
        assert gamma_ratio([3.0, 5.5], [2.0, 4.5]) == pytest.approx(
            direct, rel=1e-13
        )
        assert direct == pytest.approx(9.0, rel=1e-14)

    def test_argument_limit(self):
        with pytest.raises(ValueError):
            gamma_ratio([201.0], [1.0])
        with pytest.raises(ValueError):
            log_gamma(201.0)
        with pytest.raises(ValueError):
            log_gamma(0.0)
        with pytest.raises(ValueError):
            log_gamma(-2.5)

    def test_log_gamma_values_and_recurrence(self):
        assert log_gamma(0.5) == pytest.approx(
            math.log(math.sqrt(math.pi)), rel=1e-14
        )
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0
        # functional equation across the whole supported range
        for k in range(1, 40):
            x = 0.11 + 5.0 * k
            lhs = log_gamma(x + 1.0) - log_gamma(x)
            assert lhs == pytest.approx(math.log(x), rel=1e-13)


class TestNormFormula:
    def test_h0_normalization_enforced(self):
        with pytest.raises(ValueError, match="normalization"):
            NormFormula(
                label="broken",
                base=1.0,
                numerator=(GammaTerm(0, 3.0),),
                denominator=(GammaTerm(0, 2.0),),
            )

    def test_values_match_direct_products(self):
        nf = norm_formula(bender_diag(0.25, 1.0, 3))
        assert nf.h(0) == pytest.approx(1.0, abs=1e-14)
        assert nf.h(1) == pytest.approx(4.0 / 3.0, rel=1e-13)
        assert nf.h(2) == pytest.approx(4.0 / 15.0, rel=1e-13)

    def test_alternating_flag_flips_odd_indices(self):
        nf = NormFormula(
            label="toy",
            base=2.0,
            numerator=(GammaTerm(1, 1.0),),
            denominator=(GammaTerm(1, 1.0),),
            alternating=True,
        )
        assert nf.h(1) == -2.0
        assert nf.h(2) == 4.0

    def test_negative_index_refused(self):
        nf = norm_formula(bender_diag(0.25, 1.0, 3))
        with pytest.raises(ValueError):
            nf.h(-1)

    def test_denominator_pole_gives_zero_numerator_pole_gives_inf(self):
        bd = norm_formula(bender_diag(0.25, 1.0, 3))
        assert bd.h(3) == 0.0
        sx = norm_formula(
            constrained(
                "sextic_partner",
                {"alpha": 0.25, "gamma": 1.0, "xi": 1.375},
                DIAG_B,
                3,
            )
        )
        assert sx.h(3) == math.inf


class TestNormFactories:
    def test_bender_requires_the_quantization_point(self):
        cp = constrained(
            "bender_dunne",
            {"alpha": 0.25, "gamma": 1.0, "v1": 0.3},
            DIAG_A,
            3,
        )
        with pytest.raises(ValueError, match="v1"):
            norm_formula(cp)

    def test_morse_requires_a_rising_term(self):
        cp = constrained(
            "morse_rising_exp", {"alpha": 1.0, "gamma": 1.0}, DIAG_A, 2
        )
        with pytest.raises(ValueError, match="xi"):
            norm_formula(cp)

    def test_hyperbolic_sign_condition(self):
        cp = constrained(
            "hyperbolic_II1",
            {"alpha": 1.0, "gamma": 1.0, "v2": -2.0},
            DIAG_A,
            3,
        )
        norm_formula(cp)
        # the formula needs the coupling slot negative
        bad = constrained(
            "hyperbolic_II1",
            {"alpha": 1.0, "gamma": 1.0, "v2": 2.0},
            DIAG_A,
            3,
        )
        with pytest.raises(ValueError, match="v2 < 0"):
            norm_formula(bad)

    def test_hulthen_needs_room_above_the_product(self):
        cp = constrained(
            "hulthen_like_I1",
            {"alpha": 1.0, "gamma": 1.0, "v2": 3.0},
            OFFMINUS_ENERGY,
            3,
        )
        with pytest.raises(ValueError, match="v2 >"):
            norm_formula(cp)

    def test_sech_rejects_complex_pairing(self):
        ga, al = 0.7, 0.9
        xisq = 1.5 * (ga + al + 0.5) ** 2
        cp = constrained(
            "sech_II2",
            {"alpha": al, "gamma": ga, "v1": xisq - (ga + al) * (ga + al + 1)},
            OFFPLUS_ENERGY,
            3,
        )
        with pytest.raises(ValueError, match="real axis"):
            norm_formula(cp)

    def test_sech4_needs_positive_coupling(self):
        cp = constrained(
            "sech4_II3",
            {"alpha": 0.5, "gamma": 1.0, "v2": -1.0},
            OFFPLUS_ENERGY,
            3,
        )
        with pytest.raises(ValueError, match="v2 > 0"):
            norm_formula(cp)

    def test_uncatalogued_combination_refused(self):
        cp = constrained(
            "coulomb_plus_oscillator",
            {"alpha": 1.0, "gamma": 2.0, "ell": 1.0, "v3": 6.0},
            OFFMINUS_ENERGY,
            3,
        )
        with pytest.raises(ValueError, match="no closed-form norm"):
            norm_formula(cp)


class TestDiscreteMeasure:
    def test_single_row(self):
        m = discrete_measure(SymTridiag((3.5,), ()))
        assert m.support == (3.5,)
        assert m.weights == (1.0,)

    def test_two_row_closed_form_weights(self):
        m = discrete_measure(SymTridiag((-1.0, -4.0), (math.sqrt(2.0),)))
        lo = 4.0 / (17.0 + 3.0 * math.sqrt(17.0))
        hi = 4.0 / (17.0 - 3.0 * math.sqrt(17.0))
        assert m.support == pytest.approx(
            ((-5.0 - math.sqrt(17.0)) / 2.0, (-5.0 + math.sqrt(17.0)) / 2.0),
            rel=1e-12,
        )
        assert m.weights == pytest.approx((lo, hi), rel=1e-12)

    def test_decoupled_trailing_block_gets_zero_weight(self):
        m = discrete_measure(SymTridiag((2.0, 0.5), (0.0,)))
        assert m.support == (0.5, 2.0)
        assert m.weights == (0.0, 1.0)

    def test_decoupled_collision_merges(self):
        m = discrete_measure(SymTridiag((1.5, 1.5), (0.0,)))
        assert m.support == (1.5,)
        assert m.weights == (1.0,)

    def test_moments_reproduce_matrix_entries(self):
        # e0^T M^k e0: k=1 is the corner entry, k=2 adds the coupling
        m = discrete_measure(SymTridiag((-1.0, -4.0), (math.sqrt(2.0),)))
        assert m.moment(0) == pytest.approx(1.0, abs=1e-14)
        assert m.moment(1) == pytest.approx(-1.0, abs=1e-12)
        assert m.moment(2) == pytest.approx(3.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError, match="nonnegative"):
            DiscreteMeasure((0.0, 1.0), (1.5, -0.5))
        with pytest.raises(ValueError, match="increasing"):
            DiscreteMeasure((1.0, 0.0), (0.5, 0.5))
        with pytest.raises(ValueError, match="mass"):
            DiscreteMeasure((0.0, 1.0), (0.5, 0.2))
        with pytest.raises(ValueError, match="nonempty"):
            DiscreteMeasure((), ())


class TestProblemMeasure:
    def test_diagonal_support_is_the_spectrum(self):
        cp = morse_diag(2)
        asm = problem_measure(cp)
        assert asm.measure.support == pytest.approx(
            energy_spectrum(cp).eigenvalues, rel=1e-12
        )
        assert asm.norms[1] == pytest.approx(2.0, rel=1e-12)
        assert sum(asm.measure.weights) == pytest.approx(1.0, abs=1e-12)

    def test_parameter_support_matches_the_parameter_spectrum(self):
        cp = constrained(
            "coulomb_plus_oscillator",
            {"alpha": 1.0, "gamma": 2.0, "ell": 1.0, "v3": 6.0},
            OFFMINUS_ENERGY,
            2,
        )
        asm = problem_measure(cp)
        assert asm.measure.support == pytest.approx((-4.0, 4.0), rel=1e-12)
        assert asm.measure.support == pytest.approx(
            parameter_spectrum(cp).values, rel=1e-12
        )

    def test_energy_window_refusals_state_the_obstruction(self):
        swept_minus = constrained(
            "coulomb_plus_oscillator",
            {"alpha": 1.0, "gamma": 2.0, "ell": 1.0, "v3": 6.0},
            OFFMINUS_PARAM,
            3,
        )
        with pytest.raises(
            NoPositiveMeasureError, match="can not be positive definite"
        ):
            problem_measure(swept_minus)
        swept_plus = constrained(
            "morse_half_power",
            {"alpha": 1.0, "gamma": 1.0, "v2": 0.4},
            OFFPLUS_PARAM,
            2,
        )
        with pytest.raises(
            NoPositiveMeasureError, match="can not be positive definite"
        ):
            problem_measure(swept_plus)

    def test_square_acting_parameter_refused(self):
        cp = constrained(
            "oscillator_inverse_quartic",
            {"alpha": 1.0, "ell": 1.0},
            OFFMINUS_ENERGY,
            4,
        )
        with pytest.raises(ValueError, match="square"):
            problem_measure(cp)

    def test_reality_violation_propagates(self):
        cp = constrained(
            "hyperbolic_II1",
            {"alpha": 1.0, "gamma": 1.0, "v2": 2.0},
            DIAG_A,
            3,
        )
        with pytest.raises(RealityViolationError):
            problem_measure(cp)

    def test_broken_ladder_is_named(self):
        cp = constrained(
            "morse_rising_exp", {"alpha": 1.0, "gamma": 1.0}, DIAG_A, 2
        )
        with pytest.raises(ValueError, match="ladder breaks"):
            problem_measure(cp)

    def test_first_polynomial_constant_when_energy_couples_downward(self):
        # the refusal rests on this: the leading table entries cannot
        # distinguish energies, so no positive measure can weigh them
        rc = build_problem(
            "coulomb_plus_oscillator",
            {"alpha": 1.0, "gamma": 2.0, "ell": 1.0, "v3": 6.0},
        ).recursion()
        lo = evaluate_p_forward(rc, 0.3, 2).values
        hi = evaluate_p_forward(rc, 7.9, 2).values
        assert lo[1] == hi[1]
        assert lo[2] != hi[2]


def _diag_settings():
    for alpha, gamma in ((0.25, 1.0), (0.25, 2.5), (1.3, 1.5)):
        yield "bender_dunne", None, lambda n, a=alpha, g=gamma: bender_diag(
            a, g, n
        )
    for alpha, gamma, xi, beta in (
        (1.0, 1.0, 1.0, 1.0),
        (2.5, 0.6, 0.25, 1.0),
        (1.3, 0.9, 0.7, 2.0),
    ):
        yield "morse_rising_exp", None, (
            lambda n, a=alpha, g=gamma, x=xi, b=beta: morse_diag(
                n, a, g, x, b
            )
        )
    for alpha, gamma, xi in (
        (0.25, 1.0, 1.375),
        (1.1, 0.8, 2.0),
        (0.5, 2.5, 3.0),
    ):
        yield "sextic_partner", None, (
            lambda n, a=alpha, g=gamma, x=xi: constrained(
                "sextic_partner",
                {"alpha": a, "gamma": g, "xi": x},
                DIAG_B,
                n,
            )
        )
    for alpha, gamma, v2 in (
        (1.2, 0.7, -3.0),
        (0.8, 1.5, -0.5),
        (2.0, 1.0, -10.0),
    ):
        yield "hyperbolic_II1", None, (
            lambda n, a=alpha, g=gamma, v=v2: constrained(
                "hyperbolic_II1",
                {"alpha": a, "gamma": g, "v2": v},
                DIAG_A,
                n,
            )
        )


def _param_settings():
    for alpha, gamma, xisq in (
        (1.1, 0.8, 2.25),
        (0.7, 1.2, 1.0),
        (1.5, 0.5, 4.0),
    ):
        yield "hulthen_like_I1", None, (
            lambda n, a=alpha, g=gamma, x=xisq: constrained(
                "hulthen_like_I1",
                {"alpha": a, "gamma": g, "v2": (n + g) * (n + g - 1) + x},
                OFFMINUS_ENERGY,
                n,
            )
        )
    for alpha, gamma, frac in (
        (0.9, 0.7, 0.3),
        (0.5, 1.0, 0.6),
        (1.2, 0.4, 0.9),
    ):
        xisq = frac * (gamma + alpha + 0.5) ** 2
        v1 = xisq - (gamma + alpha) * (gamma + alpha + 1.0)
        yield "sech_II2", None, (
            lambda n, a=alpha, g=gamma, v=v1: constrained(
                "sech_II2",
                {"alpha": a, "gamma": g, "v1": v},
                OFFPLUS_ENERGY,
                n,
            )
        )
    for alpha, gamma, v2 in (
        (0.8, 0.6, 1.7),
        (1.2, 1.1, 4.0),
        (0.5, 0.9, 0.3),
    ):
        yield "sech4_II3", None, (
            lambda n, a=alpha, g=gamma, v=v2: constrained(
                "sech4_II3",
                {"alpha": a, "gamma": g, "v2": v},
                OFFPLUS_ENERGY,
                n,
            )
        )
    # chain-only families: no Gamma product catalogued, the measure
    # itself is still checked against the chain norms
    for alpha, gamma, ell in ((1.0, 2.0, 1.0), (0.5, 1.5, 0.5), (2.0, 1.2, 0.0)):
        yield "coulomb_plus_oscillator", "chain-only", (
            lambda n, a=alpha, g=gamma, l=ell: constrained(
                "coulomb_plus_oscillator",
                {"alpha": a, "gamma": g, "ell": l, "v3": 1.0},
                OFFMINUS_ENERGY,
                n,
            )
        )
    for alpha, gamma, v1 in ((1.0, 1.0, -1.0), (0.5, 1.5, 0.0), (2.0, 0.8, 0.5)):
        yield "morse_half_power", "chain-only", (
            lambda n, a=alpha, g=gamma, v=v1: constrained(
                "morse_half_power",
                {"alpha": a, "gamma": g, "v1": v},
                OFFPLUS_ENERGY,
                n,
            )
        )


def _sweep_cases():
    cases = []
    for idx, (name, note, make) in enumerate(
        list(_diag_settings()) + list(_param_settings())
    ):
        tag = f"{name}-{idx % 3}" + ("-chain" if note else "")
        cases.append(pytest.param(make, note, id=tag))
    return cases


class TestOrthogonalitySweep:
    @pytest.mark.parametrize("make,note", _sweep_cases())
    @pytest.mark.parametrize("n", [2, 6, 10])
    def test_measure_matches_chain_and_closed_form(self, make, note, n):
        cp = make(n)
        assert orthogonality_deviation(cp) <= 1e-8
        if note != "chain-only":
            nf = norm_formula(cp)
            assert orthogonality_deviation(cp, nf) <= 1e-8

    @pytest.mark.parametrize("s", [0.75, 1.5])
    def test_classic_sextic_norms_through_ten(self, s):
        gamma = 2.0 * s - 0.5
        cp = bender_diag(0.25, gamma, 10)
        nf = norm_formula(cp)
        assert orthogonality_deviation(cp, nf) <= 1e-8
        direct = [
            math.gamma(10.0)
            * math.gamma(2 * s)
            / (
                math.gamma(k + 1.0)
                * math.gamma(10.0 - k)
                * math.gamma(k + 2 * s)
            )
            for k in range(10)
        ]
        for k, d in enumerate(direct):
            assert nf.h(k) == pytest.approx(d, rel=1e-12)

    def test_normalized_family_is_orthonormal(self):
        asm = problem_measure(morse_diag(6))
        scale = [1.0 / math.sqrt(h) for h in asm.norms]

        def q_table(x):
            return [p * s for p, s in zip(asm.polynomials(x), scale)]

        dev = verify_orthogonality(asm.measure, q_table, [1.0] * 6, 6)
        assert dev <= 1e-8

    @pytest.mark.parametrize(
        "make",
        [
            lambda: morse_diag(5),
            lambda: constrained(
                "sextic_partner",
                {"alpha": 0.25, "gamma": 1.0, "xi": 1.375},
                DIAG_B,
                5,
            ),
        ],
        ids=["morse", "sextic"],
    )
    def test_gauss_exactness_through_degree_2n_minus_1(self, make):
        cp = make()
        asm = problem_measure(cp)
        rc = cp.recursion()
        n = cp.N
        from qes.recursion import symmetrize_diagonal

        band = symmetrize_diagonal(rc, n).values
        diag = [rc.a(k) for k in range(n)]
        vec = [1.0] + [0.0] * (n - 1)
        for k in range(1, 2 * n):
            nxt = []
            for i in range(n):
                s = diag[i] * vec[i]
                if i > 0:
                    s += band[i - 1] * vec[i - 1]
                if i < n - 1:
                    s += band[i] * vec[i + 1]
                nxt.append(s)
            vec = nxt
            target = vec[0]
            got = asm.measure.moment(k)
            assert abs(got - target) <= 1e-8 * max(1.0, abs(target))

    def test_norm_sequence_length_checked(self):
        asm = problem_measure(morse_diag(3))
        with pytest.raises(ValueError, match="norm values"):
            verify_orthogonality(asm.measure, asm.polynomials, [1.0], 3)

    def test_short_table_checked(self):
        asm = problem_measure(morse_diag(3))
        with pytest.raises(ValueError, match="shorter"):
            verify_orthogonality(asm.measure, lambda x: [1.0], asm.norms, 3)


class TestZeroNorm:
    def test_classic_contraction_is_exact_zeros(self):
        nf = norm_formula(bender_diag(0.25, 1.0, 3))
        rep = zero_norm_check(nf, 3, 6)
        assert rep.start == 3
        assert rep.mechanisms == ("vanishes",) * 4
        assert rep.all_zero and rep.terminated
        for k in range(3, 7):
            assert nf.h(k) == 0.0

    def test_two_level_window_contracts_immediately(self):
        rep = zero_norm_check(norm_formula(morse_diag(2)), 2, 2)
        assert rep.mechanisms == ("vanishes",)

    def test_upper_truncation_contracts_through_divergence(self):
        # the raw norm blows up past the window, so the normalized
        # coefficient p_n / sqrt(h_n) is what vanishes
        nf = norm_formula(
            constrained(
                "sextic_partner",
                {"alpha": 0.25, "gamma": 1.0, "xi": 1.375},
                DIAG_B,
                4,
            )
        )
        rep = zero_norm_check(nf, 4, 7)
        assert rep.mechanisms == ("diverges",) * 4
        assert rep.terminated and not rep.all_zero

    def test_parameter_norm_mechanisms_split_by_class(self):
        vanishing = norm_formula(
            constrained(
                "hulthen_like_I1",
                {"alpha": 1.1, "gamma": 0.8, "v2": (3.8) * (2.8) + 2.25},
                OFFMINUS_ENERGY,
                3,
            )
        )
        assert zero_norm_check(vanishing, 3, 5).all_zero
        diverging = norm_formula(
            constrained(
                "sech4_II3",
                {"alpha": 0.8, "gamma": 0.6, "v2": 1.7},
                OFFPLUS_ENERGY,
                3,
            )
        )
        rep = zero_norm_check(diverging, 3, 5)
        assert rep.terminated and not rep.all_zero

    def test_poleless_formula_reports_persistence(self):
        nf = NormFormula(
            label="toy",
            base=1.0,
            numerator=(GammaTerm(1, 0.5),),
            denominator=(GammaTerm(1, 0.5),),
        )
        rep = zero_norm_check(nf, 2, 4)
        assert rep.mechanisms == ("persists",) * 3
        assert not rep.terminated

    def test_range_validation(self):
        nf = norm_formula(morse_diag(2))
        with pytest.raises(ValueError):
            zero_norm_check(nf, 2, 1)


class TestFactorization:
    def test_classic_point_vanishes_exactly(self):
        cp = apply_constraint(
            bender_dunne_point(3, 0.75), ConstraintChoice(DIAG_A, 3)
        )
        assert factorization_check(cp, 2) <= 1e-7

    def test_two_level_window(self):
        assert factorization_check(morse_diag(2), 3) <= 1e-7

    def test_single_level_window(self):
        assert factorization_check(morse_diag(1), 0) <= 1e-12

    def test_off_diagonal_refused(self):
        cp = constrained(
            "coulomb_plus_oscillator",
            {"alpha": 1.0, "gamma": 2.0, "ell": 1.0, "v3": 6.0},
            OFFMINUS_PARAM,
            3,
        )
        with pytest.raises(ValueError, match="diagonal"):
            factorization_check(cp, 1)

    def test_negative_jmax_refused(self):
        with pytest.raises(ValueError):
            factorization_check(morse_diag(2), -1)

    def test_upper_truncation_cannot_continue(self):
        # the solved ladder ends at the window, division and all
        cp = constrained(
            "sextic_partner",
            {"alpha": 0.25, "gamma": 1.0, "xi": 1.375},
            DIAG_B,
            3,
        )
        with pytest.raises(SingularRecursionError):
            factorization_check(cp, 1)
