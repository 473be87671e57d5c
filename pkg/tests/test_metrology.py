"""Tests for measurement-side analysis: SLDs, sequential readout, twisting."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sparse
from scipy.sparse.linalg import expm_multiply

from pairsqueeze.fisher import qfim_analytic
from pairsqueeze.ladders import (
    BipartiteOperator,
    joint_quadratures,
    quadrature_set,
    spin_ladder,
)
from pairsqueeze.metrology import (
    SPECIAL_MEASUREMENT_STRENGTH,
    SPECIAL_PREFACTOR,
    SequentialModel,
    TwistingResult,
    commuting_sld_spin_half,
    sequential_estimation,
    sld_operator,
    sld_residual,
    twisting_protocol,
    twisting_scaling_fit,
)
from pairsqueeze.states import SqueezeParams, squeezed_paired_state, wineland

GENERATORS = ("X+", "X-", "Y+", "Y-")


def _twisted_state(kind: str, S: float, t: float) -> np.ndarray:
    """Independent evolution of |0,0> under the twisting interactions."""
    spec = spin_ladder(S)
    x, y, _ = quadrature_set(spec)
    ham = sparse.kron(x.entries, x.entries, format="csr").astype(complex)
    if kind == "2M2A":
        ham = ham - sparse.kron(y.entries, y.entries, format="csr")
    psi0 = np.zeros(spec.dim**2, dtype=complex)
    psi0[0] = 1.0
    return expm_multiply((-1j * t) * ham, psi0)


def _variance(v: np.ndarray, op) -> float:
    """Second moment <op^2> for an operator with vanishing first moment."""
    w = op @ v
    return float(np.vdot(w, w).real)


class TestSldOperators:
    """SLD table entries satisfy the defining equation on the squeezed state."""

    def test_spin_half_squeezed_generator(self):
        spec = spin_ladder(0.5)
        residual = sld_residual(spec, SqueezeParams(0.5), "X+")
        assert residual < 1e-12

    @pytest.mark.parametrize("generator", GENERATORS)
    def test_all_generators_large_spin(self, generator):
        spec = spin_ladder(5)
        residual = sld_residual(spec, SqueezeParams(2.0), generator)
        assert residual < 1e-10

    def test_wrong_sign_is_rejected_by_residual(self):
        spec = spin_ladder(0.5)
        params = SqueezeParams(0.5)
        good = sld_operator(spec, params, "X+")
        flipped = BipartiteOperator(good.dims, -good.entries, hermitian=True)
        assert sld_residual(spec, params, "X+", operator=flipped) > 0.1

    @pytest.mark.parametrize("generator", GENERATORS)
    def test_second_moment_reproduces_fisher_information(self, generator):
        """<L^2> on the state equals the matching Fisher-information entry."""
        spec = spin_ladder(3)
        params = SqueezeParams(0.8)
        psi = squeezed_paired_state(spec, params).vector()
        ell = sld_operator(spec, params, generator).dense()
        second_moment = float(np.real(psi.conj() @ (ell @ (ell @ psi))))
        expected = qfim_analytic(spec, params)[generator, generator]
        assert second_moment == pytest.approx(expected, rel=1e-10)

    def test_infinite_squeezing_rejected(self):
        spec = spin_ladder(1)
        with pytest.raises(ValueError):
            sld_operator(spec, SqueezeParams.infinite(), "X+")

    def test_unknown_generator_rejected(self):
        spec = spin_ladder(1)
        with pytest.raises(ValueError):
            sld_residual(spec, SqueezeParams(0.5), "Z+")


class TestCommutingSldPair:
    """Modified spin-1/2 SLDs commute and still satisfy the SLD equation."""

    def test_default_construction(self):
        report = commuting_sld_spin_half()
        assert report["commutator_norm"] < 1e-12
        res_yplus, res_xminus = report["residuals"]
        assert res_yplus < 1e-10
        assert res_xminus < 1e-10

    @pytest.mark.parametrize("r", [0.25, 1.5, 3.0])
    def test_residuals_vanish_for_any_squeezing(self, r):
        report = commuting_sld_spin_half(r=r)
        assert max(report["residuals"]) < 1e-10

    def test_unit_cross_weight_breaks_commutation(self):
        report = commuting_sld_spin_half(cross_scale=1.0)
        assert report["commutator_norm"] > 0.1

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError):
            commuting_sld_spin_half(r=0.0)
        with pytest.raises(ValueError):
            commuting_sld_spin_half(cross_scale=0.0)


class TestSequentialModel:
    """Validation and limiting behavior of the sequential readout model."""

    def test_rejects_odd_or_small_n(self):
        with pytest.raises(ValueError):
            SequentialModel(N=3, measurement_strength=1.0, r=0.5)
        with pytest.raises(ValueError):
            SequentialModel(N=0, measurement_strength=1.0, r=0.5)

    def test_rejects_bad_strength_and_r(self):
        with pytest.raises(ValueError):
            SequentialModel(N=4, measurement_strength=-1.0, r=0.5)
        with pytest.raises(ValueError):
            SequentialModel(N=4, measurement_strength=1.0, r=-0.5)
        with pytest.raises(TypeError):
            SequentialModel(N=4.0, measurement_strength=1.0, r=0.5)

    def test_spin_size(self):
        assert SequentialModel(N=10, measurement_strength=1.0, r=0.5).spin_size == 2.5

    def test_special_tuning_sets_matched_squeezing(self):
        model = SequentialModel.special_tuning(1000, 1.0)
        assert math.exp(2.0 * model.r) == pytest.approx(250.0, rel=1e-14)
        with pytest.raises(ValueError):
            SequentialModel.special_tuning(4, 1.0)

    def test_zero_strength_reduces_to_bare_squeezing(self):
        model = SequentialModel(N=20, measurement_strength=0.0, r=0.8)
        report = sequential_estimation(model)
        assert report["xi2_Yminus"] == wineland(5.0, SqueezeParams(0.8))
        assert report["imprecision"] == math.inf
        assert report["xi2_Xplus"] == math.inf
        assert report["snr_degradation"] == 1.0

    def test_strong_measurement_destroys_second_record(self):
        model = SequentialModel(N=20, measurement_strength=50.0, r=0.8)
        report = sequential_estimation(model)
        assert report["snr_degradation"] < 1e-20
        assert report["xi2_Yminus"] > 1e18 * report["imprecision"]

    def test_inflation_product_independent_of_size(self):
        """At fixed strength and fixed e^{2r}/N the two penalty factors
        multiply to a size-independent constant."""
        products = []
        for number in (2000, 8000, 32000):
            model = SequentialModel(
                N=number, measurement_strength=0.9, r=0.5 * math.log(number / 8.0)
            )
            report = sequential_estimation(model)
            bare = wineland(model.spin_size, SqueezeParams(model.r))
            products.append(
                (report["xi2_Xplus"] / bare) * (report["xi2_Yminus"] / bare)
            )
        assert max(products) - min(products) < 1e-3 * products[0]

    def test_special_tuning_asymptotics(self):
        """At e^{2r} = N/4 the squeezed variance approaches 3/4 and N*xi^2
        approaches the quoted prefactor (exact limit 32(1-e^-8)/(6+10e^-8))."""
        model = SequentialModel.special_tuning(10_000, SPECIAL_MEASUREMENT_STRENGTH)
        report = sequential_estimation(model)
        assert report["imprecision"] == pytest.approx(0.75, rel=1e-14)
        bare = wineland(model.spin_size, SqueezeParams(model.r))
        assert model.N * bare == pytest.approx(SPECIAL_PREFACTOR, rel=0.01)
        exact_limit = 32.0 * (1.0 - math.exp(-8.0)) / (6.0 + 10.0 * math.exp(-8.0))
        assert model.N * bare == pytest.approx(exact_limit, rel=1e-3)
        # imprecision matches the squeezed variance => penalty factor -> 2
        assert report["xi2_Xplus"] / bare == pytest.approx(2.0, rel=0.01)
        assert report["xi2_Yminus"] / bare == pytest.approx(
            math.cosh(SPECIAL_MEASUREMENT_STRENGTH), rel=1e-14
        )


class TestTwistingProtocol:
    """Trajectories, invariants, and optimum refinement of the benchmarks."""

    def test_validation(self):
        with pytest.raises(ValueError):
            twisting_protocol("3M1A", 2, 0.5)
        with pytest.raises(ValueError):
            twisting_protocol("2M1A", 2, 0.0)
        with pytest.raises(ValueError):
            twisting_protocol("2M1A", 2, 0.5, n_steps=8)
        with pytest.raises(ValueError):
            twisting_protocol("2M1A", 2, 0.5, combination="mirror")
        with pytest.raises(ValueError):
            twisting_protocol("2M2A", 2, 0.5, combination="sideways")

    @pytest.mark.parametrize("kind", ["2M1A", "2M2A"])
    def test_unentangled_start(self, kind):
        result = twisting_protocol(kind, 2, 1.4, n_steps=32)
        assert abs(result.xi2[0] - 1.0) < 1e-9

    def test_norm_preserved_along_trajectory(self):
        result = twisting_protocol("2M2A", 15, 0.3, n_steps=48)
        assert result.norm_error < 1e-9

    def test_two_axis_state_stays_paired(self):
        result = twisting_protocol("2M2A", 10, 0.3, n_steps=32)
        assert result.pairing_error is not None
        assert result.pairing_error < 1e-10

    def test_one_axis_reports_angle_two_axis_does_not(self):
        one = twisting_protocol("2M1A", 3, 0.8, n_steps=32)
        two = twisting_protocol("2M2A", 3, 0.8, n_steps=32)
        assert one.theta_opt is not None
        assert -math.pi / 2.0 < one.theta_opt <= math.pi / 2.0
        assert one.pairing_error is None
        assert two.theta_opt is None

    def test_optimum_improves_on_grid(self):
        result = twisting_protocol("2M2A", 8, 0.5, n_steps=24)
        assert result.xi2_opt <= min(result.xi2)
        assert 0.0 < result.t_opt < 0.5
        again = twisting_protocol("2M2A", 8, 0.5, n_steps=24)
        assert again.t_opt == result.t_opt
        assert again.xi2_opt == result.xi2_opt

    def test_mirror_combination_antisqueezes(self):
        """The orthogonal combination grows; its minimum stays at t = 0."""
        with pytest.warns(UserWarning):
            mirror = twisting_protocol("2M2A", 10, 0.4, n_steps=32, combination="mirror")
        assert mirror.t_opt == 0.0
        assert min(mirror.xi2) >= 1.0 - 1e-9
        assert max(mirror.xi2) > 5.0
        squeezed = twisting_protocol("2M2A", 10, 0.4, n_steps=32)
        assert squeezed.xi2_opt < 0.5

    def test_partner_combination_squeezes_identically(self):
        """(X- + Y-)/sqrt(2) tracks (X+ - Y+)/sqrt(2) exactly under the
        two-axis interaction."""
        quads = joint_quadratures(spin_ladder(5), spin_ladder(5))
        plus = (quads["X+"].entries - quads["Y+"].entries) / math.sqrt(2.0)
        minus = (quads["X-"].entries + quads["Y-"].entries) / math.sqrt(2.0)
        for t in (0.1, 0.25, 0.4):
            v = _twisted_state("2M2A", 5, t)
            assert _variance(v, plus) == pytest.approx(_variance(v, minus), rel=1e-10)

    def test_one_axis_squeezes_both_quadrature_pairs_equally(self):
        """The minus pair (X-, -Y-) reaches the same minimal variance as the
        plus pair (X+, Y+) under the one-axis interaction."""
        quads = joint_quadratures(spin_ladder(4), spin_ladder(4))
        v = _twisted_state("2M1A", 4, 0.2)

        def min_eig(op_a, op_b):
            av, bv = op_a @ v, op_b @ v
            m = np.array(
                [
                    [np.vdot(av, av).real, np.vdot(av, bv).real],
                    [np.vdot(av, bv).real, np.vdot(bv, bv).real],
                ]
            )
            return float(np.linalg.eigvalsh(m)[0])

        lam_plus = min_eig(quads["X+"].entries, quads["Y+"].entries)
        lam_minus = min_eig(quads["X-"].entries, -quads["Y-"].entries)
        assert lam_plus == pytest.approx(lam_minus, rel=1e-10)

    def test_closed_form_angle_matches_brute_force(self):
        result = twisting_protocol("2M1A", 4, 0.8, n_steps=48)
        quads = joint_quadratures(spin_ladder(4), spin_ladder(4))
        v = _twisted_state("2M1A", 4, result.t_opt)
        xv = quads["X+"].entries @ v
        yv = quads["Y+"].entries @ v
        mxx, myy = np.vdot(xv, xv).real, np.vdot(yv, yv).real
        mxy = np.vdot(xv, yv).real
        thetas = np.linspace(-np.pi / 2, np.pi / 2, 20001)
        scan = (
            np.sin(thetas) ** 2 * mxx
            + 2.0 * np.sin(thetas) * np.cos(thetas) * mxy
            + np.cos(thetas) ** 2 * myy
        )
        closed = (
            np.sin(result.theta_opt) ** 2 * mxx
            + 2.0 * np.sin(result.theta_opt) * np.cos(result.theta_opt) * mxy
            + np.cos(result.theta_opt) ** 2 * myy
        )
        assert closed == pytest.approx(float(scan.min()), rel=1e-7)

    def test_window_edge_warns(self):
        with pytest.warns(UserWarning):
            result = twisting_protocol("2M2A", 5, 0.05, n_steps=16)
        assert result.t_opt == pytest.approx(0.05)

    def test_result_invariants_enforced(self):
        good = twisting_protocol("2M1A", 2, 1.4, n_steps=16)
        with pytest.raises(ValueError):
            TwistingResult(
                kind=good.kind,
                spin_size=good.spin_size,
                times=good.times,
                xi2=good.xi2,
                t_opt=good.t_opt,
                xi2_opt=min(good.xi2) + 1.0,
                theta_opt=good.theta_opt,
                norm_error=good.norm_error,
                pairing_error=None,
            )
        with pytest.raises(ValueError):
            TwistingResult(
                kind=good.kind,
                spin_size=good.spin_size,
                times=(0.0, 0.1),
                xi2=(2.0, 1.0),
                t_opt=0.1,
                xi2_opt=1.0,
                theta_opt=None,
                norm_error=0.0,
                pairing_error=None,
            )


class TestScalingFits:
    """Power-law fits of the optimal squeezing versus particle number."""

    def test_one_axis_scaling(self):
        fit = twisting_scaling_fit("2M1A", [4, 6, 9, 12], n_steps=64)
        assert fit["exponent_fixed"] == pytest.approx(-2.0 / 3.0)
        assert 1.8 < fit["prefactor"] < 2.3
        assert -0.75 < fit["exponent"] < -0.58
        assert fit["r2"] > 0.99

    def test_two_axis_scaling(self):
        fit = twisting_scaling_fit("2M2A", [4, 6, 9, 12], n_steps=64)
        assert fit["exponent_fixed"] == pytest.approx(-1.0)
        assert 3.6 < fit["prefactor"] < 5.2
        assert -1.0 < fit["exponent"] < -0.7
        assert fit["r2"] > 0.99
        assert len(fit["xi2_opt"]) == len(fit["particle_numbers"]) == 4

    def test_validation(self):
        with pytest.raises(ValueError):
            twisting_scaling_fit("2M3A", [4, 6])
        with pytest.raises(ValueError):
            twisting_scaling_fit("2M1A", [4])
