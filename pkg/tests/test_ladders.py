"""Tests for ladder construction, quadratures, embedding, and serialization."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sparse

from pairsqueeze.ladders import (
    BipartiteOperator,
    boson_ladder,
    custom_ladder,
    embed,
    joint_quadratures,
    ladder_from_json,
    ladder_to_json,
    lowering_operator,
    make_ladder,
    quadrature_set,
    spin_ladder,
    two_photon_ladder,
)


def commutator(a, b):
    return a @ b - b @ a


class TestLadderConstruction:
    def test_spin_half_coefficients(self):
        """Spin-1/2 lowering elements are exactly [0, 1]."""
        spec = spin_ladder(0.5)
        assert spec.m_max == 1
        assert spec.coeffs == (0.0, 1.0)

    def test_spin_nine_halves_first_element(self):
        """S = 9/2 has o(1) = sqrt(2S) = 3 exactly."""
        spec = spin_ladder("9/2")
        assert spec.m_max == 9
        assert spec.coeffs[1] == pytest.approx(3.0, abs=1e-15)

    def test_spin_coefficients_match_m_form(self):
        """o(m)^2 = m(2S + 1 - m) for collective spins."""
        spec = spin_ladder(3)
        m = np.arange(spec.dim, dtype=float)
        expected = np.sqrt(m * (2 * 3 + 1 - m))
        assert np.allclose(spec.coeff_array(), expected, atol=1e-12)

    def test_boson_coefficients(self):
        spec = boson_ladder(5)
        assert np.allclose(spec.coeff_array(), np.sqrt(np.arange(6.0)), atol=0)

    def test_two_photon_coefficients(self):
        """Photon-pair elements sqrt(2m(2m-1)): [0, sqrt2, sqrt12, sqrt30, sqrt56]."""
        spec = two_photon_ladder(4)
        expected = [0.0, math.sqrt(2), math.sqrt(12), math.sqrt(30), math.sqrt(56)]
        assert np.allclose(spec.coeff_array(), expected, atol=1e-15)

    def test_custom_roundtrip(self):
        spec = custom_ladder([0.0, 1.5, 0.5])
        assert spec.kind == "custom"
        assert spec.m_max == 2

    def test_make_ladder_dispatch(self):
        assert make_ladder("spin", 1).kind == "spin"
        assert make_ladder("truncated_boson", 3).kind == "truncated_boson"
        assert make_ladder("two_photon", 3).kind == "two_photon"
        assert make_ladder("custom", [0, 1]).kind == "custom"

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            make_ladder("spin", 0.3)  # not a half-integer
        with pytest.raises(ValueError):
            make_ladder("truncated_boson", 0)
        with pytest.raises(ValueError):
            make_ladder("custom", [1.0, 2.0])  # o(0) != 0
        with pytest.raises(ValueError):
            make_ladder("widget", 2)

    def test_spin_size_property(self):
        assert spin_ladder("9/2").spin_size == 4.5
        with pytest.raises(ValueError):
            boson_ladder(2).spin_size


class TestLoweringOperator:
    def test_annihilates_ground_state(self):
        """O|0> is exactly the zero vector (no roundoff allowed)."""
        spec = spin_ladder(2)
        low = lowering_operator(spec).entries
        ground = np.zeros(spec.dim, dtype=complex)
        ground[0] = 1.0
        assert np.all(low @ ground == 0.0)

    def test_nonzero_count(self):
        """Exactly m_max stored nonzeros on the first superdiagonal."""
        for spec in (spin_ladder(2.5), boson_ladder(7), two_photon_ladder(4)):
            low = lowering_operator(spec).entries
            assert low.nnz == spec.m_max

    def test_matrix_elements(self):
        spec = boson_ladder(4)
        low = lowering_operator(spec).dense()
        for m in range(1, spec.dim):
            assert low[m - 1, m] == pytest.approx(math.sqrt(m), abs=1e-15)


class TestQuadratures:
    @pytest.mark.parametrize(
        "spec",
        [spin_ladder(0.5), spin_ladder("9/2"), boson_ladder(16), two_photon_ladder(12)],
        ids=["spin-1/2", "spin-9/2", "boson-16", "two-photon-12"],
    )
    def test_xy_commutator(self, spec):
        """[X,Y] = iZ holds for every ladder kind (algebraic identity in O)."""
        X, Y, Z = (q.dense() for q in quadrature_set(spec))
        assert np.max(np.abs(commutator(X, Y) - 1j * Z)) < 1e-12

    @pytest.mark.parametrize("S", [0.5, 2, "9/2"])
    def test_spin_closes_su2(self, S):
        """Only spin ladders close the full algebra: [Z,X] = iY, [Y,Z] = iX."""
        X, Y, Z = (q.dense() for q in quadrature_set(spin_ladder(S)))
        assert np.max(np.abs(commutator(Z, X) - 1j * Y)) < 1e-12
        assert np.max(np.abs(commutator(Y, Z) - 1j * X)) < 1e-12

    def test_boson_does_not_close_su2(self):
        """Truncated boson: [Z,X] != iY (Z is nearly constant), a deliberate contrast."""
        X, Y, Z = (q.dense() for q in quadrature_set(boson_ladder(6)))
        assert np.max(np.abs(commutator(Z, X) - 1j * Y)) > 0.1

    @pytest.mark.parametrize("m_max", [16, 64])
    def test_commutators_large_cutoff(self, m_max):
        spec = boson_ladder(m_max)
        X, Y, Z = (q.entries for q in quadrature_set(spec))
        dev = commutator(X, Y) - 1j * Z
        assert abs(dev).max() < 1e-12 if dev.nnz else True

    def test_hermiticity(self):
        spec = two_photon_ladder(8)
        for q in quadrature_set(spec):
            dev = q.entries - q.entries.conj().T
            assert dev.nnz == 0 or abs(dev).max() < 1e-12

    def test_quadratic_identities(self):
        """O^dag O = X^2 + Y^2 + Z and O O^dag = X^2 + Y^2 - Z."""
        spec = spin_ladder(1.5)
        low = lowering_operator(spec).entries.toarray()
        X, Y, Z = (q.dense() for q in quadrature_set(spec))
        num = low.conj().T @ low
        assert np.max(np.abs(num - (X @ X + Y @ Y + Z))) < 1e-12
        assert np.max(np.abs(low @ low.conj().T - (X @ X + Y @ Y - Z))) < 1e-12

    def test_spin_z_is_shifted_number(self):
        """For spins, Z has eigenvalues m - S on the ladder basis."""
        spec = spin_ladder(2)
        _, _, Z = quadrature_set(spec)
        diag = np.real(Z.dense().diagonal())
        assert np.allclose(diag, np.arange(spec.dim) - 2.0, atol=1e-12)


class TestEmbedding:
    def test_basis_ordering(self):
        """Embedded slot-1 operator acts on the slow index (m1 * d2 + m2)."""
        s1, s2 = boson_ladder(2), boson_ladder(3)
        low = lowering_operator(s1)
        big = embed(low, 1, s2).dense()
        # <(0,m2)| O1 |(1,m2)> = o(1) = 1 for every m2
        d2 = s2.dim
        for m2 in range(d2):
            assert big[0 * d2 + m2, 1 * d2 + m2] == pytest.approx(1.0)
        # no coupling between different m2 columns
        assert big[0 * d2 + 0, 1 * d2 + 1] == 0.0

    def test_frobenius_norm_scaling(self):
        """||A x I||_F = ||A||_F * sqrt(dim of identity factor)."""
        s1, s2 = spin_ladder(1), boson_ladder(4)
        X, _, _ = quadrature_set(s1)
        base = sparse.linalg.norm(X.entries)
        lifted1 = embed(X, 1, s2)
        lifted2 = embed(X, 2, s2)
        assert sparse.linalg.norm(lifted1.entries) == pytest.approx(
            base * math.sqrt(s2.dim), rel=1e-13
        )
        assert sparse.linalg.norm(lifted2.entries) == pytest.approx(
            base * math.sqrt(s2.dim), rel=1e-13
        )

    def test_slot_validation(self):
        s = spin_ladder(0.5)
        with pytest.raises(ValueError):
            embed(lowering_operator(s), 3, s)

    def test_hermitian_flag_validation(self):
        s = spin_ladder(0.5)
        low = embed(lowering_operator(s), 1, s)
        with pytest.raises(ValueError):
            BipartiteOperator(low.dims, low.entries, hermitian=True)


class TestJointQuadratures:
    def test_keys_and_hermiticity(self):
        ops = joint_quadratures(spin_ladder(1), spin_ladder(1))
        assert set(ops) == {"X+", "X-", "Y+", "Y-", "Z+", "Z-"}
        for op in ops.values():
            assert op.hermitian

    def test_mixed_commutator_is_z_difference(self):
        """[X-, Y+] = i(Z1 - Z2) = i Z- on the product space."""
        s1, s2 = spin_ladder(1.5), spin_ladder(1.5)
        ops = joint_quadratures(s1, s2)
        lhs = commutator(ops["X-"].dense(), ops["Y+"].dense())
        assert np.max(np.abs(lhs - 1j * ops["Z-"].dense())) < 1e-12

    def test_plus_pair_commutator(self):
        """[X+, Y+] = i(Z1 + Z2) = i Z+."""
        s = boson_ladder(5)
        ops = joint_quadratures(s, s)
        lhs = commutator(ops["X+"].dense(), ops["Y+"].dense())
        assert np.max(np.abs(lhs - 1j * ops["Z+"].dense())) < 1e-12

    def test_heterogeneous_pair(self):
        """A spin can be paired with a boson; shapes follow (d1, d2)."""
        s1, s2 = spin_ladder(1), boson_ladder(3)
        ops = joint_quadratures(s1, s2)
        assert ops["X+"].dims == (3, 4)
        assert ops["X+"].entries.shape == (12, 12)


class TestSerialization:
    @pytest.mark.parametrize(
        "spec",
        [spin_ladder("7/2"), boson_ladder(6), two_photon_ladder(5), custom_ladder([0, 2, 1])],
        ids=["spin", "boson", "two-photon", "custom"],
    )
    def test_roundtrip(self, spec):
        clone = ladder_from_json(ladder_to_json(spec))
        assert clone == spec

    def test_tampered_coeffs_rejected(self):
        import json

        payload = json.loads(ladder_to_json(boson_ladder(3)))
        payload["coeffs"][2] = 99.0
        with pytest.raises(ValueError):
            ladder_from_json(json.dumps(payload))
