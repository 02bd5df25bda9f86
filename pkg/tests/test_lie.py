# Unit tests for lie module
"""Tests for Lie closures, excited modes and block verdicts."""

import os

import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from common.coupling import REFERENCE_DIPOLE, Dipole
from common.errors import ClosureError, RangeError
from common.lie import (
    INCONCLUSIVE,
    MTRACKER,
    SYMMETRY_BLOCKED,
    apply_W,
    block_graph_connected,
    block_ideal,
    commutator,
    extract_E,
    ideal_residual,
    lgtc_verdict,
    lie_closure,
    minimal_ideal,
    pauli_D,
    pauli_F,
    pauli_G,
)
from common.spectrum import REFERENCE_INERTIA, Inertia, sigma_gap


FULL_SUITE = os.environ.get('SYMTOP_FULL') == '1'


@pytest.fixture(scope='module')
def reference_verdict():
    """Tracking condition on levels 0..1 with the reference parameters."""
    return lgtc_verdict(1, REFERENCE_DIPOLE, REFERENCE_INERTIA, tol=1e-9)


class TestLieClosure:
    """Tests for lie_closure on small algebras."""

    def test_su2(self):
        """Test that G and F on one pair generate su(2)."""
        span = lie_closure([pauli_G(0, 1, 2), pauli_F(0, 1, 2)], tol=1e-9)
        assert span.dim == 3
        assert span.is_full

    def test_su3_from_chain(self):
        """Test that a connected chain of pairs generates su(3)."""
        generators = [pauli_G(0, 1, 3), pauli_F(0, 1, 3), pauli_G(1, 2, 3), pauli_F(1, 2, 3)]
        span = lie_closure(generators, tol=1e-9)
        assert span.dim == 8
        assert span.gram_error() < 1e-10

    def test_abelian(self):
        """Test that commuting diagonal generators stay two-dimensional."""
        span = lie_closure([pauli_D(0, 1, 3), pauli_D(1, 2, 3)], tol=1e-9)
        assert span.dim == 2

    def test_unitary_conjugation_invariance(self):
        """Test that conjugating every generator by one unitary keeps the dimension."""
        rng = np.random.default_rng(7)
        Q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        generators = [pauli_G(0, 1, 4), pauli_F(1, 2, 4), pauli_G(2, 3, 4)]
        conjugated = [Q @ M @ Q.conj().T for M in generators]
        assert lie_closure(conjugated, tol=1e-9).dim == lie_closure(generators, tol=1e-9).dim

    def test_scaling_invariance(self):
        """Test that rescaling generators by positive reals keeps the dimension."""
        generators = [pauli_G(0, 1, 3), pauli_G(1, 2, 3)]
        scaled = [3.5 * generators[0], 0.02 * generators[1]]
        assert lie_closure(scaled, tol=1e-9).dim == lie_closure(generators, tol=1e-9).dim == 3

    def test_rejects_hermitian(self):
        """Test that non skew-Hermitian generators are rejected."""
        with pytest.raises(ClosureError):
            lie_closure([np.array([[0.0, 1.0], [1.0, 0.0]])], tol=1e-9)

    def test_rejects_empty(self):
        """Test that an empty generator list is rejected."""
        with pytest.raises(ClosureError):
            lie_closure([], tol=1e-9)


class TestMinimalIdeal:
    """Tests for minimal_ideal."""

    def test_ideal_of_simple_algebra(self):
        """Test that any non-zero element of su(2) generates all of it."""
        ambient = lie_closure([pauli_G(0, 1, 2), pauli_F(0, 1, 2)], tol=1e-9)
        ideal = minimal_ideal([pauli_D(0, 1, 2)], ambient, tol=1e-9)
        assert ideal.dim == 3

    def test_ideal_of_direct_sum(self):
        """Test that D_01 generates only the first su(2) of su(2) + su(2)."""
        ambient = lie_closure(
            [pauli_G(0, 1, 4), pauli_F(0, 1, 4), pauli_G(2, 3, 4), pauli_F(2, 3, 4)], tol=1e-9
        )
        assert ambient.dim == 6
        ideal = minimal_ideal([pauli_D(0, 1, 4)], ambient, tol=1e-9)
        assert ideal.dim == 3
        assert ideal.contains(pauli_G(0, 1, 4))
        assert not ideal.contains(pauli_G(2, 3, 4))

    @pytest.mark.parametrize('seed_element', [
        [pauli_D(0, 1, 4)],
        [pauli_G(0, 1, 4) + pauli_F(2, 3, 4)],
    ])
    def test_output_is_ideal(self, seed_element):
        """Test that [b, t] stays inside the ideal for every basis pair."""
        tol = 1e-9
        ambient = lie_closure(
            [pauli_G(0, 1, 4), pauli_F(0, 1, 4), pauli_G(2, 3, 4), pauli_F(2, 3, 4)], tol=tol
        )
        ideal = minimal_ideal(seed_element, ambient, tol=tol)
        assert ideal_residual(ideal, ambient) < 10 * tol

    def test_element_outside_ambient(self):
        """Test that nu0 must lie in the ambient algebra."""
        ambient = lie_closure([pauli_D(0, 1, 3)], tol=1e-9)
        with pytest.raises(ClosureError):
            minimal_ideal([pauli_G(0, 2, 3)], ambient, tol=1e-9)


class TestModeOperators:
    """Tests for extract_E and apply_W."""

    def test_extract_label_mismatch(self):
        """Test that labels must match the matrix size."""
        with pytest.raises(RangeError):
            extract_E(sigma_gap(0), np.zeros((2, 2)), [(0, 0)])

    def test_extract_keeps_resonant_entries(self):
        """Test that only pairs at the requested gap survive."""
        labels = [(0, 0), (1, 0), (1, 1)]
        M = np.ones((3, 3), dtype=complex)
        masked = extract_E(sigma_gap(0), M, labels)
        assert masked[0, 1] == 1 and masked[1, 0] == 1
        assert masked[0, 2] == 0 and masked[1, 2] == 0

    def test_apply_W_phases(self):
        """Test xi above the diagonal in energy order and conj(xi) below."""
        M = np.array([[0, 1], [-1, 0]], dtype=complex)
        W = apply_W(1j, M, [0.0, 1.0])
        assert W[0, 1] == pytest.approx(1j)
        assert W[1, 0] == pytest.approx(1j)

    def test_apply_W_drops_degenerate(self):
        """Test that degenerate pairs are removed."""
        M = np.array([[0, 1], [-1, 0]], dtype=complex)
        assert np.all(apply_W(1.0, M, [0.5, 0.5]) == 0)

    def test_apply_W_unit_modulus(self):
        """Test that xi must have modulus one."""
        with pytest.raises(RangeError):
            apply_W(2.0, np.zeros((2, 2)), [0.0, 1.0])

    def test_apply_W_on_G(self):
        """Test W_i(G) = F and W_{-i}(G) = -F for an energy-ordered pair."""
        G, F = pauli_G(0, 1, 2), pauli_F(0, 1, 2)
        assert np.allclose(apply_W(1j, G, [0.0, 1.0]), F)
        assert np.allclose(apply_W(-1j, G, [0.0, 1.0]), -F)

    def test_apply_W_on_F(self):
        """Test W_i(F) = -G."""
        assert np.allclose(apply_W(1j, pauli_F(0, 1, 2), [0.0, 1.0]), -pauli_G(0, 1, 2))

    def test_apply_W_identity_phase(self):
        """Test that xi = 1 leaves non-degenerate entries unchanged."""
        M = pauli_G(0, 2, 3) + pauli_F(1, 2, 3)
        assert np.allclose(apply_W(1.0, M, [0.0, 1.0, 2.0]), M)

    def test_extract_adjoint(self):
        """Test that masking commutes with the adjoint."""
        labels = [(0, 0), (1, 0), (1, 1)]
        rng = np.random.default_rng(0)
        M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        sigma = sigma_gap(0)
        assert np.allclose(extract_E(sigma, M, labels).conj().T, extract_E(sigma, M.conj().T, labels))


class TestBracketIdentities:
    """Tests for commutators of the G, F, D matrices."""

    def test_G_F_gives_D(self):
        """Test [G_ab, F_ab] = 2 D_ab."""
        assert np.allclose(commutator(pauli_G(0, 1, 3), pauli_F(0, 1, 3)), 2 * pauli_D(0, 1, 3))

    def test_F_D_gives_G(self):
        """Test [F_ab, D_ab] = 2 G_ab."""
        assert np.allclose(commutator(pauli_F(0, 1, 3), pauli_D(0, 1, 3)), 2 * pauli_G(0, 1, 3))

    def test_chain_relations(self):
        """Test the relations along a chain a, b, c."""
        assert np.allclose(commutator(pauli_G(0, 1, 3), pauli_G(1, 2, 3)), pauli_G(0, 2, 3))
        assert np.allclose(commutator(pauli_F(0, 1, 3), pauli_F(1, 2, 3)), -pauli_G(0, 2, 3))
        assert np.allclose(commutator(pauli_G(0, 1, 3), pauli_F(1, 2, 3)), pauli_F(0, 2, 3))

    def test_disjoint_commute(self):
        """Test that matrices on disjoint pairs commute."""
        assert np.allclose(commutator(pauli_G(0, 1, 4), pauli_F(2, 3, 4)), 0)

    def test_so3_from_real_chain(self):
        """Test that G_12 and G_23 close on so(3), not su(3)."""
        span = lie_closure([pauli_G(0, 1, 3), pauli_G(1, 2, 3)], tol=1e-9)
        assert span.dim == 3
        assert not span.is_full

    def test_closure_order_independent(self):
        """Test that reordering generators keeps the dimension."""
        generators = [pauli_G(0, 1, 3), pauli_F(1, 2, 3), pauli_D(0, 2, 3)]
        assert lie_closure(generators, tol=1e-9).dim == lie_closure(generators[::-1], tol=1e-9).dim


class TestBlockGraph:
    """Tests for block graph connectivity."""

    def test_connected(self):
        """Test that consecutive blocks share a level."""
        assert block_graph_connected(1)
        assert block_graph_connected(3)

    def test_empty(self):
        """Test that no blocks means no connected graph."""
        assert not block_graph_connected(0)


class TestBlockIdeal:
    """Tests for block ideals and verdicts."""

    def test_block_zero_su10(self, reference_verdict):
        """Test that T_0 reaches dim su(10) = 99."""
        block = reference_verdict.blocks[0]
        assert block.n == 10
        assert block.su_dim == 99
        assert block.reached_dim == 99
        assert block.reached

    def test_reference_verdict(self, reference_verdict):
        """Test the MTracker verdict on levels 0..1."""
        assert reference_verdict.verdict == MTRACKER
        assert reference_verdict.label == MTRACKER
        assert reference_verdict.to_dict()['blocks'][0]['reached_dim'] == 99

    @pytest.mark.skipif(not FULL_SUITE, reason="set SYMTOP_FULL=1 for the su(34) closure")
    def test_block_one_su34(self):
        """Test that T_1 reaches dim su(34) = 1155."""
        result = block_ideal(1, 3, REFERENCE_DIPOLE, REFERENCE_INERTIA, tol=1e-9)
        assert result.reached_dim == 1155
        assert result.reached

    def test_genuine_blocked(self):
        """Test that an axial dipole is reported as k-invariant."""
        verdict = lgtc_verdict(1, Dipole(0.0, 0.0, 1.0), REFERENCE_INERTIA)
        assert verdict.verdict == SYMMETRY_BLOCKED
        assert verdict.label == "SymmetryBlocked: k-invariance"
        assert verdict.blocks == []

    def test_orthogonal_blocked(self):
        """Test that an in-plane dipole is reported as parity-conserving."""
        verdict = lgtc_verdict(1, Dipole(0.3, 0.4, 0.0), REFERENCE_INERTIA)
        assert verdict.verdict == SYMMETRY_BLOCKED
        assert verdict.kind == 'parity'

    def test_rational_ratio_inconclusive(self):
        """Test that rational-ratio mode gives no verdict."""
        inertia = Inertia(1.0, 0.5, resonance_exact=False)
        verdict = lgtc_verdict(1, REFERENCE_DIPOLE, inertia)
        assert verdict.verdict == INCONCLUSIVE
        assert verdict.notes

    def test_j_max_too_small(self):
        """Test that at least one block is required."""
        with pytest.raises(RangeError):
            lgtc_verdict(0, REFERENCE_DIPOLE, REFERENCE_INERTIA)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
