# Unit tests for quantum_dynamics module
"""Tests for propagation, symmetry detectors, the fixed-k check and three-wave mixing."""

import math

import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from common.basis import BasisIndex, block_space, truncated_space
from common.coupling import REFERENCE_DIPOLE, Dipole, coupling_blocks, hamiltonian
from common.errors import DipoleError, RangeError
from common.quantum_dynamics import (
    NOT_APPLICABLE,
    ControlPulse,
    QuantumState,
    Sk_leakage,
    design_three_wave_protocol,
    detect_genuine_symmetry,
    detect_parity_symmetry,
    parity_leakage_survey,
    population_trace,
    propagate,
    propagator,
    restricted_Sk_check,
    rotated_wang_blocks,
    sector_leakage_survey,
    three_wave_design_dipole,
    three_wave_mixing_demo,
    truncation_check,
    unitarity_error,
)
from common.spectrum import REFERENCE_INERTIA


GENUINE_DIPOLE = Dipole(0.0, 0.0, 1.0)
ORTHOGONAL_DIPOLE = Dipole(0.3, 0.4, 0.0)


@pytest.fixture
def block0():
    space = block_space(0)
    H = hamiltonian(space, REFERENCE_INERTIA)
    B = coupling_blocks(space, REFERENCE_DIPOLE)
    return space, H, B


class TestControlPulse:
    """Tests for ControlPulse validation and builders."""

    def test_non_positive_duration(self):
        """Test that zero-length segments are rejected."""
        with pytest.raises(RangeError):
            ControlPulse(((0.0, (0.0, 0.0, 0.0)),))

    def test_amplitude_bound(self):
        """Test that controls above u_max are rejected."""
        with pytest.raises(RangeError):
            ControlPulse(((1.0, (1.5, 0.0, 0.0)),), u_max=1.0)

    def test_three_controls(self):
        """Test that each segment needs three controls."""
        with pytest.raises(RangeError):
            ControlPulse(((1.0, (0.1, 0.2)),))

    def test_concatenation(self):
        """Test that pulses concatenate and durations add."""
        pulse = ControlPulse.zero(2.0, 4) + ControlPulse.zero(1.0, 1)
        assert len(pulse.segments) == 5
        assert pulse.duration == pytest.approx(3.0)

    def test_random_within_bound(self):
        """Test that random pulses respect the amplitude bound."""
        pulse = ControlPulse.random(np.random.default_rng(1), 10, 0.5, u_max=0.3)
        assert all(max(abs(x) for x in u) <= 0.3 for _, u in pulse.segments)

    def test_from_carrier(self):
        """Test that a carrier drives only its field."""
        pulse = ControlPulse.from_carrier(2, frequency=1.0, phase=0.0, amplitude=0.1, duration=2 * math.pi)
        assert 40 <= len(pulse.segments) <= 41
        assert pulse.duration == pytest.approx(2 * math.pi)
        assert all(u[0] == 0.0 and u[2] == 0.0 for _, u in pulse.segments)
        assert max(abs(u[1]) for _, u in pulse.segments) <= 0.2 + 1e-12


class TestQuantumState:
    """Tests for QuantumState."""

    def test_normalization_required(self):
        """Test that unnormalized vectors are rejected."""
        with pytest.raises(RangeError):
            QuantumState(np.ones(10), block_space(0))

    def test_basis_state(self):
        """Test populations of a basis state."""
        space = block_space(0)
        state = QuantumState.basis_state(space, BasisIndex(1, 0, 0))
        assert state.population(BasisIndex(1, 0, 0)) == 1.0
        assert state.populations.sum() == pytest.approx(1.0)


class TestPropagation:
    """Tests for propagators and traces."""

    def test_zero_pulse_is_free_evolution(self, block0):
        """Test U = exp(-i H t) without controls."""
        space, H, B = block0
        U = propagator(ControlPulse.zero(3.0, 3), H, B)
        assert np.allclose(U, np.diag(np.exp(-3.0j * np.diag(H))))

    def test_unitarity(self, block0):
        """Test ||U^dagger U - I||_F < 1e-9 for a random pulse."""
        _, H, B = block0
        pulse = ControlPulse.random(np.random.default_rng(0), 50, 0.5)
        assert unitarity_error(propagator(pulse, H, B)) < 1e-9

    def test_propagate_matches_propagator(self, block0):
        """Test that propagate applies the composed unitary."""
        space, H, B = block0
        pulse = ControlPulse.random(np.random.default_rng(2), 8, 0.4)
        start = QuantumState.basis_state(space, BasisIndex(0, 0, 0))
        final = propagate(start, pulse, H, B)
        expected = propagator(pulse, H, B) @ start.coefficients
        assert np.allclose(final.coefficients, expected)

    def test_dimension_mismatch(self, block0):
        """Test that a state from another space is rejected."""
        _, H, B = block0
        state = QuantumState.basis_state(truncated_space(2), BasisIndex(0, 0, 0))
        with pytest.raises(RangeError):
            propagate(state, ControlPulse.zero(1.0), H, B)

    def test_trace_stride(self, block0):
        """Test that traces keep t=0, every stride-th segment and the end."""
        space, H, B = block0
        start = QuantumState.basis_state(space, BasisIndex(0, 0, 0))
        trace = population_trace(start, ControlPulse.zero(10.0, 10), H, B, stride=3)
        assert list(trace.times) == pytest.approx([0.0, 3.0, 6.0, 9.0, 10.0])
        assert trace.series("(0,0,0)") == pytest.approx([1.0] * 5)


class TestGenuineSymmetry:
    """Tests for the k-invariance detector and sector leakage."""

    def test_detector_conserved(self):
        """Test that an axial dipole commutes with P3 on blocks j <= 2."""
        blocks = [coupling_blocks(block_space(j), GENUINE_DIPOLE) for j in range(3)]
        report = detect_genuine_symmetry(GENUINE_DIPOLE, blocks)
        assert report.conserved
        assert report.max_violation < 1e-12
        assert report.drift < 1e-9
        assert report.zero_control_drift < 1e-9

    def test_detector_accidental(self):
        """Test that the reference dipole breaks k-invariance."""
        report = detect_genuine_symmetry(REFERENCE_DIPOLE, [coupling_blocks(block_space(0), REFERENCE_DIPOLE)])
        assert not report.conserved
        assert report.per_block[0]['commutator_norms'][0] > 0.01 * abs(REFERENCE_DIPOLE.delta2)

    def test_detector_needs_wigner(self):
        """Test that rotated blocks are rejected."""
        with pytest.raises(RangeError):
            detect_genuine_symmetry(ORTHOGONAL_DIPOLE, [rotated_wang_blocks(0, ORTHOGONAL_DIPOLE)])

    def test_sector_leakage(self):
        """Test leakage out of S_0 below 1e-9 over 100 random pulses."""
        survey = sector_leakage_survey(GENUINE_DIPOLE, REFERENCE_INERTIA, k=0, j_max=2, pulses=100)
        assert survey['max_leakage'] < 1e-9
        assert survey['max_unitarity_error'] < 1e-9

    def test_accidental_leaks(self):
        """Test that an in-plane dipole leaves S_0."""
        survey = sector_leakage_survey(REFERENCE_DIPOLE, REFERENCE_INERTIA, k=0, j_max=2, pulses=5)
        assert survey['max_leakage'] > 1e-3

    def test_sk_leakage(self):
        """Test the population outside a sector."""
        space = block_space(0)
        state = QuantumState.basis_state(space, BasisIndex(1, 1, 0))
        assert Sk_leakage(state, 1) == 0.0
        assert Sk_leakage(state, 0) == 1.0


class TestParitySymmetry:
    """Tests for the parity detector."""

    def test_orthogonal_conserved(self):
        """Test cross-parity entries below 1e-12 on blocks j <= 2."""
        blocks = [rotated_wang_blocks(j, ORTHOGONAL_DIPOLE) for j in range(3)]
        report = detect_parity_symmetry(ORTHOGONAL_DIPOLE, blocks)
        assert report.conserved
        assert report.max_violation < 1e-12
        assert report.per_block[0]['invariant_dims'] == [4, 6]

    def test_generic_not_applicable(self):
        """Test that a generic accidental dipole is not parity-conserving."""
        report = detect_parity_symmetry(REFERENCE_DIPOLE, [rotated_wang_blocks(0, REFERENCE_DIPOLE)])
        assert report.status == NOT_APPLICABLE
        assert report.max_violation > 1e-6
        assert not report.conserved

    def test_needs_wang_blocks(self):
        """Test that Wigner-basis blocks are rejected."""
        with pytest.raises(RangeError):
            detect_parity_symmetry(ORTHOGONAL_DIPOLE, [coupling_blocks(block_space(0), ORTHOGONAL_DIPOLE)])

    def test_parity_leakage(self):
        """Test that parity classes stay invariant under random pulses."""
        survey = parity_leakage_survey(ORTHOGONAL_DIPOLE, REFERENCE_INERTIA, j=1, pulses=10)
        assert survey['max_leakage'] < 1e-9


class TestRestrictedSk:
    """Tests for the fixed-k controllability check."""

    def test_k_zero_closures(self):
        """Test su(4) and su(8) on N_{0,0} and N_{1,0}."""
        result = restricted_Sk_check(0, 2, GENUINE_DIPOLE, REFERENCE_INERTIA, tol=1e-9)
        assert [b.n for b in result.blocks] == [4, 8]
        assert [b.reached_dim for b in result.blocks] == [15, 63]
        assert result.graph_linear
        assert result.verdict == 'MTracker on S_k'

    def test_needs_genuine_dipole(self):
        """Test that accidental dipoles are rejected."""
        with pytest.raises(DipoleError):
            restricted_Sk_check(0, 2, REFERENCE_DIPOLE)

    def test_k_above_truncation(self):
        """Test that |k| > j_max is rejected."""
        with pytest.raises(RangeError):
            restricted_Sk_check(3, 2, GENUINE_DIPOLE)


class TestTruncationCheck:
    """Tests for the truncation comparison."""

    def test_keys(self):
        """Test that the comparison reports both measures."""
        pulse = ControlPulse.random(np.random.default_rng(0), 4, 0.5, u_max=0.2)
        result = truncation_check(REFERENCE_DIPOLE, REFERENCE_INERTIA, 1, pulse)
        assert result['max_population_change'] >= 0.0
        assert 0.0 <= result['boundary_population'] <= 1.0

    @pytest.mark.parametrize('j_max', [1, 2])
    def test_short_time_bound(self, j_max):
        """Test that doubling J_max moves low-level populations by less than 1e-4 over a short pulse."""
        pulse = ControlPulse.random(np.random.default_rng(3), 4, 0.05, u_max=0.1)
        result = truncation_check(REFERENCE_DIPOLE, REFERENCE_INERTIA, j_max, pulse)
        assert result['max_population_change'] < 1e-4
        assert result['boundary_population'] < 1e-2


@pytest.fixture(scope='module')
def three_wave():
    """Tuned protocol on (1, 1, 1) with the reference dipole."""
    protocol = design_three_wave_protocol(1, 1, 1, REFERENCE_DIPOLE, REFERENCE_INERTIA)
    return protocol, three_wave_mixing_demo(1, 1, 1, REFERENCE_DIPOLE, REFERENCE_INERTIA, protocol=protocol)


class TestThreeWave:
    """Tests for the three-wave mixing demo."""

    def test_label_validation(self):
        """Test that k=0 and m=0 are rejected."""
        with pytest.raises(RangeError, match="no k-degeneracy"):
            three_wave_mixing_demo(1, 0, 1, REFERENCE_DIPOLE, REFERENCE_INERTIA)
        with pytest.raises(RangeError):
            three_wave_mixing_demo(1, 1, 0, REFERENCE_DIPOLE, REFERENCE_INERTIA)

    def test_protocol_steps(self, three_wave):
        """Test the sigma, lambda and eta carriers."""
        protocol, _ = three_wave
        assert [s.name for s in protocol.steps] == ['sigma', 'lambda', 'eta']
        assert all(s.l_index == 3 for s in protocol.steps)
        assert 'eta_phase' in protocol.tuning
        assert protocol.to_dict()['note']

    def test_accidental_asymmetry(self, three_wave):
        """Test |p_k - p_-k| > 0.1 on a generic accidental top."""
        _, result = three_wave
        assert result.asymmetry > 0.1
        assert result.unitarity_error < 1e-9

    def test_genuine_replay_symmetric(self, three_wave):
        """Test that the same protocol on a genuine top leaves p_k = p_-k."""
        protocol, _ = three_wave
        result = three_wave_mixing_demo(1, 1, 1, Dipole(0.0, 0.0, 0.3), REFERENCE_INERTIA, protocol=protocol)
        assert result.asymmetry < 1e-6
        assert result.dipole_kind == 'Genuine'

    def test_genuine_design_rejected(self):
        """Test that a genuine top has no lambda coupling to design with."""
        with pytest.raises(DipoleError):
            design_three_wave_protocol(1, 1, 1, GENUINE_DIPOLE, REFERENCE_INERTIA)

    def test_design_dipole(self):
        """Test that only generic accidental dipoles are designed on as given."""
        assert three_wave_design_dipole(REFERENCE_DIPOLE) == REFERENCE_DIPOLE
        design = three_wave_design_dipole(GENUINE_DIPOLE)
        assert design.kind == 'GenericAccidental'
        assert design.delta3 == GENUINE_DIPOLE.delta3
        assert three_wave_design_dipole(ORTHOGONAL_DIPOLE).in_plane_norm == ORTHOGONAL_DIPOLE.in_plane_norm

    def test_genuine_demo_replays(self):
        """Test that the demo on a genuine top designs elsewhere and stays symmetric."""
        result = three_wave_mixing_demo(1, 1, 1, GENUINE_DIPOLE, REFERENCE_INERTIA)
        assert result.replayed
        assert result.protocol.design_dipole == three_wave_design_dipole(GENUINE_DIPOLE)
        assert result.asymmetry < 1e-6
        exported = result.to_dict()
        assert exported['replayed'] is True
        assert exported['protocol']['design_dipole'] == [0.0, 0.2, 1.0]

    def test_accidental_demo_not_replayed(self, three_wave):
        """Test that a protocol designed on the simulated dipole is not marked replayed."""
        protocol, result = three_wave
        assert protocol.design_dipole == REFERENCE_DIPOLE
        assert not result.replayed

    def test_protocol_label_mismatch(self, three_wave):
        """Test that a protocol is bound to its labels."""
        protocol, _ = three_wave
        with pytest.raises(RangeError):
            three_wave_mixing_demo(2, 1, 1, REFERENCE_DIPOLE, REFERENCE_INERTIA, protocol=protocol)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
