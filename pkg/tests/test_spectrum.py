# Unit tests for spectrum module
"""Tests for energies, exact gaps and resonance classification."""

import pytest
from fractions import Fraction
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from common.basis import block_space
from common.errors import ClassificationError, RangeError
from common.spectrum import (
    ETA,
    LAMBDA,
    REFERENCE_INERTIA,
    SIGMA,
    Inertia,
    classify_resonances,
    energy,
    eta_gap,
    gap,
    gap_coeff,
    gap_kind,
    gap_mask,
    lambda_gap,
    resonance_report,
    selection_pairs,
    sigma_gap,
    verify_lemma_ext,
    verify_lemma_important,
)


@pytest.fixture
def prolate():
    """I2 = 2, I3 = 1: anisotropy coefficient 1/4."""
    return Inertia(2.0, 1.0)


class TestInertia:
    """Tests for Inertia validation."""

    def test_non_positive_moment(self):
        """Test that zero or negative moments are rejected."""
        with pytest.raises(RangeError):
            Inertia(0.0, 1.0)
        with pytest.raises(RangeError):
            Inertia(1.0, -1.0)

    def test_beta(self, prolate):
        """Test the inverse moments used by the classical fields."""
        assert prolate.beta == (0.5, 0.5, 1.0)
        assert prolate.anisotropy == pytest.approx(0.25)


class TestEnergy:
    """Tests for rotational energies."""

    def test_values(self, prolate):
        """Test E = j(j+1)/(2 I2) + anisotropy * k^2."""
        assert energy(prolate, 0, 0) == 0.0
        assert energy(prolate, 1, 0) == pytest.approx(0.5)
        assert energy(prolate, 1, 1) == pytest.approx(0.75)
        assert energy(prolate, 1, -1) == energy(prolate, 1, 1)

    def test_invalid_k(self, prolate):
        """Test that |k| > j is rejected."""
        with pytest.raises(RangeError):
            energy(prolate, 1, 2)


class TestGapCoeff:
    """Tests for exact gap coordinates."""

    def test_sign_normalized_equality(self):
        """Test that a gap equals its reverse."""
        up = gap_coeff((0, 0), (1, 0))
        down = gap_coeff((1, 0), (0, 0))
        assert up == down
        assert len({up, down}) == 1
        assert up == sigma_gap(0)

    def test_family_coordinates(self):
        """Test the (q1, q2) pairs of the three families."""
        assert lambda_gap(0, 0).key == (Fraction(1), Fraction(1))
        assert eta_gap(1).key == (Fraction(0), Fraction(3))
        assert sigma_gap(2).key == (Fraction(3), Fraction(0))

    def test_eta_mirror(self):
        """Test that eta_k and eta_{-k-1} coincide."""
        assert eta_gap(0) == eta_gap(-1)
        assert eta_gap(1) == eta_gap(-2)

    def test_values_match_energies(self, prolate):
        """Test that evaluated gaps agree with energy differences."""
        lam = lambda_gap(0, 0, prolate)
        assert lam.value == pytest.approx(energy(prolate, 1, 1) - energy(prolate, 0, 0))
        eta = eta_gap(0, prolate)
        assert eta.value == pytest.approx(energy(prolate, 1, 1) - energy(prolate, 1, 0))
        sig = sigma_gap(1, prolate)
        assert sig.value == pytest.approx(energy(prolate, 2, 1) - energy(prolate, 1, 1))

    def test_to_dict(self):
        """Test the exported form of a gap."""
        assert sigma_gap(0).to_dict() == {'q1': '1', 'q2': '0', 'value': None}

    def test_gap_handles(self, prolate):
        """Test gap() on (j, k) handles and its range check."""
        assert gap(prolate, (0, 0), (1, 1)).value == pytest.approx(0.75)
        assert gap(prolate, (1, 1), (0, 0)) == lambda_gap(0, 0)
        with pytest.raises(RangeError):
            gap(prolate, (1, 2), (2, 2))


class TestGapKind:
    """Tests for family recognition."""

    def test_families(self):
        """Test that each family is recognized with its parameters."""
        assert gap_kind(lambda_gap(0, 0)).kind == LAMBDA
        assert gap_kind(lambda_gap(0, 0)).params == (0, 0)
        assert gap_kind(eta_gap(2)).kind == ETA
        assert gap_kind(eta_gap(2)).params == (2,)
        assert gap_kind(sigma_gap(1)).kind == SIGMA
        assert gap_kind(sigma_gap(1)).params == (1,)

    def test_negative_k_lambda(self):
        """Test that lambda with negative k keeps its k."""
        kind = gap_kind(lambda_gap(1, -1))
        assert kind.kind == LAMBDA
        assert kind.params == (1, -1)


class TestGapMask:
    """Tests for the exact masking used by extract_E."""

    def test_sigma_mask_block_zero(self):
        """Test that sigma^0 selects (0,0,0) <-> (1,0,m) only."""
        space = block_space(0)
        mask = gap_mask(sigma_gap(0), space.spectral_labels())
        ground = space.index_of(0, 0, 0)
        targets = {space.index_of(1, 0, m) for m in (-1, 0, 1)}
        assert set(mask[ground].nonzero()[0]) == targets
        assert (mask == mask.T).all()
        assert not mask[ground, space.index_of(1, 1, 0)]


class TestResonanceClassification:
    """Tests for resonance classification and the lemmas."""

    def test_rational_mode_rejected(self):
        """Test that classification needs irrational-ratio mode."""
        inertia = Inertia(1.0, 0.5, resonance_exact=False)
        with pytest.raises(ClassificationError):
            classify_resonances(inertia, 0, sigma_gap(0), 2)

    def test_j_max_too_small(self):
        """Test that j_max must leave room above the block."""
        with pytest.raises(RangeError):
            classify_resonances(REFERENCE_INERTIA, 1, sigma_gap(1), 2)

    def test_sigma_confined(self):
        """Test that sigma^0 never leaves block M_0."""
        report = classify_resonances(REFERENCE_INERTIA, 0, sigma_gap(0), 3)
        assert report.inside
        assert report.xi0 and report.xi1

    def test_lambda_ground_block(self):
        """Test that lambda_0^0 only drives (0,0) to (1,+-1) inside M_0."""
        report = classify_resonances(REFERENCE_INERTIA, 0, lambda_gap(0, 0), 4)
        assert report.xi0
        pairs = {frozenset({(a.j, a.k), (b.j, b.k)}) for a, b in report.inside}
        assert pairs == {frozenset({(0, 0), (1, 1)}), frozenset({(0, 0), (1, -1)})}

    def test_eta_off_boundary(self):
        """Test that eta_0 on M_1 stays off the boundary but reaches outside levels."""
        report = classify_resonances(REFERENCE_INERTIA, 1, eta_gap(0), 4)
        assert report.xi1
        assert not report.xi0

    def test_sigma_block_one(self):
        """Test that sigma^1 is confined to M_1."""
        assert classify_resonances(REFERENCE_INERTIA, 1, sigma_gap(1), 4).xi0

    def test_lemma_important(self):
        """Test the exhaustive gap lemma up to J_max = 4."""
        ok, counterexamples = verify_lemma_important(REFERENCE_INERTIA, 4)
        assert ok
        assert counterexamples == []

    @pytest.mark.parametrize('j', [0, 1, 2])
    def test_lemma_ext(self, j):
        """Test block memberships of the family gaps."""
        ok, failures = verify_lemma_ext(REFERENCE_INERTIA, j, j + 2)
        assert ok, failures

    def test_float_soundness(self):
        """Test that distinct exact gaps stay separated once evaluated in floating point."""
        values = {}
        for a, b in selection_pairs(4):
            coeff = gap_coeff(a, b)
            if not coeff.is_zero:
                values[coeff] = coeff.evaluate(REFERENCE_INERTIA)
        ordered = sorted(values.values())
        smallest = ordered[0]
        assert smallest > 0.0
        assert min(hi - lo for lo, hi in zip(ordered, ordered[1:])) > 1e-9 * smallest

    def test_resonant_pairs_match_in_float(self):
        """Test that every transition grouped with a gap has that gap's float value."""
        sigma = sigma_gap(0, REFERENCE_INERTIA)
        report = classify_resonances(REFERENCE_INERTIA, 0, sigma, 4)
        for a, b in report.inside + report.boundary + report.outside:
            assert abs(gap_coeff(a, b, REFERENCE_INERTIA).value - sigma.value) < 1e-12

    def test_resonance_report(self):
        """Test that the report lists every gap with its family."""
        report = resonance_report(REFERENCE_INERTIA, 0, 2)
        assert report['j'] == 0
        assert report['gaps']
        kinds = {entry['kind'].split('(')[0] for entry in report['gaps']}
        assert {LAMBDA, ETA, SIGMA} <= kinds
        assert all(entry['n_transitions'] > 0 for entry in report['gaps'])


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
