# Spectrum module
"""
Rotational energies, exact spectral gaps and resonance classification.

A gap between (j, k) and (j', k') is stored as the exact pair
(q1, q2) over the basis {1/I2, 1/(2 I3) - 1/(2 I2)}:

    q1 = (j'(j'+1) - j(j+1)) / 2,   q2 = k'^2 - k^2

Under the assumption that I2/I3 is irrational two gaps coincide exactly
when (q1, q2) = +-(q1', q2'), which makes the classification float-free.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .basis import BasisIndex, BlockSpace, block_space, level_indices
from .errors import ClassificationError, RangeError

logger = logging.getLogger(__name__)


LAMBDA = 'Lambda'
ETA = 'Eta'
SIGMA = 'Sigma'
OTHER = 'Other'


@dataclass(frozen=True)
class Inertia:
    """Principal moments of a symmetric top (I1 = I2)."""

    I2: float
    I3: float
    resonance_exact: bool = True

    def __post_init__(self):
        if not self.I2 > 0:
            raise RangeError('I2', f"must be positive, got {self.I2}")
        if not self.I3 > 0:
            raise RangeError('I3', f"must be positive, got {self.I3}")

    @property
    def anisotropy(self) -> float:
        """Coefficient 1/(2 I3) - 1/(2 I2) multiplying k^2."""
        return 0.5 / self.I3 - 0.5 / self.I2

    @property
    def beta(self) -> Tuple[float, float, float]:
        return (1.0 / self.I2, 1.0 / self.I2, 1.0 / self.I3)


REFERENCE_INERTIA = Inertia(1.0, 1.0 / math.sqrt(2.0))


def energy(inertia: Inertia, j: int, k: int) -> float:
    """E^j_k = j(j+1)/(2 I2) + (1/(2 I3) - 1/(2 I2)) k^2."""
    if j < 0:
        raise RangeError('j', f"must be non-negative, got {j}")
    if abs(k) > j:
        raise RangeError('k', f"|k| must not exceed j={j}, got {k}")
    return j * (j + 1) / (2.0 * inertia.I2) + inertia.anisotropy * k * k


def energies(inertia: Inertia, labels: Iterable[Tuple[int, int]]) -> np.ndarray:
    """Energies of a sequence of (j, k) handles."""
    return np.asarray([energy(inertia, j, k) for j, k in labels], dtype=float)


def space_energies(inertia: Inertia, space: BlockSpace) -> np.ndarray:
    return energies(inertia, space.spectral_labels())


@dataclass(frozen=True, eq=False)
class GapCoeff:
    """Exact gap coordinates (q1, q2); value is filled when an inertia is known."""

    q1: Fraction
    q2: Fraction
    value: Optional[float] = None

    @property
    def key(self) -> Tuple[Fraction, Fraction]:
        """Sign-normalized (q1, q2): the first non-zero coordinate is positive."""
        if self.q1 < 0 or (self.q1 == 0 and self.q2 < 0):
            return (-self.q1, -self.q2)
        return (self.q1, self.q2)

    @property
    def is_zero(self) -> bool:
        return self.q1 == 0 and self.q2 == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, GapCoeff):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def evaluate(self, inertia: Inertia) -> float:
        return abs(float(self.q1) / inertia.I2 + float(self.q2) * inertia.anisotropy)

    def with_value(self, inertia: Inertia) -> 'GapCoeff':
        return GapCoeff(self.q1, self.q2, self.evaluate(inertia))

    def to_dict(self) -> dict:
        q1, q2 = self.key
        return {
            'q1': str(q1),
            'q2': str(q2),
            'value': self.value,
        }

    def __str__(self) -> str:
        q1, q2 = self.key
        return f"({q1}, {q2})"


def gap_coeff(
    a: Tuple[int, int],
    b: Tuple[int, int],
    inertia: Optional[Inertia] = None,
) -> GapCoeff:
    """Exact gap between (j, k) handles or BasisIndex labels."""
    j, k = (a.j, a.k) if isinstance(a, BasisIndex) else a
    jp, kp = (b.j, b.k) if isinstance(b, BasisIndex) else b
    coeff = GapCoeff(Fraction(jp * (jp + 1) - j * (j + 1), 2), Fraction(kp * kp - k * k))
    return coeff.with_value(inertia) if inertia is not None else coeff


def gap(inertia: Inertia, frm: Tuple[int, int], to: Tuple[int, int]) -> GapCoeff:
    """Gap |E(to) - E(from)| with its exact coordinates."""
    for name, (j, k) in (('from', frm), ('to', to)):
        if j < 0 or abs(k) > j:
            raise RangeError(name, f"invalid (j, k) = ({j}, {k})")
    return gap_coeff(frm, to, inertia)


def lambda_gap(j: int, k: int, inertia: Optional[Inertia] = None) -> GapCoeff:
    """lambda^j_k = |E^{j+1}_{k+1} - E^j_k|."""
    return gap_coeff((j, k), (j + 1, k + 1), inertia)


def eta_gap(k: int, inertia: Optional[Inertia] = None) -> GapCoeff:
    """eta_k = |E^j_{k+1} - E^j_k|, independent of j."""
    coeff = GapCoeff(Fraction(0), Fraction(2 * k + 1))
    return coeff.with_value(inertia) if inertia is not None else coeff


def sigma_gap(j: int, inertia: Optional[Inertia] = None) -> GapCoeff:
    """sigma^j = |E^{j+1}_k - E^j_k|, independent of k."""
    coeff = GapCoeff(Fraction(j + 1), Fraction(0))
    return coeff.with_value(inertia) if inertia is not None else coeff


@dataclass(frozen=True)
class GapKind:
    kind: str
    params: Tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind}{self.params}"


def gap_kind(coeff: GapCoeff) -> GapKind:
    """Recognize a gap as one of the lambda, eta or sigma families."""
    q1, q2 = coeff.key
    odd_q2 = q2.denominator == 1 and q2.numerator % 2 != 0
    if q1 == 0 and odd_q2:
        # eta_k and eta_{-k-1} coincide; report k >= 0
        return GapKind(ETA, ((abs(q2.numerator) - 1) // 2,))
    if q1 > 0 and q1.denominator == 1:
        if q2 == 0:
            return GapKind(SIGMA, (q1.numerator - 1,))
        if odd_q2:
            return GapKind(LAMBDA, (q1.numerator - 1, (q2.numerator - 1) // 2))
    return GapKind(OTHER, (q1.numerator, q1.denominator, q2.numerator, q2.denominator))


def selection_neighbors(idx: BasisIndex, j_max: int) -> Iterable[BasisIndex]:
    """Labels reachable from idx under |dl|, |dk|, |dm| <= 1 within levels <= j_max."""
    for dl in (-1, 0, 1):
        l = idx.j + dl
        if l < 0 or l > j_max:
            continue
        for dk in (-1, 0, 1):
            k = idx.k + dk
            if abs(k) > l:
                continue
            for dm in (-1, 0, 1):
                m = idx.m + dm
                if abs(m) > l:
                    continue
                yield BasisIndex(l, k, m)


def selection_pairs(j_max: int) -> List[Tuple[BasisIndex, BasisIndex]]:
    """Unordered pairs (a < b) obeying the selection rules up to level j_max."""
    pairs = []
    for l in range(j_max + 1):
        for a in level_indices(l):
            for b in selection_neighbors(a, j_max):
                if a < b:
                    pairs.append((a, b))
    return pairs


@dataclass
class ResonanceReport:
    """Resonant transitions of one gap, partitioned relative to the block M_j."""

    gap: GapCoeff
    j: int
    j_max: int
    inside: List[Tuple[BasisIndex, BasisIndex]] = field(default_factory=list)
    boundary: List[Tuple[BasisIndex, BasisIndex]] = field(default_factory=list)
    outside: List[Tuple[BasisIndex, BasisIndex]] = field(default_factory=list)

    @property
    def xi0(self) -> bool:
        """No resonant transition leaves the block."""
        return not self.boundary and not self.outside

    @property
    def xi1(self) -> bool:
        """No resonant transition crosses the block boundary."""
        return not self.boundary

    @property
    def transitions(self) -> List[Tuple[BasisIndex, BasisIndex]]:
        return self.inside + self.boundary + self.outside

    def field_membership(self, dipole, threshold: float = 1e-14) -> Dict[int, Tuple[bool, bool]]:
        """
        Per-field (xi0, xi1) membership.

        A resonant transition only counts against field l when the
        corresponding matrix element of B_l is non-zero for this dipole.
        """
        from .coupling import matrix_element

        membership = {}
        for l_index in (1, 2, 3):
            def active(pair):
                return abs(matrix_element(pair[0], pair[1], dipole, l_index)) > threshold

            leaks_boundary = any(active(p) for p in self.boundary)
            leaks_outside = any(active(p) for p in self.outside)
            membership[l_index] = (not leaks_boundary and not leaks_outside, not leaks_boundary)
        return membership

    def to_dict(self) -> dict:
        def pairs(items):
            return [[str(a), str(b)] for a, b in items]

        return {
            'gap': self.gap.to_dict(),
            'kind': str(gap_kind(self.gap)),
            'j': self.j,
            'j_max': self.j_max,
            'xi0': self.xi0,
            'xi1': self.xi1,
            'transitions': {
                'inside': pairs(self.inside),
                'boundary': pairs(self.boundary),
                'outside': pairs(self.outside),
            },
        }


def _require_exact(inertia: Inertia) -> None:
    if not inertia.resonance_exact:
        raise ClassificationError("exact classification requires irrational-ratio mode")


@lru_cache(maxsize=32)
def _pairs_by_gap(j_max: int) -> Dict[GapCoeff, List[Tuple[BasisIndex, BasisIndex]]]:
    grouped: Dict[GapCoeff, List[Tuple[BasisIndex, BasisIndex]]] = {}
    for a, b in selection_pairs(j_max):
        coeff = gap_coeff(a, b)
        if coeff.is_zero:
            continue
        grouped.setdefault(coeff, []).append((a, b))
    return grouped


def classify_resonances(inertia: Inertia, j: int, sigma: GapCoeff, j_max: int) -> ResonanceReport:
    """Partition every selection-rule transition resonant with sigma relative to M_j."""
    _require_exact(inertia)
    if j < 0:
        raise RangeError('j', f"must be non-negative, got {j}")
    if j_max < j + 2:
        raise RangeError('j_max', f"must be at least j+2={j + 2}, got {j_max}")

    block_levels = (j, j + 1)
    report = ResonanceReport(gap=sigma.with_value(inertia), j=j, j_max=j_max)
    for a, b in _pairs_by_gap(j_max).get(sigma, []):
        in_a = a.j in block_levels
        in_b = b.j in block_levels
        if in_a and in_b:
            report.inside.append((a, b))
        elif in_a or in_b:
            report.boundary.append((a, b))
        else:
            report.outside.append((a, b))
    logger.debug(
        "gap %s on block %d: %d inside, %d boundary, %d outside",
        sigma, j, len(report.inside), len(report.boundary), len(report.outside),
    )
    return report


def block_gaps(j: int) -> List[GapCoeff]:
    """Distinct non-zero gaps between selection-rule neighbours inside M_j."""
    space = block_space(j)
    seen: Dict[GapCoeff, None] = {}
    for a in space.indices:
        for b in selection_neighbors(a, j + 1):
            if a < b and space.contains(b):
                coeff = gap_coeff(a, b)
                if not coeff.is_zero:
                    seen.setdefault(coeff, None)
    return list(seen)


def resonance_report(inertia: Inertia, j: int, j_max: int) -> dict:
    """Every gap of block j with its family, coordinates and memberships."""
    _require_exact(inertia)
    j_max = max(j_max, j + 2)
    entries = []
    for coeff in block_gaps(j):
        report = classify_resonances(inertia, j, coeff, j_max)
        entry = report.to_dict()
        entry['n_transitions'] = len(report.transitions)
        entries.append(entry)
    entries.sort(key=lambda e: (e['kind'], e['gap']['q1'], e['gap']['q2']))
    return {'j': j, 'j_max': j_max, 'gaps': entries}


def verify_lemma_important(inertia: Inertia, j_max: int) -> Tuple[bool, List[dict]]:
    """
    Exhaustive check of where the lambda, eta and sigma gaps can reappear.

    For every block j <= j_max - 2 each family gap is compared with every
    oriented transition (j', s) -> (j'', s+h), |j'' - j'| <= 1, |h| <= 1.
    Coincidences are allowed only at:
      lambda^j_k: j'=j, j''=j+1 and (s, s+h) in {(k, k+1), (-k, -k-1)}
      eta_k:      j'=j'' and {s, s+h} in {{k, k+1}, {-k, -k-1}}
      sigma^j:    j'=j, j''=j+1 and h=0
    """
    _require_exact(inertia)
    if j_max < 2:
        raise RangeError('j_max', f"must be at least 2, got {j_max}")

    transitions = []
    for jp in range(j_max + 1):
        for jpp in (jp, jp + 1):
            if jpp > j_max:
                continue
            for s in range(-jp, jp + 1):
                for h in (-1, 0, 1):
                    if abs(s + h) > jpp:
                        continue
                    coeff = gap_coeff((jp, s), (jpp, s + h))
                    if not coeff.is_zero:
                        transitions.append((jp, jpp, s, h, coeff))

    counterexamples = []

    def record(family, target, jp, jpp, s, h):
        counterexamples.append({
            'family': family,
            'target': target,
            'transition': {'j1': jp, 'j2': jpp, 's': s, 'h': h},
        })

    for j in range(j_max - 1):
        for k in range(-j, j + 1):
            target = lambda_gap(j, k)
            for jp, jpp, s, h, coeff in transitions:
                if coeff != target:
                    continue
                ok = (jp, jpp) == (j, j + 1) and (s, s + h) in ((k, k + 1), (-k, -k - 1))
                if not ok:
                    record(LAMBDA, [j, k], jp, jpp, s, h)

        for k in range(-j - 1, j + 1):
            target = eta_gap(k)
            allowed = ({k, k + 1}, {-k, -k - 1})
            for jp, jpp, s, h, coeff in transitions:
                if coeff != target:
                    continue
                if not (jp == jpp and {s, s + h} in allowed):
                    record(ETA, [k], jp, jpp, s, h)

        target = sigma_gap(j)
        for jp, jpp, s, h, coeff in transitions:
            if coeff != target:
                continue
            if not ((jp, jpp) == (j, j + 1) and h == 0):
                record(SIGMA, [j], jp, jpp, s, h)

    if counterexamples:
        logger.warning("resonance lemma fails on %d transitions", len(counterexamples))
    return not counterexamples, counterexamples


def verify_lemma_ext(inertia: Inertia, j: int, j_max: int) -> Tuple[bool, List[dict]]:
    """
    Block membership of the family gaps of M_j.

    lambda^j_k and sigma^j must be confined to the block; eta_k must not
    cross its boundary.
    """
    _require_exact(inertia)
    j_max = max(j_max, j + 2)
    failures = []
    expectations = [(lambda_gap(j, k), 'xi0') for k in range(-j, j + 1)]
    expectations.append((sigma_gap(j), 'xi0'))
    expectations.extend((eta_gap(k), 'xi1') for k in range(-j - 1, j + 1))
    for coeff, membership in expectations:
        report = classify_resonances(inertia, j, coeff, j_max)
        if not report.inside:
            continue
        if not getattr(report, membership):
            failures.append({'gap': str(coeff), 'kind': str(gap_kind(coeff)), 'expected': membership})
    return not failures, failures


def gap_mask(sigma: GapCoeff, labels: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Boolean matrix selecting pairs of handles whose exact gap equals sigma."""
    js = np.asarray([l for l, _ in labels], dtype=np.int64)
    ks = np.asarray([k for _, k in labels], dtype=np.int64)
    q1x2 = (js * (js + 1))[None, :] - (js * (js + 1))[:, None]
    q2 = (ks * ks)[None, :] - (ks * ks)[:, None]
    t1 = 2 * sigma.q1
    t2 = sigma.q2
    if t1.denominator != 1 or t2.denominator != 1:
        return np.zeros((len(labels), len(labels)), dtype=bool)
    t1, t2 = t1.numerator, t2.numerator
    return ((q1x2 == t1) & (q2 == t2)) | ((q1x2 == -t1) & (q2 == -t2))
