# Quantum dynamics module
"""
Piecewise-constant propagation of the truncated rotor, symmetry detectors
for genuine and orthogonal dipoles, fixed-k controllability and the
three-wave mixing demonstration.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .basis import (
    IMAG_AXIS,
    WIGNER,
    BasisIndex,
    BasisVariant,
    BlockSpace,
    block_space,
    p3_operator,
    restricted_space,
    theta_for_dipole,
    truncated_space,
    wang_labels,
)
from .coupling import (
    GENERIC_ACCIDENTAL,
    GENUINE,
    ORTHOGONAL,
    REFERENCE_DIPOLE,
    CouplingBlock,
    CouplingBlocks,
    Dipole,
    coupling_blocks,
    hamiltonian,
)
from .errors import DipoleError, RangeError
from .lie import (
    COMPLETE,
    INCONCLUSIVE,
    XI_VALUES,
    BlockResult,
    apply_W,
    extract_E,
    lie_closure,
)
from .spectrum import (
    REFERENCE_INERTIA,
    GapCoeff,
    Inertia,
    energy,
    eta_gap,
    gap_coeff,
    sigma_gap,
    space_energies,
)

logger = logging.getLogger(__name__)


CONSERVATION_TOL = 1e-12
SEGMENT_CACHE_SIZE = 64
NOT_APPLICABLE = 'not-applicable'
ARTIFACT_NOTE = 'artifact tuning: carrier amplitudes, durations and the eta phase are design choices'

Matrix = np.ndarray
Controls = Tuple[float, float, float]


@dataclass(frozen=True)
class ControlPulse:
    """Piecewise-constant controls: a sequence of (duration, (u1, u2, u3))."""

    segments: Tuple[Tuple[float, Controls], ...]
    u_max: float = 1.0

    def __post_init__(self):
        if self.u_max <= 0:
            raise RangeError('u_max', f"must be positive, got {self.u_max}")
        cleaned = []
        for i, (duration, u) in enumerate(self.segments):
            if not duration > 0:
                raise RangeError('duration', f"segment {i} has non-positive duration {duration}")
            u = tuple(float(x) for x in u)
            if len(u) != 3:
                raise RangeError('u', f"segment {i} needs three control values")
            if max(abs(x) for x in u) > self.u_max * (1 + 1e-12):
                raise RangeError('u', f"segment {i} exceeds the amplitude bound {self.u_max}")
            cleaned.append((float(duration), u))
        object.__setattr__(self, 'segments', tuple(cleaned))

    @property
    def duration(self) -> float:
        return sum(d for d, _ in self.segments)

    def __add__(self, other: 'ControlPulse') -> 'ControlPulse':
        return ControlPulse(self.segments + other.segments, max(self.u_max, other.u_max))

    @classmethod
    def zero(cls, duration: float, n_segments: int = 1, u_max: float = 1.0) -> 'ControlPulse':
        dt = duration / n_segments
        return cls(tuple((dt, (0.0, 0.0, 0.0)) for _ in range(n_segments)), u_max)

    @classmethod
    def random(cls, rng: np.random.Generator, n_segments: int, dt: float, u_max: float = 1.0) -> 'ControlPulse':
        values = rng.uniform(-u_max, u_max, size=(n_segments, 3))
        return cls(tuple((dt, tuple(row)) for row in values), u_max)

    @classmethod
    def from_carrier(
        cls,
        l_index: int,
        frequency: float,
        phase: float,
        amplitude: float,
        duration: float,
        start: float = 0.0,
        steps_per_period: int = 40,
        u_max: float = 1.0,
    ) -> 'ControlPulse':
        """Sample u_l(t) = 2 amplitude cos(frequency t + phase) at segment midpoints."""
        period = 2.0 * math.pi / frequency
        n = max(1, math.ceil(duration / (period / steps_per_period)))
        dt = duration / n
        segments = []
        for i in range(n):
            t_mid = start + (i + 0.5) * dt
            u = [0.0, 0.0, 0.0]
            u[l_index - 1] = 2.0 * amplitude * math.cos(frequency * t_mid + phase)
            segments.append((dt, tuple(u)))
        return cls(tuple(segments), u_max)


@dataclass
class QuantumState:
    """Normalized coefficient vector over a space."""

    coefficients: np.ndarray
    space: BlockSpace

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != (self.space.dim,):
            raise RangeError('state', f"expected {self.space.dim} coefficients, got {self.coefficients.shape}")
        norm = float(np.linalg.norm(self.coefficients))
        if abs(norm - 1.0) > 1e-10:
            raise RangeError('state', f"state must be normalized, norm is {norm}")

    @classmethod
    def basis_state(cls, space: BlockSpace, idx: BasisIndex) -> 'QuantumState':
        psi = np.zeros(space.dim, dtype=complex)
        psi[space.position(idx)] = 1.0
        return cls(psi, space)

    @classmethod
    def from_vector(cls, vector: np.ndarray, space: BlockSpace) -> 'QuantumState':
        vector = np.asarray(vector, dtype=complex)
        return cls(vector / np.linalg.norm(vector), space)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def population(self, idx: BasisIndex) -> float:
        return float(self.populations[self.space.position(idx)])


def _as_matrix(H: Union[Sequence[float], Matrix]) -> Matrix:
    H = np.asarray(H)
    return np.diag(H).astype(complex) if H.ndim == 1 else H.astype(complex)


def _as_matrices(B: Sequence[Union[CouplingBlock, Matrix]]) -> List[Matrix]:
    mats = [b.matrix if isinstance(b, CouplingBlock) else np.asarray(b, dtype=complex) for b in B]
    if len(mats) != 3:
        raise RangeError('B', f"expected three interaction matrices, got {len(mats)}")
    return mats


def _segment_unitaries(pulse: ControlPulse, H: Matrix, B: List[Matrix]):
    n = H.shape[0]
    for M in B:
        if M.shape != (n, n):
            raise RangeError('B', f"interaction matrix {M.shape} does not match drift {H.shape}")
    cache: Dict[Tuple[float, Controls], Matrix] = {}
    for duration, u in pulse.segments:
        key = (duration, u)
        if key not in cache:
            if len(cache) >= SEGMENT_CACHE_SIZE:
                cache.clear()
            generator = H + u[0] * B[0] + u[1] * B[1] + u[2] * B[2]
            cache[key] = scipy.linalg.expm(-1j * duration * generator)
        yield duration, cache[key]


def propagator(pulse: ControlPulse, H, B) -> Matrix:
    """Composed unitary of the pulse."""
    H = _as_matrix(H)
    U = np.eye(H.shape[0], dtype=complex)
    for _, step in _segment_unitaries(pulse, H, _as_matrices(B)):
        U = step @ U
    return U


def unitarity_error(U: Matrix) -> float:
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 'fro'))


def propagate(state: QuantumState, pulse: ControlPulse, H, B) -> QuantumState:
    """Apply exp(-i dt (H + sum u_l B_l)) segment by segment."""
    H = _as_matrix(H)
    if H.shape[0] != state.space.dim:
        raise RangeError('state', f"state has dimension {state.space.dim}, operators {H.shape[0]}")
    psi = state.coefficients
    for _, step in _segment_unitaries(pulse, H, _as_matrices(B)):
        psi = step @ psi
    return QuantumState(psi / np.linalg.norm(psi), state.space)


@dataclass
class PopulationTrace:
    times: np.ndarray
    populations: np.ndarray
    labels: List[str]
    final: QuantumState

    def series(self, label: str) -> np.ndarray:
        return self.populations[:, self.labels.index(label)]


def population_trace(
    state: QuantumState,
    pulse: ControlPulse,
    H,
    B,
    stride: int = 1,
) -> PopulationTrace:
    """Populations at t=0, every `stride` segments and at the end."""
    H = _as_matrix(H)
    if H.shape[0] != state.space.dim:
        raise RangeError('state', f"state has dimension {state.space.dim}, operators {H.shape[0]}")
    psi = state.coefficients
    t = 0.0
    times, pops = [0.0], [np.abs(psi) ** 2]
    total = len(pulse.segments)
    for i, (duration, step) in enumerate(_segment_unitaries(pulse, H, _as_matrices(B)), start=1):
        psi = step @ psi
        t += duration
        if i % stride == 0 or i == total:
            times.append(t)
            pops.append(np.abs(psi) ** 2)
    labels = [str(idx) for idx in state.space.indices]
    final = QuantumState(psi / np.linalg.norm(psi), state.space)
    return PopulationTrace(np.asarray(times), np.vstack(pops), labels, final)


def random_state(rng: np.random.Generator, space: BlockSpace, support: Optional[np.ndarray] = None) -> QuantumState:
    """Haar-like random state, optionally restricted to a boolean support."""
    psi = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    if support is not None:
        psi = np.where(support, psi, 0)
    return QuantumState.from_vector(psi, space)


def Sk_leakage(state: QuantumState, k: int) -> float:
    """Population outside the fixed-k sector S_k (Wigner labels)."""
    outside = np.asarray([idx.k != k for idx in state.space.indices])
    return float(np.sum(state.populations[outside]))


def parity_classes(space: BlockSpace) -> np.ndarray:
    """Parity of l + gamma + k per Wang column."""
    return np.asarray([(l + gamma + k) % 2 for l, k, _m, gamma in wang_labels(space)])


def parity_leakage(state: QuantumState, parity: int, classes: np.ndarray) -> float:
    return float(np.sum(state.populations[classes != parity]))


# Symmetry detectors

@dataclass
class SymmetryReport:
    kind: str
    status: str
    conserved: bool
    max_violation: float
    per_block: List[dict] = field(default_factory=list)
    drift: Optional[float] = None
    zero_control_drift: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'status': self.status,
            'conserved': self.conserved,
            'max_violation': self.max_violation,
            'per_block': self.per_block,
            'drift': self.drift,
            'zero_control_drift': self.zero_control_drift,
        }


def _p3_drift(space: BlockSpace, H: Matrix, B: List[Matrix], pulse: ControlPulse, rng) -> float:
    P3 = p3_operator(space)
    psi = random_state(rng, space).coefficients
    start = float(np.real(np.vdot(psi, P3 @ psi)))
    worst = 0.0
    for _, step in _segment_unitaries(pulse, H, B):
        psi = step @ psi
        worst = max(worst, abs(float(np.real(np.vdot(psi, P3 @ psi))) - start))
    return worst


def detect_genuine_symmetry(
    dipole: Dipole,
    blocks: Sequence[CouplingBlocks],
    inertia: Optional[Inertia] = None,
    seed: int = 0,
    segments: int = 20,
) -> SymmetryReport:
    """Commutators [P3, B_l] on each block and the drift of <P3> along a random pulse."""
    inertia = inertia or REFERENCE_INERTIA
    per_block = []
    worst = 0.0
    for triple in blocks:
        space = triple[0].space
        if triple[0].variant.kind != WIGNER:
            raise RangeError('variant', "genuine-symmetry detection needs Wigner-basis blocks")
        P3 = p3_operator(space)
        norms = [float(np.linalg.norm(P3 @ b.matrix - b.matrix @ P3, 'fro')) for b in triple]
        worst = max(worst, *norms)
        per_block.append({'j': space.j, 'n': space.dim, 'commutator_norms': norms})

    report = SymmetryReport(
        kind='k-invariance',
        status='evaluated',
        conserved=worst < CONSERVATION_TOL,
        max_violation=worst,
        per_block=per_block,
    )
    if blocks:
        space = blocks[0][0].space
        H = hamiltonian(space, inertia)
        B = [b.matrix for b in blocks[0]]
        rng = np.random.default_rng(seed)
        report.drift = _p3_drift(space, H, B, ControlPulse.random(rng, segments, 0.5), rng)
        report.zero_control_drift = _p3_drift(space, H, B, ControlPulse.zero(10.0, segments), rng)
    logger.debug("genuine detector: max |[P3, B]| = %.3e", worst)
    return report


def rotated_wang_blocks(j: int, dipole: Dipole) -> CouplingBlocks:
    """Coupling blocks of M_j in the Wang basis rotated by the ImagAxis angle."""
    theta = theta_for_dipole(dipole.delta1, dipole.delta2, IMAG_AXIS)
    return coupling_blocks(block_space(j), dipole, BasisVariant.rotated_wang(theta))


def detect_parity_symmetry(
    dipole: Dipole,
    blocks: Sequence[CouplingBlocks],
    inertia: Optional[Inertia] = None,
) -> SymmetryReport:
    """Largest entry of H and B_l between states of different parity of l + gamma + k."""
    inertia = inertia or REFERENCE_INERTIA
    per_block = []
    worst = 0.0
    for triple in blocks:
        space, variant = triple[0].space, triple[0].variant
        if not variant.is_wang:
            raise RangeError('variant', "parity detection needs Wang-basis blocks")
        classes = parity_classes(space)
        cross = classes[:, None] != classes[None, :]
        H = hamiltonian(space, inertia, variant)
        entries = [float(np.max(np.abs(H[cross])))]
        entries.extend(float(np.max(np.abs(b.matrix[cross]))) for b in triple)
        block_worst = max(entries)
        worst = max(worst, block_worst)
        per_block.append({
            'j': space.j,
            'n': space.dim,
            'max_cross_parity': block_worst,
            'invariant_dims': [int(np.sum(classes == 0)), int(np.sum(classes == 1))],
        })

    applicable = dipole.kind == ORTHOGONAL
    return SymmetryReport(
        kind='parity',
        status='evaluated' if applicable else NOT_APPLICABLE,
        conserved=applicable and worst < CONSERVATION_TOL,
        max_violation=worst,
        per_block=per_block,
    )


def sector_leakage_survey(
    dipole: Dipole,
    inertia: Inertia,
    k: int = 0,
    j_max: int = 3,
    pulses: int = 100,
    segments: int = 5,
    dt: float = 0.5,
    seed: int = 0,
) -> Dict[str, float]:
    """Leakage out of S_k over random pulses and random initial states in S_k."""
    space = truncated_space(j_max)
    H = hamiltonian(space, inertia)
    B = [b.matrix for b in coupling_blocks(space, dipole)]
    support = np.asarray([idx.k == k for idx in space.indices])
    if not support.any():
        raise RangeError('k', f"no states with k={k} up to level {j_max}")
    rng = np.random.default_rng(seed)
    worst_leak, worst_unitarity = 0.0, 0.0
    for _ in range(pulses):
        pulse = ControlPulse.random(rng, segments, dt)
        U = propagator(pulse, H, B)
        worst_unitarity = max(worst_unitarity, unitarity_error(U))
        psi = random_state(rng, space, support)
        final = QuantumState.from_vector(U @ psi.coefficients, space)
        worst_leak = max(worst_leak, Sk_leakage(final, k))
    return {'max_leakage': worst_leak, 'max_unitarity_error': worst_unitarity, 'pulses': pulses}


def parity_leakage_survey(
    dipole: Dipole,
    inertia: Inertia,
    j: int = 0,
    pulses: int = 20,
    segments: int = 5,
    dt: float = 0.5,
    seed: int = 0,
) -> Dict[str, float]:
    """Leakage across parity classes in the rotated Wang basis of block j."""
    triple = rotated_wang_blocks(j, dipole)
    space, variant = triple[0].space, triple[0].variant
    H = hamiltonian(space, inertia, variant)
    B = [b.matrix for b in triple]
    classes = parity_classes(space)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pulses):
        parity = int(rng.integers(2))
        psi = random_state(rng, space, classes == parity)
        final = propagate(psi, ControlPulse.random(rng, segments, dt), H, B)
        worst = max(worst, parity_leakage(final, parity, classes))
    return {'max_leakage': worst, 'pulses': pulses}


def truncation_check(
    dipole: Dipole,
    inertia: Inertia,
    j_max: int,
    pulse: ControlPulse,
) -> Dict[str, float]:
    """Change of low-level populations when the truncation is doubled."""
    results = []
    for levels in (j_max, 2 * j_max):
        space = truncated_space(levels)
        H = hamiltonian(space, inertia)
        B = [b.matrix for b in coupling_blocks(space, dipole)]
        final = propagate(QuantumState.basis_state(space, BasisIndex(0, 0, 0)), pulse, H, B)
        results.append((space, final))
    (small, psi_small), (_, psi_large) = results
    n = small.dim
    low = np.asarray([idx.j < j_max for idx in small.indices])
    diff = np.abs(psi_small.populations - psi_large.populations[:n])[low]
    boundary = float(np.sum(psi_small.populations[~low]))
    return {'max_population_change': float(np.max(diff)), 'boundary_population': boundary}


# Fixed-k controllability

@dataclass
class RestrictedVerdict:
    k: int
    verdict: str
    blocks: List[BlockResult]
    graph_linear: bool

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'verdict': self.verdict,
            'blocks': [b.to_dict() for b in self.blocks],
            'graph_linear': self.graph_linear,
        }


def restricted_Sk_check(
    k: int,
    j_max: int,
    dipole: Dipole,
    inertia: Optional[Inertia] = None,
    tol: Optional[float] = None,
) -> RestrictedVerdict:
    """Closure of the sigma^j modes on the fixed-k blocks N_{j,k}, j = |k| .. j_max-1."""
    if dipole.kind != GENUINE:
        raise DipoleError(f"restricted S_k check needs a genuine dipole, got {dipole.kind}")
    if abs(k) > j_max:
        raise RangeError('k', f"|k| must not exceed j_max={j_max}, got {k}")
    levels = list(range(abs(k), j_max))
    if not levels:
        raise RangeError('j_max', f"no fixed-k block below j_max={j_max} for k={k}")
    inertia = inertia or REFERENCE_INERTIA

    results = []
    for j in levels:
        space = restricted_space(j, k)
        labels = space.spectral_labels()
        E = space_energies(inertia, space)
        sigma = sigma_gap(j)
        generators = []
        for block in coupling_blocks(space, dipole):
            masked = extract_E(sigma, block.skew, labels)
            if np.any(np.abs(masked) > 1e-14):
                generators.extend(apply_W(xi, masked, E) for xi in XI_VALUES)
        su_dim = space.dim ** 2 - 1
        if generators:
            span = lie_closure(generators, tol=tol)
            results.append(BlockResult(j, space.dim, su_dim, span.dim, span.status, nu1_dim=span.dim))
        else:
            results.append(BlockResult(j, space.dim, su_dim, 0, COMPLETE))
        logger.info("N_{%d,%d}: dim %d of %d", j, k, results[-1].reached_dim, su_dim)

    level_sets = [{j, j + 1} for j in levels]
    linear = all(
        bool(level_sets[a] & level_sets[b]) == (abs(a - b) == 1)
        for a in range(len(levels)) for b in range(len(levels)) if a != b
    )
    reached = all(b.reached for b in results)
    verdict = 'MTracker on S_k' if reached and linear else INCONCLUSIVE
    return RestrictedVerdict(k=k, verdict=verdict, blocks=results, graph_linear=linear)


# Three-wave mixing

@dataclass
class CarrierStep:
    name: str
    gap: GapCoeff
    l_index: int
    frequency: float
    phase: float
    amplitude: float
    duration: float

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'gap': self.gap.to_dict(),
            'field': self.l_index,
            'frequency': self.frequency,
            'phase': self.phase,
            'amplitude': self.amplitude,
            'duration': self.duration,
        }


@dataclass
class ThreeWaveProtocol:
    j: int
    k: int
    m: int
    steps: List[CarrierStep]
    steps_per_period: int = 40
    u_max: float = 1.0
    tuning: Dict[str, float] = field(default_factory=dict)
    note: str = ARTIFACT_NOTE
    design_dipole: Optional[Dipole] = None

    def pulse(self, first: int = 0, last: Optional[int] = None) -> ControlPulse:
        """Piecewise-constant samples of steps[first:last] on the global clock."""
        start = sum(step.duration for step in self.steps[:first])
        pulse = ControlPulse((), self.u_max)
        for step in self.steps[first:last]:
            pulse = pulse + ControlPulse.from_carrier(
                step.l_index, step.frequency, step.phase, step.amplitude, step.duration,
                start=start, steps_per_period=self.steps_per_period, u_max=self.u_max,
            )
            start += step.duration
        return pulse

    def with_phase(self, index: int, phase: float) -> 'ThreeWaveProtocol':
        steps = list(self.steps)
        old = steps[index]
        steps[index] = CarrierStep(old.name, old.gap, old.l_index, old.frequency, phase, old.amplitude, old.duration)
        return ThreeWaveProtocol(self.j, self.k, self.m, steps, self.steps_per_period, self.u_max,
                                 dict(self.tuning), self.note, self.design_dipole)

    def to_dict(self) -> dict:
        return {
            'j': self.j, 'k': self.k, 'm': self.m,
            'steps': [s.to_dict() for s in self.steps],
            'steps_per_period': self.steps_per_period,
            'u_max': self.u_max,
            'tuning': self.tuning,
            'note': self.note,
            'design_dipole': None if self.design_dipole is None else self.design_dipole.vector.tolist(),
        }


def _check_three_wave_labels(j: int, k: int, m: int) -> None:
    if k == 0:
        raise RangeError('k', "no k-degeneracy to break")
    if abs(k) > j:
        raise RangeError('k', f"|k| must not exceed j={j}, got {k}")
    if m == 0 or abs(m) > j:
        raise RangeError('m', f"need 0 < |m| <= j={j} (in-level couplings vanish at m=0), got {m}")


def _asymmetry(state: QuantumState, j: int, k: int, m: int) -> Tuple[float, float]:
    return state.population(BasisIndex(j, k, m)), state.population(BasisIndex(j, -k, m))


def three_wave_design_dipole(dipole: Dipole) -> Dipole:
    """
    Dipole on which a three-wave protocol can be designed.

    Generic accidental dipoles are used as given. A genuine dipole has no
    k-changing couplings and an orthogonal one no sigma coupling, so the
    missing components are taken from the reference dipole.
    """
    if dipole.kind == GENERIC_ACCIDENTAL:
        return dipole
    if dipole.kind == GENUINE:
        return Dipole(REFERENCE_DIPOLE.delta1, REFERENCE_DIPOLE.delta2, dipole.delta3)
    return Dipole(dipole.delta1, dipole.delta2, REFERENCE_DIPOLE.delta3)


def design_three_wave_protocol(
    j: int,
    k: int,
    m: int,
    dipole: Dipole,
    inertia: Inertia,
    amplitude: float = 0.2,
    steps_per_period: int = 40,
    phase_count: int = 16,
    u_max: float = 1.0,
) -> ThreeWaveProtocol:
    """
    Resonant sequence on field 3 (m is conserved) from the hub |j, 0, m>.

    A sigma^j half transfer splits the hub with |j+1, 0, m>, a lambda pulse
    moves the excited amplitude onto |j, +-1, m>, and an eta_0 pulse moves
    the remaining hub amplitude there as well. The two paths interfere, so
    the eta phase sets p_1 - p_-1. Further eta pulses climb from |k|=1 to |k|.
    """
    if not inertia.resonance_exact:
        raise RangeError('inertia', "three-wave design needs exact resonance mode")
    _check_three_wave_labels(j, k, m)
    kk = abs(k)
    space = block_space(j)
    B3 = coupling_blocks(space, dipole)[2].matrix

    def coupling(a: BasisIndex, b: BasisIndex) -> float:
        return abs(B3[space.position(a), space.position(b)])

    hub = BasisIndex(j, 0, m)
    excited = BasisIndex(j + 1, 0, m)
    targets = (BasisIndex(j, 1, m), BasisIndex(j, -1, m))

    rabi_sigma = amplitude * coupling(hub, excited)
    rabi_lambda = amplitude * math.hypot(*(coupling(excited, t) for t in targets))
    rabi_eta = amplitude * math.hypot(*(coupling(hub, t) for t in targets))
    if min(rabi_sigma, rabi_lambda, rabi_eta) <= 1e-14:
        raise DipoleError(
            f"three-wave couplings vanish for the {dipole.kind} dipole; design on "
            "three_wave_design_dipole(dipole) and replay the protocol"
        )

    def frequency(a: BasisIndex, b: BasisIndex) -> float:
        return abs(energy(inertia, b.j, b.k) - energy(inertia, a.j, a.k))

    steps = [
        CarrierStep('sigma', sigma_gap(j, inertia), 3, frequency(hub, excited), 0.0, amplitude,
                    math.pi / (4.0 * rabi_sigma)),
        CarrierStep('lambda', gap_coeff((j, 1), (j + 1, 0), inertia), 3, frequency(targets[0], excited), 0.0,
                    amplitude, math.pi / (2.0 * rabi_lambda)),
        CarrierStep('eta', eta_gap(0, inertia), 3, frequency(hub, targets[0]), 0.0, amplitude,
                    math.pi / (2.0 * rabi_eta)),
    ]
    for s in range(1, kk):
        rabi = amplitude * coupling(BasisIndex(j, s, m), BasisIndex(j, s + 1, m))
        steps.append(CarrierStep(f'eta-ladder-{s}', eta_gap(s, inertia), 3,
                                 frequency(BasisIndex(j, s, m), BasisIndex(j, s + 1, m)), 0.0,
                                 amplitude, math.pi / (2.0 * rabi)))

    protocol = ThreeWaveProtocol(j, k, m, steps, steps_per_period, u_max, design_dipole=dipole)

    H = hamiltonian(space, inertia)
    B = [b.matrix for b in coupling_blocks(space, dipole)]
    prefix = propagate(QuantumState.basis_state(space, hub), protocol.pulse(0, 2), H, B)
    best_phase, best_value = 0.0, -1.0
    for i in range(phase_count):
        phase = 2.0 * math.pi * i / phase_count
        candidate = protocol.with_phase(2, phase)
        final = propagate(prefix, candidate.pulse(2), H, B)
        p_plus, p_minus = _asymmetry(final, j, kk, m)
        if abs(p_plus - p_minus) > best_value:
            best_phase, best_value = phase, abs(p_plus - p_minus)
    logger.info("three-wave eta phase %.4f gives asymmetry %.4f", best_phase, best_value)

    tuned = protocol.with_phase(2, best_phase)
    tuned.tuning = {'eta_phase': best_phase, 'design_asymmetry': best_value, 'phase_count': phase_count}
    return tuned


@dataclass
class ThreeWaveResult:
    trace: PopulationTrace
    series: Dict[str, np.ndarray]
    p_plus: float
    p_minus: float
    boundary_population: float
    unitarity_error: float
    protocol: ThreeWaveProtocol
    dipole_kind: str
    replayed: bool = False

    @property
    def asymmetry(self) -> float:
        return abs(self.p_plus - self.p_minus)

    def to_dict(self) -> dict:
        return {
            'p_plus': self.p_plus,
            'p_minus': self.p_minus,
            'asymmetry': self.asymmetry,
            'boundary_population': self.boundary_population,
            'unitarity_error': self.unitarity_error,
            'dipole_kind': self.dipole_kind,
            'replayed': self.replayed,
            'protocol': self.protocol.to_dict(),
            'note': self.protocol.note,
        }


def three_wave_mixing_demo(
    j: int,
    k: int,
    m: int,
    dipole: Dipole,
    inertia: Inertia,
    protocol: Optional[ThreeWaveProtocol] = None,
    stride: int = 10,
) -> ThreeWaveResult:
    """
    Simulate the three-wave sequence on M_j and record the +-k populations.

    Without a protocol, one is designed on three_wave_design_dipole(dipole);
    the result is marked replayed when that differs from the simulated dipole.
    """
    _check_three_wave_labels(j, k, m)
    if protocol is None:
        design = three_wave_design_dipole(dipole)
        if design != dipole:
            logger.info("three-wave protocol designed on %s and replayed on the %s dipole", design.vector, dipole.kind)
        protocol = design_three_wave_protocol(j, k, m, design, inertia)
    elif (protocol.j, abs(protocol.k), protocol.m) != (j, abs(k), m):
        raise RangeError('protocol', "protocol was designed for different labels")

    space = block_space(j)
    H = hamiltonian(space, inertia)
    B = [b.matrix for b in coupling_blocks(space, dipole)]
    pulse = protocol.pulse()
    start = QuantumState.basis_state(space, BasisIndex(j, 0, m))
    trace = population_trace(start, pulse, H, B, stride=stride)

    kk = abs(k)
    series = {
        str(BasisIndex(j, kk, m)): trace.series(str(BasisIndex(j, kk, m))),
        str(BasisIndex(j, -kk, m)): trace.series(str(BasisIndex(j, -kk, m))),
        str(BasisIndex(j, 0, m)): trace.series(str(BasisIndex(j, 0, m))),
        str(BasisIndex(j + 1, 0, m)): trace.series(str(BasisIndex(j + 1, 0, m))),
    }
    side = [space.position(idx) for idx in space.indices if idx.j == j + 1 and idx.k in (kk - 1, kk + 1)]
    series[f"({j + 1},{kk}+-1,*)"] = trace.populations[:, side].sum(axis=1)

    p_plus, p_minus = _asymmetry(trace.final, j, kk, m)
    upper = np.asarray([idx.j == j + 1 for idx in space.indices])
    return ThreeWaveResult(
        trace=trace,
        series=series,
        p_plus=p_plus,
        p_minus=p_minus,
        boundary_population=float(np.sum(trace.final.populations[upper])),
        unitarity_error=unitarity_error(propagator(pulse, H, B)),
        protocol=protocol,
        dipole_kind=dipole.kind,
        replayed=protocol.design_dipole is not None and protocol.design_dipole != dipole,
    )
