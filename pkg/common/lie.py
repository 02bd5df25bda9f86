# Lie algebra module
"""
su(n) machinery for the block-wise tracking condition.

Matrices are handled as real vectors [Re M, Im M] so that the real trace
inner product <A, B> = Re tr(A^dagger B) becomes a plain dot product.
Closures grow an orthonormal basis by bracketing freshly added directions
against a fixed set of adjoint generators, projecting out the current span
and accepting new directions through pivoted QR.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .basis import block_space
from .coupling import Dipole, CouplingBlocks, coupling_blocks
from .errors import ClosureError, RangeError
from .spectrum import (
    GapCoeff,
    Inertia,
    block_gaps,
    classify_resonances,
    gap_kind,
    gap_mask,
    space_energies,
)

logger = logging.getLogger(__name__)


COMPLETE = 'complete'
INCOMPLETE = 'incomplete'
SKIPPED = 'skipped'

MTRACKER = 'MTracker'
SYMMETRY_BLOCKED = 'SymmetryBlocked'
INCONCLUSIVE = 'Inconclusive'

XI_VALUES = (1.0 + 0j, 1j)


# Generalized Pauli matrices

@dataclass(frozen=True)
class PauliGFD:
    """Elementary skew-Hermitian matrix G, F or D on the pair (row, col)."""

    kind: str
    row: int
    col: int

    def __post_init__(self):
        if self.kind not in ('G', 'F', 'D'):
            raise RangeError('kind', f"expected G, F or D, got {self.kind!r}")
        if self.row == self.col:
            raise RangeError('col', "row and col must differ")

    def matrix(self, n: int) -> np.ndarray:
        a, b = self.row, self.col
        M = np.zeros((n, n), dtype=complex)
        if self.kind == 'G':
            M[a, b], M[b, a] = 1.0, -1.0
        elif self.kind == 'F':
            M[a, b], M[b, a] = 1j, 1j
        else:
            M[a, a], M[b, b] = 1j, -1j
        return M


def pauli_G(a: int, b: int, n: int) -> np.ndarray:
    return PauliGFD('G', a, b).matrix(n)


def pauli_F(a: int, b: int, n: int) -> np.ndarray:
    return PauliGFD('F', a, b).matrix(n)


def pauli_D(a: int, b: int, n: int) -> np.ndarray:
    return PauliGFD('D', a, b).matrix(n)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def is_skew_hermitian(M: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(1.0, float(np.linalg.norm(M)))
    return float(np.linalg.norm(M + M.conj().T)) < tol * scale


def _to_vec(M: np.ndarray) -> np.ndarray:
    return np.concatenate([M.real.ravel(), M.imag.ravel()])


def _to_mat(v: np.ndarray, n: int) -> np.ndarray:
    half = n * n
    return (v[:half] + 1j * v[half:]).reshape(n, n)


# Spans and closures

@dataclass
class LieSpan:
    """Orthonormal basis of a real subspace of su(n)."""

    n: int
    vectors: np.ndarray
    tol: float
    generators: List[np.ndarray] = field(default_factory=list)
    status: str = COMPLETE
    iterations: int = 0

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def su_dim(self) -> int:
        return self.n * self.n - 1

    @property
    def basis(self) -> List[np.ndarray]:
        return [_to_mat(v, self.n) for v in self.vectors]

    @property
    def is_full(self) -> bool:
        return self.dim == self.su_dim

    def residual(self, M: np.ndarray) -> float:
        """Norm of the part of M orthogonal to the span."""
        v = _to_vec(M)
        if self.dim:
            v = v - self.vectors.T @ (self.vectors @ v)
        return float(np.linalg.norm(v))

    def contains(self, M: np.ndarray, tol: Optional[float] = None) -> bool:
        tol = self.tol if tol is None else tol
        return self.residual(M) <= tol * max(1.0, float(np.linalg.norm(M)))

    def gram_error(self) -> float:
        if not self.dim:
            return 0.0
        G = self.vectors @ self.vectors.T
        return float(np.max(np.abs(G - np.eye(self.dim))))


def _closure_settings(tol, max_iterations, batch_size):
    from .config import get_config
    config = get_config()
    return (
        config.rank_tol if tol is None else tol,
        config.max_iterations if max_iterations is None else max_iterations,
        config.batch_size if batch_size is None else batch_size,
    )


def _validate_generators(generators: Sequence[np.ndarray], n: Optional[int] = None) -> int:
    for i, M in enumerate(generators):
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ClosureError(f"generator {i} is not a square matrix")
        if n is None:
            n = M.shape[0]
        if M.shape[0] != n:
            raise ClosureError(f"generator {i} has size {M.shape[0]}, expected {n}")
        if not is_skew_hermitian(M):
            raise ClosureError(f"generator {i} is not skew-Hermitian")
        if abs(np.trace(M)) > 1e-10 * max(1.0, float(np.linalg.norm(M))):
            raise ClosureError(f"generator {i} is not traceless")
    if n is None:
        raise ClosureError("cannot infer matrix size from an empty generator list")
    return n


def _normalized(generators: Sequence[np.ndarray]) -> np.ndarray:
    kept = []
    for M in generators:
        norm = float(np.linalg.norm(M))
        if norm > 0:
            kept.append(np.asarray(M, dtype=complex) / norm)
    if not kept:
        return np.zeros((0, 0, 0), dtype=complex)
    return np.stack(kept)


def _extend(basis: np.ndarray, candidates: np.ndarray, tol: float, cap: int) -> np.ndarray:
    """Orthonormal directions of the candidates outside span(basis)."""
    if candidates.shape[0] == 0 or basis.shape[0] >= cap:
        return np.zeros((0, candidates.shape[1]))
    scale = max(1.0, float(np.max(np.linalg.norm(candidates, axis=1))))
    residual = candidates
    for _ in range(2):
        if basis.shape[0]:
            residual = residual - (residual @ basis.T) @ basis
    norms = np.linalg.norm(residual, axis=1)
    residual = residual[norms > tol * scale]
    if residual.shape[0] == 0:
        return np.zeros((0, candidates.shape[1]))

    Q, R, _ = scipy.linalg.qr(residual.T, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * scale))
    rank = min(rank, cap - basis.shape[0])
    if rank == 0:
        return np.zeros((0, candidates.shape[1]))
    new = Q[:, :rank].T
    if basis.shape[0]:
        new = new - (new @ basis.T) @ basis
    new /= np.linalg.norm(new, axis=1, keepdims=True)
    return new


def _close(
    seeds: Sequence[np.ndarray],
    adjoint: np.ndarray,
    n: int,
    tol: float,
    max_iterations: int,
    batch_size: int,
    label: str,
) -> Tuple[np.ndarray, str, int]:
    """Smallest subspace containing the seeds and stable under ad(adjoint)."""
    cap = n * n - 1
    dim2 = 2 * n * n
    basis = np.zeros((0, dim2))
    seed_vecs = np.stack([_to_vec(M) for M in seeds]) if len(seeds) else np.zeros((0, dim2))
    fresh = _extend(basis, seed_vecs, tol, cap)
    basis = fresh

    iterations = 0
    while fresh.shape[0] and basis.shape[0] < cap:
        if iterations >= max_iterations:
            logger.warning("%s: iteration cap %d reached at dim %d", label, max_iterations, basis.shape[0])
            return basis, INCOMPLETE, iterations
        iterations += 1
        fresh_mats = np.stack([_to_mat(v, n) for v in fresh])
        added = []
        for g in adjoint:
            brackets = np.matmul(g, fresh_mats) - np.matmul(fresh_mats, g)
            flat = np.concatenate([brackets.real.reshape(len(brackets), -1),
                                   brackets.imag.reshape(len(brackets), -1)], axis=1)
            for start in range(0, flat.shape[0], batch_size):
                new = _extend(basis, flat[start:start + batch_size], tol, cap)
                if new.shape[0]:
                    basis = np.vstack([basis, new])
                    added.append(new)
                if basis.shape[0] >= cap:
                    break
            if basis.shape[0] >= cap:
                break
        fresh = np.vstack(added) if added else np.zeros((0, dim2))
        logger.debug("%s: iteration %d, dim %d (+%d)", label, iterations, basis.shape[0], fresh.shape[0])
    return basis, COMPLETE, iterations


def lie_closure(
    generators: Sequence[np.ndarray],
    tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> LieSpan:
    """Orthonormal basis of the real Lie algebra generated by the matrices."""
    tol, max_iterations, batch_size = _closure_settings(tol, max_iterations, batch_size)
    n = _validate_generators(generators)
    adjoint = _normalized(generators)
    vectors, status, iterations = _close(list(adjoint), adjoint, n, tol, max_iterations, batch_size, 'closure')
    return LieSpan(
        n=n,
        vectors=vectors,
        tol=tol,
        generators=list(adjoint),
        status=status,
        iterations=iterations,
    )


def minimal_ideal(
    nu0: Sequence[np.ndarray],
    nu1_span: LieSpan,
    tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> LieSpan:
    """Smallest ideal of the algebra nu1_span that contains nu0."""
    tol, max_iterations, batch_size = _closure_settings(
        nu1_span.tol if tol is None else tol, max_iterations, batch_size
    )
    n = nu1_span.n
    if not nu0:
        return LieSpan(n=n, vectors=np.zeros((0, 2 * n * n)), tol=tol)
    _validate_generators(nu0, n)
    for i, M in enumerate(nu0):
        if nu1_span.residual(M) > 10 * tol * max(1.0, float(np.linalg.norm(M))):
            raise ClosureError(f"element {i} of nu0 does not lie in the ambient algebra")

    if nu1_span.generators:
        adjoint = np.stack(nu1_span.generators)
    else:
        adjoint = np.stack(nu1_span.basis) if nu1_span.dim else np.zeros((0, n, n), dtype=complex)
    vectors, status, iterations = _close(list(nu0), adjoint, n, tol, max_iterations, batch_size, 'ideal')
    if nu1_span.status != COMPLETE:
        status = INCOMPLETE
    return LieSpan(n=n, vectors=vectors, tol=tol, status=status, iterations=iterations)


def ideal_residual(ideal: LieSpan, ambient: LieSpan) -> float:
    """Largest component of [b, t] outside the ideal over basis pairs."""
    worst = 0.0
    for b in ambient.basis:
        for t in ideal.basis:
            worst = max(worst, ideal.residual(commutator(b, t)))
    return worst


# Excited modes

def extract_E(sigma: GapCoeff, M: np.ndarray, labels: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Keep the entries of M whose exact energy gap equals sigma."""
    if M.shape != (len(labels), len(labels)):
        raise RangeError('labels', f"expected {M.shape[0]} spectral labels, got {len(labels)}")
    return np.where(gap_mask(sigma, labels), M, 0)


def apply_W(xi: complex, M: np.ndarray, energies: Sequence[float]) -> np.ndarray:
    """Phase modulation: xi above the diagonal in energy order, conj(xi) below."""
    if not math.isclose(abs(xi), 1.0, rel_tol=0, abs_tol=1e-12):
        raise RangeError('xi', f"must have unit modulus, got {xi}")
    E = np.asarray(energies, dtype=float)
    scale = max(1.0, float(np.max(np.abs(E)))) if E.size else 1.0
    diff = E[None, :] - E[:, None]
    degenerate = np.abs(diff) <= 1e-12 * scale
    phases = np.where(diff > 0, xi, np.conj(xi))
    return np.where(degenerate, 0, M * phases)


@dataclass
class ExcitedMode:
    gap: GapCoeff
    l_index: int
    xi: complex
    matrix: np.ndarray


@dataclass
class ExcitedModeSet:
    """Excited modes nu^0_j (confined gaps) and nu^1_j (gaps not crossing the boundary)."""

    j: int
    modes0: List[ExcitedMode] = field(default_factory=list)
    modes1: List[ExcitedMode] = field(default_factory=list)

    def matrices(self, level: int) -> List[np.ndarray]:
        modes = self.modes0 if level == 0 else self.modes1
        return [mode.matrix for mode in modes]

    def summary(self) -> Dict[str, List[str]]:
        def describe(modes):
            seen = []
            for mode in modes:
                entry = f"{gap_kind(mode.gap)} l={mode.l_index}"
                if entry not in seen:
                    seen.append(entry)
            return seen

        return {'modes0': describe(self.modes0), 'modes1': describe(self.modes1)}


def excited_modes(
    j: int,
    blocks: CouplingBlocks,
    inertia: Inertia,
    j_max: Optional[int] = None,
) -> ExcitedModeSet:
    """
    W_xi(E_sigma(iB_l)) over the gaps of block j, split by block membership.

    Membership is decided per field: a resonant transition outside the
    block only excludes (sigma, l) when B_l actually couples it.
    """
    space = blocks[0].space
    dipole = blocks[0].dipole
    j_max = max(j + 2, j_max or 0)
    labels = space.spectral_labels()
    E = space_energies(inertia, space)

    modes = ExcitedModeSet(j=j)
    for sigma in block_gaps(j):
        report = classify_resonances(inertia, j, sigma, j_max)
        membership = report.field_membership(dipole)
        for block in blocks:
            xi0, xi1 = membership[block.l_index]
            if not xi1:
                continue
            masked = extract_E(sigma, block.skew, labels)
            if not np.any(np.abs(masked) > 1e-14):
                continue
            for xi in XI_VALUES:
                mode = ExcitedMode(sigma.with_value(inertia), block.l_index, xi, apply_W(xi, masked, E))
                modes.modes1.append(mode)
                if xi0:
                    modes.modes0.append(mode)
    logger.debug("block %d: %d confined modes, %d weak modes", j, len(modes.modes0), len(modes.modes1))
    return modes


# Block verdicts

@dataclass
class BlockResult:
    j: int
    n: int
    su_dim: int
    reached_dim: int
    status: str
    nu1_dim: int = 0
    seconds: float = 0.0
    modes: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def reached(self) -> bool:
        return self.status == COMPLETE and self.reached_dim == self.su_dim

    def to_dict(self) -> dict:
        return {
            'j': self.j,
            'n': self.n,
            'su_dim': self.su_dim,
            'reached_dim': self.reached_dim,
            'status': self.status,
        }


def block_ideal(
    j: int,
    j_max: int,
    dipole: Dipole,
    inertia: Inertia,
    tol: Optional[float] = None,
) -> BlockResult:
    """Compute T_j, the minimal ideal of Lie(nu^1_j) containing nu^0_j."""
    started = time.perf_counter()
    space = block_space(j)
    blocks = coupling_blocks(space, dipole)
    modes = excited_modes(j, blocks, inertia, j_max)
    su_dim = space.dim ** 2 - 1
    if not modes.modes1:
        return BlockResult(j, space.dim, su_dim, 0, COMPLETE, seconds=time.perf_counter() - started)

    nu1 = lie_closure(modes.matrices(1), tol=tol)
    ideal = minimal_ideal(modes.matrices(0), nu1, tol=tol)
    elapsed = time.perf_counter() - started
    logger.info("block %d: dim Lie(nu1)=%d, dim T=%d of %d (%.1fs)", j, nu1.dim, ideal.dim, su_dim, elapsed)
    return BlockResult(
        j=j,
        n=space.dim,
        su_dim=su_dim,
        reached_dim=ideal.dim,
        status=ideal.status,
        nu1_dim=nu1.dim,
        seconds=elapsed,
        modes=modes.summary(),
    )


def block_graph_connected(j_max: int) -> bool:
    """Connectivity of the graph on I_j = levels {j, j+1}, edges when sets intersect."""
    nodes = list(range(j_max))
    if not nodes:
        return False
    level_sets = {j: {j, j + 1} for j in nodes}
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        current = stack.pop()
        for other in nodes:
            if other not in seen and level_sets[current] & level_sets[other]:
                seen.add(other)
                stack.append(other)
    return len(seen) == len(nodes)


@dataclass
class Verdict:
    verdict: str
    kind: Optional[str] = None
    blocks: List[BlockResult] = field(default_factory=list)
    graph_connected: bool = False
    j_max: int = 0
    detectors: Dict[str, dict] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def label(self) -> str:
        return f"{self.verdict}: {self.kind}" if self.kind else self.verdict

    def to_dict(self) -> dict:
        return {
            'verdict': self.label,
            'blocks': [b.to_dict() for b in self.blocks],
            'graph_connected': self.graph_connected,
            'j_max': self.j_max,
            'detectors': self.detectors,
            'notes': self.notes,
        }


def lgtc_verdict(
    j_max: int,
    dipole: Dipole,
    inertia: Inertia,
    tol: Optional[float] = None,
    allow_large: Optional[bool] = None,
    parallel: bool = False,
    quiet: bool = False,
) -> Verdict:
    """Block-wise tracking condition on levels 0..j_max, with symmetry detectors first."""
    from .config import get_config
    from .quantum_dynamics import detect_genuine_symmetry, detect_parity_symmetry, rotated_wang_blocks

    if j_max < 1:
        raise RangeError('j_max', f"must be at least 1, got {j_max}")
    if allow_large is None:
        allow_large = get_config().allow_large_blocks

    verdict = Verdict(verdict=INCONCLUSIVE, j_max=j_max, graph_connected=block_graph_connected(j_max))
    if not inertia.resonance_exact:
        verdict.notes.append("rational I2/I3 ratio: exact resonance classification unavailable")
        return verdict

    detector_levels = range(min(j_max, 3))
    genuine = detect_genuine_symmetry(
        dipole, [coupling_blocks(block_space(j), dipole) for j in detector_levels], inertia
    )
    verdict.detectors['genuine'] = genuine.to_dict()
    if genuine.conserved:
        verdict.verdict, verdict.kind = SYMMETRY_BLOCKED, 'k-invariance'
        return verdict

    parity = detect_parity_symmetry(dipole, [rotated_wang_blocks(j, dipole) for j in detector_levels], inertia)
    verdict.detectors['parity'] = parity.to_dict()
    if parity.conserved:
        verdict.verdict, verdict.kind = SYMMETRY_BLOCKED, 'parity'
        return verdict

    from .planner import create_block_jobs
    jobs = create_block_jobs(j_max, allow_large)

    def run(job):
        return block_ideal(job['j'], j_max, dipole, inertia, tol)

    results: Dict[int, BlockResult] = {}
    runnable = [job for job in jobs if not job['skipped']]
    if parallel and len(runnable) > 1:
        from .executor import TaskExecutor
        outcome = TaskExecutor(desc="Closures", unit="block", quiet=quiet).execute_jobs(runnable, run)
        for job, result in zip(runnable, outcome['results']):
            if result is not None:
                results[job['j']] = result
    else:
        for job in runnable:
            results[job['j']] = run(job)

    for job in jobs:
        if job['j'] in results:
            verdict.blocks.append(results[job['j']])
        else:
            status = SKIPPED if job['skipped'] else 'failed'
            verdict.blocks.append(BlockResult(job['j'], job['n'], job['n'] ** 2 - 1, 0, status))
            verdict.notes.append(f"block {job['j']} {status}")

    if verdict.graph_connected and all(b.reached for b in verdict.blocks):
        verdict.verdict = MTRACKER
    return verdict
