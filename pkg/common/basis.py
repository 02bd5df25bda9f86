# Basis module
"""
Wigner labels, block spaces and basis changes for the rotational Hilbert space.

Every matrix in the toolkit is written over an ordered list of labels
(l, k, m). The global order is the lexicographic order rho with l outermost,
then k, then m, each of k and m running from -l to l.
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

from .errors import DipoleError, RangeError


WIGNER = 'Wigner'
ROTATED_WIGNER = 'RotatedWigner'
WANG = 'Wang'
ROTATED_WANG = 'RotatedWang'
VARIANT_KINDS = (WIGNER, ROTATED_WIGNER, WANG, ROTATED_WANG)

REAL_AXIS = 'RealAxis'
IMAG_AXIS = 'ImagAxis'
THETA_MODES = (REAL_AXIS, IMAG_AXIS)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, order=True)
class BasisIndex:
    """A rotational state label |j, k, m>."""

    j: int
    k: int
    m: int

    def __post_init__(self):
        if self.j < 0:
            raise RangeError('j', f"must be non-negative, got {self.j}")
        if abs(self.k) > self.j:
            raise RangeError('k', f"|k| must not exceed j={self.j}, got {self.k}")
        if abs(self.m) > self.j:
            raise RangeError('m', f"|m| must not exceed j={self.j}, got {self.m}")

    def __str__(self) -> str:
        return f"({self.j},{self.k},{self.m})"


def rho(l: int, k: int, m: int) -> int:
    """Position of (l, k, m) in the global lexicographic order."""
    idx = BasisIndex(l, k, m)
    # sum_{l' < l} (2l'+1)^2 = l(2l-1)(2l+1)/3
    offset = idx.j * (2 * idx.j - 1) * (2 * idx.j + 1) // 3
    width = 2 * idx.j + 1
    return offset + (idx.k + idx.j) * width + (idx.m + idx.j)


def level_indices(l: int) -> List[BasisIndex]:
    """All labels of level l in rho order."""
    return [BasisIndex(l, k, m) for k in range(-l, l + 1) for m in range(-l, l + 1)]


@dataclass(frozen=True)
class BlockSpace:
    """
    An ordered set of labels spanning one or more consecutive levels.

    The block M_j of the controllability analysis is the space of levels
    (j, j+1); the same type also carries full truncations and the
    fixed-k spaces N_{j,k}.
    """

    j: int
    indices: Tuple[BasisIndex, ...]
    levels: Tuple[int, ...]
    _positions: Dict[BasisIndex, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        positions = {idx: pos for pos, idx in enumerate(self.indices)}
        if len(positions) != len(self.indices):
            raise RangeError('indices', "duplicate labels in block space")
        object.__setattr__(self, '_positions', positions)

    @property
    def dim(self) -> int:
        return len(self.indices)

    def position(self, idx: BasisIndex) -> int:
        """Ordinal of a label inside this space."""
        try:
            return self._positions[idx]
        except KeyError:
            raise RangeError('index', f"{idx} is not part of this space") from None

    def index_of(self, l: int, k: int, m: int) -> int:
        return self.position(BasisIndex(l, k, m))

    def contains(self, idx: BasisIndex) -> bool:
        return idx in self._positions

    def spectral_labels(self) -> List[Tuple[int, int]]:
        """(l, k) per basis element, the handles energies and gaps depend on."""
        return [(idx.j, idx.k) for idx in self.indices]


def level_space(levels: Iterable[int]) -> BlockSpace:
    """Space spanned by the full levels given, in rho order."""
    levels = tuple(sorted(set(levels)))
    if not levels:
        raise RangeError('levels', "at least one level is required")
    if levels[0] < 0:
        raise RangeError('levels', f"levels must be non-negative, got {levels[0]}")
    if levels != tuple(range(levels[0], levels[-1] + 1)):
        raise RangeError('levels', f"levels must be consecutive, got {levels}")
    indices = tuple(idx for l in levels for idx in level_indices(l))
    return BlockSpace(j=levels[0], indices=indices, levels=levels)


def block_space(j: int) -> BlockSpace:
    """The block M_j = H_j (+) H_{j+1}."""
    if j < 0:
        raise RangeError('j', f"must be non-negative, got {j}")
    return level_space((j, j + 1))


def truncated_space(j_max: int) -> BlockSpace:
    """All levels 0..j_max."""
    if j_max < 0:
        raise RangeError('j_max', f"must be non-negative, got {j_max}")
    return level_space(range(j_max + 1))


def restricted_space(j: int, k: int) -> BlockSpace:
    """Levels (j, j+1) at fixed body projection k."""
    if j < 0:
        raise RangeError('j', f"must be non-negative, got {j}")
    if abs(k) > j + 1:
        raise RangeError('k', f"|k| must not exceed j+1={j + 1}, got {k}")
    indices = tuple(
        BasisIndex(l, k, m)
        for l in (j, j + 1) if abs(k) <= l
        for m in range(-l, l + 1)
    )
    return BlockSpace(j=j, indices=indices, levels=(j, j + 1))


@dataclass(frozen=True)
class BasisVariant:
    """Choice of basis: plain or theta-rotated Wigner functions, and their Wang combinations."""

    kind: str = WIGNER
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise RangeError('kind', f"unknown basis variant {self.kind!r}")
        if self.kind in (WIGNER, WANG) and self.theta != 0.0:
            raise RangeError('theta', f"{self.kind} carries no rotation angle")
        object.__setattr__(self, 'theta', float(self.theta) % TWO_PI)

    @classmethod
    def wigner(cls) -> 'BasisVariant':
        return cls(WIGNER)

    @classmethod
    def rotated_wigner(cls, theta: float) -> 'BasisVariant':
        return cls(ROTATED_WIGNER, theta)

    @classmethod
    def wang(cls) -> 'BasisVariant':
        return cls(WANG)

    @classmethod
    def rotated_wang(cls, theta: float) -> 'BasisVariant':
        return cls(ROTATED_WANG, theta)

    @property
    def is_wang(self) -> bool:
        return self.kind in (WANG, ROTATED_WANG)

    def __str__(self) -> str:
        if self.kind in (ROTATED_WIGNER, ROTATED_WANG):
            return f"{self.kind}({self.theta:.6f})"
        return self.kind


def wang_labels(space: BlockSpace) -> List[Tuple[int, int, int, int]]:
    """
    Column labels (l, |k|, m, gamma) of the Wang basis on a space.

    Columns follow the rho order of the representative (l, |k|, m); for
    k >= 1 the symmetric element (gamma=0) precedes the antisymmetric one.
    """
    labels = []
    for idx in space.indices:
        if idx.k < 0:
            mirror = BasisIndex(idx.j, -idx.k, idx.m)
            if not space.contains(mirror):
                raise RangeError('variant', f"Wang basis needs {mirror} alongside {idx}")
            continue
        if idx.k == 0:
            labels.append((idx.j, 0, idx.m, 0))
            continue
        mirror = BasisIndex(idx.j, -idx.k, idx.m)
        if not space.contains(mirror):
            raise RangeError('variant', f"Wang basis needs {mirror} alongside {idx}")
        labels.append((idx.j, idx.k, idx.m, 0))
        labels.append((idx.j, idx.k, idx.m, 1))
    return labels


def change_of_basis(space: BlockSpace, variant: BasisVariant) -> np.ndarray:
    """
    Unitary whose columns are the variant's basis vectors in Wigner coordinates.

    A rotated element is exp(-i k theta) D^l_{k,m}; the Wang elements are
    (D_{k} + (-1)^gamma D_{-k}) / sqrt(2) built from rotated elements.
    """
    n = space.dim
    if variant.kind == WIGNER:
        return np.eye(n, dtype=complex)

    theta = variant.theta
    if variant.kind == ROTATED_WIGNER:
        phases = [cmath.exp(-1j * idx.k * theta) for idx in space.indices]
        return np.diag(np.asarray(phases, dtype=complex))

    U = np.zeros((n, n), dtype=complex)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for col, (l, k, m, gamma) in enumerate(wang_labels(space)):
        if k == 0:
            U[space.index_of(l, 0, m), col] = 1.0
            continue
        U[space.index_of(l, k, m), col] = cmath.exp(-1j * k * theta) * inv_sqrt2
        U[space.index_of(l, -k, m), col] = (-1) ** gamma * cmath.exp(1j * k * theta) * inv_sqrt2
    return U


def theta_for_dipole(delta1: float, delta2: float, mode: str = REAL_AXIS) -> float:
    """
    Rotation angle aligning the in-plane dipole factor delta2 + i delta1.

    RealAxis makes exp(-i theta)(delta2 + i delta1) real positive; ImagAxis
    makes it i * sqrt(delta1^2 + delta2^2).
    """
    if mode not in THETA_MODES:
        raise RangeError('mode', f"unknown theta mode {mode!r}")
    if delta1 == 0.0 and delta2 == 0.0:
        raise DipoleError("theta undefined: in-plane dipole component is zero")
    phi = math.atan2(delta1, delta2)
    if mode == IMAG_AXIS:
        phi -= math.pi / 2.0
    return phi % TWO_PI


def p3_operator(space: BlockSpace) -> np.ndarray:
    """Body-frame projection P3, diagonal with the k of each Wigner element."""
    return np.diag(np.asarray([idx.k for idx in space.indices], dtype=float))


def is_unitary(U: np.ndarray, tol: float = 1e-12) -> bool:
    n = U.shape[0]
    return float(np.linalg.norm(U.conj().T @ U - np.eye(n), 'fro')) < tol
