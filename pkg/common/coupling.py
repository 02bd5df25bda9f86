# Coupling module
"""
Interaction Hamiltonians B_1, B_2, B_3 of a dipole in an external field.

B_l = -<R(alpha, beta, gamma) delta, e_l> acts on the Wigner functions
through closed-form pairings. The pairings are filled in one direction
("upward": higher level, then higher k, then higher m) and completed by
skew-Hermitian symmetry of iB_l.

The explicit basis functions behind the tables are

    phi^j_{k,m} = sqrt(2j+1) i^(k-m) exp(i(m alpha + k gamma)) d^j_{m,k}(beta)

orthonormal for the Haar measure normalized to one. The quadrature oracle
integrates exactly these functions and is independent of the tables.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from .basis import (
    WIGNER,
    BasisIndex,
    BasisVariant,
    BlockSpace,
    change_of_basis,
)
from .errors import DipoleError, DomainError, RangeError
from .spectrum import Inertia, selection_neighbors, space_energies

logger = logging.getLogger(__name__)


GENUINE = 'Genuine'
ORTHOGONAL = 'Orthogonal'
GENERIC_ACCIDENTAL = 'GenericAccidental'

ORACLE_MAX_J = 3


@dataclass(frozen=True)
class Dipole:
    """Body-frame electric dipole (delta1, delta2, delta3)."""

    delta1: float
    delta2: float
    delta3: float

    def __post_init__(self):
        if self.delta1 == 0.0 and self.delta2 == 0.0 and self.delta3 == 0.0:
            raise DipoleError("dipole is zero")

    @property
    def kind(self) -> str:
        in_plane = self.delta1 != 0.0 or self.delta2 != 0.0
        if not in_plane:
            return GENUINE
        if self.delta3 == 0.0:
            return ORTHOGONAL
        return GENERIC_ACCIDENTAL

    @property
    def in_plane_norm(self) -> float:
        return math.hypot(self.delta1, self.delta2)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.delta1, self.delta2, self.delta3], dtype=float)

    @property
    def plus(self) -> complex:
        """delta2 + i delta1."""
        return complex(self.delta2, self.delta1)

    @property
    def minus(self) -> complex:
        """delta2 - i delta1."""
        return complex(self.delta2, -self.delta1)


REFERENCE_DIPOLE = Dipole(0.0, 0.2, 0.3)


def _root(radicand: float, name: str) -> float:
    if radicand < 0:
        raise DomainError(f"{name}: negative radicand {radicand}")
    return math.sqrt(radicand)


def _norm_j(j: int) -> float:
    return math.sqrt((2 * j + 1) * (2 * j + 3))


def _in_level(j: int, name: str) -> int:
    if j <= 0:
        raise DomainError(f"{name}: in-level coefficient undefined at j={j}")
    return j * (j + 1)


def coeff_c(j: int, k: int, m: int) -> float:
    return (
        _root((j + k + 1) * (j + k + 2), 'c')
        * _root((j + m + 1) * (j + m + 2), 'c')
        / (4 * (j + 1) * _norm_j(j))
    )


def coeff_d(j: int, k: int, m: int) -> float:
    return (
        _root((j + k + 1) * (j + k + 2), 'd')
        * _root((j + 1) ** 2 - m * m, 'd')
        / (2 * (j + 1) * _norm_j(j))
    )


def coeff_h(j: int, k: int, m: int) -> float:
    jj = _in_level(j, 'h')
    return _root(jj - k * (k + 1), 'h') * _root(jj - m * (m + 1), 'h') / (4 * jj)


def coeff_q(j: int, k: int, m: int) -> float:
    jj = _in_level(j, 'q')
    return _root(jj - k * (k + 1), 'q') * m / (2 * jj)


def coeff_a(j: int, k: int, m: int) -> float:
    return (
        _root((j + 1) ** 2 - k * k, 'a')
        * _root((j + m + 1) * (j + m + 2), 'a')
        / (2 * (j + 1) * _norm_j(j))
    )


def coeff_b(j: int, k: int, m: int) -> float:
    return (
        _root((j + 1) ** 2 - k * k, 'b')
        * _root((j + 1) ** 2 - m * m, 'b')
        / ((j + 1) * _norm_j(j))
    )


def coeff_p(j: int, k: int, m: int) -> float:
    """In-level m-raising Stark coefficient driven by delta3."""
    jj = _in_level(j, 'p')
    return k * _root(jj - m * (m + 1), 'p') / (2 * jj)


def coeff_s(j: int, k: int, m: int) -> float:
    """Diagonal Stark coefficient driven by delta3."""
    jj = _in_level(j, 's')
    return k * m / jj


def _is_upward(a: BasisIndex, b: BasisIndex) -> bool:
    if b.j != a.j:
        return b.j == a.j + 1
    if b.k != a.k:
        return b.k == a.k + 1
    return b.m >= a.m


def _upward_element(a: BasisIndex, b: BasisIndex, dipole: Dipole, l_index: int) -> complex:
    """<D_a, iB_l D_b> for b above a."""
    dj, dk, dm = b.j - a.j, b.k - a.k, b.m - a.m
    if abs(dk) > 1 or abs(dm) > 1:
        return 0j
    j, k, m = a.j, a.k, a.m
    plus, minus, d3 = dipole.plus, dipole.minus, dipole.delta3

    if dj == 1:
        if dk == 1:
            if dm != 0:
                c = coeff_c(j, k, dm * m)
                if l_index == 1:
                    return -c * plus
                if l_index == 2:
                    return -dm * 1j * c * plus
                return 0j
            return 1j * coeff_d(j, k, m) * plus if l_index == 3 else 0j
        if dk == -1:
            if dm != 0:
                c = coeff_c(j, -k, dm * m)
                if l_index == 1:
                    return c * minus
                if l_index == 2:
                    return dm * 1j * c * minus
                return 0j
            return -1j * coeff_d(j, -k, m) * minus if l_index == 3 else 0j
        if dm != 0:
            a_jkm = coeff_a(j, k, dm * m)
            if l_index == 1:
                return a_jkm * d3
            if l_index == 2:
                return dm * 1j * a_jkm * d3
            return 0j
        return -1j * coeff_b(j, k, m) * d3 if l_index == 3 else 0j

    if dj != 0 or j == 0:
        return 0j

    if dk == 1:
        if dm != 0:
            h = coeff_h(j, k, dm * m)
            if l_index == 1:
                return -dm * h * plus
            if l_index == 2:
                return -1j * h * plus
            return 0j
        return -1j * coeff_q(j, k, m) * plus if l_index == 3 else 0j

    if dm == 1:
        p = coeff_p(j, k, m)
        if l_index == 1:
            return -p * d3
        if l_index == 2:
            return -1j * p * d3
        return 0j
    if dm == 0 and l_index == 3:
        return -1j * coeff_s(j, k, m) * d3
    return 0j


def _check_field(l_index: int) -> None:
    if l_index not in (1, 2, 3):
        raise RangeError('l_index', f"field index must be 1, 2 or 3, got {l_index}")


def matrix_element(a: BasisIndex, b: BasisIndex, dipole: Dipole, l_index: int) -> complex:
    """<D_a, iB_l D_b> in the Wigner basis."""
    _check_field(l_index)
    if abs(b.j - a.j) > 1:
        return 0j
    if _is_upward(a, b):
        return _upward_element(a, b, dipole, l_index)
    return -_upward_element(b, a, dipole, l_index).conjugate()


@dataclass(frozen=True, eq=False)
class CouplingBlock:
    """Hermitian matrix of B_l on a space, in a given basis variant."""

    l_index: int
    space: BlockSpace
    variant: BasisVariant
    dipole: Dipole
    matrix: np.ndarray

    @property
    def skew(self) -> np.ndarray:
        """The skew-Hermitian generator iB_l."""
        return 1j * self.matrix

    def hermiticity_error(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T, 'fro'))


CouplingBlocks = Tuple[CouplingBlock, CouplingBlock, CouplingBlock]


def wigner_skew_matrix(space: BlockSpace, dipole: Dipole, l_index: int) -> np.ndarray:
    """iB_l over the Wigner labels of a space."""
    _check_field(l_index)
    n = space.dim
    top = max(space.levels)
    M = np.zeros((n, n), dtype=complex)
    for row, a in enumerate(space.indices):
        for b in selection_neighbors(a, top):
            if space.contains(b) and _is_upward(a, b):
                value = _upward_element(a, b, dipole, l_index)
                if value != 0:
                    col = space.position(b)
                    M[row, col] = value
                    if col != row:
                        M[col, row] = -value.conjugate()
    return M


def assemble_block(
    space: BlockSpace,
    dipole: Dipole,
    variant: Optional[BasisVariant] = None,
    l_index: int = 1,
) -> CouplingBlock:
    """Assemble B_l on a space and express it in the requested basis."""
    if not isinstance(dipole, Dipole):
        raise DipoleError("a Dipole instance is required")
    variant = variant or BasisVariant.wigner()
    B = -1j * wigner_skew_matrix(space, dipole, l_index)
    if variant.kind != WIGNER:
        U = change_of_basis(space, variant)
        B = U.conj().T @ B @ U
    return CouplingBlock(l_index=l_index, space=space, variant=variant, dipole=dipole, matrix=B)


def coupling_blocks(
    space: BlockSpace,
    dipole: Dipole,
    variant: Optional[BasisVariant] = None,
) -> CouplingBlocks:
    return tuple(assemble_block(space, dipole, variant, l) for l in (1, 2, 3))


def hamiltonian(space: BlockSpace, inertia: Inertia, variant: Optional[BasisVariant] = None) -> np.ndarray:
    """Free rotor Hamiltonian on a space in the requested basis."""
    H = np.diag(space_energies(inertia, space)).astype(complex)
    if variant is not None and variant.kind != WIGNER:
        U = change_of_basis(space, variant)
        H = U.conj().T @ H @ U
    return H


def wigner_small_d(j: int, mp: int, m: int, beta) -> np.ndarray:
    """
    d^j_{m',m}(beta) from the finite factorial sum

        sum_s (-1)^(m'-m+s) sqrt((j+m')!(j-m')!(j+m)!(j-m)!)
              / ((j+m-s)! s! (m'-m+s)! (j-m'-s)!)
              * cos(beta/2)^(2j+m-m'-2s) * sin(beta/2)^(m'-m+2s)
    """
    beta = np.asarray(beta, dtype=float)
    f = math.factorial
    cos_half = np.cos(beta / 2.0)
    sin_half = np.sin(beta / 2.0)
    prefactor = math.sqrt(f(j + mp) * f(j - mp) * f(j + m) * f(j - m))
    total = np.zeros_like(beta)
    for s in range(max(0, m - mp), min(j + m, j - mp) + 1):
        denom = f(j + m - s) * f(s) * f(mp - m + s) * f(j - mp - s)
        sign = -1.0 if (mp - m + s) % 2 else 1.0
        total = total + sign * prefactor / denom * (
            cos_half ** (2 * j + m - mp - 2 * s) * sin_half ** (mp - m + 2 * s)
        )
    return total


def _phase(idx: BasisIndex) -> complex:
    return 1j ** ((idx.k - idx.m) % 4)


def wigner_function(j: int, k: int, m: int, alpha, beta, gamma) -> np.ndarray:
    """Normalized basis function phi^j_{k,m} evaluated at Euler angles."""
    idx = BasisIndex(j, k, m)
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float), np.asarray(gamma, dtype=float)
    )
    return (
        math.sqrt(2 * j + 1)
        * _phase(idx)
        * np.exp(1j * (m * alpha + k * gamma))
        * wigner_small_d(j, m, k, beta)
    )


# R(alpha, beta, gamma) as separable terms: (sign, f(alpha), g(beta), h(gamma))
# with '1', 'c' (cos) and 's' (sin).
ROTATION_TERMS = {
    (1, 1): ((1, 'c', 'c', 'c'), (-1, 's', '1', 's')),
    (1, 2): ((-1, 'c', 'c', 's'), (-1, 's', '1', 'c')),
    (1, 3): ((1, 'c', 's', '1'),),
    (2, 1): ((1, 's', 'c', 'c'), (1, 'c', '1', 's')),
    (2, 2): ((-1, 's', 'c', 's'), (1, 'c', '1', 'c')),
    (2, 3): ((1, 's', 's', '1'),),
    (3, 1): ((-1, '1', 's', 'c'),),
    (3, 2): ((1, '1', 's', 's'),),
    (3, 3): ((1, '1', 'c', '1'),),
}


def rotation_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Explicit R(alpha, beta, gamma) assembled from ROTATION_TERMS."""
    funcs = {'1': lambda x: 1.0, 'c': math.cos, 's': math.sin}
    R = np.zeros((3, 3))
    for (row, col), terms in ROTATION_TERMS.items():
        R[row - 1, col - 1] = sum(
            sign * funcs[fa](alpha) * funcs[fb](beta) * funcs[fc](gamma)
            for sign, fa, fb, fc in terms
        )
    return R


@lru_cache(maxsize=8)
def _nodes(n_alpha: int, n_beta: int, n_gamma: int):
    alpha = 2.0 * math.pi * np.arange(n_alpha) / n_alpha
    gamma = 2.0 * math.pi * np.arange(n_gamma) / n_gamma
    x, w = np.polynomial.legendre.leggauss(n_beta)
    beta = np.arccos(x)
    return alpha, beta, gamma, w


@lru_cache(maxsize=4096)
def _beta_profile(j: int, m: int, k: int, n_beta: int) -> np.ndarray:
    _, beta, _, _ = _nodes(1, n_beta, 1)
    return wigner_small_d(j, m, k, beta)


def _angle_values(name: str, angles: np.ndarray) -> np.ndarray:
    if name == 'c':
        return np.cos(angles)
    if name == 's':
        return np.sin(angles)
    return np.ones_like(angles)


def _oracle_nodes(nodes: Optional[Tuple[int, int, int]]) -> Tuple[int, int, int]:
    if nodes is not None:
        return nodes
    from .config import get_config
    config = get_config()
    return (config.alpha_nodes, config.beta_nodes, config.gamma_nodes)


def _oracle_matrix(
    rows: Sequence[BasisIndex],
    cols: Sequence[BasisIndex],
    dipole: Dipole,
    l_index: int,
    nodes: Optional[Tuple[int, int, int]] = None,
) -> np.ndarray:
    _check_field(l_index)
    for idx in list(rows) + list(cols):
        if idx.j > ORACLE_MAX_J:
            raise DomainError(f"quadrature oracle limited to j <= {ORACLE_MAX_J}, got {idx}")
    n_alpha, n_beta, n_gamma = _oracle_nodes(nodes)
    alpha, beta, gamma, weights = _nodes(n_alpha, n_beta, n_gamma)

    def alpha_table(labels):
        return np.exp(1j * np.outer(alpha, [idx.m for idx in labels]))

    def gamma_table(labels):
        return np.exp(1j * np.outer(gamma, [idx.k for idx in labels]))

    def beta_table(labels):
        return np.stack([_beta_profile(idx.j, idx.m, idx.k, n_beta) for idx in labels], axis=1)

    ea_r, ea_c = alpha_table(rows), alpha_table(cols)
    eg_r, eg_c = gamma_table(rows), gamma_table(cols)
    db_r, db_c = beta_table(rows), beta_table(cols)

    norm_r = np.asarray([math.sqrt(2 * idx.j + 1) * _phase(idx) for idx in rows])
    norm_c = np.asarray([math.sqrt(2 * idx.j + 1) * _phase(idx) for idx in cols])
    scale = np.outer(norm_r.conj(), norm_c)

    def mean_alpha(fa):
        return (ea_r.conj().T * _angle_values(fa, alpha)) @ ea_c / n_alpha

    def mean_gamma(fc):
        return (eg_r.conj().T * _angle_values(fc, gamma)) @ eg_c / n_gamma

    def mean_beta(fb):
        return (db_r.T * (weights * _angle_values(fb, beta))) @ db_c / 2.0

    B = np.zeros((len(rows), len(cols)), dtype=complex)
    delta = dipole.vector
    for i in range(3):
        if delta[i] == 0.0:
            continue
        for sign, fa, fb, fc in ROTATION_TERMS[(l_index, i + 1)]:
            B -= delta[i] * sign * mean_alpha(fa) * mean_beta(fb) * mean_gamma(fc)
    return 1j * B * scale


def quadrature_oracle(
    frm: BasisIndex,
    to: BasisIndex,
    dipole: Dipole,
    l_index: int,
    nodes: Optional[Tuple[int, int, int]] = None,
) -> complex:
    """<D_from, iB_l D_to> by direct integration over the Euler angles."""
    return complex(_oracle_matrix([frm], [to], dipole, l_index, nodes)[0, 0])


def oracle_block(
    space: BlockSpace,
    dipole: Dipole,
    l_index: int,
    nodes: Optional[Tuple[int, int, int]] = None,
) -> np.ndarray:
    """iB_l over the whole space by quadrature."""
    return _oracle_matrix(space.indices, space.indices, dipole, l_index, nodes)


def oracle_discrepancy(space: BlockSpace, dipole: Dipole, nodes=None) -> float:
    """Max entrywise |tables - quadrature| over the three fields."""
    worst = 0.0
    for l_index in (1, 2, 3):
        diff = wigner_skew_matrix(space, dipole, l_index) - oracle_block(space, dipole, l_index, nodes)
        worst = max(worst, float(np.max(np.abs(diff))))
    logger.debug("oracle discrepancy on levels %s: %.3e", space.levels, worst)
    return worst
