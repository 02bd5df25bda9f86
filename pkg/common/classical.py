# Classical rotor module
"""
Controlled rigid symmetric top on S^3 x R^3 (the quaternion lift of SO(3) x R^3).

State is (q, P): a unit attitude quaternion and the body-frame angular
momentum. The drift X moves the attitude with angular velocity beta P and
the momentum by Euler's equations. Control field Y_l adds the torque
(q* e_l q) x delta from a dipole delta in a lab field along e_l.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import sympy as sp

from .coupling import GENUINE, Dipole
from .errors import RangeError
from .quantum_dynamics import ControlPulse
from .spectrum import Inertia

logger = logging.getLogger(__name__)


RANK_RTOL = 1e-8
SINGULAR_TOL = 1e-6
CERTIFICATE = ('X', 'Y1', 'Y2', 'Y3', '[X,Y1]', '[X,Y2]', '[[X,Y1],Y1]')
SPHERE_FAMILY = ('X', '[X,Y1]', '[X,Y2]', '[[X,Y1],X]')
MOMENTUM_FAMILY = ('Y1', 'Y2', 'Y3')
UNIT = np.eye(3)


# Quaternions as [w, x, y, z]

def _qmul(a, b) -> list:
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]


def quat_mul(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    return np.asarray(_qmul(a, b), dtype=float)


def quat_conj(q: Sequence[float]) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]], dtype=float)


def quat_rotate(v: Sequence[float], q: Sequence[float]) -> np.ndarray:
    """Vector part of q v q*."""
    return quat_mul(quat_mul(q, [0.0, *v]), quat_conj(q))[1:]


def quat_from_axis_angle(axis: Sequence[float], angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise RangeError('axis', "rotation axis is zero")
    return np.concatenate([[math.cos(angle / 2)], math.sin(angle / 2) * axis / norm])


def body_axis(q: Sequence[float], l_index: int) -> np.ndarray:
    """g^-1 e_l, the lab axis e_l seen in the body frame (q* e_l q)."""
    return quat_rotate(UNIT[l_index - 1], quat_conj(q))


@dataclass(frozen=True)
class ClassicalState:
    q: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        P = np.asarray(self.P, dtype=float)
        if q.shape != (4,) or P.shape != (3,):
            raise RangeError('state', "need a quaternion of length 4 and a momentum of length 3")
        if abs(np.linalg.norm(q) - 1.0) > 1e-10:
            raise RangeError('q', f"attitude quaternion must be unit, norm is {np.linalg.norm(q)}")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'P', P)

    @classmethod
    def from_vector(cls, x: np.ndarray) -> 'ClassicalState':
        q = np.asarray(x[:4], dtype=float)
        return cls(q / np.linalg.norm(q), np.asarray(x[4:], dtype=float))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.P])


@dataclass(frozen=True)
class BodyParams:
    inertia: Inertia
    dipole: Dipole

    @property
    def beta(self) -> np.ndarray:
        return np.asarray(self.inertia.beta)

    @property
    def delta(self) -> np.ndarray:
        return self.dipole.vector

    @property
    def symbols_values(self) -> Tuple[float, ...]:
        return (self.inertia.I2, self.inertia.I3, *self.dipole.vector)


# Vector fields (numeric)

def _drift(x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    q, P = x[:4], x[4:]
    omega = beta * P
    return np.concatenate([quat_mul(q, [0.0, *omega]), np.cross(P, omega)])


def _control(x: np.ndarray, delta: np.ndarray, l_index: int) -> np.ndarray:
    return np.concatenate([np.zeros(4), np.cross(body_axis(x[:4], l_index), delta)])


def drift_X(state: ClassicalState, params: BodyParams) -> np.ndarray:
    """Drift: q' = q (0, beta P), P' = P x beta P."""
    return _drift(state.vector, params.beta)


def control_Y(state: ClassicalState, params: BodyParams, l_index: int) -> np.ndarray:
    """Control field l: q' = 0, P' = (q* e_l q) x delta."""
    if l_index not in (1, 2, 3):
        raise RangeError('l_index', f"must be 1, 2 or 3, got {l_index}")
    return _control(state.vector, params.delta, l_index)


def _field(x: np.ndarray, u: Sequence[float], beta: np.ndarray, delta: np.ndarray) -> np.ndarray:
    dx = _drift(x, beta)
    for l_index, value in enumerate(u, start=1):
        if value:
            dx += value * _control(x, delta, l_index)
    return dx


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return self.states[:, :4]

    @property
    def P(self) -> np.ndarray:
        return self.states[:, 4:]

    @property
    def final(self) -> ClassicalState:
        return ClassicalState.from_vector(self.states[-1])

    def p3_drift(self) -> np.ndarray:
        return self.P[:, 2] - self.P[0, 2]


def integrate(
    state0: ClassicalState,
    pulse: ControlPulse,
    params: BodyParams,
    step: float = 1e-3,
) -> Trajectory:
    """RK4 over each constant-control segment, renormalizing q after every step."""
    if not step > 0:
        raise RangeError('step', f"must be positive, got {step}")
    beta, delta = params.beta, params.delta
    x = state0.vector.copy()
    t = 0.0
    times, states = [t], [x.copy()]
    for duration, u in pulse.segments:
        n = max(1, math.ceil(duration / step - 1e-9))
        h = duration / n
        for _ in range(n):
            k1 = _field(x, u, beta, delta)
            k2 = _field(x + 0.5 * h * k1, u, beta, delta)
            k3 = _field(x + 0.5 * h * k2, u, beta, delta)
            k4 = _field(x + h * k3, u, beta, delta)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            x[:4] /= np.linalg.norm(x[:4])
            t += h
            times.append(t)
            states.append(x.copy())
    return Trajectory(np.asarray(times), np.vstack(states))


def first_integrals(state: ClassicalState, params: BodyParams) -> Dict[str, float]:
    P = state.P
    return {
        'P_norm_sq': float(P @ P),
        'kinetic_energy': float(0.5 * P @ (params.beta * P)),
        'P3': float(P[2]),
        'P_dot_delta': float(P @ params.delta),
    }


# Symbolic fields and brackets

COORDS = sp.symbols('q0 q1 q2 q3 P1 P2 P3', real=True)
PARAMS = sp.symbols('I2 I3 d1 d2 d3', positive=True)


def lie_bracket(A: sp.Matrix, B: sp.Matrix) -> sp.Matrix:
    """[A, B] = DB A - DA B in the ambient coordinates."""
    x = sp.Matrix(COORDS)
    return (B.jacobian(x) * A - A.jacobian(x) * B).expand()


def _symbolic_generators() -> List[Tuple[str, sp.Matrix]]:
    q = COORDS[:4]
    P = sp.Matrix(COORDS[4:])
    I2, I3, d1, d2, d3 = PARAMS
    omega = sp.Matrix([P[0] / I2, P[1] / I2, P[2] / I3])
    delta = sp.Matrix([d1, d2, d3])
    q_conj = [q[0], -q[1], -q[2], -q[3]]

    X = sp.Matrix(_qmul(q, [0, *omega]) + list(P.cross(omega)))
    fields = [('X', X.expand())]
    for l_index in (1, 2, 3):
        e = [0, 0, 0, 0]
        e[l_index] = 1
        axis = sp.Matrix(_qmul(_qmul(q_conj, e), q)[1:])
        fields.append((f'Y{l_index}', sp.Matrix([0, 0, 0, 0] + list(axis.cross(delta))).expand()))
    return fields


@dataclass
class FieldTable:
    """Fields and left-normed brackets up to a depth, with a stacked numpy evaluator."""

    names: List[str]
    levels: Dict[str, int]
    expressions: Dict[str, sp.Matrix]
    evaluator: Callable = field(repr=False, default=None)

    def evaluate(self, state: ClassicalState, params: BodyParams) -> Dict[str, np.ndarray]:
        values = np.asarray(self.evaluator(*state.vector, *params.symbols_values), dtype=float)
        return {name: values[:, i] for i, name in enumerate(self.names)}


@lru_cache(maxsize=None)
def vector_fields(depth: int = 3) -> FieldTable:
    """Symbolic X, Y1..Y3 and their brackets; parameters stay symbolic."""
    if depth < 2:
        raise RangeError('depth', f"must be at least 2, got {depth}")
    generators = _symbolic_generators()
    expressions = dict(generators)
    levels = {name: 1 for name, _ in generators}
    frontier = []
    for i, (na, A) in enumerate(generators):
        for nb, B in generators[i + 1:]:
            frontier.append((f'[{na},{nb}]', lie_bracket(A, B)))
    # the certificate needs depth 3 even when a shallower family is requested
    top = max(depth, 3)
    for level in range(2, top + 1):
        for name, expr in frontier:
            expressions[name] = expr
            levels[name] = level
        if level < top:
            frontier = [(f'[{n},{g}]', lie_bracket(expr, G)) for n, expr in frontier for g, G in generators]

    names = list(expressions)
    stacked = sp.Matrix.hstack(*(expressions[n] for n in names))
    evaluator = sp.lambdify(COORDS + PARAMS, stacked, 'numpy')
    logger.debug("built %d vector fields up to depth %d", len(names), depth)
    return FieldTable(names, levels, expressions, evaluator)


def _tangent(v: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Project the q-part of an ambient vector onto T_q S^3."""
    out = v.copy()
    out[:4] -= (q @ v[:4]) * q
    return out


def numerical_rank(rows: np.ndarray, rtol: float = RANK_RTOL) -> Tuple[int, np.ndarray]:
    s = np.linalg.svd(rows, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > rtol * s[0])), s


@dataclass
class RankReport:
    rank: int
    singular_values: List[float]
    sphere_rank: int
    momentum_rank: int
    family_rank: int
    depth: int

    @property
    def full(self) -> bool:
        return self.rank == 6

    def to_dict(self) -> dict:
        return {
            'rank': self.rank,
            'singular_values': self.singular_values,
            'sphere_rank': self.sphere_rank,
            'momentum_rank': self.momentum_rank,
            'family_rank': self.family_rank,
            'depth': self.depth,
        }


def bracket_rank(state: ClassicalState, params: BodyParams, depth: int = 3, rtol: float = RANK_RTOL) -> RankReport:
    """Rank of the certificate fields on the 6-dimensional tangent space at a state."""
    table = vector_fields(depth)
    values = {name: _tangent(v, state.q) for name, v in table.evaluate(state, params).items()}

    rank, s = numerical_rank(np.vstack([values[n] for n in CERTIFICATE]), rtol)
    sphere, _ = numerical_rank(np.vstack([values[n][:4] for n in SPHERE_FAMILY]), rtol)
    momentum, _ = numerical_rank(np.vstack([values[n][4:] for n in MOMENTUM_FAMILY]), rtol)
    family = np.vstack([values[n] for n in table.names if table.levels[n] <= depth])
    family_rank, _ = numerical_rank(family, rtol)
    return RankReport(rank, s.tolist(), sphere, momentum, family_rank, depth)


def singular_factors(state: ClassicalState, params: BodyParams) -> Dict[str, float]:
    """The five factors S1..S5 and their product S(q, P)."""
    q0, q1, q2, q3 = state.q
    d1, d2, d3 = params.delta
    I2, I3 = params.inertia.I2, params.inertia.I3

    S1 = (I2 - I3) / (32 * I2 ** 3 * I3 ** 2) * q1
    S2 = -2 * q1 * q2 * d1 + 2 * q0 * q3 * d1 + q0 ** 2 * d2 + q1 ** 2 * d2 - (q2 ** 2 + q3 ** 2) * d2
    S3 = (q0 * (-2 * q2 * d1 + 2 * q1 * d2) + 2 * q3 * (q1 * d1 + q2 * d2)
          + (q0 ** 2 - q1 ** 2 - q2 ** 2 + q3 ** 2) * d3) ** 2
    S4 = (-2 * (q0 * q2 + q1 * q3) * (d1 ** 2 + d2 ** 2)
          + ((q0 ** 2 + q1 ** 2 - q2 ** 2 - q3 ** 2) * d1 + 2 * (q1 * q2 - q0 * q3) * d2) * d3)
    S5 = float(state.P @ params.delta)
    product = S1 * S2 * S3 * S4 * S5
    return {'S1': S1, 'S2': S2, 'S3': S3, 'S4': S4, 'S5': S5, 'S': product, 'sign': int(np.sign(product))}


def sample_states(rng: np.random.Generator, count: int, p_scale: float = 1.0) -> List[ClassicalState]:
    """q uniform on S^3 (normalized Gaussian), P uniform in [-p_scale, p_scale]^3."""
    q = rng.normal(size=(count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    P = rng.uniform(-p_scale, p_scale, size=(count, 3))
    return [ClassicalState(qi, Pi) for qi, Pi in zip(q, P)]


@dataclass
class SurveyReport:
    count: int
    rank_histogram: Dict[int, int]
    generic_states: int
    generic_full_rank: int
    p3_nonzero: int
    rank5_p3_nonzero: int
    max_rank: int
    dipole_kind: str

    def summary(self) -> str:
        if self.dipole_kind == GENUINE:
            return (f"rank <= 5 at {self.count - sum(v for r, v in self.rank_histogram.items() if r > 5)}"
                    f"/{self.count} sampled states; rank 5 at {self.rank5_p3_nonzero}/{self.p3_nonzero} with P3 != 0")
        return f"rank 6 at {self.generic_full_rank}/{self.generic_states} sampled generic states"

    def to_dict(self) -> dict:
        return {
            'count': self.count,
            'rank_histogram': {str(k): v for k, v in sorted(self.rank_histogram.items())},
            'generic_states': self.generic_states,
            'generic_full_rank': self.generic_full_rank,
            'p3_nonzero': self.p3_nonzero,
            'rank5_p3_nonzero': self.rank5_p3_nonzero,
            'max_rank': self.max_rank,
            'dipole_kind': self.dipole_kind,
            'summary': self.summary(),
        }


def _survey_chunk(
    states: Sequence[ClassicalState], params: BodyParams, depth: int, rtol: float
) -> List[Tuple[int, float, float]]:
    return [(bracket_rank(s, params, depth, rtol).rank, singular_factors(s, params)['S'], float(s.P[2])) for s in states]


def rank_survey(
    params: BodyParams,
    count: int = 1000,
    seed: int = 0,
    p_scale: float = 1.0,
    depth: int = 3,
    parallel: bool = False,
    chunk: int = 100,
    rtol: float = RANK_RTOL,
    quiet: bool = False,
) -> SurveyReport:
    """Monte Carlo rank certificate over uniformly sampled states."""
    if count < 1:
        raise RangeError('samples', f"must be positive, got {count}")
    states = sample_states(np.random.default_rng(seed), count, p_scale)
    vector_fields(depth)

    from .planner import create_sample_jobs
    jobs = create_sample_jobs(count, chunk)

    def run(job):
        return _survey_chunk(states[job['start']:job['start'] + job['count']], params, depth, rtol)

    if parallel and len(jobs) > 1:
        from .executor import TaskExecutor
        outcome = TaskExecutor(desc="Rank survey", unit="chunk", quiet=quiet).execute_jobs(jobs, run)
        chunks = [r for r in outcome['results'] if r is not None]
    else:
        chunks = [run(job) for job in jobs]
    rows = [row for part in chunks for row in part]

    histogram: Dict[int, int] = {}
    for rank, _, _ in rows:
        histogram[rank] = histogram.get(rank, 0) + 1
    generic = [rank for rank, S, _ in rows if abs(S) > SINGULAR_TOL]
    p3 = [rank for rank, _, P3 in rows if abs(P3) > SINGULAR_TOL]
    report = SurveyReport(
        count=len(rows),
        rank_histogram=histogram,
        generic_states=len(generic),
        generic_full_rank=sum(1 for r in generic if r == 6),
        p3_nonzero=len(p3),
        rank5_p3_nonzero=sum(1 for r in p3 if r == 5),
        max_rank=max(histogram) if histogram else 0,
        dipole_kind=params.dipole.kind,
    )
    logger.info("rank survey: %s", report.summary())
    return report


def rotate_about_e3(state: ClassicalState, angle: float = math.pi / 2) -> ClassicalState:
    """Left-multiply the attitude by a rotation about e3."""
    r = quat_from_axis_angle((0.0, 0.0, 1.0), angle)
    return ClassicalState(quat_mul(r, state.q), state.P)


def relabel_pulse(pulse: ControlPulse) -> ControlPulse:
    """Controls (u1, u2, u3) -> (-u2, u1, u3), matching a quarter turn about e3."""
    return ControlPulse(tuple((d, (-u[1], u[0], u[2])) for d, u in pulse.segments), pulse.u_max)


def classical_pulse(rng: np.random.Generator, duration: float, segments: int, u_max: float = 1.0) -> ControlPulse:
    return ControlPulse.random(rng, segments, duration / segments, u_max)
