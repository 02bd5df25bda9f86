# Job Planner module
"""Split verification tasks into independent jobs for the executor."""

from typing import Dict, List, Tuple

from .basis import block_space


# Acceptance criteria per suite; the fast suite leaves out the su(34) closure
ACCEPTANCE_CRITERIA: Dict[int, str] = {
    1: "block closure j=0 reaches su(10)",
    2: "block closure j=1 reaches su(34)",
    3: "genuine top conserves k",
    4: "orthogonal top conserves parity of j+gamma+k",
    5: "restricted S_0 closures reach su(4) and su(8)",
    6: "resonance lemmas hold in exact mode",
    7: "assembled couplings match the quadrature oracle",
    8: "classical bracket rank certificates",
    9: "classical conservation laws",
    10: "propagator unitarity",
    11: "three-wave mixing breaks the k <-> -k degeneracy",
}

SUITES: Dict[str, Tuple[int, ...]] = {
    'fast': (1, 3, 4, 5, 6, 7, 8, 9, 10, 11),
    'full': tuple(range(1, 12)),
}

# Blocks from j=2 on are su(74) and larger
LARGE_BLOCK_J = 2


def create_block_jobs(j_max: int, allow_large: bool = False) -> List[dict]:
    """
    One job per block M_j, j = 0 .. j_max-1.

    Returns:
        List of job dicts with 'kind', 'j', 'n' and 'skipped'
    """
    jobs = []
    for j in range(j_max):
        n = block_space(j).dim
        jobs.append({
            'kind': 'block',
            'j': j,
            'n': n,
            'skipped': j >= LARGE_BLOCK_J and not allow_large,
        })
    return jobs


def create_sample_jobs(count: int, chunk: int = 100) -> List[dict]:
    """Contiguous [start, start+count) slices of a sample set."""
    if count < 0:
        raise ValueError(f"Sample count must be non-negative: {count}")
    chunk = max(1, chunk)
    return [
        {'kind': 'samples', 'start': start, 'count': min(chunk, count - start)}
        for start in range(0, count, chunk)
    ]


def create_suite_jobs(suite: str) -> List[dict]:
    """Acceptance criteria of a suite; skipped criteria stay in the list."""
    if suite not in SUITES:
        raise ValueError(f"Unknown suite: {suite!r} (expected one of: {', '.join(SUITES)})")
    selected = SUITES[suite]
    return [
        {
            'kind': 'criterion',
            'criterion': cid,
            'description': ACCEPTANCE_CRITERIA[cid],
            'skipped': cid not in selected,
        }
        for cid in sorted(ACCEPTANCE_CRITERIA)
    ]
