# CLI module
"""Command-line interface for symtop."""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np

from .config import (
    CONFIG_FILE,
    TASKS,
    ExperimentConfig,
    create_config_file,
    get_config,
    load_experiment_config,
    reference_config,
)
from .errors import SymtopError

logger = logging.getLogger(__name__)

REPRODUCE = 'reproduce'
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser."""
    parser = argparse.ArgumentParser(
        prog='symtop',
        description='Controllability checks and simulations for symmetric-top molecules',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s verify-quantum --config experiments/genuine.json
  %(prog)s verify-classical --config experiments/accidental.json --seed 7
  %(prog)s three-wave --out results/three-wave
  %(prog)s resonance-report --config experiments/reference.json
  %(prog)s reproduce --suite fast
  %(prog)s --configure
  %(prog)s --validate
        """,
    )

    parser.add_argument(
        'task',
        nargs='?',
        choices=TASKS + (REPRODUCE,),
        help='Task to run (reference parameters are used without --config)',
    )
    parser.add_argument(
        '--config',
        type=Path,
        default=None,
        help='Experiment JSON document (schema 1)',
    )
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Override the seed of the experiment',
    )
    parser.add_argument(
        '--out',
        type=Path,
        default=None,
        help='Output directory for reports (default: the config "output" entry)',
    )
    parser.add_argument(
        '--suite',
        default='fast',
        help='Acceptance suite for reproduce: fast or full (default: fast)',
    )

    # Progress/output control
    parser.add_argument(
        '-v', '--verbose',
        action='store_true',
        help='Debug logging',
    )
    parser.add_argument(
        '--quiet',
        action='store_true',
        help='Only warnings and errors; no progress bars',
    )

    # Utility commands
    parser.add_argument(
        '--configure',
        action='store_true',
        help='Create symtop.ini with default values',
    )
    parser.add_argument(
        '--validate',
        action='store_true',
        help='Validate installation (numerical stack, CPU, memory)',
    )

    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=[logging.StreamHandler()], force=True)


def handle_configure() -> int:
    """Create symtop.ini with default values."""
    if CONFIG_FILE.exists():
        print(f"⚠️  Config file already exists: {CONFIG_FILE.absolute()}")
        response = input("Overwrite? [y/N]: ").strip().lower()
        if response != 'y':
            print("Aborted.")
            return 1

    create_config_file()
    print(f"✓ Created config file: {CONFIG_FILE.absolute()}")
    print("  Edit this file to customize settings.")
    return 0


def handle_validate() -> int:
    """Validate installation."""
    from .capability import validate_installation

    print("Validating installation...")
    result = validate_installation()

    print()
    for name, version in result['packages'].items():
        if version:
            print(f"✓ {name}: {version}")
        else:
            print(f"✗ {name}: NOT FOUND")
    print(f"  CPUs:    {result['cpu_count']}")
    print(f"  Memory:  {result['memory_gb']} GB")
    print(f"  Workers: {result['workers']}")

    if result['errors']:
        print()
        print("Errors:")
        for err in result['errors']:
            print(f"  - {err}")
        return 1

    print()
    print("✓ All tools validated successfully!")
    return 0


# Tasks

def _physics(config: ExperimentConfig):
    from .coupling import Dipole
    from .spectrum import Inertia

    I2, I3, exact = config.inertia
    return Inertia(I2, I3, exact), Dipole(*config.dipole)


def run_verify_quantum(config: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    from .lie import lgtc_verdict

    inertia, dipole = _physics(config)
    verdict = lgtc_verdict(
        config.j_max, dipole, inertia, tol=config.tolerances['closure'], parallel=True, quiet=quiet
    )
    print(f"   Verdict: {verdict.label}")
    for block in verdict.blocks:
        print(f"   M_{block.j}: dim {block.reached_dim} of su({block.n}) = {block.su_dim} [{block.status}]")
    return {'verdict': verdict, 'dipole_kind': dipole.kind}


def run_verify_classical(config: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    from .classical import (
        BodyParams,
        ClassicalState,
        classical_pulse,
        first_integrals,
        integrate,
        rank_survey,
    )
    from .utils import write_trajectory_csv

    inertia, dipole = _physics(config)
    params = BodyParams(inertia, dipole)
    survey = rank_survey(
        params,
        count=config.param('samples', 1000),
        seed=config.seed,
        p_scale=config.param('p_scale', 1.0),
        depth=config.param('depth', 3),
        parallel=True,
        rtol=config.tolerances['rank'],
        quiet=quiet,
    )
    print(f"   {survey.summary()}")

    rng = np.random.default_rng(config.seed)
    pulse = classical_pulse(rng, config.param('duration', 10.0), config.param('segments', 20), config.param('u_max', 1.0))
    start = ClassicalState(np.array([1.0, 0.0, 0.0, 0.0]), rng.uniform(-1.0, 1.0, size=3))
    trajectory = integrate(start, pulse, params, config.param('step', 1e-3))
    write_trajectory_csv(out / 'trajectory.csv', trajectory.times, trajectory.states)
    before, after = first_integrals(start, params), first_integrals(trajectory.final, params)
    p3_drift = abs(after['P3'] - before['P3'])
    print(f"   |P3(T) - P3(0)| = {p3_drift:.3e}")
    return {
        'survey': survey,
        'conservation': {'initial': before, 'final': after, 'p3_drift': p3_drift},
        'recurrence': "drift recurrence is cited, not verified",
    }


def run_simulate(config: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    from .basis import BasisIndex, truncated_space
    from .coupling import coupling_blocks, hamiltonian
    from .quantum_dynamics import ControlPulse, QuantumState, population_trace, propagator, unitarity_error
    from .utils import write_matrix_json, write_population_csv

    inertia, dipole = _physics(config)
    # one level beyond j_max is simulated and watched as the truncation boundary
    space = truncated_space(config.j_max + 1)
    H = hamiltonian(space, inertia)
    B = [b.matrix for b in coupling_blocks(space, dipole)]
    rng = np.random.default_rng(config.seed)
    pulse = ControlPulse.random(rng, config.param('segments', 20), config.param('dt', 0.5), config.param('u_max', 1.0))
    trace = population_trace(
        QuantumState.basis_state(space, BasisIndex(0, 0, 0)), pulse, H, B, stride=get_config().trace_stride
    )
    write_population_csv(out / 'populations.csv', trace.times, trace.labels, trace.populations)
    upper = np.asarray([idx.j == config.j_max + 1 for idx in space.indices])
    boundary = float(np.sum(trace.final.populations[upper]))
    U = propagator(pulse, H, B)
    write_matrix_json(out / 'propagator.json', U, trace.labels, name='U(T)')
    error = unitarity_error(U)
    print(f"   Boundary population: {boundary:.3e}, unitarity error: {error:.3e}")
    return {
        'levels': list(space.levels),
        'labels': trace.labels,
        'times': trace.times,
        'populations': trace.populations,
        'boundary_population': boundary,
        'unitarity_error': error,
        'unitarity_ok': error < config.tolerances['unitarity'],
    }


def run_restricted_sk(config: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    from .quantum_dynamics import restricted_Sk_check, sector_leakage_survey

    inertia, dipole = _physics(config)
    k = config.param('k', 0)
    result = restricted_Sk_check(k, config.j_max, dipole, inertia, tol=config.tolerances['closure'])
    leakage = sector_leakage_survey(
        dipole, inertia, k=k, j_max=config.j_max, pulses=config.param('pulses', 100), seed=config.seed
    )
    print(f"   Verdict: {result.verdict}")
    print(f"   Leakage out of S_{k}: {leakage['max_leakage']:.3e}")
    return {'restricted': result, 'leakage': leakage}


def run_three_wave(config: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    from .coupling import Dipole
    from .quantum_dynamics import three_wave_mixing_demo
    from .utils import write_series_csv

    inertia, dipole = _physics(config)
    j, k, m = config.param('j', 1), config.param('k', 1), config.param('m', 1)
    demo = three_wave_mixing_demo(j, k, m, dipole, inertia, stride=get_config().trace_stride)
    write_series_csv(out / 'three_wave.csv', demo.trace.times, demo.series)
    if demo.replayed:
        design = demo.protocol.design_dipole.vector.tolist()
        print(f"   Protocol designed on dipole {design}, replayed on the {demo.dipole_kind} dipole")
    print(f"   |p_k - p_-k| = {demo.asymmetry:.4f} ({demo.dipole_kind})")

    report = {'demo': demo}
    if dipole.in_plane_norm > 0:
        genuine = Dipole(0.0, 0.0, dipole.delta3 or 1.0)
        replay = three_wave_mixing_demo(j, k, m, genuine, inertia, protocol=demo.protocol, stride=get_config().trace_stride)
        print(f"   Same protocol on a genuine top: |p_k - p_-k| = {replay.asymmetry:.3e}")
        report['genuine_replay'] = {'asymmetry': replay.asymmetry, 'p_plus': replay.p_plus, 'p_minus': replay.p_minus}
    return report


def run_resonance_report(config: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    from .spectrum import resonance_report

    inertia, _ = _physics(config)
    report = resonance_report(inertia, config.param('j', 0), config.j_max)
    print(f"   {len(report['gaps'])} gaps in M_{report['j']}")
    return {'resonances': report}


TASK_RUNNERS: Dict[str, Callable[..., dict]] = {
    'verify-quantum': run_verify_quantum,
    'verify-classical': run_verify_classical,
    'simulate': run_simulate,
    'restricted-sk': run_restricted_sk,
    'three-wave': run_three_wave,
    'resonance-report': run_resonance_report,
}


def run(config: ExperimentConfig, out: Optional[Path] = None, quiet: bool = False) -> Path:
    """Execute one task and write its JSON report; returns the report path."""
    from .utils import dump_json, report_header

    out = Path(out or config.output)
    out.mkdir(parents=True, exist_ok=True)
    print(f"🚀 Running {config.task}...")
    started = time.perf_counter()
    body = TASK_RUNNERS[config.task](config, out, quiet=quiet)
    logger.info("%s finished in %.1fs", config.task, time.perf_counter() - started)
    report = {**report_header(config), 'config': config.to_dict(), 'result': body}
    return dump_json(report, out / f"{config.task}.json")


# Acceptance suite

def _criterion_1() -> dict:
    from .coupling import REFERENCE_DIPOLE
    from .lie import block_ideal
    from .spectrum import REFERENCE_INERTIA

    result = block_ideal(0, 2, REFERENCE_DIPOLE, REFERENCE_INERTIA)
    return {'passed': result.reached_dim == 99, 'reached_dim': result.reached_dim}


def _criterion_2() -> dict:
    from .coupling import REFERENCE_DIPOLE
    from .lie import block_ideal
    from .spectrum import REFERENCE_INERTIA

    result = block_ideal(1, 3, REFERENCE_DIPOLE, REFERENCE_INERTIA)
    return {'passed': result.reached_dim == 1155, 'reached_dim': result.reached_dim}


def _criterion_3() -> dict:
    from .basis import block_space
    from .coupling import Dipole, coupling_blocks
    from .quantum_dynamics import detect_genuine_symmetry, sector_leakage_survey
    from .spectrum import REFERENCE_INERTIA

    dipole = Dipole(0.0, 0.0, 1.0)
    report = detect_genuine_symmetry(dipole, [coupling_blocks(block_space(j), dipole) for j in range(3)])
    leak = max(sector_leakage_survey(dipole, REFERENCE_INERTIA, k=k)['max_leakage'] for k in (0, 1))
    return {'passed': report.conserved and leak < 1e-9, 'max_commutator': report.max_violation, 'max_leakage': leak}


def _criterion_4() -> dict:
    from .coupling import Dipole
    from .quantum_dynamics import detect_parity_symmetry, rotated_wang_blocks
    from .spectrum import REFERENCE_INERTIA

    dipole = Dipole(0.3, 0.4, 0.0)
    report = detect_parity_symmetry(dipole, [rotated_wang_blocks(j, dipole) for j in range(3)], REFERENCE_INERTIA)
    return {'passed': report.conserved, 'max_cross_parity': report.max_violation}


def _criterion_5() -> dict:
    from .coupling import Dipole
    from .quantum_dynamics import restricted_Sk_check

    result = restricted_Sk_check(0, 2, Dipole(0.0, 0.0, 1.0))
    dims = [b.reached_dim for b in result.blocks]
    return {'passed': dims == [15, 63], 'dims': dims}


def _criterion_6() -> dict:
    from .spectrum import REFERENCE_INERTIA, verify_lemma_ext, verify_lemma_important

    ok, counterexamples = verify_lemma_important(REFERENCE_INERTIA, 4)
    ext = [verify_lemma_ext(REFERENCE_INERTIA, j, j + 2) for j in range(3)]
    failures = [f for _, fs in ext for f in fs]
    return {'passed': ok and not failures, 'counterexamples': counterexamples, 'membership_failures': failures}


def _criterion_7() -> dict:
    from .basis import block_space
    from .coupling import Dipole, oracle_discrepancy

    worst = 0.0
    for dipole in (Dipole(0.0, 0.0, 1.0), Dipole(0.3, 0.4, 0.0), Dipole(0.3, 0.4, 0.1)):
        for j in range(3):
            worst = max(worst, oracle_discrepancy(block_space(j), dipole))
    return {'passed': worst < 1e-8, 'max_discrepancy': worst}


def _criterion_8(seed: int, quiet: bool = False) -> dict:
    from .classical import BodyParams, rank_survey
    from .coupling import Dipole
    from .spectrum import Inertia

    inertia = Inertia(2.0, 1.0)
    accidental = rank_survey(BodyParams(inertia, Dipole(0.3, 0.4, 0.1)), 1000, seed, parallel=True, quiet=quiet)
    genuine = rank_survey(BodyParams(inertia, Dipole(0.0, 0.0, 1.0)), 1000, seed, parallel=True, quiet=quiet)
    passed = (
        accidental.generic_full_rank >= 0.999 * accidental.generic_states
        and genuine.max_rank <= 5
        and genuine.rank5_p3_nonzero >= 0.99 * genuine.p3_nonzero
    )
    return {'passed': passed, 'accidental': accidental.summary(), 'genuine': genuine.summary()}


def _criterion_9(seed: int) -> dict:
    from .classical import BodyParams, ClassicalState, classical_pulse, first_integrals, integrate
    from .coupling import Dipole
    from .quantum_dynamics import ControlPulse
    from .spectrum import Inertia

    rng = np.random.default_rng(seed)
    start = ClassicalState(np.array([1.0, 0.0, 0.0, 0.0]), rng.uniform(-1.0, 1.0, size=3))
    genuine = BodyParams(Inertia(2.0, 1.0), Dipole(0.0, 0.0, 1.0))
    controlled = integrate(start, classical_pulse(rng, 10.0, 20), genuine, 1e-3)
    p3_drift = float(np.max(np.abs(controlled.p3_drift())))

    free = integrate(start, ControlPulse.zero(10.0), genuine, 1e-3)
    before, after = first_integrals(start, genuine), first_integrals(free.final, genuine)
    norm_drift = abs(after['P_norm_sq'] - before['P_norm_sq'])
    energy_drift = abs(after['kinetic_energy'] - before['kinetic_energy'])
    return {
        'passed': p3_drift < 1e-9 and norm_drift < 1e-9 and energy_drift < 1e-9,
        'p3_drift': p3_drift,
        'norm_drift': norm_drift,
        'energy_drift': energy_drift,
    }


def _criterion_10(seed: int) -> dict:
    from .basis import truncated_space
    from .coupling import REFERENCE_DIPOLE, coupling_blocks, hamiltonian
    from .quantum_dynamics import ControlPulse, propagator, unitarity_error
    from .spectrum import REFERENCE_INERTIA

    space = truncated_space(3)
    H = hamiltonian(space, REFERENCE_INERTIA)
    B = [b.matrix for b in coupling_blocks(space, REFERENCE_DIPOLE)]
    rng = np.random.default_rng(seed)
    worst = max(unitarity_error(propagator(ControlPulse.random(rng, 20, 0.5), H, B)) for _ in range(20))
    return {'passed': worst < 1e-9, 'max_unitarity_error': worst}


def _criterion_11() -> dict:
    from .coupling import REFERENCE_DIPOLE, Dipole
    from .quantum_dynamics import three_wave_mixing_demo
    from .spectrum import REFERENCE_INERTIA

    demo = three_wave_mixing_demo(1, 1, 1, REFERENCE_DIPOLE, REFERENCE_INERTIA)
    replay = three_wave_mixing_demo(1, 1, 1, Dipole(0.0, 0.0, 0.3), REFERENCE_INERTIA, protocol=demo.protocol)
    return {
        'passed': demo.asymmetry > 0.1 and replay.asymmetry < 1e-6,
        'asymmetry': demo.asymmetry,
        'genuine_asymmetry': replay.asymmetry,
        'note': demo.protocol.note,
    }


def _criterion_runners(seed: int, quiet: bool = False) -> Dict[int, Callable[[], dict]]:
    return {
        1: _criterion_1,
        2: _criterion_2,
        3: _criterion_3,
        4: _criterion_4,
        5: _criterion_5,
        6: _criterion_6,
        7: _criterion_7,
        8: lambda: _criterion_8(seed, quiet),
        9: lambda: _criterion_9(seed),
        10: lambda: _criterion_10(seed),
        11: _criterion_11,
    }


def reproduce_all(
    suite: str = 'fast',
    out: Optional[Path] = None,
    seed: int = 0,
    quiet: bool = False,
) -> dict:
    """
    Run an acceptance suite and return a pass/fail/skipped table keyed by criterion.

    Criteria run one after another; closures and surveys inside them use
    the thread pool.
    """
    from .config import DEFAULT_TOLERANCES
    from .planner import create_suite_jobs
    from .utils import dump_json, report_header

    jobs = create_suite_jobs(suite)
    runners = _criterion_runners(seed, quiet)
    table = {}
    for job in jobs:
        cid = job['criterion']
        entry = {'description': job['description'], 'status': 'skipped'}
        if not job['skipped']:
            started = time.perf_counter()
            try:
                details = runners[cid]()
                entry['status'] = 'pass' if details.pop('passed') else 'fail'
                entry['details'] = details
            except SymtopError as e:
                entry['status'] = 'fail'
                entry['error'] = str(e)
            entry['seconds'] = time.perf_counter() - started
            logger.info("criterion %d: %s (%.1fs)", cid, entry['status'], entry['seconds'])
        table[str(cid)] = entry

    # criteria use fixed reference parameters
    config = reference_config().with_overrides(
        seed=seed, tolerances={**DEFAULT_TOLERANCES, 'closure': get_config().rank_tol}
    )
    summary = {**report_header(config, task=f"{REPRODUCE}-{suite}"), 'suite': suite, 'criteria': table}
    if out is not None:
        dump_json(summary, Path(out) / f"acceptance-{suite}.json")
    return summary


def run_reproduce(args: argparse.Namespace) -> int:
    from .planner import SUITES

    if args.suite not in SUITES:
        print(f"❌ Error: unknown suite {args.suite!r} (expected one of: {', '.join(SUITES)})")
        return 2

    print(f"📋 Acceptance suite: {args.suite}")
    summary = reproduce_all(args.suite, args.out or Path('results'), args.seed or 0, quiet=args.quiet)
    counts = {'pass': 0, 'fail': 0, 'skipped': 0}

    print()
    print("=" * 50)
    for cid, entry in summary['criteria'].items():
        counts[entry['status']] += 1
        mark = {'pass': '✓', 'fail': '✗', 'skipped': '-'}[entry['status']]
        print(f"{mark} {cid:>2}  {entry['description']}")
    print("=" * 50)
    print(f"✓ Passed:  {counts['pass']}")
    print(f"✗ Failed:  {counts['fail']}")
    print(f"- Skipped: {counts['skipped']}")
    print(f"   Config hash: {summary['config_hash'][:12]}")
    return 0


def main(argv=None) -> int:
    """Main entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    # Handle utility commands first
    if args.configure:
        return handle_configure()

    if args.validate:
        return handle_validate()

    if not args.task:
        parser.print_help()
        print("\n❌ Error: a task is required.")
        return 1

    try:
        if args.task == REPRODUCE:
            return run_reproduce(args)

        config = load_experiment_config(args.config) if args.config else reference_config(args.task)
        if config.task != args.task:
            config = config.with_overrides(task=args.task)
        config = config.with_overrides(seed=args.seed, output=str(args.out) if args.out else None)
        report = run(config, quiet=args.quiet)
    except SymtopError as e:
        print(f"❌ Error: {e}")
        return 1

    print(f"✓ Report written: {report}")
    return 0


if __name__ == '__main__':
    sys.exit(main())
