# executor.py
"""Thread-pool execution of independent closure and sampling jobs."""

import logging
import signal
import sys
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional

import psutil
from tqdm import tqdm

from .config import get_config

logger = logging.getLogger(__name__)


# Global shutdown flag
_shutdown_requested = False


def _signal_handler(signum, frame):
    """Handle Ctrl+C gracefully."""
    global _shutdown_requested
    if _shutdown_requested:
        # Second Ctrl+C - force exit
        print("\n\n❌ Force quit requested. Terminating...")
        sys.exit(1)

    _shutdown_requested = True
    print("\n\n⚠️  Shutdown requested. Waiting for running jobs to finish...")
    print("   (Press Ctrl+C again to force quit)")


def resolve_worker_count(job_count: Optional[int] = None) -> int:
    """
    Worker threads for a run.

    SYMTOP_THREADS wins when set. Otherwise max_workers from symtop.ini,
    capped by the logical CPUs left after reserved_core_count.
    """
    config = get_config()
    if config.threads_from_env:
        workers = config.max_workers
    else:
        total_threads = psutil.cpu_count(logical=True) or 1
        available = max(1, total_threads - max(0, config.reserved_core_count))
        workers = min(config.max_workers, available)
    if job_count is not None:
        # Do not spin up more workers than there are jobs waiting
        workers = min(workers, max(1, job_count))
    return max(1, workers)


def _job_label(job: dict) -> str:
    if job.get('kind') == 'block':
        return f"block j={job['j']}"
    if job.get('kind') == 'samples':
        return f"samples {job['start']}+{job['count']}"
    return str(job.get('criterion', job.get('kind', 'job')))


class TaskExecutor:
    """
    Run jobs on a thread pool with a progress bar.

    numpy and scipy release the GIL inside matrix kernels, so closure and
    propagation jobs overlap well on threads.
    """

    def __init__(self, desc: str = "Running", unit: str = "job", quiet: bool = False):
        self.desc = desc
        self.unit = unit
        self.quiet = quiet
        self._lock = threading.Lock()

    def execute_jobs(
        self,
        jobs: List[dict],
        fn: Callable[[dict], Any],
        progress_callback: Optional[Callable[[dict, Any], None]] = None,
    ) -> Dict[str, Any]:
        """
        Execute all jobs; 'results' is aligned with the job order.

        A job that raises is recorded in 'failed_jobs' with its error and
        leaves None in its result slot.
        """
        global _shutdown_requested
        _shutdown_requested = False

        results = {
            'completed': 0,
            'failed': 0,
            'failed_jobs': [],
            'results': [None] * len(jobs),
        }
        if not jobs:
            return results

        workers = resolve_worker_count(len(jobs))
        logger.debug("%s: %d jobs on %d workers", self.desc, len(jobs), workers)

        # signal handlers can only be installed from the main thread
        in_main = threading.current_thread() is threading.main_thread()
        original_sigint = signal.signal(signal.SIGINT, _signal_handler) if in_main else None

        pbar = tqdm(total=len(jobs), desc=self.desc, unit=self.unit, disable=self.quiet)
        try:
            with ThreadPoolExecutor(max_workers=workers) as executor:

                def task_wrapper(job):
                    if _shutdown_requested:
                        raise RuntimeError("Shutdown requested")
                    return fn(job)

                future_to_index = {executor.submit(task_wrapper, job): i for i, job in enumerate(jobs)}

                for future in as_completed(future_to_index):
                    index = future_to_index[future]
                    job = jobs[index]
                    try:
                        outcome = future.result()
                    except Exception as e:
                        logger.warning("%s failed: %s", _job_label(job), e)
                        with self._lock:
                            results['failed'] += 1
                            results['failed_jobs'].append({**job, 'error': str(e)})
                        pbar.set_description(f"✗ {_job_label(job)[:25]}")
                    else:
                        with self._lock:
                            results['results'][index] = outcome
                            results['completed'] += 1
                        pbar.set_description(f"✓ {_job_label(job)[:25]}")

                    pbar.update(1)
                    pbar.set_postfix({
                        self.unit: f"{results['completed']}/{len(jobs)}",
                        'fail': results['failed'],
                    })

                    if progress_callback:
                        progress_callback(job, results['results'][index])

                    if _shutdown_requested:
                        for f in future_to_index:
                            f.cancel()
                        break
        finally:
            pbar.close()
            if original_sigint is not None:
                signal.signal(signal.SIGINT, original_sigint)

        return results
