# Capability detection module
"""Check the numerical stack and the machine before long verification runs."""

import re
from importlib import metadata
from typing import Optional

import psutil

from .config import get_config


# Minimum versions known to work (scipy.linalg.qr pivoting, numpy Generator API)
REQUIRED_PACKAGES = {
    'numpy': '1.22',
    'scipy': '1.8',
    'sympy': '1.10',
    'tqdm': '4.65',
    'psutil': '5.9',
}


def _version_tuple(version: str) -> tuple:
    parts = []
    for piece in version.split('.'):
        match = re.match(r'\d+', piece)
        if not match:
            break
        parts.append(int(match.group()))
    return tuple(parts)


def get_package_version(name: str) -> Optional[str]:
    """Installed version of a distribution, or None."""
    try:
        return metadata.version(name)
    except metadata.PackageNotFoundError:
        return None


def validate_installation() -> dict:
    """
    Validate the numerical stack and report machine resources.

    Returns:
        dict with keys:
            - 'packages_ok': bool
            - 'packages': {name: version or None}
            - 'cpu_count': logical CPUs
            - 'memory_gb': total memory
            - 'workers': resolved worker count
            - 'errors': list of error messages
    """
    from .executor import resolve_worker_count

    result = {
        'packages_ok': True,
        'packages': {},
        'cpu_count': psutil.cpu_count(logical=True),
        'memory_gb': round(psutil.virtual_memory().total / 1024 ** 3, 1),
        'workers': resolve_worker_count(),
        'allow_large_blocks': get_config().allow_large_blocks,
        'errors': [],
    }

    for name, minimum in REQUIRED_PACKAGES.items():
        version = get_package_version(name)
        result['packages'][name] = version
        if version is None:
            result['packages_ok'] = False
            result['errors'].append(f"{name} is not installed")
        elif _version_tuple(version) < _version_tuple(minimum):
            result['packages_ok'] = False
            result['errors'].append(f"{name} {version} is older than the required {minimum}")

    # An su(34) closure keeps a 1155 x 2312 real basis plus candidate batches
    if result['memory_gb'] < 1.0:
        result['errors'].append(f"only {result['memory_gb']} GB of memory; block j=1 closures may fail")

    return result
