import hashlib
import json
import logging
import math
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np
from gurevich_lab.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

PERRON_TOLERANCE = 1e-13
PERRON_MAX_ITERATIONS = 100_000
SIGNIFICANT_DIGITS = 12


def perron_data(
    matrix: np.ndarray,
    tol: float = PERRON_TOLERANCE,
    max_iterations: int = PERRON_MAX_ITERATIONS,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Perron eigenvalue with left and right eigenvectors of a primitive matrix.

    Both eigenvectors come from power iteration (on ``M`` and ``M.T``) and are
    normalised so that ``sum(u * v) == 1``.

    Returns:
        Tuple ``(eigenvalue, u, v)`` with ``u M = eigenvalue u`` and
        ``M v = eigenvalue v``.

    Raises:
        ConvergenceError: When power iteration does not settle in
            ``max_iterations`` steps.
    """
    eigenvalue, v = _power_iteration(matrix, tol, max_iterations)
    _, u = _power_iteration(matrix.T, tol, max_iterations)
    u = u / float(np.dot(u, v))
    return eigenvalue, u, v


def spectral_radius(matrix: Any, tol: float = PERRON_TOLERANCE) -> float:
    """Spectral radius of a nonnegative (possibly reducible or periodic) matrix.

    Iterates on ``M + I``; for nonnegative ``M`` its spectral radius is exactly
    ``spr(M) + 1`` and it is the unique eigenvalue of maximal modulus, so the
    shifted iteration converges even when ``M`` is periodic.
    """
    size = matrix.shape[0]
    if size == 0:
        return 0.0
    vector = np.full(size, 1.0 / size)
    previous = -1.0
    for _ in range(PERRON_MAX_ITERATIONS):
        image = matrix @ vector + vector
        norm = float(image.sum())
        if norm == 0.0:
            return 0.0
        image /= norm
        if abs(norm - previous) < tol * max(1.0, norm) and np.max(
            np.abs(image - vector)
        ) < math.sqrt(tol):
            return max(norm - 1.0, 0.0)
        previous = norm
        vector = image
    raise ConvergenceError(
        f"spectral radius iteration did not converge for a {size}x{size} matrix"
    )


def _power_iteration(
    matrix: np.ndarray, tol: float, max_iterations: int
) -> Tuple[float, np.ndarray]:
    size = matrix.shape[0]
    vector = np.full(size, 1.0 / math.sqrt(size))
    rayleigh = 0.0
    for iteration in range(max_iterations):
        image = matrix @ vector
        norm = float(np.linalg.norm(image))
        if norm == 0.0:
            raise ConvergenceError("matrix is nilpotent on the start vector")
        following = float(np.dot(vector, image))
        image /= norm
        delta = float(np.max(np.abs(image - vector)))
        vector = image
        if abs(following - rayleigh) < tol * max(1.0, abs(following)) and delta < 1e-12:
            logger.debug("power iteration converged after %d steps", iteration + 1)
            return following, vector
        rayleigh = following
    raise ConvergenceError(
        f"power iteration did not converge after {max_iterations} iterations"
    )


def fit_growth(
    ns: Sequence[float], logs: Sequence[float], with_correction: bool = True
) -> Tuple[float, float, float, float]:
    """Least-squares fit of ``log Z = rate * n - kappa * log n + c``.

    Returns:
        Tuple ``(rate, kappa, c, residual)`` with the residual as the root mean
        square error. With fewer than three points (or ``with_correction``
        false) ``kappa`` is pinned to zero.
    """
    x = np.asarray(ns, dtype=float)
    y = np.asarray(logs, dtype=float)
    if len(x) == 1:
        return float(y[0] / x[0]), 0.0, 0.0, 0.0
    if with_correction and len(x) >= 3:
        design = np.column_stack([x, -np.log(x), np.ones_like(x)])
    else:
        design = np.column_stack([x, np.ones_like(x)])
    coefficients, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coefficients - y) ** 2)))
    if design.shape[1] == 3:
        rate, kappa, c = (float(value) for value in coefficients)
    else:
        rate, c = (float(value) for value in coefficients)
        kappa = 0.0
    return rate, kappa, c, residual


def upper_half(values: Iterable[int], top: int) -> List[int]:
    """Keep the values in the fitting window ``[top // 2, top]``."""
    return [value for value in values if top // 2 <= value <= top]


def log_count(value: Any) -> float:
    """Natural log of a positive exact integer or float, safe beyond float range."""
    if isinstance(value, int):
        bits = value.bit_length()
        if bits > 1000:
            shift = bits - 64
            return math.log(value >> shift) + shift * math.log(2.0)
        return math.log(value)
    return math.log(float(value))


def mobius(n: int) -> int:
    result = 1
    remaining = n
    factor = 2
    while factor * factor <= remaining:
        if remaining % factor == 0:
            remaining //= factor
            if remaining % factor == 0:
                return 0
            result = -result
        factor += 1
    if remaining > 1:
        result = -result
    return result


def divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def round_significant(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    if not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def normalize_floats(data: Any) -> Any:
    """Recursively rounds floats to 12 significant digits for stable output."""
    if isinstance(data, float):
        return round_significant(data)
    if isinstance(data, dict):
        return {k: normalize_floats(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [normalize_floats(v) for v in data]
    if isinstance(data, np.ndarray):
        return normalize_floats(data.tolist())
    if isinstance(data, np.floating):
        return round_significant(float(data))
    if isinstance(data, np.integer):
        return int(data)
    return data


def content_hash(payload: Dict[str, Any]) -> str:
    """Stable sha256 of a JSON-compatible payload (sorted keys)."""
    encoded = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(encoded).hexdigest()
