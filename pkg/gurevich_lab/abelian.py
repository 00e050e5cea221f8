"""Abelianized pressure ``beta(w) = P(f + <w, psi_ab>)`` and its minimum.

The minimum value of ``beta`` is the Gurevič pressure of the extension by
``Z^a``; the minimizer ``xi`` tilts the equilibrium state until its winding
cycle vanishes.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from gurevich_lab.exceptions import ConvergenceError, InputError, NotFull, TooFewPoints
from gurevich_lab.extension import SkewSystem, cycle_holonomies, not_in_half_space
from gurevich_lab.groups import Lattice
from gurevich_lab.helpers import log_count, upper_half
from gurevich_lab.sft import Edge
from gurevich_lab.thermo import (
    EdgePotential,
    MarkovMeasure,
    equilibrium_measure,
    integrate_edge,
    measure_entropy,
    pressure,
)

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-9
MAX_ITERATIONS = 500
HESSIAN_STEP = 1e-5
DIVERGENCE_RADIUS = 50.0
DIVERGENCE_WINDOW = 50
MIN_CORRECTION_POINTS = 8


@dataclass(frozen=True)
class AbelianData:
    """An extension by ``Z^a`` together with the potential being tilted.

    Attributes:
        skew_ab: Skew system whose group is ``Lattice(rank)``.
        rank: Rank ``a`` of the lattice.
        f: Optional edge potential (zero when omitted).
    """

    skew_ab: SkewSystem
    rank: int
    f: Optional[EdgePotential] = None

    def __post_init__(self) -> None:
        group = self.skew_ab.group
        if not isinstance(group, Lattice):
            raise InputError("skew_ab", f"expected a lattice group, got {group.kind}")
        if group.rank != self.rank:
            raise InputError("rank", f"rank {self.rank} != lattice rank {group.rank}")

    @property
    def displacement(self) -> Dict[Edge, Tuple[int, ...]]:
        """Vector edge function ``psi_ab``."""
        return dict(self.skew_ab.labels)  # type: ignore[arg-type]

    def with_potential(self, f: Optional[EdgePotential]) -> "AbelianData":
        return replace(self, f=f)


@dataclass(frozen=True)
class CriticalPoint:
    xi: Tuple[float, ...]
    value: float
    gradient_norm: float
    iterations: int

    def as_dict(self) -> Dict[str, object]:
        return {
            "xi": list(self.xi),
            "value": self.value,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
        }


def abelian_data(skew: SkewSystem, f: Optional[EdgePotential] = None) -> AbelianData:
    """AbelianData of the abelianized system of ``skew``."""
    ab = skew.abelianized()
    return AbelianData(skew_ab=ab, rank=ab.group.abelian_rank, f=f)


def tilted_potential(data: AbelianData, w: Sequence[float]) -> EdgePotential:
    """``f + <w, psi_ab>`` as an edge potential."""
    vector = _as_vector(data, w)
    base = data.f.values if data.f is not None else None
    values = {}
    for edge, label in data.skew_ab.labels.items():
        offset = base[edge] if base is not None else 0.0
        values[edge] = offset + math.fsum(
            weight * component for weight, component in zip(vector, label)  # type: ignore[arg-type]
        )
    return EdgePotential(values)


def _as_vector(data: AbelianData, w: Sequence[float]) -> np.ndarray:
    vector = np.asarray(w, dtype=float).reshape(-1)
    if vector.shape[0] != data.rank:
        raise InputError("w", f"expected {data.rank} components, got {vector.shape[0]}")
    return vector


def beta(data: AbelianData, w: Sequence[float]) -> float:
    """Tilted pressure ``P(f + <w, psi_ab>)`` on the base shift.

    Raises:
        NotAperiodic: When the base shift is not mixing.
    """
    return pressure(data.skew_ab.base, tilted_potential(data, w))


def winding_cycle(mm: MarkovMeasure, data: AbelianData) -> np.ndarray:
    """Mean displacement ``int psi_ab d mu`` of a Markov measure."""
    if data.rank == 0:
        return np.zeros(0)
    return np.asarray(integrate_edge(mm, data.displacement), dtype=float)


def grad_beta(data: AbelianData, w: Sequence[float]) -> np.ndarray:
    """Winding cycle of the equilibrium state of ``f + <w, psi_ab>``."""
    mm = equilibrium_measure(data.skew_ab.base, tilted_potential(data, w))
    return winding_cycle(mm, data)


def _hessian(data: AbelianData, w: np.ndarray) -> np.ndarray:
    columns = []
    for axis in range(data.rank):
        step = np.zeros(data.rank)
        step[axis] = HESSIAN_STEP
        columns.append(
            (grad_beta(data, w + step) - grad_beta(data, w - step)) / (2 * HESSIAN_STEP)
        )
    hessian = np.column_stack(columns)
    return (hessian + hessian.T) / 2.0


def _descent_direction(data: AbelianData, w: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    hessian = _hessian(data, w)
    if np.all(np.isfinite(hessian)) and np.min(np.linalg.eigvalsh(hessian)) > 1e-12:
        newton = -np.linalg.solve(hessian, gradient)
        if np.all(np.isfinite(newton)):
            return newton
    logger.debug("hessian not positive definite at %s, using gradient step", w)
    return -gradient


def is_full(data: AbelianData) -> bool:
    """Whether the loop holonomies lie in no closed half-space of ``R^a``."""
    return not_in_half_space(cycle_holonomies(data.skew_ab), data.rank)


def minimize_beta(
    data: AbelianData,
    tol: float = GRADIENT_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> CriticalPoint:
    """Find the unique critical point ``xi`` of ``beta``; ``beta(xi) = h(Y)``.

    Damped Newton steps (Hessian by central differences of the gradient)
    with an Armijo backtracking line search, falling back to gradient
    descent where the Hessian is not positive definite.

    Raises:
        NotFull: When the holonomies lie in a closed half-space, or the
            iterates run off beyond the divergence radius without the
            gradient shrinking.
        ConvergenceError: When ``max_iterations`` is exhausted inside the
            divergence radius.
    """
    if tol <= 0:
        raise InputError("tol", "tolerance must be positive")
    if data.rank == 0:
        value = pressure(data.skew_ab.base, data.f)
        return CriticalPoint(xi=(), value=value, gradient_norm=0.0, iterations=0)
    if not is_full(data):
        raise NotFull("loop holonomies lie in a closed half-space; beta has no minimum")
    w = np.zeros(data.rank)
    value = beta(data, w)
    norms: List[float] = []
    for iteration in range(max_iterations):
        gradient = grad_beta(data, w)
        norm = float(np.linalg.norm(gradient))
        norms.append(norm)
        logger.debug("iteration %d: beta %.15g |grad| %.3e", iteration, value, norm)
        if norm < tol:
            return CriticalPoint(
                xi=tuple(float(x) for x in w),
                value=value,
                gradient_norm=norm,
                iterations=iteration,
            )
        if (
            float(np.linalg.norm(w)) > DIVERGENCE_RADIUS
            and len(norms) > DIVERGENCE_WINDOW
            and norm > norms[-1 - DIVERGENCE_WINDOW] / 10.0
        ):
            raise NotFull(f"minimizer diverges: |w| = {np.linalg.norm(w):.3g}")
        direction = _descent_direction(data, w, gradient)
        slope = float(np.dot(gradient, direction))
        if slope >= 0:
            direction, slope = -gradient, -norm * norm
        w, value = _line_search(data, w, value, direction, slope)
    if float(np.linalg.norm(w)) > DIVERGENCE_RADIUS:
        raise NotFull(f"minimizer diverges: |w| = {np.linalg.norm(w):.3g}")
    raise ConvergenceError(
        f"beta minimization stopped after {max_iterations} iterations "
        f"with |grad| = {norms[-1]:.3e}"
    )


def _line_search(
    data: AbelianData, w: np.ndarray, value: float, direction: np.ndarray, slope: float
) -> Tuple[np.ndarray, float]:
    # rounding slack: near the minimum beta changes by less than one ulp
    slack = 1e-14 * max(1.0, abs(value))
    step = 1.0
    while step > 1e-12:
        candidate = w + step * direction
        following = beta(data, candidate)
        if following <= value + 1e-4 * step * slope + slack:
            return candidate, following
        step /= 2.0
    return w + step * direction, beta(data, w + step * direction)


def zero_winding_entropy(data: AbelianData, tol: float = GRADIENT_TOLERANCE) -> float:
    """``sup {h(mu) + int f d mu : winding cycle of mu = 0}``.

    Attained by the equilibrium state at ``xi``; agrees with
    ``minimize_beta(data).value``.
    """
    point = minimize_beta(data, tol)
    base = data.skew_ab.base
    mm = equilibrium_measure(base, tilted_potential(data, point.xi))
    value = measure_entropy(mm)
    if data.f is not None:
        value += float(integrate_edge(mm, data.f))
    return value


def maximal_winding_vanishes(data: AbelianData, tol: float = 1e-9) -> bool:
    """Whether the equilibrium state of ``f`` has zero winding cycle.

    This holds exactly when the abelian cover has full pressure ``P(f)``.
    """
    mm = equilibrium_measure(data.skew_ab.base, data.f)
    winding = winding_cycle(mm, data)
    return bool(winding.size == 0 or float(np.max(np.abs(winding))) < tol)


def fit_lattice_correction(counts: Sequence[int], rate_hint: float) -> float:
    """Fit ``kappa`` in ``log Z_n - n rate ~ -kappa log n + c``.

    Uses the nonzero counts of the window ``[n_max // 2, n_max]``. For
    ``Z^a`` extensions the discrete correction exponent is ``a / 2``.

    Raises:
        TooFewPoints: With fewer than eight nonzero counts in the window.
    """
    n_max = len(counts)
    window = [n for n in upper_half(range(1, n_max + 1), n_max) if counts[n - 1] > 0]
    if len(window) < MIN_CORRECTION_POINTS:
        raise TooFewPoints(
            f"{len(window)} nonzero counts on [{n_max // 2}, {n_max}], "
            f"need {MIN_CORRECTION_POINTS}"
        )
    x = np.log(np.asarray(window, dtype=float))
    y = np.array([log_count(counts[n - 1]) - n * rate_hint for n in window])
    slope, _ = np.polyfit(x, y, 1)
    return float(-slope)
