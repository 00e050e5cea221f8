import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from gurevich_lab.exceptions import BracketFailure, InputError
from gurevich_lab.helpers import perron_data
from gurevich_lab.sft import Edge, Sft, require_aperiodic, topological_entropy
from scipy.optimize import bisect

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-10

VectorEdgeFunction = Mapping[Edge, Sequence[float]]


@dataclass(frozen=True)
class EdgePotential:
    """A real weight ``f(i, j)`` on every allowed transition of a shift.

    The same structure serves potentials ``f(x) = f(x0, x1)`` and roof
    functions ``r``. Values are kept in a read-only mapping keyed by edge.
    """

    values: Mapping[Edge, float] = field(default_factory=dict)

    @classmethod
    def constant(cls, sft: Sft, value: float) -> "EdgePotential":
        return cls({edge: float(value) for edge in sft.edges})

    @classmethod
    def zero(cls, sft: Sft) -> "EdgePotential":
        return cls.constant(sft, 0.0)

    @classmethod
    def from_vertex_values(
        cls, sft: Sft, values: Sequence[float], depends_on: str = "source"
    ) -> "EdgePotential":
        """Potential depending on one symbol only (``source`` = x0, ``target`` = x1)."""
        index = 0 if depends_on == "source" else 1
        return cls({edge: float(values[edge[index]]) for edge in sft.edges})

    @classmethod
    def from_triples(
        cls,
        sft: Sft,
        triples: Iterable[Tuple[int, int, float]],
        default: Optional[float] = None,
    ) -> "EdgePotential":
        """Build from ``(i, j, value)`` triples, filling the rest with ``default``.

        Raises:
            InputError: When a triple names a forbidden transition or some
                allowed transition is left without a value.
        """
        values: Dict[Edge, float] = {}
        if default is not None:
            values = {edge: float(default) for edge in sft.edges}
        for i, j, value in triples:
            if not sft.allows(i, j):
                raise InputError("potential", f"transition ({i}, {j}) is not allowed")
            values[(i, j)] = float(value)
        missing = [edge for edge in sft.edges if edge not in values]
        if missing:
            raise InputError("potential", f"no value for transitions {missing}")
        return cls(values)

    @classmethod
    def coboundary(cls, sft: Sft, u: Sequence[float]) -> "EdgePotential":
        """The potential ``u(j) - u(i)``, cohomologous to zero."""
        return cls({(i, j): float(u[j] - u[i]) for i, j in sft.edges})

    def __getitem__(self, edge: Edge) -> float:
        return self.values[edge]

    def __add__(self, other: Union["EdgePotential", float]) -> "EdgePotential":
        if isinstance(other, EdgePotential):
            return EdgePotential(
                {edge: value + other.values[edge] for edge, value in self.values.items()}
            )
        return self.shift(float(other))

    def __mul__(self, scalar: float) -> "EdgePotential":
        return EdgePotential(
            {edge: value * scalar for edge, value in self.values.items()}
        )

    __rmul__ = __mul__

    def __neg__(self) -> "EdgePotential":
        return self * -1.0

    def shift(self, constant: float) -> "EdgePotential":
        return EdgePotential(
            {edge: value + constant for edge, value in self.values.items()}
        )

    def minimum(self) -> float:
        return min(self.values.values())

    def maximum(self) -> float:
        return max(self.values.values())

    def is_constant(self) -> bool:
        return len(set(self.values.values())) <= 1

    def is_roof(self) -> bool:
        return bool(self.values) and self.minimum() > 0

    def check_on(self, sft: Sft) -> None:
        """Raises InputError unless the potential lives exactly on the allowed edges."""
        if set(self.values) != set(sft.edges):
            raise InputError(
                "potential", "potential must be defined exactly on allowed transitions"
            )


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov measure: probability vector ``p`` and kernel ``P``."""

    stationary: np.ndarray
    kernel: np.ndarray

    def edge_marginal(self) -> np.ndarray:
        """The matrix ``p_i P(i, j)``, i.e. the measure of 2-cylinders."""
        return self.stationary[:, None] * self.kernel


def weighted_matrix(sft: Sft, f: Optional[EdgePotential] = None) -> np.ndarray:
    """``M(i, j) = A(i, j) * exp(f(i, j))``."""
    matrix = np.zeros((sft.alphabet_size, sft.alphabet_size))
    for i, j in sft.edges:
        matrix[i, j] = math.exp(f.values[(i, j)]) if f is not None else 1.0
    return matrix


def pressure(sft: Sft, f: Optional[EdgePotential] = None) -> float:
    """Log of the Perron eigenvalue of ``A * exp(f)``.

    The eigenvalue is rescaled by ``exp(max f)`` before the power iteration so
    very negative or very positive potentials stay in floating range.

    Raises:
        NotAperiodic: When the shift is not mixing.
    """
    require_aperiodic(sft)
    if f is None:
        return topological_entropy(sft)
    f.check_on(sft)
    top = f.maximum()
    eigenvalue, _, _ = perron_data(weighted_matrix(sft, f.shift(-top)))
    return math.log(eigenvalue) + top


def equilibrium_measure(
    sft: Sft, f: Optional[EdgePotential] = None
) -> MarkovMeasure:
    """Gibbs–Markov equilibrium state of an edge potential.

    With Perron data ``(lambda, u, v)`` of ``M = A * exp(f)`` the kernel is
    ``P(i, j) = M(i, j) v_j / (lambda v_i)`` and ``p_i = u_i v_i``.
    """
    require_aperiodic(sft)
    if f is not None:
        f.check_on(sft)
        f = f.shift(-f.maximum())
    matrix = weighted_matrix(sft, f)
    eigenvalue, u, v = perron_data(matrix)
    kernel = matrix * v[None, :] / (eigenvalue * v[:, None])
    kernel /= kernel.sum(axis=1, keepdims=True)
    stationary = u * v
    stationary = np.clip(stationary, 0.0, None)
    stationary /= stationary.sum()
    return MarkovMeasure(stationary=stationary, kernel=kernel)


def measure_entropy(mm: MarkovMeasure) -> float:
    """``-sum p_i P(i, j) log P(i, j)`` with ``0 log 0 = 0``."""
    kernel = mm.kernel
    positive = kernel > 0
    logs = np.zeros_like(kernel)
    logs[positive] = np.log(kernel[positive])
    return float(-np.sum(mm.stationary[:, None] * kernel * logs))


def integrate_edge(
    mm: MarkovMeasure, g: Union[EdgePotential, VectorEdgeFunction]
) -> Union[float, np.ndarray]:
    """Integral of an edge function against a Markov measure.

    Vector-valued edge functions are integrated componentwise.
    """
    marginal = mm.edge_marginal()
    values = g.values if isinstance(g, EdgePotential) else g
    total: Union[float, np.ndarray] = 0.0
    terms = []
    for (i, j), value in sorted(values.items()):
        terms.append(marginal[i, j] * np.asarray(value, dtype=float))
    if not terms:
        return total
    stacked = np.array(terms)
    if stacked.ndim == 1:
        return float(math.fsum(stacked))
    return np.array([math.fsum(column) for column in stacked.T])


def pressure_derivative(sft: Sft, f: Optional[EdgePotential], g: EdgePotential) -> float:
    """Derivative of ``t -> P(f + t g)`` at zero, i.e. ``int g d mu_f``."""
    return float(integrate_edge(equilibrium_measure(sft, f), g))


def pressure_variance(
    sft: Sft, f: Optional[EdgePotential], g: EdgePotential, step: float = 1e-4
) -> float:
    """Second derivative of ``t -> P(f + t g)`` at zero by central differences."""
    base = f if f is not None else EdgePotential.zero(sft)
    upper = pressure(sft, base + g * step)
    lower = pressure(sft, base + g * -step)
    return (upper - 2.0 * pressure(sft, base) + lower) / (step * step)


def root_bracket(sft: Sft, roof: EdgePotential, f: Optional[EdgePotential]) -> float:
    """Half-width ``B = (max|f| + h) / min r + 1`` of the bisection bracket."""
    offset = max((abs(value) for value in f.values.values()), default=0.0) if f else 0.0
    return (offset + topological_entropy(sft)) / roof.minimum() + 1.0


def pressure_root(
    sft: Sft,
    roof: EdgePotential,
    f: Optional[EdgePotential] = None,
    tol: float = ROOT_TOLERANCE,
) -> float:
    """The unique ``s`` with ``P(-s r + f) = 0``.

    ``s -> P(-s r + f)`` is strictly decreasing when ``min r > 0``; the root is
    located by bisection on ``[-B, B]``.

    Raises:
        InputError: When the roof is not strictly positive.
        BracketFailure: When no sign change is found on the bracket.
    """
    roof.check_on(sft)
    if not roof.is_roof():
        raise InputError("roof", "roof function must be strictly positive")
    offset = f if f is not None else EdgePotential.zero(sft)

    def tilted(s: float) -> float:
        return pressure(sft, roof * -s + offset)

    bound = root_bracket(sft, roof, f)
    low, high = tilted(-bound), tilted(bound)
    if not (low > 0 > high):
        raise BracketFailure(
            f"no sign change of P(-s r + f) on [{-bound}, {bound}]: {low}, {high}"
        )
    root = float(bisect(tilted, -bound, bound, xtol=tol, maxiter=500))
    logger.debug("pressure root %.12g on bracket +-%.6g", root, bound)
    return root
