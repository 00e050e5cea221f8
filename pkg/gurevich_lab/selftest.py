"""Seeded randomized property checks behind ``gurevich-lab selftest``."""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from gurevich_lab.extension import (
    SkewSystem,
    count_trivial,
    count_trivial_bruteforce,
    make_skew,
)
from gurevich_lab.groups import (
    Free,
    Group,
    Heisenberg,
    Lattice,
    ball,
    identity,
    inverse,
    multiply,
)
from gurevich_lab.sft import Sft, irreducibility, new_sft
from gurevich_lab.thermo import (
    EdgePotential,
    equilibrium_measure,
    integrate_edge,
    measure_entropy,
    pressure,
)

logger = logging.getLogger(__name__)

MAX_ALPHABET = 6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def random_aperiodic_sft(rng: np.random.Generator, max_size: int = MAX_ALPHABET) -> Sft:
    """Rejection-sample a mixing shift on at most ``max_size`` symbols."""
    while True:
        size = int(rng.integers(1, max_size + 1))
        rows = (rng.random((size, size)) < 0.5).astype(int).tolist()
        if any(not any(row) for row in rows) or any(
            not any(row[i] for row in rows) for i in range(size)
        ):
            continue
        sft = new_sft(size, rows)
        status = irreducibility(sft)
        if status.irreducible and status.period == 1:
            return sft


def random_potential(rng: np.random.Generator, sft: Sft, scale: float = 2.0) -> EdgePotential:
    return EdgePotential(
        {edge: float(rng.uniform(-scale, scale)) for edge in sft.edges}
    )


def random_lattice_skew(rng: np.random.Generator, max_size: int = 4) -> SkewSystem:
    sft = random_aperiodic_sft(rng, max_size)
    labels = {edge: (int(rng.integers(-1, 2)),) for edge in sft.edges}
    return make_skew(sft, Lattice(1), labels)


def check_variational_identity(rng: np.random.Generator) -> CheckResult:
    sft = random_aperiodic_sft(rng)
    f = random_potential(rng, sft)
    mm = equilibrium_measure(sft, f)
    residual = abs(pressure(sft, f) - measure_entropy(mm) - float(integrate_edge(mm, f)))
    return CheckResult("variational identity", residual < 1e-9, f"residual {residual:.3e}")


def check_coboundary_invariance(rng: np.random.Generator) -> CheckResult:
    sft = random_aperiodic_sft(rng)
    f = random_potential(rng, sft)
    u = rng.uniform(-1.0, 1.0, sft.alphabet_size).tolist()
    difference = abs(pressure(sft, f + EdgePotential.coboundary(sft, u)) - pressure(sft, f))
    return CheckResult("coboundary invariance", difference < 1e-9, f"difference {difference:.3e}")


def check_group_axioms(rng: np.random.Generator) -> CheckResult:
    groups: List[Group] = [Lattice(2), Free(2), Heisenberg()]
    for group in groups:
        elements = ball(group, 3)
        e = identity(group)
        for _ in range(20):
            a, b, c = (elements[int(rng.integers(len(elements)))] for _ in range(3))
            left = multiply(group, multiply(group, a, b), c)
            if left != multiply(group, a, multiply(group, b, c)):
                return CheckResult("group axioms", False, f"associativity in {group}")
            if multiply(group, a, inverse(group, a)) != e or multiply(group, e, a) != a:
                return CheckResult("group axioms", False, f"inverse or identity in {group}")
    return CheckResult("group axioms", True)


def check_dp_against_enumeration(rng: np.random.Generator) -> CheckResult:
    skew = random_lattice_skew(rng)
    for n in range(1, 7):
        fast, slow = count_trivial(skew, n), count_trivial_bruteforce(skew, n)
        if fast != slow:
            return CheckResult("dp vs enumeration", False, f"n={n}: {fast} != {slow}")
    return CheckResult("dp vs enumeration", True)


CHECKS: Dict[str, Callable[[np.random.Generator], CheckResult]] = {
    "variational": check_variational_identity,
    "coboundary": check_coboundary_invariance,
    "groups": check_group_axioms,
    "dp": check_dp_against_enumeration,
}


def run_selftest(
    seed: int = 0, rounds: int = 5, only: Optional[List[str]] = None
) -> List[CheckResult]:
    """Run every check ``rounds`` times from one seeded generator."""
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(rounds):
        for name, check in CHECKS.items():
            if only is not None and name not in only:
                continue
            result = check(rng)
            logger.debug("%s: %s %s", result.name, result.passed, result.detail)
            results.append(result)
    return results


def all_passed(results: List[CheckResult]) -> bool:
    return all(result.passed for result in results)
