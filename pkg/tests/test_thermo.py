import math

import numpy as np
import pytest
from gurevich_lab.exceptions import InputError, NotAperiodic
from gurevich_lab.selftest import random_aperiodic_sft, random_potential
from gurevich_lab.sft import full_shift, golden_mean_shift, new_sft, topological_entropy
from gurevich_lab.thermo import (
    EdgePotential,
    equilibrium_measure,
    integrate_edge,
    measure_entropy,
    pressure,
    pressure_derivative,
    pressure_root,
    pressure_variance,
    weighted_matrix,
)

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


class TestEdgePotential:
    def test_constructors(self) -> None:
        sft = golden_mean_shift()
        assert EdgePotential.zero(sft).values == {(0, 0): 0.0, (0, 1): 0.0, (1, 0): 0.0}
        by_source = EdgePotential.from_vertex_values(sft, [1.0, 2.0])
        assert by_source[(1, 0)] == 2.0
        by_target = EdgePotential.from_vertex_values(sft, [1.0, 2.0], depends_on="target")
        assert by_target[(0, 1)] == 2.0
        triples = EdgePotential.from_triples(sft, [(1, 0, 5.0)], default=1.0)
        assert triples.values == {(0, 0): 1.0, (0, 1): 1.0, (1, 0): 5.0}

    def test_from_triples_errors(self) -> None:
        sft = golden_mean_shift()
        with pytest.raises(InputError, match="not allowed"):
            EdgePotential.from_triples(sft, [(1, 1, 1.0)], default=0.0)
        with pytest.raises(InputError, match="no value"):
            EdgePotential.from_triples(sft, [(0, 0, 1.0)])

    def test_arithmetic(self) -> None:
        sft = golden_mean_shift()
        f = EdgePotential.from_triples(sft, [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0)])
        assert (f + f)[(1, 0)] == 6.0
        assert (f * 2.0)[(0, 1)] == 4.0
        assert (2.0 * f)[(0, 1)] == 4.0
        assert (-f)[(0, 0)] == -1.0
        assert (f + 1.0)[(0, 0)] == 2.0
        assert f.minimum() == 1.0
        assert f.maximum() == 3.0
        assert f.is_roof()
        assert not f.is_constant()
        assert not (f + -2.0).is_roof()
        assert EdgePotential.constant(sft, 2.0).is_constant()

    def test_check_on(self) -> None:
        with pytest.raises(InputError):
            EdgePotential.zero(golden_mean_shift()).check_on(full_shift(2))


class TestPressure:
    def test_zero_potential_is_entropy(self) -> None:
        sft = golden_mean_shift()
        assert pressure(sft) == pytest.approx(topological_entropy(sft), abs=1e-12)
        assert pressure(sft, EdgePotential.zero(sft)) == pytest.approx(
            math.log(GOLDEN_RATIO), abs=1e-10
        )

    def test_constant_shift(self) -> None:
        sft = full_shift(3)
        assert pressure(sft, EdgePotential.constant(sft, 2.5)) == pytest.approx(
            math.log(3) + 2.5, abs=1e-10
        )

    def test_huge_potentials_stay_finite(self) -> None:
        sft = full_shift(2)
        f = EdgePotential.constant(sft, -800.0)
        assert pressure(sft, f) == pytest.approx(math.log(2) - 800.0, abs=1e-8)

    def test_weighted_matrix(self) -> None:
        sft = golden_mean_shift()
        matrix = weighted_matrix(sft, EdgePotential.constant(sft, math.log(2)))
        assert np.allclose(matrix, [[2.0, 2.0], [2.0, 0.0]])

    def test_periodic_shift_rejected(self) -> None:
        with pytest.raises(NotAperiodic):
            pressure(new_sft(2, [[0, 1], [1, 0]]))

    @pytest.mark.parametrize("seed", range(20))
    def test_variational_identity(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        sft = random_aperiodic_sft(rng)
        f = random_potential(rng, sft)
        mm = equilibrium_measure(sft, f)
        residual = pressure(sft, f) - measure_entropy(mm) - float(integrate_edge(mm, f))
        assert abs(residual) < 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_coboundaries_do_not_change_pressure(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        sft = random_aperiodic_sft(rng)
        f = random_potential(rng, sft)
        u = rng.uniform(-1.0, 1.0, sft.alphabet_size).tolist()
        assert pressure(sft, f + EdgePotential.coboundary(sft, u)) == pytest.approx(
            pressure(sft, f), abs=1e-9
        )


class TestEquilibriumMeasure:
    def test_golden_mean_maximal_measure(self) -> None:
        mm = equilibrium_measure(golden_mean_shift())
        assert mm.kernel[0, 0] == pytest.approx(1 / GOLDEN_RATIO, abs=1e-10)
        assert mm.kernel[0, 1] == pytest.approx(1 / GOLDEN_RATIO**2, abs=1e-10)
        assert mm.kernel[1, 0] == pytest.approx(1.0, abs=1e-12)
        assert measure_entropy(mm) == pytest.approx(math.log(GOLDEN_RATIO), abs=1e-10)

    def test_stationary(self) -> None:
        mm = equilibrium_measure(golden_mean_shift())
        assert mm.stationary.sum() == pytest.approx(1.0)
        assert np.allclose(mm.stationary @ mm.kernel, mm.stationary, atol=1e-12)
        assert mm.edge_marginal().sum() == pytest.approx(1.0)

    def test_bernoulli_from_vertex_potential(self) -> None:
        sft = full_shift(3)
        f = EdgePotential.from_vertex_values(sft, [0.0, 0.0, math.log(2)])
        mm = equilibrium_measure(sft, f)
        assert np.allclose(mm.stationary, [0.25, 0.25, 0.5], atol=1e-10)
        assert np.allclose(mm.kernel[1], [0.25, 0.25, 0.5], atol=1e-10)

    def test_vector_integral(self) -> None:
        sft = full_shift(2)
        mm = equilibrium_measure(sft)
        vector = {edge: (float(edge[0]), 1.0) for edge in sft.edges}
        assert np.allclose(integrate_edge(mm, vector), [0.5, 1.0])


class TestDerivatives:
    def test_derivative_is_integral(self) -> None:
        sft = golden_mean_shift()
        g = EdgePotential.from_vertex_values(sft, [1.0, 0.0])
        step = 1e-6
        numeric = (pressure(sft, g * step) - pressure(sft, g * -step)) / (2 * step)
        assert pressure_derivative(sft, None, g) == pytest.approx(numeric, abs=1e-6)

    def test_variance_of_constant_is_zero(self) -> None:
        sft = full_shift(2)
        assert pressure_variance(sft, None, EdgePotential.constant(sft, 1.0)) == pytest.approx(
            0.0, abs=1e-4
        )

    def test_variance_is_positive(self) -> None:
        sft = full_shift(2)
        g = EdgePotential.from_vertex_values(sft, [1.0, 0.0])
        assert pressure_variance(sft, None, g) == pytest.approx(0.25, abs=1e-3)


class TestPressureRoot:
    def test_unit_roof_gives_entropy(self) -> None:
        sft = golden_mean_shift()
        assert pressure_root(sft, EdgePotential.constant(sft, 1.0)) == pytest.approx(
            math.log(GOLDEN_RATIO), abs=1e-8
        )

    def test_constant_roof_scales(self) -> None:
        sft = golden_mean_shift()
        assert pressure_root(sft, EdgePotential.constant(sft, 2.0)) == pytest.approx(
            math.log(GOLDEN_RATIO) / 2, abs=1e-8
        )

    def test_root_solves_equation(self) -> None:
        sft = golden_mean_shift()
        roof = EdgePotential.from_triples(sft, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 2.0)])
        s = pressure_root(sft, roof)
        assert pressure(sft, roof * -s) == pytest.approx(0.0, abs=1e-8)
        grid = np.linspace(0.0, 1.0, 1001)
        values = [pressure(sft, roof * -float(t)) for t in grid]
        crossing = next(t for t, value in zip(grid, values) if value < 0)
        assert crossing - 1e-3 <= s <= crossing

    def test_nonpositive_roof(self) -> None:
        sft = full_shift(2)
        with pytest.raises(InputError):
            pressure_root(sft, EdgePotential.constant(sft, 0.0))
