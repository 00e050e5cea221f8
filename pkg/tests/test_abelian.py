import math

import numpy as np
import pytest
from gurevich_lab.abelian import (
    AbelianData,
    abelian_data,
    beta,
    fit_lattice_correction,
    grad_beta,
    is_full,
    maximal_winding_vanishes,
    minimize_beta,
    tilted_potential,
    winding_cycle,
    zero_winding_entropy,
)
from gurevich_lab.exceptions import InputError, NotFull, TooFewPoints
from gurevich_lab.extension import count_trivial_sequence
from gurevich_lab.groups import Lattice
from gurevich_lab.sft import full_shift
from gurevich_lab.thermo import EdgePotential, equilibrium_measure

from tests.utils import (
    free_skew,
    heisenberg_skew,
    lattice2_counts,
    lattice2_skew,
    skew_by_source,
    z_example_counts,
    z_example_skew,
)

LOG2 = math.log(2)


class TestBeta:
    def setup_method(self, method) -> None:
        self.data = abelian_data(z_example_skew())

    def test_closed_form(self) -> None:
        for w in (-1.0, 0.0, 0.7):
            expected = math.log(2 * math.exp(w) + math.exp(-w))
            assert beta(self.data, [w]) == pytest.approx(expected, abs=1e-12)

    def test_gradient_at_zero(self) -> None:
        assert grad_beta(self.data, [0.0]) == pytest.approx([1 / 3], abs=1e-10)

    def test_gradient_matches_differences(self) -> None:
        step = 1e-6
        numeric = (beta(self.data, [0.3 + step]) - beta(self.data, [0.3 - step])) / (2 * step)
        assert grad_beta(self.data, [0.3])[0] == pytest.approx(numeric, abs=1e-6)

    def test_convexity_along_lines(self) -> None:
        rng = np.random.default_rng(7)
        for _ in range(10):
            w1, w2 = rng.uniform(-3, 3, 1), rng.uniform(-3, 3, 1)
            t = float(rng.uniform(0, 1))
            middle = beta(self.data, t * w1 + (1 - t) * w2)
            assert middle <= t * beta(self.data, w1) + (1 - t) * beta(self.data, w2) + 1e-9

    def test_wrong_dimension(self) -> None:
        with pytest.raises(InputError):
            beta(self.data, [0.0, 1.0])

    def test_tilted_potential(self) -> None:
        f = tilted_potential(self.data, [2.0])
        assert f[(0, 1)] == 2.0
        assert f[(2, 0)] == -2.0

    def test_requires_lattice(self) -> None:
        with pytest.raises(InputError):
            AbelianData(skew_ab=free_skew(), rank=2)
        with pytest.raises(InputError):
            AbelianData(skew_ab=z_example_skew(), rank=2)


class TestMinimize:
    def test_z_example(self) -> None:
        point = minimize_beta(abelian_data(z_example_skew()))
        assert point.xi[0] == pytest.approx(-0.5 * LOG2, abs=1e-6)
        assert point.value == pytest.approx(1.5 * LOG2, abs=1e-9)
        assert point.gradient_norm < 1e-9

    def test_equilibrium_at_minimum(self) -> None:
        data = abelian_data(z_example_skew())
        point = minimize_beta(data)
        mm = equilibrium_measure(data.skew_ab.base, tilted_potential(data, point.xi))
        assert np.allclose(mm.stationary, [0.25, 0.25, 0.5], atol=1e-8)
        assert np.allclose(winding_cycle(mm, data), [0.0], atol=1e-9)

    @pytest.mark.parametrize("build", [free_skew, heisenberg_skew, lattice2_skew])
    def test_symmetric_systems_have_full_entropy(self, build) -> None:
        point = minimize_beta(abelian_data(build()))
        assert point.value == pytest.approx(math.log(4), abs=1e-9)
        assert np.allclose(point.xi, [0.0, 0.0], atol=1e-6)

    def test_rank_zero(self) -> None:
        sft = full_shift(2)
        skew = skew_by_source(sft, Lattice(0), [(), ()])
        point = minimize_beta(abelian_data(skew))
        assert point.xi == ()
        assert point.value == pytest.approx(LOG2)

    def test_half_space_is_not_full(self) -> None:
        data = abelian_data(skew_by_source(full_shift(2), Lattice(1), [(1,), (0,)]))
        assert not is_full(data)
        with pytest.raises(NotFull):
            minimize_beta(data)

    def test_potential_moves_minimum(self) -> None:
        skew = z_example_skew()
        f = EdgePotential.constant(skew.base, 0.25)
        point = minimize_beta(abelian_data(skew, f))
        assert point.value == pytest.approx(1.5 * LOG2 + 0.25, abs=1e-9)

    def test_tolerance_must_be_positive(self) -> None:
        with pytest.raises(InputError):
            minimize_beta(abelian_data(z_example_skew()), tol=0.0)


class TestVariational:
    def test_zero_winding_entropy_matches_minimum(self) -> None:
        data = abelian_data(z_example_skew())
        assert zero_winding_entropy(data) == pytest.approx(1.5 * LOG2, abs=1e-8)

    def test_maximal_winding(self) -> None:
        assert not maximal_winding_vanishes(abelian_data(z_example_skew()))
        assert maximal_winding_vanishes(abelian_data(lattice2_skew()))


class TestLatticeCorrection:
    def test_rank_one(self) -> None:
        kappa = fit_lattice_correction(z_example_counts(60), 1.5 * LOG2)
        assert kappa == pytest.approx(0.5, abs=0.15)

    def test_rank_two(self) -> None:
        kappa = fit_lattice_correction(lattice2_counts(60), math.log(4))
        assert kappa == pytest.approx(1.0, abs=0.15)

    def test_counts_from_dp(self) -> None:
        counts = count_trivial_sequence(z_example_skew(), 40)
        assert fit_lattice_correction(counts, 1.5 * LOG2) == pytest.approx(0.5, abs=0.15)

    def test_too_few_points(self) -> None:
        with pytest.raises(TooFewPoints):
            fit_lattice_correction(z_example_counts(12), 1.5 * LOG2)
