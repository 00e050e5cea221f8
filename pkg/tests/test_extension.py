import math

import pytest
from gurevich_lab.exceptions import (
    AllZeroCounts,
    BallTooLarge,
    ExtraLabel,
    KindMismatch,
    MissingLabel,
    NotIrreducible,
    UnsupportedShape,
)
from gurevich_lab.extension import (
    TransitivityStatus,
    check_transitivity,
    count_trivial,
    count_trivial_bruteforce,
    count_trivial_radial_free,
    count_trivial_radial_free_sequence,
    count_trivial_sequence,
    count_trivial_table,
    counts_with_method,
    cycle_holonomies,
    estimate_gurevich,
    fit_counts,
    gurevich_pressure_bound,
    lattice_index,
    make_skew,
    not_in_half_space,
    truncated_transfer_spr,
)
from gurevich_lab.groups import FiniteTable, Free, Lattice, ball
from gurevich_lab.sft import Loop, full_shift, golden_mean_shift, new_sft
from gurevich_lab.thermo import EdgePotential, pressure

from tests.utils import (
    free_skew,
    heisenberg_skew,
    lattice2_counts,
    lattice2_skew,
    z_example_counts,
    z_example_skew,
    skew_by_source,
    trivial_skew,
)


class TestMakeSkew:
    def test_labels_on_forbidden_edge(self) -> None:
        sft = golden_mean_shift()
        labels = {(0, 0): (0,), (0, 1): (1,), (1, 0): (-1,), (1, 1): (1,)}
        with pytest.raises(ExtraLabel):
            make_skew(sft, Lattice(1), labels)

    def test_missing_label(self) -> None:
        with pytest.raises(MissingLabel):
            make_skew(golden_mean_shift(), Lattice(1), {(0, 0): (0,)})

    def test_label_of_wrong_kind(self) -> None:
        sft = golden_mean_shift()
        with pytest.raises(KindMismatch):
            make_skew(sft, Lattice(1), {edge: (0, 0) for edge in sft.edges})

    def test_abelianized(self) -> None:
        skew = heisenberg_skew()
        ab = skew.abelianized()
        assert isinstance(ab.group, Lattice)
        assert ab.labels[(2, 0)] == (0, 1)
        z_skew = z_example_skew()
        assert z_skew.abelianized() is z_skew

    def test_holonomy(self) -> None:
        skew = z_example_skew()
        assert skew.holonomy(Loop((0, 2))) == (0,)
        assert skew.holonomy(Loop((0, 1, 2))) == (1,)


class TestCounting:
    def test_z_example_counts(self) -> None:
        skew = z_example_skew()
        assert count_trivial(skew, 2) == 4
        assert count_trivial(skew, 6) == 160
        assert count_trivial(skew, 7) == 0
        assert count_trivial_sequence(skew, 30) == z_example_counts(30)

    def test_lattice2_counts(self) -> None:
        assert count_trivial_sequence(lattice2_skew(), 20) == lattice2_counts(20)

    def test_free_cogrowth(self) -> None:
        assert count_trivial_sequence(free_skew(), 6) == [0, 4, 0, 28, 0, 232]

    @pytest.mark.parametrize(
        "build", [z_example_skew, free_skew, heisenberg_skew, lattice2_skew]
    )
    def test_dp_matches_enumeration(self, build) -> None:
        skew = build()
        for n in range(1, 7):
            assert count_trivial(skew, n) == count_trivial_bruteforce(skew, n)

    @pytest.mark.parametrize("build", [free_skew, heisenberg_skew])
    def test_abelianized_counts_dominate(self, build) -> None:
        skew = build()
        for n in range(1, 9):
            assert count_trivial(skew, n) <= count_trivial(skew.abelianized(), n)

    def test_golden_mean_extension_matches_enumeration(self) -> None:
        sft = golden_mean_shift()
        skew = make_skew(sft, Lattice(1), {(0, 0): (1,), (0, 1): (0,), (1, 0): (-1,)})
        for n in range(1, 9):
            assert count_trivial(skew, n) == count_trivial_bruteforce(skew, n)

    def test_weighted_counts(self) -> None:
        skew = z_example_skew()
        f = EdgePotential.from_vertex_values(skew.base, [0.1, -0.3, 0.2])
        for n in (2, 4, 5):
            assert count_trivial(skew, n, f) == pytest.approx(
                count_trivial_bruteforce(skew, n, f), rel=1e-12
            )

    def test_constant_potential_scales(self) -> None:
        skew = z_example_skew()
        f = EdgePotential.constant(skew.base, 0.5)
        assert count_trivial(skew, 4, f) == pytest.approx(24 * math.exp(2.0), rel=1e-12)

    def test_threads_do_not_change_counts(self) -> None:
        skew = heisenberg_skew()
        assert count_trivial_sequence(skew, 10, threads=4) == count_trivial_sequence(skew, 10)

    def test_trivial_group_counts_all_loops(self) -> None:
        sft = golden_mean_shift()
        assert count_trivial_sequence(trivial_skew(sft), 5) == [1, 3, 4, 7, 11]

    def test_cap(self) -> None:
        with pytest.raises(BallTooLarge):
            count_trivial(heisenberg_skew(), 12, cap=50)

    def test_table_rejects_bad_lengths(self) -> None:
        with pytest.raises(ValueError):
            count_trivial_table(z_example_skew(), [0])

    def test_layer_sizes(self) -> None:
        _, sizes = count_trivial_table(z_example_skew(), [1, 2])
        assert sizes == [9, 9]


class TestRadialFree:
    def test_matches_dp(self) -> None:
        skew = free_skew()
        assert count_trivial_radial_free_sequence(skew, 12) == count_trivial_sequence(skew, 12)
        assert count_trivial_radial_free(skew, 4) == 28

    def test_labels_by_target(self) -> None:
        sft = full_shift(4)
        letters = [(1,), (-1,), (2,), (-2,)]
        skew = make_skew(sft, Free(2), {(i, j): letters[j] for i, j in sft.edges})
        assert count_trivial_radial_free(skew, 6) == 232

    def test_unsupported_shapes(self) -> None:
        with pytest.raises(UnsupportedShape):
            count_trivial_radial_free(z_example_skew(), 4)
        sft = full_shift(4)
        skew = skew_by_source(sft, Free(2), [(1,), (1,), (2,), (-2,)])
        with pytest.raises(UnsupportedShape):
            count_trivial_radial_free(skew, 4)

    def test_method_selection(self) -> None:
        counts, sizes, method = counts_with_method(free_skew(), 8)
        assert method == "radial"
        assert counts == count_trivial_sequence(free_skew(), 8)
        # walks of length n sit at distances n, n - 2, ...
        assert sizes == [n // 2 + 1 for n in range(1, 9)]
        _, _, method = counts_with_method(z_example_skew(), 8)
        assert method == "dp"
        with pytest.raises(UnsupportedShape):
            counts_with_method(z_example_skew(), 8, method="radial")


class TestEstimate:
    def test_z_example_rate(self) -> None:
        estimate = estimate_gurevich(z_example_skew(), 48)
        assert estimate.rate == pytest.approx(1.5 * math.log(2), abs=0.02)
        assert estimate.rate < math.log(3) - 0.05
        assert estimate.n_range == (24, 48)
        assert estimate.method == "dp"

    def test_free_group_rate(self) -> None:
        estimate = estimate_gurevich(free_skew(), 60)
        assert estimate.method == "radial"
        assert estimate.rate == pytest.approx(math.log(2 * math.sqrt(3)), abs=0.03)

    @pytest.mark.parametrize(
        "build, n_max",
        [
            (z_example_skew, 24),
            (free_skew, 40),
            (lattice2_skew, 24),
            (lambda: trivial_skew(full_shift(3)), 20),
        ],
    )
    def test_rate_below_pressure(self, build, n_max) -> None:
        skew = build()
        assert estimate_gurevich(skew, n_max).rate <= gurevich_pressure_bound(skew) + 0.02

    def test_all_zero_counts(self) -> None:
        with pytest.raises(AllZeroCounts):
            fit_counts([1, 0, 0, 0, 0, 0])

    def test_pressure_bound(self) -> None:
        assert gurevich_pressure_bound(z_example_skew()) == pytest.approx(math.log(3))


class TestTransitivity:
    def test_z_example_is_transitive(self) -> None:
        assert check_transitivity(z_example_skew()).transitive

    def test_half_space(self) -> None:
        skew = skew_by_source(full_shift(2), Lattice(1), [(1,), (0,)])
        status = check_transitivity(skew)
        assert status.status is TransitivityStatus.INTRANSITIVE
        assert status.witness["reason"] == "half-space"

    def test_index(self) -> None:
        skew = skew_by_source(full_shift(2), Lattice(1), [(2,), (-2,)])
        status = check_transitivity(skew)
        assert status.witness == {"reason": "index", "index": 2}

    def test_finite_group(self) -> None:
        sft = full_shift(2)
        assert check_transitivity(skew_by_source(sft, FiniteTable.cyclic(2), [0, 1])).transitive
        status = check_transitivity(skew_by_source(sft, FiniteTable.cyclic(2), [0, 0]))
        assert status.status is TransitivityStatus.INTRANSITIVE

    def test_free_and_heisenberg(self) -> None:
        assert check_transitivity(free_skew()).transitive
        assert check_transitivity(heisenberg_skew()).transitive

    def test_intransitive_through_abelianization(self) -> None:
        skew = skew_by_source(full_shift(2), Free(2), [(1,), (2,)])
        status = check_transitivity(skew)
        assert status.status is TransitivityStatus.INTRANSITIVE
        assert status.witness["reason"] == "abelianization"

    def test_reducible_base(self) -> None:
        sft = new_sft(2, [[1, 1], [0, 1]])
        with pytest.raises(NotIrreducible):
            check_transitivity(make_skew(sft, Lattice(1), {edge: (0,) for edge in sft.edges}))

    def test_cycle_holonomies(self) -> None:
        assert cycle_holonomies(z_example_skew()) == [(-1,), (0,), (1,), (2,)]

    def test_half_space_lp(self) -> None:
        assert not_in_half_space([(1, 0), (-1, 0), (0, 1), (0, -1)], 2)
        assert not not_in_half_space([(1, 0), (0, 1), (-1, 0)], 2)
        assert not not_in_half_space([(1, 0), (-1, 0)], 2)
        assert not_in_half_space([], 0)

    def test_lattice_index(self) -> None:
        assert lattice_index([(2, 0), (0, 3)], 2) == 6
        assert lattice_index([(2,), (3,)], 1) == 1
        assert lattice_index([(1, 1)], 2) == 0


class TestTransferBounds:
    def test_trivial_group_equals_pressure(self) -> None:
        sft = full_shift(3)
        f = EdgePotential.from_vertex_values(sft, [0.2, -0.1, 0.4])
        assert truncated_transfer_spr(trivial_skew(sft), f, 3) == pytest.approx(
            pressure(sft, f), abs=1e-9
        )

    def test_free_group_monotone_and_below_pressure(self) -> None:
        values = [truncated_transfer_spr(free_skew(), None, r) for r in (1, 2, 3, 4)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        assert values[-1] <= math.log(4) - 0.05

    @pytest.mark.parametrize("radius", [1, 2, 3])
    def test_bounds_loop_counts_from_below(self, radius) -> None:
        # loops of length 2R at the identity stay inside ball(R)
        skew = free_skew()
        n = 2 * radius
        states = skew.base.alphabet_size * len(ball(skew.group, radius))
        lower = (math.log(count_trivial(skew, n)) - math.log(states)) / n
        assert truncated_transfer_spr(skew, None, radius) >= lower - 1e-9

    def test_cap(self) -> None:
        with pytest.raises(BallTooLarge):
            truncated_transfer_spr(free_skew(), None, 4, cap=100)
