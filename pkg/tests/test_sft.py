import math

import pytest
from gurevich_lab.exceptions import (
    CountOverflow,
    EmptyRowOrColumn,
    NonSquare,
    NotAperiodic,
    NotIrreducible,
)
from gurevich_lab.sft import (
    Loop,
    count_periodic,
    count_prime_orbits,
    count_prime_periodic,
    enumerate_loops,
    full_shift,
    golden_mean_shift,
    irreducibility,
    new_sft,
    sft_from_edges,
    topological_entropy,
)

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


class TestNewSft:
    def test_golden_mean_shift(self) -> None:
        sft = new_sft(2, [[1, 1], [1, 0]])
        assert sft == golden_mean_shift()
        assert sft.edges == ((0, 0), (0, 1), (1, 0))
        assert sft.allows(0, 1)
        assert not sft.allows(1, 1)
        assert not sft.allows(2, 0)
        assert sft.successors(1) == (0,)
        assert sft.predecessors(1) == (0,)

    def test_non_square(self) -> None:
        with pytest.raises(NonSquare):
            new_sft(2, [[1, 1]])
        with pytest.raises(NonSquare):
            new_sft(2, [[1, 1], [1]])

    def test_empty_row_or_column(self) -> None:
        with pytest.raises(EmptyRowOrColumn, match="no successor"):
            new_sft(2, [[1, 1], [0, 0]])
        with pytest.raises(EmptyRowOrColumn, match="no predecessor"):
            new_sft(2, [[1, 0], [1, 0]])

    def test_entries_must_be_binary(self) -> None:
        with pytest.raises(EmptyRowOrColumn):
            new_sft(2, [[2, 1], [1, 0]])

    def test_from_edges(self) -> None:
        assert sft_from_edges(2, [(0, 0), (0, 1), (1, 0)]) == golden_mean_shift()
        with pytest.raises(NonSquare):
            sft_from_edges(2, [(0, 2)])

    def test_permuted(self) -> None:
        permuted = golden_mean_shift().permuted([1, 0])
        assert permuted.transitions == ((0, 1), (1, 1))


class TestIrreducibility:
    def test_full_shift_is_mixing(self) -> None:
        status = irreducibility(full_shift(3))
        assert status.irreducible
        assert status.period == 1

    def test_cycle_has_period(self) -> None:
        sft = new_sft(2, [[0, 1], [1, 0]])
        assert irreducibility(sft).period == 2
        with pytest.raises(NotAperiodic):
            topological_entropy(sft)

    def test_reducible(self) -> None:
        sft = new_sft(2, [[1, 1], [0, 1]])
        assert not irreducibility(sft).irreducible
        with pytest.raises(NotIrreducible):
            topological_entropy(sft)


class TestPeriodicPoints:
    def test_golden_mean_counts(self) -> None:
        sft = golden_mean_shift()
        assert count_periodic(sft, 2) == 3
        assert count_periodic(sft, 3) == 4
        assert [count_periodic(sft, n) for n in range(1, 8)] == [1, 3, 4, 7, 11, 18, 29]

    def test_counts_match_enumeration(self) -> None:
        sft = golden_mean_shift()
        for n in range(1, 9):
            assert count_periodic(sft, n) == sum(1 for _ in enumerate_loops(sft, n))

    def test_exact_beyond_int64(self) -> None:
        assert count_periodic(full_shift(2), 100) == 2**100
        with pytest.raises(CountOverflow):
            count_periodic(full_shift(2), 100, big_int=False)
        assert count_periodic(full_shift(2), 20, big_int=False) == 2**20

    def test_prime_counts(self) -> None:
        sft = full_shift(2)
        assert [count_prime_periodic(sft, n) for n in range(1, 7)] == [2, 2, 6, 12, 30, 54]
        assert [count_prime_orbits(sft, n) for n in range(1, 7)] == [2, 1, 2, 3, 6, 9]

    def test_prime_loops_match_enumeration(self) -> None:
        sft = golden_mean_shift()
        for n in range(1, 9):
            prime = sum(1 for loop in enumerate_loops(sft, n) if loop.is_prime())
            assert prime == count_prime_periodic(sft, n)

    def test_invalid_length(self) -> None:
        with pytest.raises(ValueError):
            count_periodic(full_shift(2), 0)

    def test_loop_edges(self) -> None:
        loop = Loop((0, 1, 0, 1))
        assert loop.length == 4
        assert loop.edges() == [(0, 1), (1, 0), (0, 1), (1, 0)]
        assert not loop.is_prime()
        assert Loop((0, 0, 1)).is_prime()


class TestTopologicalEntropy:
    def test_golden_mean(self) -> None:
        assert topological_entropy(golden_mean_shift()) == pytest.approx(
            math.log(GOLDEN_RATIO), abs=1e-10
        )
        assert topological_entropy(golden_mean_shift()) == pytest.approx(0.4812118, abs=1e-7)

    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    def test_full_shift(self, k: int) -> None:
        assert topological_entropy(full_shift(k)) == pytest.approx(math.log(k), abs=1e-12)
