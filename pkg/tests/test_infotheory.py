import math

import numpy as np
import pytest

from kinesim.errors import DataIntegrityError, IncompleteDataError
from kinesim.infotheory import (
    ConditionalPmf,
    blahut_arimoto,
    capacity_vs_xmax,
    estimate_pmf,
    mutual_information,
    pmf_from_json,
    read_pmf_json,
    write_pmf_json,
)

import oracles

# frozen closed-form oracle values
BSC01_CAPACITY = oracles.bsc_capacity(0.1)      # 0.531004406410...
BEC025_CAPACITY = oracles.bec_capacity(0.25)    # 0.75


def bsc(p):
    return np.array([[1 - p, p], [p, 1 - p]])


def bec(eps):
    # x in {0,1} -> y in {0,1,erased}
    return np.array([[1 - eps, 0.0, eps], [0.0, 1 - eps, eps]])


class TestConditionalPmf:
    def test_row_sum_enforced(self):
        with pytest.raises(DataIntegrityError):
            ConditionalPmf(1, np.array([[0.5, 0.4], [0.0, 1.0]]), np.array([1, 1]))

    def test_negative_entry_rejected(self):
        with pytest.raises(DataIntegrityError):
            ConditionalPmf(1, np.array([[1.1, -0.1], [0.0, 1.0]]), np.array([1, 1]))

    def test_shape_enforced(self):
        with pytest.raises(DataIntegrityError):
            ConditionalPmf(2, np.eye(2), np.array([1, 1]))


class TestEstimatePmf:
    def test_lossless_channel_gives_identity(self):
        trials = [(x, x) for x in range(5) for _ in range(3)]
        pmf = estimate_pmf(trials, 4)
        assert np.array_equal(pmf.matrix, np.eye(5))
        assert pmf.trials_per_row.tolist() == [3] * 5

    def test_zero_row_degenerate(self):
        pmf = estimate_pmf([(0, 0), (1, 0), (1, 1)], 1)
        assert pmf.matrix[0, 0] == 1.0

    def test_counting(self):
        pmf = estimate_pmf([(0, 0), (1, 0), (1, 1)], 1)
        assert pmf.matrix[1].tolist() == [0.5, 0.5]

    def test_missing_row_error(self):
        with pytest.raises(IncompleteDataError) as exc:
            estimate_pmf([(0, 0), (2, 1)], 2)
        assert exc.value.missing == [1]

    def test_y_exceeding_x_error(self):
        with pytest.raises(DataIntegrityError):
            estimate_pmf([(0, 0), (1, 2)], 1)

    def test_out_of_range_x_error(self):
        with pytest.raises(DataIntegrityError):
            estimate_pmf([(0, 0), (5, 0)], 2)


class TestMutualInformation:
    def test_noiseless_binary(self):
        assert mutual_information(np.eye(2), [0.5, 0.5]) == pytest.approx(1.0)

    def test_point_mass_input(self):
        assert mutual_information(bsc(0.1), [1.0, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_binary_symmetric_closed_form(self):
        got = mutual_information(bsc(0.1), [0.5, 0.5])
        assert got == pytest.approx(BSC01_CAPACITY, abs=1e-12)

    def test_input_validation(self):
        with pytest.raises(DataIntegrityError):
            mutual_information(bsc(0.1), [0.7, 0.7])
        with pytest.raises(DataIntegrityError):
            mutual_information(bsc(0.1), [1.0])


class TestBlahutArimoto:
    def test_identity_8ary(self):
        res = blahut_arimoto(np.eye(8))
        assert res.capacity_bits == pytest.approx(3.0, abs=1e-6)
        assert res.converged
        assert res.input_pmf == pytest.approx(np.full(8, 0.125), abs=1e-9)

    def test_binary_symmetric(self):
        res = blahut_arimoto(bsc(0.1), tolerance_bits=1e-9)
        assert res.capacity_bits == pytest.approx(BSC01_CAPACITY, abs=1e-4)
        assert res.input_pmf == pytest.approx([0.5, 0.5], abs=1e-6)

    def test_binary_erasure(self):
        res = blahut_arimoto(bec(0.25), tolerance_bits=1e-9)
        assert res.capacity_bits == pytest.approx(BEC025_CAPACITY, abs=1e-4)

    def test_bracket_orders_and_lower_monotone(self):
        rng = np.random.Generator(np.random.PCG64(5))
        for _ in range(20):
            n = int(rng.integers(2, 7))
            m = int(rng.integers(2, 7))
            W = rng.uniform(0.0, 1.0, size=(n, m))
            W[rng.uniform(size=(n, m)) < 0.3] = 0.0
            W[:, 0] += 1e-3  # keep rows non-degenerate
            W /= W.sum(axis=1, keepdims=True)
            prev_lower = -1.0
            for iters in range(1, 12):
                res = blahut_arimoto(W, tolerance_bits=1e-15, max_iters=iters)
                assert res.lower_bound_bits <= res.upper_bound_bits + 1e-12
                assert res.lower_bound_bits >= prev_lower - 1e-12
                assert res.capacity_bits <= math.log2(n) + 1e-9
                prev_lower = res.lower_bound_bits

    def test_capacity_lower_bound_is_achieved_mi(self):
        rng = np.random.Generator(np.random.PCG64(6))
        W = rng.uniform(0.1, 1.0, size=(5, 5))
        W /= W.sum(axis=1, keepdims=True)
        res = blahut_arimoto(W, tolerance_bits=1e-10)
        assert mutual_information(W, res.input_pmf) == pytest.approx(
            res.lower_bound_bits, abs=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.Generator(np.random.PCG64(7))
        W = rng.uniform(0.05, 1.0, size=(6, 6))
        W /= W.sum(axis=1, keepdims=True)
        perm = rng.permutation(6)
        a = blahut_arimoto(W).capacity_bits
        b = blahut_arimoto(W[:, perm]).capacity_bits
        assert a == pytest.approx(b, abs=1e-12)

    def test_zero_columns_dropped(self):
        W = np.array([[0.9, 0.0, 0.1], [0.1, 0.0, 0.9]])
        res = blahut_arimoto(W)
        assert res.capacity_bits == pytest.approx(BSC01_CAPACITY, abs=1e-4)

    def test_non_convergence_flagged(self):
        z_channel = np.array([[1.0, 0.0], [0.5, 0.5]])
        res = blahut_arimoto(z_channel, tolerance_bits=1e-12, max_iters=2)
        assert not res.converged
        assert res.iterations == 2
        full = blahut_arimoto(z_channel, tolerance_bits=1e-12)
        assert full.converged
        assert full.capacity_bits >= res.capacity_bits - 1e-12


class TestPmfFile:
    def test_round_trip(self, tmp_path):
        pmf = estimate_pmf([(0, 0), (1, 0), (1, 1), (2, 2)], 2)
        path = tmp_path / "pmf.json"
        write_pmf_json(pmf, path)
        back = read_pmf_json(path)
        assert back.x_max == pmf.x_max
        assert np.array_equal(back.matrix, pmf.matrix)
        assert np.array_equal(back.trials_per_row, pmf.trials_per_row)

    def test_malformed_rejected(self):
        with pytest.raises(DataIntegrityError):
            pmf_from_json('{"x_max": 1}')
        with pytest.raises(DataIntegrityError):
            pmf_from_json("not json")


class TestCapacityVsXmax:
    def test_identity_ladder(self):
        trials = [(x, x) for x in range(8) for _ in range(2)]
        curve = capacity_vs_xmax(trials, [1, 3, 7])
        caps = [res.capacity_bits for _, res in curve]
        assert caps == pytest.approx([1.0, 2.0, 3.0], abs=1e-6)

    def test_non_decreasing_on_nested_alphabets(self):
        rng = np.random.Generator(np.random.PCG64(9))
        trials = []
        for x in range(11):
            for _ in range(200):
                trials.append((x, int(rng.integers(0, x + 1))))
        curve = capacity_vs_xmax(trials, list(range(1, 11)))
        caps = [res.capacity_bits for _, res in curve]
        for a, b in zip(caps, caps[1:]):
            assert b >= a - 1e-9

    def test_propagates_missing_rows(self):
        with pytest.raises(IncompleteDataError):
            capacity_vs_xmax([(0, 0), (2, 2)], [2])

    def test_truncation_requires_y_le_x(self):
        # direct integrity check: estimate_pmf refuses y > x, so truncated
        # rows always remain stochastic
        with pytest.raises(DataIntegrityError):
            capacity_vs_xmax([(0, 1)], [0])
