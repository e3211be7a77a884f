from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from group_automata.errors import CapacityError
from group_automata.errors import DomainError
from group_automata.group import density_set
from group_automata.group import density_sets_prime
from group_automata.group import lucas_binomial
from group_automata.group import p_expansion
from group_automata.group.digits import MAX_DENSITY_M
from group_automata.group.digits import in_r
from group_automata.group.digits import in_r_double_prime
from group_automata.group.digits import in_r_prime
from group_automata.group.digits import log_log


class TestLucasBinomial:
    @pytest.mark.parametrize(
        "m,k,p,expected",
        [(5, 2, 2, 0), (6, 2, 2, 1), (10, 1, 3, 1), (10, 3, 3, 0), (7, 0, 5, 1), (3, 5, 2, 0)],
    )
    def test_examples(self, m, k, p, expected):
        assert lucas_binomial(m, k, p) == expected

    @pytest.mark.slow
    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_agrees_with_big_integer_binomials(self, p):
        row = np.ones(1, dtype=np.int64)
        for m in range(1001):
            assert [lucas_binomial(m, k, p) for k in range(m + 1)] == row.tolist()
            nxt = np.zeros(m + 2, dtype=np.int64)
            nxt[:-1] += row
            nxt[1:] += row
            row = nxt % p

    @given(m=st.integers(0, 5000), k=st.integers(0, 5000), p=st.sampled_from([2, 3, 5, 7]))
    def test_matches_math_comb(self, m, k, p):
        assert lucas_binomial(m, k, p) == math.comb(m, k) % p

    def test_nonzero_iff_digits_dominated(self):
        m = 0b101101
        for k in range(m + 1):
            assert (lucas_binomial(m, k, 2) != 0) == (k & m == k)

    def test_rejects_composite(self):
        with pytest.raises(DomainError, match="not prime"):
            lucas_binomial(4, 2, 6)

    def test_rejects_negative(self):
        with pytest.raises(DomainError, match=">= 0"):
            lucas_binomial(-1, 0, 2)


class TestPExpansion:
    def test_digits_and_support(self):
        exp = p_expansion(45, 3)
        assert exp.digits == (0, 0, 2, 1)
        assert exp.support == frozenset({2, 3})
        assert exp.deltas == (3, 2)
        assert exp.s == 2
        assert exp.leading_digits == (1, 2)
        assert exp.digit(2) == 2
        assert exp.digit(10) == 0

    def test_zero(self):
        exp = p_expansion(0, 2)
        assert exp.digits == ()
        assert exp.s == 0

    @given(m=st.integers(1, 10**9), p=st.sampled_from([2, 3, 5]))
    def test_invariants(self, m, p):
        exp = p_expansion(m, p)
        assert exp.value() == m
        assert exp.deltas[0] == len(exp.digits) - 1
        assert p ** exp.deltas[0] <= m < p ** (exp.deltas[0] + 1)
        assert set(exp.deltas) == exp.support

    def test_negative(self):
        with pytest.raises(DomainError):
            p_expansion(-3, 2)


class TestDensitySets:
    def test_log_log(self):
        assert log_log(2**16, 2) == pytest.approx(4.0)
        with pytest.raises(DomainError, match="M >= 16"):
            log_log(8, 2)

    @pytest.mark.parametrize("t", range(8, 21))
    def test_binary_count_closed_form(self, t):
        # for these t the threshold 0.4 log2 t lies in (1, 2]: two or more nonzero digits
        size, density = density_set(2**t, 0.4, 2)
        assert size == 2**t - 1 - t
        assert density == pytest.approx(1 - (t + 1) / 2**t)

    @pytest.mark.slow
    def test_density_increases_to_one(self):
        densities = [density_set(2**t, 0.4, 2)[1] for t in range(8, 21)]
        assert all(b > a for a, b in zip(densities, densities[1:]))
        assert densities[-1] > 0.99

    def test_membership_agrees_with_count(self):
        M = 3**6
        size, _ = density_set(M, 0.4, 3)
        assert size == sum(in_r(m, M, 0.4, 3) for m in range(M + 1))

    @pytest.mark.parametrize("p,M", [(2, 2**12), (3, 3**7)])
    def test_prime_sets_agree_with_membership(self, p, M):
        ell, eps, eps_prime = 1, 0.45, 0.02
        size_prime, size_double = density_sets_prime(M, ell, eps, eps_prime, p)
        assert size_prime == sum(in_r_prime(m, M, ell, eps, p) for m in range(M + 1))
        assert size_double == sum(
            in_r_double_prime(m, M, eps, eps_prime, p) for m in range(M + 1)
        )
        assert 0 < size_prime <= M + 1

    def test_prime_parameter_ranges(self):
        with pytest.raises(DomainError, match="eps"):
            density_sets_prime(2**10, 1, 0.7, 0.1, 2)
        with pytest.raises(DomainError, match="ell"):
            density_sets_prime(2**10, -1, 0.2, 0.1, 2)

    def test_enumeration_cap(self):
        with pytest.raises(CapacityError, match="cap"):
            density_set(MAX_DENSITY_M, 0.4, 2)

    def test_outside_range_is_not_member(self):
        assert not in_r(2**10 + 1, 2**10, 0.4, 2)
        assert not in_r_prime(-1, 2**10, 1, 0.2, 2)
