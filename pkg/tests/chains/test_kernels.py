from __future__ import annotations

import numpy as np
import pytest

from group_automata.chains import MarkovKernel
from group_automata.chains import MixtureKernel
from group_automata.chains import ProductKernel
from group_automata.chains import TailMode
from group_automata.chains import compute_a
from group_automata.chains import eval_kernel
from group_automata.chains import gamma_bound
from group_automata.chains.kernels import Kernel
from group_automata.chains.kernels import a_scalar_enumerated
from group_automata.errors import CapacityError
from group_automata.errors import DomainError
from group_automata.group import GroupSpec

Z2 = GroupSpec.cyclic(2)
Z3 = GroupSpec.cyclic(3)


@pytest.fixture
def markov():
    return MarkovKernel.sticky(Z2, 0.7)


@pytest.fixture
def mixture():
    return MixtureKernel.sticky(Z2, 0.7, rho=0.5, delta0=0.05)


class TestProductKernel:
    def test_bernoulli(self):
        kernel = ProductKernel.bernoulli(0.3)
        assert kernel.conditional([1, 0, 1]).tolist() == pytest.approx([0.7, 0.3])
        assert kernel.memory == 0
        assert kernel.a_scalars(3).tolist() == pytest.approx([0.6, 1.0, 1.0, 1.0, 1.0])

    def test_uniform_has_full_level_minus_one(self):
        kernel = ProductKernel.uniform(Z3)
        assert kernel.a_scalars(0)[0] == 1.0

    @pytest.mark.parametrize(
        "pi,match",
        [
            ([0.5, 0.6], "sums to"),
            ([1.0, 0.0], "strictly positive"),
            ([0.5, 0.25, 0.25], "needs 2 entries"),
            ([1.5, -0.5], "negative"),
        ],
    )
    def test_rejects_bad_laws(self, pi, match):
        with pytest.raises(DomainError, match=match):
            ProductKernel(Z2, pi)


class TestMarkovKernel:
    def test_sticky_rows(self, markov):
        assert markov.rows.tolist() == pytest.approx([[0.7, 0.3], [0.3, 0.7]])
        assert markov.conditional([1]).tolist() == pytest.approx([0.3, 0.7])

    def test_levels(self, markov):
        assert markov.infimum() == pytest.approx(0.3)
        assert markov.a_scalars(2).tolist() == pytest.approx([0.6, 0.6, 1.0, 1.0])
        assert markov.stable_index() == 1

    def test_worst_and_best_tails(self, markov):
        assert markov.conditional([], TailMode.WORST).tolist() == pytest.approx([0.3, 0.3])
        assert markov.conditional([], TailMode.BEST).tolist() == pytest.approx([0.7, 0.7])

    def test_gamma(self, markov):
        assert markov.gamma(0) == pytest.approx(0.7 / 0.3 - 1)
        assert markov.gamma(1) == 0.0
        assert gamma_bound(markov, 2).tolist() == pytest.approx([0.7 / 0.3 - 1, 0.0, 0.0])
        assert markov.gamma_tail(1) == 0.0

    def test_second_order_state_update(self):
        kernel = MarkovKernel.sticky(Z3, 0.5, order=2)
        state = kernel.state_of([2, 1])
        assert state == 2 * 3 + 1
        assert kernel.next_state(state, 0) == kernel.state_of([0, 2])
        assert kernel.a_scalars(2).tolist() == pytest.approx([0.75, 0.75, 1.0, 1.0])

    def test_default_fill_uses_initial_past(self):
        kernel = MarkovKernel(Z2, 1, [[0.9, 0.1], [0.2, 0.8]], initial_past=[1])
        assert kernel.conditional([]).tolist() == pytest.approx([0.2, 0.8])

    def test_rejections(self):
        with pytest.raises(DomainError, match="order must be >= 1"):
            MarkovKernel(Z2, 0, [[1.0]])
        with pytest.raises(DomainError, match="needs shape"):
            MarkovKernel(Z2, 2, [[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(DomainError, match="stay must"):
            MarkovKernel.sticky(Z2, 1.0)
        with pytest.raises(DomainError, match="initial past"):
            MarkovKernel(Z2, 1, [[0.5, 0.5], [0.5, 0.5]], initial_past=[2])


class TestMixtureKernel:
    def test_probability_vectors(self, mixture):
        rng = np.random.default_rng(0)
        for n in (0, 1, 5, 30):
            past = rng.integers(0, 2, size=n).tolist()
            for tail in TailMode:
                vec = mixture.conditional(past, tail)
                assert (vec > 0).all()
            assert mixture.conditional(past).sum() == pytest.approx(1.0)

    def test_worst_below_default_below_best(self, mixture):
        past = [1, 0, 1]
        worst = mixture.conditional(past, TailMode.WORST)
        best = mixture.conditional(past, TailMode.BEST)
        default = mixture.conditional(past)
        assert (worst <= default + 1e-15).all()
        assert (default <= best + 1e-15).all()

    def test_lower_levels_match_worst_conditionals(self, mixture):
        past = [1, 1, 0, 1, 0, 0, 1]
        fast = mixture.lower_levels(past, 10)
        slow = Kernel.lower_levels(mixture, past, 10)
        assert fast == pytest.approx(slow)

    def test_a_scalars_vectorized(self, mixture):
        expected = [mixture.a_scalar(k) for k in range(12)]
        assert mixture.a_scalars(11)[1:].tolist() == pytest.approx(expected)
        assert mixture.memory is None

    @pytest.mark.parametrize("k", range(5))
    def test_a_scalar_against_enumeration(self, mixture, k):
        assert mixture.a_scalar(k) == pytest.approx(a_scalar_enumerated(mixture, k))

    def test_gamma_decays_geometrically(self, mixture):
        assert mixture.gamma(3) == pytest.approx(mixture.gamma(2) / 2)
        assert mixture.gamma_tail(0) == pytest.approx(2 * mixture.gamma(0))

    def test_rejections(self):
        table = [[[0.5, 0.5], [0.5, 0.5]]]
        with pytest.raises(DomainError, match="rho"):
            MixtureKernel(Z2, table, rho=1.0)
        with pytest.raises(DomainError, match="delta0"):
            MixtureKernel(Z2, table, delta0=0.0)
        with pytest.raises(DomainError, match="tables need shape"):
            MixtureKernel(Z2, [[0.5, 0.5]])


class TestHelpers:
    def test_eval_kernel(self, markov):
        assert eval_kernel(markov, Z2.element(1), [Z2.element(0)]) == pytest.approx(0.3)

    def test_compute_a(self, markov):
        per_g, scalar = compute_a(markov, -1)
        assert per_g.tolist() == pytest.approx([0.3, 0.3])
        assert scalar == pytest.approx(0.6)
        per_g, scalar = compute_a(markov, 1, prefix=[0])
        assert per_g.tolist() == pytest.approx([0.7, 0.3])
        assert scalar == 1.0

    def test_compute_a_rejections(self, markov):
        with pytest.raises(DomainError, match="k >= -1"):
            compute_a(markov, -2)
        with pytest.raises(DomainError, match="needs a prefix"):
            compute_a(markov, 2, prefix=[0])

    def test_enumeration_cap(self, markov):
        assert a_scalar_enumerated(markov, 0) == pytest.approx(0.6)
        with pytest.raises(CapacityError, match="exceeds cap"):
            a_scalar_enumerated(markov, 20, cap=1 << 10)
