from __future__ import annotations

import numpy as np
import pytest

from group_automata.chains import MarkovKernel
from group_automata.chains import MixtureKernel
from group_automata.chains import ProductKernel
from group_automata.chains import build_layout
from group_automata.chains.layout import locate
from group_automata.errors import DomainError
from group_automata.errors import KernelInconsistencyError
from group_automata.group import GroupSpec

Z2 = GroupSpec.cyclic(2)


class DecreasingKernel(ProductKernel):
    def lower_levels(self, past, K):
        return np.stack([self.pi * (1.0 - 0.1 * k) for k in range(K + 1)])


@pytest.fixture
def markov():
    return MarkovKernel.sticky(Z2, 0.7)


class TestBuildLayout:
    def test_markov_layout(self, markov):
        layout = build_layout(markov, [0], 1)
        assert layout.lengths.tolist() == pytest.approx([[0.3, 0.3], [0.0, 0.0], [0.4, 0.0]])
        assert layout.covered == pytest.approx(1.0)
        assert layout.level_mass(-1) == pytest.approx(0.6)
        assert layout.interval(1, 0) == pytest.approx((0.6, 1.0))

    def test_boundaries_go_right(self, markov):
        layout = build_layout(markov, [0], 1)
        edges = layout.boundaries
        assert layout.locate(0.0) == (0, -1)
        assert layout.locate(float(edges[0])) == (1, -1)
        assert layout.locate(float(edges[1])) == (0, 1)
        assert layout.locate(0.95) == (0, 1)

    def test_level_masses_sum_to_a_scalars(self):
        kernel = MixtureKernel.sticky(Z2, 0.8)
        layout = build_layout(kernel, [1, 0, 0, 1], 8)
        for k in range(-1, 8):
            mass = sum(layout.level_mass(j) for j in range(-1, k + 1))
            assert mass >= layout.a_seq[k + 1] - 1e-12

    def test_negative_truncation(self, markov):
        with pytest.raises(DomainError, match="truncation K"):
            build_layout(markov, [0], -1)

    def test_inconsistent_kernel(self):
        kernel = DecreasingKernel(Z2, [0.5, 0.5])
        with pytest.raises(KernelInconsistencyError, match="< 0"):
            build_layout(kernel, [], 3)


class TestLocate:
    def test_finite_memory(self, markov):
        g, k, K = locate(markov, [1], 0.5)
        assert (g, k) == (1, -1)
        assert K == 16

    def test_escalates_until_covered(self, caplog):
        kernel = MixtureKernel.sticky(Z2, 0.7, rho=0.9, delta0=0.01)
        layout = build_layout(kernel, [0] * 16, 16)
        u = (layout.covered + 1.0) / 2
        with caplog.at_level("DEBUG", logger="group_automata.chains.layout"):
            g, k, K = locate(kernel, [0] * 40, u)
        assert K > 16
        assert k >= 16
        assert "Escalating layout truncation" in caplog.text
