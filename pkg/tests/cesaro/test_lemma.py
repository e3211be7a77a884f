from __future__ import annotations

import logging

import numpy as np
import pytest

from group_automata.automaton import AutomatonParams
from group_automata.cesaro import SumSpec
from group_automata.cesaro import build_Rtilde
from group_automata.cesaro import lemma41_diagnostic
from group_automata.cesaro import validate_family
from group_automata.cesaro import validate_rtilde
from group_automata.chains import MarkovKernel
from group_automata.chains import ProductKernel
from group_automata.chains import sample_path
from group_automata.chains.rng import child_seeds
from group_automata.chains.sampler import check_levels
from group_automata.errors import DomainError
from group_automata.errors import HypothesisViolationError
from group_automata.errors import IneligibleError
from group_automata.group import GroupSpec

Z2 = GroupSpec.cyclic(2)
M = 1 << 20


@pytest.fixture
def rule90():
    return AutomatonParams(mu=1, nu=1, spec=Z2)


class TestSumSpec:
    def test_automaton_sums(self, rule90):
        s = SumSpec.automaton(3, rule90)
        assert s.R == (0, 1, 2, 3)
        assert s.coeffs == (1, 1, 1, 1)
        assert s.n_star == 4

    def test_power_of_two_has_two_units(self, rule90):
        s = SumSpec.automaton(4, rule90)
        assert s.r_star == (0, 4)
        assert s.coefficient(2) == 0
        assert s.coefficient(9) == 0

    def test_rejections(self):
        with pytest.raises(DomainError, match="2 indices for 1 coefficients"):
            SumSpec(R=(0, 1), coeffs=(1,), spec=Z2)
        with pytest.raises(DomainError, match="strictly increasing"):
            SumSpec(R=(2, 1), coeffs=(1, 1), spec=Z2)


class TestValidateFamily:
    def test_valid_family(self, rule90):
        sums = [SumSpec.automaton(4, rule90), SumSpec(R=(1, 2), coeffs=(1, 1), spec=Z2)]
        validate_family(sums, [[0, 4], [1, 2]])

    def test_h1(self, rule90):
        sums = [SumSpec.automaton(4, rule90)]
        with pytest.raises(HypothesisViolationError, match="H1") as exc:
            validate_family(sums, [[0, 1]])
        assert exc.value.pair == (0, 1)
        assert exc.value.exit_code == 4

    def test_h2(self, rule90):
        sums = [SumSpec.automaton(4, rule90), SumSpec.automaton(3, rule90)]
        with pytest.raises(HypothesisViolationError, match="H2"):
            validate_family(sums, [[0], [0, 1]])

    def test_h3(self, rule90):
        sums = [SumSpec.automaton(3, rule90), SumSpec(R=(1, 5), coeffs=(1, 1), spec=Z2)]
        with pytest.raises(HypothesisViolationError, match="H3") as exc:
            validate_family(sums, [[0], [1]])
        assert exc.value.condition == "H3"
        assert exc.value.pair == (0, 1)

    def test_length_mismatch(self, rule90):
        with pytest.raises(DomainError, match="index sets"):
            validate_family([SumSpec.automaton(1, rule90)], [[0], [1]])


class TestBuildRtilde:
    def test_single_site_family(self):
        family = build_Rtilde(88, [0], 2, M, eps=0.47, eps_prime=0.02)
        assert family.cut == 2
        assert family.sets[0].tolist() == [0, 8, 16, 24, 64, 72, 80, 88]
        assert family.n_tilde == 8

    def test_two_site_family(self):
        family = build_Rtilde(88, [1, 0], 2, M, eps=0.47, eps_prime=0.02)
        assert family.J == (0, 1)
        assert family.sets[1].tolist() == [k + 1 for k in family.sets[0].tolist()]
        validate_rtilde(88, family.J, family.sets, 2)

    def test_ineligible_names_the_membership(self):
        with pytest.raises(IneligibleError, match=r"R'_M at m\+1") as exc:
            build_Rtilde(84, [0, 1], 2, M, eps=0.47, eps_prime=0.02)
        assert exc.value.m == 84

    def test_parameter_checks(self):
        with pytest.raises(DomainError, match="not prime"):
            build_Rtilde(88, [0], 4, M, eps=0.47, eps_prime=0.02)
        with pytest.raises(DomainError, match="eps < alpha"):
            build_Rtilde(88, [0], 2, M, eps=0.3, eps_prime=0.02, alpha=0.2)
        with pytest.raises(DomainError, match="nonempty"):
            build_Rtilde(88, [], 2, M, eps=0.47, eps_prime=0.02)

    @pytest.mark.parametrize("p", [2, 3])
    def test_random_eligible_families_pass_validation(self, p):
        rng = np.random.default_rng(p)
        found = 0
        for _ in range(20_000):
            m = int(rng.integers(0, M - 2))
            try:
                family = build_Rtilde(m, (0, 1), p, M, eps=0.47, eps_prime=0.02)
            except IneligibleError:
                continue
            validate_rtilde(m, family.J, family.sets, p)
            assert all(len(s) >= family.threshold for s in family.sets.values())
            found += 1
            if found == 100:
                break
        assert found == 100


class TestValidateRtilde:
    def test_h1(self):
        with pytest.raises(HypothesisViolationError, match="H1"):
            validate_rtilde(88, [0], {0: [1]}, 2)

    def test_h2(self):
        with pytest.raises(HypothesisViolationError, match="H2"):
            validate_rtilde(88, [0, 1], {0: [0, 8], 1: [0]}, 2)

    def test_h3(self):
        with pytest.raises(HypothesisViolationError, match="H3"):
            validate_rtilde(88, [0, 1], {0: [0], 1: [8]}, 2)


class TestDiagnostic:
    def test_single_sum(self, rule90):
        kernel = ProductKernel.bernoulli(0.3)
        report = lemma41_diagnostic(SumSpec.automaton(3, rule90), kernel, [], 400, seed=1)
        assert not report.joint
        assert report.n_star == 4
        assert report.cells == 2
        assert report.trials == 400
        assert 0 <= report.deviation <= 0.5
        assert 0 < report.bound <= 1
        assert 0 <= report.miss_fraction <= 1
        assert report.within_bound

    def test_logs_one_summary(self, rule90, caplog):
        kernel = MarkovKernel.sticky(Z2, 0.7)
        with caplog.at_level(logging.INFO):
            lemma41_diagnostic(SumSpec.automaton(5, rule90), kernel, [1], 50, seed=2)
        info = [r.getMessage() for r in caplog.records if r.levelno == logging.INFO]
        assert len(info) == 1
        assert info[0].startswith("Lemma diagnostic")

    def test_miss_fraction_uses_regeneration_times(self, rule90):
        kernel = MarkovKernel.sticky(Z2, 0.7)
        sums = SumSpec.automaton(5, rule90)
        report = lemma41_diagnostic(sums, kernel, [1], 60, seed=2)
        units = set(sums.r_star)
        span = sums.R[-1] + 1 + len(check_levels(kernel)) + 1
        missed = sum(
            not (units & set(sample_path(kernel, [1], span, child).regens.tolist()))
            for child in child_seeds(2, 60)
        )
        assert report.miss_fraction == pytest.approx(missed / 60)

    def test_no_units_is_vacuous(self):
        kernel = ProductKernel.bernoulli(0.3)
        sums = SumSpec(R=(0, 1), coeffs=(2, 4), spec=Z2)
        report = lemma41_diagnostic(sums, kernel, [], 50, seed=2)
        assert report.n_star == 0
        assert report.deviation == pytest.approx(0.5)
        assert report.vacuous
        assert report.within_bound

    def test_joint_family(self, rule90):
        kernel = MarkovKernel.sticky(Z2, 0.7)
        family = build_Rtilde(88, (0, 1), 2, M, eps=0.47, eps_prime=0.02)
        sums = [SumSpec.automaton(88 + j, rule90) for j in family.J]
        report = lemma41_diagnostic(
            sums, kernel, [0], 200, seed=3, family=[family.sets[j].tolist() for j in family.J]
        )
        assert report.joint
        assert report.n_star == 8
        assert report.cells == 4
        assert report.within_bound

    def test_joint_needs_family(self, rule90):
        kernel = ProductKernel.bernoulli(0.3)
        sums = [SumSpec.automaton(1, rule90), SumSpec.automaton(2, rule90)]
        with pytest.raises(DomainError, match="index family"):
            lemma41_diagnostic(sums, kernel, [], 10, seed=0)

    def test_rejections(self, rule90):
        kernel = ProductKernel.bernoulli(0.3)
        with pytest.raises(DomainError, match="at least one sum"):
            lemma41_diagnostic([], kernel, [], 10, seed=0)
        with pytest.raises(DomainError, match="trials"):
            lemma41_diagnostic(SumSpec.automaton(1, rule90), kernel, [], 0, seed=0)
