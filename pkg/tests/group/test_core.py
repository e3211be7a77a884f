from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from group_automata.errors import DomainError
from group_automata.errors import StructuralError
from group_automata.group import GroupElement
from group_automata.group import GroupSpec
from group_automata.group import add
from group_automata.group import is_unit_scalar
from group_automata.group import scalar_mul

Z2 = GroupSpec.cyclic(2)
Z4 = GroupSpec.cyclic(2, 2)
Z2xZ2 = GroupSpec(p=2, exponents=(1, 1))
Z2xZ4 = GroupSpec(p=2, exponents=(1, 2))
Z9 = GroupSpec.cyclic(3, 2)

SPECS = [Z2, Z4, Z2xZ2, Z2xZ4, GroupSpec.cyclic(3), Z9]


def elements_of(spec: GroupSpec) -> st.SearchStrategy[GroupElement]:
    return st.integers(0, spec.q - 1).map(spec.from_code)


class TestGroupSpec:
    def test_orders(self):
        assert Z2xZ4.q == 8
        assert Z2xZ4.r == 2
        assert Z2xZ4.exponent_modulus == 4
        assert Z9.q == 9
        assert str(Z2xZ4) == "Z_2 x Z_4"

    def test_rejects_composite_p(self):
        with pytest.raises(DomainError, match="not prime"):
            GroupSpec(p=4, exponents=(1,))

    def test_rejects_bad_exponents(self):
        with pytest.raises(DomainError, match="exponents"):
            GroupSpec(p=2, exponents=(0,))
        with pytest.raises(DomainError, match="at least one"):
            GroupSpec(p=2, exponents=())

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_enumeration_total_and_duplicate_free(self, spec):
        elems = list(spec.elements())
        assert len(elems) == spec.q
        assert len(set(elems)) == spec.q
        assert [spec.code(g) for g in elems] == list(range(spec.q))

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_code_round_trip_through_tables(self, spec):
        codes = np.arange(spec.q)
        assert (spec.encode(spec.coords_table) == codes).all()

    def test_from_code_out_of_range(self):
        with pytest.raises(DomainError, match="outside"):
            Z4.from_code(4)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_tables_match_elementwise_arithmetic(self, spec):
        for a in spec.elements():
            for b in spec.elements():
                got = spec.add_table[spec.code(a), spec.code(b)]
                assert spec.from_code(int(got)) == add(a, b, spec)
            minus_a = spec.from_code(int(spec.neg_table[spec.code(a)]))
            assert add(a, minus_a, spec) == spec.zero
            for n in range(spec.exponent_modulus):
                got = spec.mul_table[n, spec.code(a)]
                assert spec.from_code(int(got)) == scalar_mul(n, a, spec)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_characters_are_orthogonal(self, spec):
        chi = spec.character_table
        assert np.allclose(chi @ chi.conj().T, spec.q * np.eye(spec.q))

    def test_uniform_measure(self):
        assert np.allclose(Z2xZ4.uniform_measure(), 1 / 8)


class TestArithmetic:
    def test_modular_addition(self):
        assert add(Z4.element(3), Z4.element(2), Z4) == Z4.element(1)

    def test_coordinatewise_addition(self):
        assert add(Z2xZ2.element(1, 0), Z2xZ2.element(1, 1), Z2xZ2) == Z2xZ2.element(0, 1)

    def test_identity(self):
        g = Z2xZ4.element(1, 3)
        assert add(g, Z2xZ4.zero, Z2xZ4) == g

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError, match="coordinates"):
            add(Z4.element(1), Z2xZ2.element(1, 0), Z4)

    def test_coordinate_out_of_range(self):
        with pytest.raises(DomainError, match="outside"):
            add(GroupElement((5,)), Z4.element(1), Z4)

    def test_scalar_mul_is_repeated_addition(self):
        g = Z2xZ4.element(1, 3)
        total = Z2xZ4.zero
        for n in range(10):
            assert scalar_mul(n, g, Z2xZ4) == total
            total = add(total, g, Z2xZ4)

    def test_exponent_kills_everything(self):
        for g in Z2xZ4.elements():
            assert scalar_mul(4, g, Z2xZ4) == Z2xZ4.zero

    @pytest.mark.parametrize(
        "a,spec,expected",
        [(1, Z2, True), (2, Z4, False), (3, Z4, True), (3, Z9, False), (4, Z9, True)],
    )
    def test_is_unit_scalar(self, a, spec, expected):
        assert is_unit_scalar(a, spec) is expected

    @pytest.mark.parametrize("spec", [Z4, Z9])
    def test_unit_scalars_are_bijections(self, spec):
        for a in range(1, spec.exponent_modulus):
            image = set(spec.mul_table[a].tolist())
            assert (len(image) == spec.q) is is_unit_scalar(a, spec)


@given(a=elements_of(Z2xZ4), b=elements_of(Z2xZ4), c=elements_of(Z2xZ4))
def test_addition_is_an_abelian_group_law(a, b, c):
    assert add(a, b, Z2xZ4) == add(b, a, Z2xZ4)
    assert add(add(a, b, Z2xZ4), c, Z2xZ4) == add(a, add(b, c, Z2xZ4), Z2xZ4)
    minus_a = Z2xZ4.from_code(int(Z2xZ4.neg_table[Z2xZ4.code(a)]))
    assert add(a, minus_a, Z2xZ4) == Z2xZ4.zero


@given(n=st.integers(0, 100), m=st.integers(0, 100), g=elements_of(Z9))
def test_scalar_mul_distributes(n, m, g):
    assert scalar_mul(n + m, g, Z9) == add(scalar_mul(n, g, Z9), scalar_mul(m, g, Z9), Z9)
