from fractions import Fraction
from math import comb, factorial

import pytest
import sympy

from momentinv.gaussian import I
from momentinv.poly import Polynomial, moment, template
from momentinv.sl2 import (
    TemplateVariableError,
    apply_derivation,
    basis_variables,
    check_commutators,
    closed_form_multiplicities,
    compose,
    decompose,
    in_span,
    laplace_eigenbasis,
    laplace_eigenvalue,
    lowest_weight_sign,
    lowest_weight_vectors,
    module_dimension,
    normalize_orders,
    standard_basis,
)
from reference_values import C, LAPLACE_ORDER2, ORDER3_LOWEST, P, V_BASIS
from momentinv.invariants import eigenvector_realization
from momentinv.poly import poly_proportional


def var(j, k, l):
    return Polynomial.var(moment(j, k, l))


class TestDerivations:
    def test_examples(self):
        assert apply_derivation("E1", var(2, 0, 0)) == var(1, 1, 0).scale(-2)
        assert apply_derivation("E1", P("a_0_0_2 + a_0_2_0 + a_2_0_0")).is_zero()
        assert apply_derivation("Laplace", var(0, 1, 1)) == var(0, 1, 1).scale(12)
        assert apply_derivation("H", var(0, 0, 2)) == var(0, 1, 1).scale(4 * I)

    def test_template_variables_rejected(self):
        with pytest.raises(TemplateVariableError):
            apply_derivation("E1", Polynomial.var(template("e", 1)))

    def test_leibniz_extension(self):
        p, q = var(2, 0, 0), var(0, 1, 1)
        for name in ("E1", "E2", "E3", "Dplus", "Dminus", "H"):
            lhs = apply_derivation(name, p * q)
            assert lhs == apply_derivation(name, p) * q + p * apply_derivation(name, q)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_generators_match_vector_fields_on_ternary_forms(self, d):
        """The coefficient action equals rotating the generic ternary form of degree d."""
        x, y, z = sympy.symbols("x y z")
        triples = [(j, k, d - j - k) for j in range(d + 1) for k in range(d + 1 - j)]
        syms = {t: sympy.Symbol("a_%d_%d_%d" % t) for t in triples}
        multinomial = {t: factorial(d) // (factorial(t[0]) * factorial(t[1]) * factorial(t[2])) for t in triples}
        form = sum(multinomial[t] * syms[t] * x ** t[0] * y ** t[1] * z ** t[2] for t in triples)
        fields = {
            "E1": lambda f: y * sympy.diff(f, x) - x * sympy.diff(f, y),
            "E2": lambda f: z * sympy.diff(f, x) - x * sympy.diff(f, z),
            "E3": lambda f: z * sympy.diff(f, y) - y * sympy.diff(f, z),
        }
        for name, field in fields.items():
            image = sympy.Poly(sympy.expand(field(form)), x, y, z)
            for t in triples:
                coeff = sympy.expand(image.coeff_monomial(x ** t[0] * y ** t[1] * z ** t[2]) / multinomial[t])
                ours = apply_derivation(name, var(*t))
                as_sympy = sum((int(c.re) * syms[mono[0][0].index] for mono, c in ours.items()), sympy.Integer(0))
                assert sympy.expand(coeff - as_sympy) == 0, (name, t)

    @pytest.mark.parametrize("orders", [(2,), (2, 3), (2, 3, 4)])
    def test_operator_identities_on_basis(self, orders):
        for v in basis_variables(orders):
            p = Polynomial.var(v)
            e1, e2, e3 = (apply_derivation(n, p) for n in ("E1", "E2", "E3"))
            assert apply_derivation("Dplus", p) == e1.scale(I) + e2
            assert apply_derivation("Dminus", p) == e1.scale(I) - e2
            assert apply_derivation("H", p) == e3.scale(2 * I)
            casimir = compose("Dplus", "Dminus")(p) + compose("Dminus", "Dplus")(p) + compose("H", "H")(p).scale(Fraction(1, 2))
            assert apply_derivation("Laplace", p) == casimir
            e_sum = compose("E1", "E1")(p) + compose("E2", "E2")(p) + compose("E3", "E3")(p)
            assert apply_derivation("Laplace", p) == e_sum.scale(-2)

    def test_laplace_is_not_the_plain_sum_of_squares(self):
        p = var(0, 1, 1)
        e_sum = compose("E1", "E1")(p) + compose("E2", "E2")(p) + compose("E3", "E3")(p)
        assert e_sum == p.scale(-6)
        assert apply_derivation("Laplace", p) == p.scale(12)


class TestCommutators:
    @pytest.mark.parametrize("orders", [(2,), (2, 3), (2, 3, 4)])
    def test_all_relations_pass(self, orders):
        report = check_commutators(orders)
        assert report.passed, [r for r in report.results if not r.passed]
        names = {r.name for r in report.results}
        assert {"[H,Dplus]=2Dplus", "[H,Dminus]=-2Dminus", "[Dplus,Dminus]=H"} <= names

    def test_so3_sign_is_fixed(self):
        assert check_commutators((2,)).so3_sign == 1


class TestLowestWeight:
    def test_sign_convention(self):
        assert lowest_weight_sign() == -1
        v0 = V_BASIS[0]
        assert apply_derivation("H", v0) == v0.scale(-4)

    def test_order2(self):
        assert lowest_weight_vectors((2,), 0) == [P("a_0_0_2 + a_0_2_0 + a_2_0_0")]
        (z,) = lowest_weight_vectors((2,), 4)
        assert poly_proportional(z, V_BASIS[0]) is not None
        assert z.leading_coefficient() == 1

    def test_order3_realization(self):
        for s, expected in ORDER3_LOWEST.items():
            (z,) = lowest_weight_vectors((2, 3), s)
            assert poly_proportional(z, expected) is not None, s

    def test_missing_module_gives_empty(self):
        assert lowest_weight_vectors((2,), 2) == []

    def test_normalize_orders(self):
        assert normalize_orders([3, 2, 3]) == (2, 3)
        for bad in ([], [1], [0, 2]):
            with pytest.raises(ValueError):
                normalize_orders(bad)


class TestStandardBasis:
    def test_reproduces_reference_basis(self):
        assert standard_basis(V_BASIS[0], 4) == V_BASIS

    def test_trivial_module(self):
        z = P("a_0_0_2 + a_0_2_0 + a_2_0_0")
        assert standard_basis(z, 0) == [z]

    def test_rejects_wrong_order(self):
        with pytest.raises(ValueError, match="not a lowest weight vector of order 2"):
            standard_basis(V_BASIS[0], 2)

    @pytest.mark.parametrize("orders", [(2,), (2, 3), (2, 3, 4)])
    def test_standard_module_action(self, orders):
        for s, (_, vecs) in decompose(orders).entries.items():
            for z in vecs:
                basis = standard_basis(z, s)
                for k, vk in enumerate(basis):
                    down = basis[k - 1].scale(k) if k else Polynomial()
                    up = basis[k + 1].scale(s - k) if k < s else Polynomial()
                    assert apply_derivation("Dminus", vk) == down
                    assert apply_derivation("Dplus", vk) == up


class TestDecomposition:
    @pytest.mark.parametrize(
        "orders,expected",
        [((2,), {0: 1, 4: 1}), ((2, 3), {0: 1, 2: 1, 4: 1, 6: 1}), ((2, 3, 4), {0: 2, 2: 1, 4: 2, 6: 1, 8: 1})],
    )
    def test_examples(self, orders, expected):
        assert decompose(orders).multiplicities() == expected

    def test_describe(self):
        assert decompose((2, 3, 4)).describe() == "V0 x2, V2 x1, V4 x2, V6 x1, V8 x1"

    def test_odd_single_order(self):
        assert decompose((3,)).multiplicities() == {2: 1, 6: 1}

    @pytest.mark.parametrize("d", range(2, 9))
    def test_closed_form_up_to_8(self, d):
        dec = decompose(range(2, d + 1))
        assert dec.multiplicities() == closed_form_multiplicities(d)
        assert dec.dimension() == module_dimension(range(2, d + 1)) == sum(comb(k + 2, 2) for k in range(2, d + 1))

    def test_closed_form_values(self):
        assert closed_form_multiplicities(4) == {0: 2, 2: 1, 4: 2, 6: 1, 8: 1}


class TestLaplace:
    def test_eigenvalues(self):
        assert [laplace_eigenvalue(s) for s in (0, 2, 4, 6)] == [0, 4, 12, 24]

    def test_order2_eigenspaces(self):
        eig = laplace_eigenbasis((2,))
        assert {k: len(v) for k, v in eig.items()} == {0: 1, 12: 5}
        assert eig[0] == [LAPLACE_ORDER2["e0"]]
        for name in ("e1", "e2", "e3", "e4", "e5"):
            assert in_span(LAPLACE_ORDER2[name], eig[12])

    def test_order3_eigenspaces(self):
        eig = laplace_eigenbasis((3,))
        assert {k: len(v) for k, v in eig.items()} == {4: 3, 24: 7}
        assert apply_derivation("Laplace", var(1, 1, 1)) == var(1, 1, 1).scale(24)
        real = eigenvector_realization().map
        for v, p in real.items():
            if v.name == "c":
                assert in_span(p, eig[4]), v
            elif v.name == "b":
                assert in_span(p, eig[24]), v

    @pytest.mark.parametrize("orders", [(2,), (3,), (2, 3), (2, 3, 4)])
    def test_dimensions_match_decomposition(self, orders):
        expected: dict = {}
        for s, m in decompose(orders).multiplicities().items():
            lam = laplace_eigenvalue(s)
            expected[lam] = expected.get(lam, 0) + m * (s + 1)
        assert {k: len(v) for k, v in laplace_eigenbasis(orders).items()} == expected

    def test_eigenvectors_are_eigenvectors(self):
        for lam, vecs in laplace_eigenbasis((2, 3)).items():
            for v in vecs:
                assert apply_derivation("Laplace", v) == v.scale(lam)
                assert v.leading_coefficient() == 1
