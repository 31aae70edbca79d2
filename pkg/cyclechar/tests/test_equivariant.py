import unittest
from fractions import Fraction

from cyclechar.cycles import character, connection_variation_chain, verify_theorem_one
from cyclechar.cyclic import compare, is_bb_cocycle
from cyclechar.equivariant import (EquivariantBundle, VolumeFlowData, chi_character, chi_direct, crossed_cycle,
                                   crossed_sample, flow_cycle, gv_cobordism, gv_flow_cycles, linear_action,
                                   quillen_cocycle, quillen_collapse, rotation_action, scalar_algebra, scalar_crossed,
                                   verify_connection_change, verify_gv_direct, verify_gv_relations,
                                   verify_prop_flow_equality)
from cyclechar.errors import ConventionError
from cyclechar.graded import TorusForms

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


class TestActions(unittest.TestCase):
    def test_order_is_checked(self):
        with self.assertRaises(ConventionError):
            rotation_action(1, 3, [QUARTER])

    def test_linear_map_composes(self):
        action = linear_action([[2, 1], [1, 1]])
        m = action.map_for((2,))
        self.assertEqual(m.A, ((5, 3), (3, 2)))
        self.assertTrue(action.map_for((1,)).compose(action.map_for((-1,))).is_identity())


class TestCrossedCycle(unittest.TestCase):
    def setUp(self):
        self.action = rotation_action(1, 4, [QUARTER])
        self.forms = TorusForms(1, 1, "exact")
        crossed = scalar_crossed(self.action)
        self.algebra = scalar_algebra(crossed, crossed_sample(crossed, 1, [(0,), (1,)]))
        self.bundle = EquivariantBundle(self.action, self.forms.term((1,), (0,), HALF))

    def test_bundle_relations(self):
        self.assertEqual(self.bundle.check_cocycle(), 0.0)
        self.assertEqual(self.bundle.check_relations(), 0.0)

    def test_character_is_a_cocycle(self):
        chi = chi_character(self.bundle, self.algebra)
        self.assertEqual(chi.degree, 1)
        self.assertTrue(is_bb_cocycle(chi).passed)

    def test_direct_formula(self):
        self.assertTrue(compare(chi_direct(self.bundle, self.algebra), chi_character(self.bundle, self.algebra)).passed)

    def test_connection_change(self):
        other = self.forms.term((0,), (0,), 1)
        self.assertTrue(verify_connection_change(self.bundle, other, self.algebra).passed)

    def test_variation_chain(self):
        C = crossed_cycle(self.bundle, self.algebra)
        eta = C.omega.elem(self.forms.term((-1,), (0,), HALF))
        self.assertTrue(verify_theorem_one(connection_variation_chain(C, eta)).passed)

    def test_bad_connection_degree(self):
        with self.assertRaises(ConventionError):
            EquivariantBundle(self.action, self.forms.one())


class TestQuillen(unittest.TestCase):
    def setUp(self):
        forms = TorusForms(2, 1, "exact")
        connection = forms.term((1, 0), (1,), HALF) + forms.term((0, 1), (0,), 1)
        self.bundle = EquivariantBundle(rotation_action(2, 1, [0, 0]), connection, name="trivial")

    def test_collapse(self):
        ch = quillen_cocycle(self.bundle)
        self.assertTrue(compare(ch, quillen_collapse(self.bundle)).passed)

    def test_needs_trivial_group(self):
        forms = TorusForms(1, 1, "exact")
        bundle = EquivariantBundle(rotation_action(1, 2, [HALF]), forms.term((1,), (0,), 1))
        with self.assertRaises(ConventionError):
            quillen_cocycle(bundle)


class TestVolumeFlow(unittest.TestCase):
    def setUp(self):
        self.data = VolumeFlowData(rotation_action(1, 4, [QUARTER]), {(1,): HALF, (-1,): HALF}, name="circle")
        self.algebra = self.data.sample(1, [(0,), (1,)])

    def test_mu(self):
        self.assertEqual(self.data.check_mu(word_length=2), {"cocycle": 0.0, "telescoping": 0.0, "dlog": 0.0})

    def test_relations(self):
        report = verify_gv_relations(self.data, self.algebra)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.reports), 2 * (self.data.n + 1) + 1)

    def test_direct_formulas(self):
        self.assertTrue(verify_gv_direct(self.data, self.algebra).passed)

    def test_flow_equals_volume_bundle(self):
        self.assertTrue(verify_prop_flow_equality(self.data, self.algebra).passed)

    def test_cobordism(self):
        chain = gv_cobordism(self.data, 1, self.algebra)
        self.assertTrue(verify_theorem_one(chain).passed)

    def test_cobordism_at_zero_is_the_zero_chain(self):
        chain = gv_cobordism(self.data, 0, self.algebra)
        self.assertTrue(chain.is_zero)
        self.assertEqual(chain.degree, self.data.n + 1)
        zero = character(gv_cobordism(self.data, 1, self.algebra)).scale(0)
        self.assertTrue(compare(character(chain), zero).passed)
        self.assertTrue(verify_theorem_one(chain).passed)

    def test_character_of_flow_is_a_cocycle(self):
        self.assertTrue(is_bb_cocycle(character(flow_cycle(self.data, HALF, self.algebra))).passed)

    def test_flow_cycles_pair_with_character(self):
        C, ch = gv_flow_cycles(self.data, HALF, self.algebra)
        self.assertTrue(compare(ch, character(C)).passed)
        self.assertTrue(is_bb_cocycle(ch).passed)


if __name__ == "__main__":
    unittest.main()
