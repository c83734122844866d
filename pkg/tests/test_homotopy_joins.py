import math
import unittest

import numpy as np
import pytest

from tropical_collapse.errors import BadParameter, InvalidInput
from tropical_collapse.gh_metric import gh_interval
from tropical_collapse.homotopy_joins import (
    CIRCLE_GRAM,
    JoinStratum,
    StarTree,
    join_stratum,
    phi,
    phi_path,
    psi,
    psi_path,
)
from tropical_collapse.lattice_torus import rescale_torus
from tropical_collapse.metric_graph import (
    circle,
    contract,
    diameter,
    dumbbell,
    isomorphic,
    rescale,
    segment,
    theta,
)
from tropical_collapse.models import FlatTorus
from tests.factories import genus_two_graphs, hexagonal, make_graph


class StarTreeTests(unittest.TestCase):
    def test_legs_are_sorted(self):
        star = StarTree((3.0, 1.0, 2.0))
        self.assertEqual(star.legs, (1.0, 2.0, 3.0))
        self.assertEqual(star.m, 3)
        np.testing.assert_allclose(star.simplex_coordinates(), [1 / 6, 2 / 6, 3 / 6])

    def test_graph(self):
        graph = StarTree((1.0, 2.0)).to_graph()
        self.assertAlmostEqual(diameter(graph), 3.0)
        self.assertEqual(len(graph.edges), 2)

    def test_rejects_degenerate_stars(self):
        with self.assertRaises(BadParameter):
            StarTree((1.0,))
        with self.assertRaises(BadParameter):
            StarTree((0.0, 1.0))


class PhiTests(unittest.TestCase):
    def test_endpoints(self):
        for name, graph in genus_two_graphs().items():
            with self.subTest(name=name):
                self.assertIs(phi(graph, 0.0), graph)
                self.assertTrue(isomorphic(phi(graph, 1.0), segment(), respect_lengths=True))

    def test_circle_grows_two_leaves(self):
        grown = phi(circle(2.0), 1 / 3)
        expected = make_graph([("v", "v", 0.5), ("v", "a", 0.5), ("v", "b", 0.5)])
        self.assertTrue(isomorphic(grown, expected, respect_lengths=True, tol=1e-9))

    def test_every_stage_has_unit_diameter(self):
        graph = rescale(dumbbell(0.4, 0.3, 0.6))
        for t, stage in phi_path(graph, [0.1, 0.3, 0.5, 0.66, 0.7, 0.9]):
            with self.subTest(t=t):
                self.assertAlmostEqual(diameter(stage), 1.0, places=9)

    def test_shrinking_meets_the_star(self):
        graph = theta()
        star = phi(graph, 2 / 3)
        self.assertEqual(len(star.edges), 6)
        self.assertTrue(
            isomorphic(star, rescale(StarTree((1.0,) * 6).to_graph()), respect_lengths=True)
        )
        almost = phi(graph, 2 / 3 - 1e-9)
        collapsed = rescale(contract(almost, graph.edge_ids))
        self.assertTrue(isomorphic(collapsed, star, respect_lengths=True, tol=1e-6))

    def test_growth_meets_shrinking(self):
        graph = rescale(dumbbell(0.4, 0.3, 0.6))
        before = phi(graph, 1 / 3 - 1e-12)
        after = phi(graph, 1 / 3 + 1e-12)
        self.assertTrue(isomorphic(before, after, respect_lengths=True, tol=1e-9))

    def test_straightening_keeps_two_legs(self):
        late = phi(theta(), 0.99)
        self.assertEqual(len(late.edges), 6)
        self.assertAlmostEqual(diameter(late), 1.0, places=9)

    def test_rejects_bad_input(self):
        with self.assertRaises(BadParameter):
            phi(theta(), 1.5)
        with self.assertRaises(BadParameter):
            phi(theta(), -0.1)
        with self.assertRaises(BadParameter):
            phi(theta(2, 2, 2), 0.5)

    @pytest.mark.slow
    def test_sampled_continuity(self):
        delta = 1e-2
        for name, graph in genus_two_graphs().items():
            for t in (0.2, 0.5, 0.8):
                interval = gh_interval(
                    phi(graph, t), phi(graph, t + delta), spacing=0.05, budget=5000, seed=0
                )
                with self.subTest(name=name, t=t):
                    self.assertLessEqual(interval.ub, 10 * delta + interval.mesh_a + interval.mesh_b)


class PsiTests(unittest.TestCase):
    def setUp(self):
        self.circle = FlatTorus.from_matrix([[4.0]])

    def test_endpoints(self):
        self.assertIs(psi(self.circle, 0.0), self.circle)
        square = rescale_torus(FlatTorus.from_matrix(np.eye(2)), "diameter", tol=1e-6)
        self.assertEqual(psi(square, 1.0), FlatTorus.from_matrix(CIRCLE_GRAM))

    def test_half_way_on_the_circle(self):
        torus = psi(self.circle, 0.5)
        self.assertEqual(torus.dim, 2)
        scale = 4.0 / (1.0 + math.pi**2)
        np.testing.assert_allclose(torus.matrix, np.diag([scale, math.pi**2 * scale]), rtol=5e-3)

    def test_path_adds_one_dimension(self):
        square = rescale_torus(FlatTorus.from_matrix(np.eye(2)), "diameter", tol=1e-6)
        dims = [torus.dim for _, torus in psi_path(square, [0.0, 0.3, 0.7, 1.0])]
        self.assertEqual(dims, [2, 3, 3, 1])

    def test_rejects_bad_input(self):
        with self.assertRaises(BadParameter):
            psi(self.circle, 1.2)
        with self.assertRaises(BadParameter):
            psi(FlatTorus.from_matrix([[1.0]]), 0.5)

    @pytest.mark.slow
    def test_sampled_continuity(self):
        delta = 1e-2
        tori = [
            self.circle,
            rescale_torus(FlatTorus.from_matrix(np.eye(2)), "diameter", tol=1e-6),
            rescale_torus(hexagonal(), "diameter", tol=1e-6),
        ]
        for torus in tori:
            for s in (0.25, 0.75):
                interval = gh_interval(
                    psi(torus, s), psi(torus, s + delta), spacing=0.1, budget=5000, seed=0
                )
                with self.subTest(dim=torus.dim, s=s):
                    self.assertLessEqual(interval.ub, 10 * delta + interval.mesh_a + interval.mesh_b)


class JoinStratumTests(unittest.TestCase):
    def test_curves(self):
        self.assertEqual(join_stratum(dumbbell()), JoinStratum("curves", 2))
        self.assertEqual(join_stratum(circle()), JoinStratum("curves", 1))
        self.assertEqual(join_stratum(segment()).genus, 2)

    def test_tori(self):
        self.assertEqual(join_stratum(FlatTorus.from_matrix(np.eye(3))), JoinStratum("av", 3))
        self.assertEqual(join_stratum(FlatTorus.from_matrix([[4.0]])).to_dict(), {"family": "av", "genus": 1})

    def test_unknown_point(self):
        with self.assertRaises(InvalidInput):
            join_stratum("circle")


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
