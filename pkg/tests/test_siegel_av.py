import math
import unittest

import numpy as np
import pytest

from tropical_collapse.config import Config
from tropical_collapse.errors import (
    InadmissibleOrdering,
    InvalidInput,
    MixedGrowth,
    NoConvergence,
    NotDegenerate,
    NotModelForm,
    NotPositiveDefinite,
    NotUpperHalfPlane,
    TooLarge,
)
from tropical_collapse.lattice_torus import covering_radius, lattice_isometric, rescale_torus
from tropical_collapse.models import FlatTorus
from tropical_collapse.siegel_av import (
    PeriodPoint,
    SiegelFamily,
    act,
    detect_rank,
    diameter_fixed_limit,
    family_for_torus,
    in_siegel_set,
    in_w,
    injrad_fixed_limit,
    is_symplectic,
    jacobi_decompose,
    reduce_g1,
    semi_reduce,
    torus_metric_matrix,
    volume_fixed_limit,
)
from tests.factories import family, hexagonal, random_gram, random_symplectic


class PeriodPointTests(unittest.TestCase):
    def test_requires_positive_imaginary_part(self):
        with self.assertRaises(NotUpperHalfPlane):
            PeriodPoint.from_tau(1 - 1j)
        with self.assertRaises(NotPositiveDefinite):
            PeriodPoint.from_matrices([[0.0]], [[-2.0]])

    def test_from_dict_accepts_tau(self):
        self.assertEqual(PeriodPoint.from_dict({"tau": [0.5, 2.0]}).tau, complex(0.5, 2.0))
        self.assertEqual(PeriodPoint.from_dict({"tau": "0.5 + 2j"}).tau, complex(0.5, 2.0))
        with self.assertRaises(InvalidInput):
            PeriodPoint.from_dict({"X": [[0.0]]})

    def test_shape_mismatch(self):
        with self.assertRaises(InvalidInput):
            PeriodPoint.from_matrices(np.zeros((2, 2)), [[1.0]])


class JacobiTests(unittest.TestCase):
    def test_known_values(self):
        jac = jacobi_decompose(np.eye(3))
        np.testing.assert_allclose(jac.B, np.eye(3))
        np.testing.assert_allclose(jac.d, np.ones(3))

        jac = jacobi_decompose(np.array([[2.0, 1.0], [1.0, 1.0]]))
        np.testing.assert_allclose(jac.d, [2.0, 0.5])
        self.assertAlmostEqual(jac.B[0, 1], 0.5)

        jac = jacobi_decompose(np.diag([3.0, 7.0]))
        np.testing.assert_allclose(jac.B, np.eye(2))
        np.testing.assert_allclose(jac.d, [3.0, 7.0])

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            y = random_gram(rng, n)
            jac = jacobi_decompose(y)
            self.assertLess(np.max(np.abs(jac.reconstruct() - y)), 1e-9)
            np.testing.assert_allclose(np.diag(jac.B), 1.0)
            self.assertTrue(np.all(np.tril(jac.B, -1) == 0))

    @pytest.mark.slow
    def test_round_trip_at_scale(self):
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(1000):
            y = random_gram(rng, int(rng.integers(1, 5)))
            worst = max(worst, float(np.max(np.abs(jacobi_decompose(y).reconstruct() - y))))
        self.assertLess(worst, 1e-9)


class TorusMetricTests(unittest.TestCase):
    def test_untwisted_blocks(self):
        y = np.array([[2.0, 0.5], [0.5, 1.0]])
        gram = torus_metric_matrix(PeriodPoint.from_matrices(np.zeros((2, 2)), y)).matrix
        np.testing.assert_allclose(gram[:2, :2], np.linalg.inv(y))
        np.testing.assert_allclose(gram[2:, 2:], y)
        np.testing.assert_allclose(gram[:2, 2:], 0.0)

    def test_genus_one(self):
        gram = torus_metric_matrix(PeriodPoint.from_tau(complex(0.3, 2.0))).matrix
        np.testing.assert_allclose(gram, [[0.5, 0.15], [0.15, 0.09 / 2.0 + 2.0]])

    def test_symplectic_change_is_an_isometry(self):
        rng = np.random.default_rng(4)
        points = [
            PeriodPoint.from_tau(complex(0.2, 1.3)),
            PeriodPoint.from_matrices([[0.1, 0.3], [0.3, -0.2]], [[1.5, 0.4], [0.4, 2.0]]),
        ]
        for z in points:
            gamma = random_symplectic(rng, z.g)
            with self.subTest(g=z.g):
                self.assertTrue(is_symplectic(gamma))
                same, _ = lattice_isometric(
                    torus_metric_matrix(z), torus_metric_matrix(act(gamma, z)), tol=1e-6
                )
                self.assertTrue(same)

    @pytest.mark.slow
    def test_symplectic_invariance_at_scale(self):
        rng = np.random.default_rng(6)
        for k in range(50):
            g = 1 + k % 2
            if g == 1:
                z = PeriodPoint.from_tau(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.0)))
            else:
                x = rng.uniform(-0.5, 0.5, size=(2, 2))
                z = PeriodPoint.from_matrices((x + x.T) / 2.0, random_gram(rng, 2))
            gamma = random_symplectic(rng, g)
            with self.subTest(k=k, g=g):
                self.assertTrue(is_symplectic(gamma))
                same, _ = lattice_isometric(
                    torus_metric_matrix(z), torus_metric_matrix(act(gamma, z)), tol=1e-6
                )
                self.assertTrue(same)


class SiegelSetTests(unittest.TestCase):
    def test_known_values(self):
        self.assertTrue(in_siegel_set(PeriodPoint.from_tau(1j), 2.0))
        self.assertFalse(in_siegel_set(PeriodPoint.from_tau(0.1j), 2.0))
        z = PeriodPoint.from_matrices(np.zeros((2, 2)), np.diag([1.0, 3.0]))
        self.assertTrue(in_siegel_set(z, 2.0))

    def test_large_real_part(self):
        self.assertFalse(in_siegel_set(PeriodPoint.from_tau(complex(5.0, 1.0)), 2.0))

    def test_default_u_comes_from_config(self):
        z = PeriodPoint.from_tau(0.4j)
        self.assertTrue(in_siegel_set(z, config=Config(u=3.0)))
        self.assertFalse(in_siegel_set(z, config=Config(u=2.0)))


class ReductionTests(unittest.TestCase):
    def test_genus_one_known_values(self):
        tau, gamma = reduce_g1(5 + 1j)
        self.assertAlmostEqual(tau, 1j)
        np.testing.assert_array_equal(gamma, [[1, -5], [0, 1]])
        tau, _ = reduce_g1(0.25j)
        self.assertAlmostEqual(tau, 4j)

    def test_lands_in_fundamental_domain(self):
        tau, gamma = reduce_g1(0.3 + 0.9j)
        self.assertTrue(in_w(tau))
        self.assertLessEqual(abs(tau.real), 0.5 + 1e-12)
        self.assertGreaterEqual(abs(tau), 1.0 - 1e-12)
        self.assertLessEqual(int(np.max(np.abs(gamma))), 10)
        self.assertEqual(round(np.linalg.det(gamma)), 1)

    def test_points_of_w_stay_put(self):
        for tau in (0.8 + 1.5j, -1.0 + 1.0j, 0.3 + 1.0j, 0.95 + 0.4j):
            with self.subTest(tau=tau):
                self.assertEqual(in_w(tau), abs(tau) >= 1.0)
        for tau in (0.8 + 1.5j, -1.0 + 1.0j, 0.3 + 1.0j):
            reduced, gamma = reduce_g1(tau)
            self.assertEqual(reduced, tau)
            np.testing.assert_array_equal(gamma, np.eye(2, dtype=np.int64))
        self.assertFalse(in_w(1.2 + 1.0j))

    def test_translates_return_to_w(self):
        rng = np.random.default_rng(17)
        starts = [0.23 + 1.7j, -0.31 + 1.2j, 0.05 + 1.05j, 0.4 + 3.0j]
        inversion = np.array([[0, -1], [1, 0]], dtype=np.int64)
        for _ in range(100):
            tau0 = starts[int(rng.integers(len(starts)))]
            word = np.eye(2, dtype=np.int64)
            for _ in range(int(rng.integers(1, 4))):
                shift = np.array([[1, int(rng.integers(-2, 3))], [0, 1]], dtype=np.int64)
                word = inversion @ shift @ word
            a, b = word[0]
            c, d = word[1]
            moved = (a * tau0 + b) / (c * tau0 + d)
            reduced, gamma = reduce_g1(moved)
            with self.subTest(tau0=tau0, word=word.tolist()):
                self.assertTrue(in_w(reduced))
                self.assertEqual(round(np.linalg.det(gamma)), 1)
                ga, gb = gamma[0]
                gc, gd = gamma[1]
                self.assertLess(abs((ga * moved + gb) / (gc * moved + gd) - reduced), 1e-12)
                if in_w(moved):
                    self.assertEqual(reduced, moved)
                else:
                    self.assertLess(abs(reduced - tau0), 1e-9)

    def test_exhausted_iterations_raise(self):
        tau = complex((math.sqrt(5) - 1) / 2, 1e-12)
        with self.assertRaises(NoConvergence) as caught:
            reduce_g1(tau, config=Config(max_iter=1))
        self.assertIsNotNone(caught.exception.best)
        reduced, _ = reduce_g1(tau)
        self.assertLessEqual(abs(reduced.real), 0.5 + 1e-6)
        self.assertGreaterEqual(abs(reduced), 1.0 - 1e-6)

    def test_rejects_lower_half_plane(self):
        with self.assertRaises(NotUpperHalfPlane):
            reduce_g1(-1j)

    def test_semi_reduce_fixes_reduced_points(self):
        z = PeriodPoint.from_matrices(np.zeros((2, 2)), np.diag([2.0, 5.0]))
        result = semi_reduce(z, 3.0)
        self.assertEqual(result.point, z)
        np.testing.assert_array_equal(result.gamma, np.eye(4, dtype=np.int64))
        self.assertTrue(result.certified)

    def test_semi_reduce_translates_real_part(self):
        x = np.array([[3.2, 3.7], [3.7, 3.4]])
        result = semi_reduce(PeriodPoint.from_matrices(x, np.diag([2.0, 5.0])), 3.0)
        self.assertLessEqual(float(np.max(np.abs(result.point.x))), 0.5)
        np.testing.assert_allclose(result.point.x, [[0.2, -0.3], [-0.3, 0.4]], atol=1e-12)
        self.assertTrue(result.certified)

    def test_semi_reduce_agrees_with_gauss_reduction(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            tau = complex(rng.uniform(-3, 3), rng.uniform(0.05, 2.0))
            if in_w(tau):
                continue
            expected, _ = reduce_g1(tau)
            result = semi_reduce(PeriodPoint.from_tau(tau), 3.0)
            self.assertLess(abs(result.point.tau - expected), 1e-8)

    def test_semi_reduce_witness(self):
        z = PeriodPoint.from_matrices([[2.6, -1.4], [-1.4, 0.3]], [[0.3, 0.2], [0.2, 0.9]])
        result = semi_reduce(z, 3.0)
        self.assertTrue(is_symplectic(result.gamma))
        moved = act(result.gamma, z)
        np.testing.assert_allclose(moved.x, result.point.x, atol=1e-6)
        np.testing.assert_allclose(moved.y, result.point.y, atol=1e-6)
        self.assertIn("certified", result.to_dict())

    def test_semi_reduce_genus_cap(self):
        z = PeriodPoint.from_matrices(np.zeros((5, 5)), np.eye(5))
        with self.assertRaises(TooLarge):
            semi_reduce(z, 3.0)


class FamilyTests(unittest.TestCase):
    def test_document_round_trip(self):
        fam = family([(1, 0), (1, 1)], b=[[1.0, 0.5], [0.0, 1.0]])
        self.assertEqual(SiegelFamily.from_dict(fam.to_dict()), fam)

    def test_rejects_malformed_families(self):
        with self.assertRaises(InvalidInput):
            family([(1, 0), (1, 1)], b=[[1.0, 0.0], [0.3, 1.0]])
        with self.assertRaises(InvalidInput):
            SiegelFamily.from_dict({"g": 3, "laws": [{"c": 1, "p": 1}]})
        with self.assertRaises(InvalidInput):
            SiegelFamily.from_dict({"laws": [{"c": 1}]})

    def test_detect_rank_known_values(self):
        self.assertEqual(detect_rank(family([(1, 0), (1, 1)])), (1, True))
        self.assertEqual(detect_rank(family([(1, 1), (2, 1)])), (0, True))
        self.assertEqual(detect_rank(family([(1, 0), (2, 0)])), (0, False))

    def test_inadmissible_ordering(self):
        with self.assertRaises(InadmissibleOrdering):
            detect_rank(family([(1, 2), (1, 1)]))
        with self.assertRaises(InadmissibleOrdering):
            detect_rank(family([(3, 1), (1, 1)], u=3.0))

    def test_member_grows_like_its_laws(self):
        fam = family([(1, 0), (2, 1)])
        np.testing.assert_allclose(fam.member(10).y, np.diag([1.0, 20.0]))

    def test_metric_diameter_scales_with_largest_entry(self):
        fam = family([(1, 0), (1, 1)])
        for i in (10, 100):
            radius = covering_radius(torus_metric_matrix(fam.member(i)), 0.05).mid
            self.assertTrue(0.25 <= radius / math.sqrt(fam.laws[-1].at(i)) <= 4.0)


class LimitTests(unittest.TestCase):
    def test_circle_limits(self):
        for fam in (family([(1, 1)]), family([(1, 0), (1, 1)])):
            result = diameter_fixed_limit(fam)
            self.assertEqual(result.limit.dim, 1)
            self.assertAlmostEqual(result.limit.gram[0][0], 4.0, delta=0.01)
            self.assertEqual(result.ratios[-1], 1.0)
        self.assertEqual(diameter_fixed_limit(family([(1, 0), (1, 1)])).r, 1)

    def test_two_torus_limit(self):
        result = diameter_fixed_limit(family([(1, 1), (2, 1)]))
        self.assertEqual(result.r, 0)
        self.assertEqual(result.ratios, (0.5, 1.0))
        np.testing.assert_allclose(result.gram0.matrix, np.diag([0.5, 1.0]))
        self.assertTrue(covering_radius(result.limit, 1e-3).contains(1.0, slack=2e-3))

    def test_limit_document(self):
        payload = diameter_fixed_limit(family([(1, 0), (1, 1)])).to_dict()
        self.assertEqual(payload["mode"], "diameter")
        self.assertEqual(payload["dim"], 1)
        self.assertIn("gram", payload)

    def test_bounded_family_has_no_limit(self):
        with self.assertRaises(NotDegenerate):
            diameter_fixed_limit(family([(1, 0), (2, 0)]))

    def test_family_for_torus_recovers_the_torus(self):
        fam = family_for_torus(hexagonal(), 3)
        limit = diameter_fixed_limit(fam).limit
        target = rescale_torus(hexagonal(), "diameter")
        self.assertTrue(lattice_isometric(limit, target, tol=1e-2)[0])

    def test_volume_fixed_known_values(self):
        result = volume_fixed_limit(family([(2.0, 0)], x=[[0.3]]))
        np.testing.assert_allclose(
            result.torus_factor.matrix, [[0.5, 0.15], [0.15, 0.09 / 2.0 + 2.0]]
        )
        self.assertEqual(result.flat_dim, 0)

        result = volume_fixed_limit(family([(1, 1)]))
        self.assertIsNone(result.torus_factor)
        self.assertEqual(result.flat_dim, 1)

        result = volume_fixed_limit(family([(2.0, 0), (1, 1)]))
        np.testing.assert_allclose(result.torus_factor.matrix, np.diag([0.5, 2.0]))
        self.assertEqual(result.flat_dim, 1)

    def test_volume_fixed_needs_bounded_entries_first(self):
        with self.assertRaises(MixedGrowth):
            volume_fixed_limit(family([(1, 1), (1, 0)]))

    @pytest.mark.slow
    def test_volume_fixed_blocks_on_random_families(self):
        rng = np.random.default_rng(13)
        for k in range(100):
            g = int(rng.integers(1, 5))
            r = int(rng.integers(1, min(3, g) + 1))
            c = rng.uniform(0.5, 3.0, size=g)
            laws = [(float(c[j]), 0 if j < r else 1) for j in range(g)]
            b = np.eye(g) + np.triu(rng.uniform(-1.0, 1.0, size=(g, g)), 1)
            x = rng.uniform(-1.0, 1.0, size=(g, g))
            x = (x + x.T) / 2.0
            result = volume_fixed_limit(family(laws, x=x, b=b))

            y = sum(c[j] * np.outer(b[j, :r], b[j, :r]) for j in range(r))
            y_inv = np.linalg.solve(y, np.eye(r))
            xr = x[:r, :r]
            expected = np.block([[y_inv, y_inv @ xr], [xr @ y_inv, xr @ y_inv @ xr + y]])
            with self.subTest(k=k, g=g, r=r):
                self.assertEqual(result.flat_dim, g - r)
                self.assertLess(float(np.max(np.abs(result.torus_factor.matrix - expected))), 1e-9)

    def test_injrad_known_values(self):
        result = injrad_fixed_limit(family([(5.0, 1)]))
        np.testing.assert_allclose(result.circle_radii, [1 / (2 * math.pi)])
        self.assertEqual(result.flat_dim, 1)

        result = injrad_fixed_limit(family([(1.0, 1), (2.0, 1)]))
        np.testing.assert_allclose(result.circle_radii, [2 / (2 * math.pi), 1 / (2 * math.pi)])
        self.assertEqual(result.flat_dim, 2)
        self.assertEqual(injrad_fixed_limit(family([(1.0, 0), (2.0, 1)])).flat_dim, 3)

    def test_injrad_needs_model_form(self):
        with self.assertRaises(NotModelForm):
            injrad_fixed_limit(family([(1.0, 1)], x=[[0.2]]))
        with self.assertRaises(NotModelForm):
            injrad_fixed_limit(family([(1.0, 2)]))

    def test_member_torus_has_unit_diameter(self):
        torus = family([(1, 0), (1, 1)]).member_torus(10)
        self.assertIsInstance(torus, FlatTorus)
        self.assertTrue(covering_radius(torus, 1e-3).contains(1.0, slack=2e-3))


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
