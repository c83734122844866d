import os
import unittest
from unittest.mock import patch

from tropical_collapse.config import Config, resolve
from tropical_collapse.errors import BadParameter


class ConfigTests(unittest.TestCase):
    def setUp(self):
        self.env = {
            "TROPI_SPACING": "0.1",
            "TROPI_BUDGET": "500",
            "TROPI_SEED": "7",
            "TROPI_SIEGEL_U": "4.5",
            "TROPI_LOG_LEVEL": "WARNING",
        }

    def test_loads_from_environment(self):
        with patch.dict(os.environ, self.env, clear=True):
            config = Config.from_environment()
        self.assertEqual(config.spacing, 0.1)
        self.assertEqual(config.budget, 500)
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.u, 4.5)
        self.assertEqual(config.log_level, "WARNING")

    def test_overrides_take_precedence(self):
        overrides = {"spacing": 0.02, "seed": 3, "log_level": "DEBUG"}
        with patch.dict(os.environ, self.env, clear=True):
            config = Config.from_environment(overrides)
        self.assertEqual(config.spacing, 0.02)
        self.assertEqual(config.seed, 3)
        self.assertEqual(config.log_level, "DEBUG")
        self.assertEqual(config.budget, 500)

    def test_malformed_values_fall_back_to_defaults(self):
        with patch.dict(os.environ, {"TROPI_BUDGET": "lots", "TROPI_SPACING": "?"}, clear=True):
            config = Config.from_environment()
        self.assertEqual(config.budget, Config().budget)
        self.assertEqual(config.spacing, Config().spacing)

    def test_max_dim_sets_every_dimension_cap(self):
        with patch.dict(os.environ, {"TROPI_MAX_DIM": "6"}, clear=True):
            config = Config.from_environment()
        self.assertEqual(config.max_cover_dim, 6)
        self.assertEqual(config.max_net_dim, 6)
        self.assertEqual(config.max_iso_dim, 6)
        self.assertEqual(config.max_svp_dim, 8)

        with patch.dict(os.environ, {"TROPI_MAX_DIM": "10"}, clear=True):
            self.assertEqual(Config.from_environment().max_svp_dim, 10)

    def test_debug_flag_lowers_log_level(self):
        with patch.dict(os.environ, {"TROPI_DEBUG": "yes"}, clear=True):
            self.assertEqual(Config.from_environment().log_level, "DEBUG")

    def test_rejects_non_positive_values(self):
        with patch.dict(os.environ, {}, clear=True):
            with self.assertRaises(BadParameter):
                Config.from_environment({"spacing": -1.0})
        with self.assertRaises(BadParameter):
            Config().with_overrides(u=1.0)

    def test_seed_may_be_zero_or_negative(self):
        self.assertEqual(Config().with_overrides(seed=-4).seed, -4)

    def test_resolve_prefers_explicit_config(self):
        explicit = Config(spacing=0.3)
        self.assertIs(resolve(explicit), explicit)
        self.assertIsInstance(resolve(None), Config)

    def test_config_is_hashable(self):
        self.assertEqual(hash(Config()), hash(Config()))


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
