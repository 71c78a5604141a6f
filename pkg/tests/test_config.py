import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from pymskdx.config.settings import settings
from pymskdx.config.settings_loader import SettingsLoader
from pymskdx.utils.logger import ClassLoggerAdapter, get_logger


class TestSettingsLoader(unittest.TestCase):

    def test_only_uppercase_constants(self):
        items = [("RUNS_PER_REPORT", 5), ("helper", 1), ("DX_API_KEY", "secret")]
        self.assertEqual(SettingsLoader._filter(items), {"RUNS_PER_REPORT": 5})

    def test_project_settings_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            Path(tmp, "settings.py").write_text("MAX_TOKENS = 512\nDX_API_KEY = 'leaked'\nTEMPERATURE = 0.5\n",
                                                encoding="utf-8")
            Path(tmp, "settings_ci.py").write_text("TEMPERATURE = 0.0\n", encoding="utf-8")
            with patch("os.getcwd", return_value=tmp), patch.dict(os.environ, {SettingsLoader.ENV_NAME: "ci"}):
                loaded = SettingsLoader.load()
        self.assertEqual(loaded, {"MAX_TOKENS": 512, "TEMPERATURE": 0.0})

    def test_no_settings_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            with patch("os.getcwd", return_value=tmp), patch.dict(os.environ, {}, clear=True):
                self.assertEqual(SettingsLoader.load(), {})


class TestSettings(unittest.TestCase):

    def tearDown(self):
        settings.reset()

    def test_defaults(self):
        self.assertEqual(settings.RUNS_PER_REPORT, 3)
        self.assertEqual(settings.VOTE_MODE, "set")
        self.assertEqual(settings.NF4_BLOCK_SIZE, 64)

    def test_configure_and_reset(self):
        settings.configure(RUNS_PER_REPORT=5, VOTE_MODE="per-label")
        self.assertEqual((settings.RUNS_PER_REPORT, settings.VOTE_MODE), (5, "per-label"))
        settings.reset()
        self.assertEqual(settings.RUNS_PER_REPORT, 3)

    def test_environment_variables(self):
        settings.reset()
        with patch.dict(os.environ, {"MAX_IN_FLIGHT": "9"}):
            self.assertEqual(settings.MAX_IN_FLIGHT, 9)

    def test_credential_not_a_setting(self):
        with patch.dict(os.environ, {"DX_API_KEY": "secret"}):
            settings.reset()
            self.assertNotIn("secret", str(settings.dump()))


class TestLogger(unittest.TestCase):

    def test_adapter_injects_classname(self):
        log = get_logger(classname="Voting")
        self.assertIsInstance(log, ClassLoggerAdapter)
        with self.assertLogs("pymskdx", level="INFO") as captured:
            log.info("votado")
        self.assertEqual(captured.records[0].classname, "Voting")

    def test_configured_once(self):
        first = get_logger()
        handlers = list(first.handlers)
        self.assertIs(get_logger(), first)
        self.assertEqual(first.handlers, handlers)


if __name__ == '__main__':
    unittest.main()
