"""
Unit tests for the CLI module.
"""

import unittest
from unittest.mock import MagicMock, patch

from viscoelastic_lab.cli import (
    COMMANDS,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_VALIDATION,
    build_parser,
    main,
)
from viscoelastic_lab.errors import (
    ConfigError,
    RegimeError,
    SnapshotFormatError,
    StabilityError,
    ValidationError,
)


def _mock_args(command="run"):
    mock_args = MagicMock()
    mock_args.command = command
    mock_args.config = "lab.toml"
    mock_args.out = "out"
    mock_args.quiet = False
    mock_args.threads = 1
    mock_args.log_level = "INFO"
    mock_args.log_file = None
    return mock_args


class TestCLI(unittest.TestCase):
    """Tests for the CLI module."""

    @patch("viscoelastic_lab.cli.load_config")
    @patch("argparse.ArgumentParser.parse_args")
    def test_main_dispatches_command(self, mock_parse_args, mock_load_config):
        """Test that main loads the config and hands it to the subcommand."""
        mock_args = _mock_args("sweep")
        mock_parse_args.return_value = mock_args
        command = MagicMock()

        with patch.dict(COMMANDS, {"sweep": command}):
            self.assertEqual(main(), EXIT_OK)

        mock_load_config.assert_called_once_with("lab.toml")
        self.assertEqual(command.call_args[0][:2], (mock_load_config.return_value, mock_args))
        # The third argument is the configured logger
        self.assertIsNotNone(command.call_args[0][2])

    @patch("viscoelastic_lab.cli.load_config")
    @patch("argparse.ArgumentParser.parse_args")
    def test_validation_errors_exit_2(self, mock_parse_args, mock_load_config):
        """Test that validation and snapshot format errors exit with 2."""
        mock_parse_args.return_value = _mock_args()
        for error in (ValidationError("bad"), ConfigError("bad"), SnapshotFormatError("bad")):
            with patch.dict(COMMANDS, {"run": MagicMock(side_effect=error)}):
                self.assertEqual(main(), EXIT_VALIDATION)

    @patch("viscoelastic_lab.cli.load_config")
    @patch("argparse.ArgumentParser.parse_args")
    def test_runtime_errors_exit_3(self, mock_parse_args, mock_load_config):
        """Test that blow-ups, regime breaks and IO errors exit with 3."""
        mock_parse_args.return_value = _mock_args()
        for error in (StabilityError("nan", t=0.5), RegimeError("rho <= 0"), OSError("disk")):
            with patch.dict(COMMANDS, {"run": MagicMock(side_effect=error)}):
                self.assertEqual(main(), EXIT_RUNTIME)

    @patch("viscoelastic_lab.cli.load_config", side_effect=ConfigError("unknown key grid.nz"))
    @patch("argparse.ArgumentParser.parse_args")
    def test_bad_config_exit_2(self, mock_parse_args, mock_load_config):
        """Test that a rejected config never reaches the subcommand."""
        mock_parse_args.return_value = _mock_args()
        command = MagicMock()
        with patch.dict(COMMANDS, {"run": command}):
            self.assertEqual(main(), EXIT_VALIDATION)
        command.assert_not_called()

    def test_missing_config_file(self):
        """Test that a missing config file exits with 3."""
        self.assertEqual(
            main(["run", "--config", "/nonexistent/lab.toml", "--quiet"]), EXIT_RUNTIME
        )


class TestBuildParser(unittest.TestCase):
    """Tests for the argument parser."""

    def test_mms_arguments(self):
        """Test the mms options and the shared defaults."""
        args = build_parser().parse_args(
            ["mms", "--config", "lab.toml", "--resolutions", "16", "32", "--t-end", "0.1"]
        )
        self.assertEqual(args.resolutions, [16, 32])
        self.assertEqual(args.t_end, 0.1)
        self.assertEqual(args.out, "out")
        self.assertEqual(args.threads, 1)
        self.assertFalse(args.quiet)

    def test_norms_takes_snapshots(self):
        """Test that norms collects positional snapshot paths."""
        args = build_parser().parse_args(["norms", "--config", "c.toml", "a.vels", "b.vels"])
        self.assertEqual(args.snapshots, ["a.vels", "b.vels"])

    def test_config_required(self):
        """Test that --config is mandatory."""
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["run"])

    def test_every_command_registered(self):
        """Test that each subcommand has a handler."""
        self.assertEqual(set(COMMANDS), {"run", "mms", "sweep", "compare-ns", "norms"})
