"""Tests for user configuration defaults."""

from pathlib import Path

import pytest
import yaml

from vc_gap_lab.user_config import (
    effective_defaults,
    env_workers,
    get_default_config_template,
    load_user_config,
    save_user_config,
)


class TestLoadUserConfig:
    """Tests for load_user_config."""

    def test_returns_empty_when_no_file(self, isolated_user_config: Path) -> None:
        """Missing config file returns empty dict."""
        assert not isolated_user_config.exists()
        assert load_user_config() == {}

    def test_loads_valid_config(self, isolated_user_config: Path) -> None:
        """Valid YAML config is loaded and numbers are coerced."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text(
            yaml.safe_dump({"tolerance": 1e-6, "seed": 3, "workers": 4.0, "output_format": "csv"})
        )
        result = load_user_config()
        assert result == {"tolerance": 1e-6, "seed": 3, "workers": 4, "output_format": "csv"}
        assert isinstance(result["workers"], int)

    def test_skips_invalid_enum_values(self, isolated_user_config: Path) -> None:
        """Invalid enum values are dropped with a warning."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text(yaml.safe_dump({"output_format": "xml", "seed": 1}))
        assert load_user_config() == {"seed": 1}

    def test_skips_unknown_keys(self, isolated_user_config: Path) -> None:
        """Keys outside the known set are ignored."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text(yaml.safe_dump({"layout": "flat", "seed": 2}))
        assert load_user_config() == {"seed": 2}

    @pytest.mark.parametrize("value", [True, "four", 2.5])
    def test_rejects_bad_integers(self, isolated_user_config: Path, value: object) -> None:
        """Booleans, strings and fractional values are not worker counts."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text(yaml.safe_dump({"workers": value}))
        assert load_user_config() == {}

    def test_handles_corrupt_yaml(self, isolated_user_config: Path) -> None:
        """Corrupt YAML returns empty dict."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text("this: is: not: valid: yaml: [")
        assert load_user_config() == {}

    def test_non_mapping(self, isolated_user_config: Path) -> None:
        """A YAML list is not a config."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text("- 1\n- 2\n")
        assert load_user_config() == {}


class TestSaveUserConfig:
    """Tests for save_user_config."""

    def test_round_trip(self, isolated_user_config: Path) -> None:
        """The default template saves and loads unchanged."""
        path = save_user_config(get_default_config_template())
        assert path == isolated_user_config
        assert load_user_config() == get_default_config_template()


class TestEnvironment:
    """Tests for the worker count override."""

    def test_unset(self) -> None:
        assert env_workers() is None

    @pytest.mark.parametrize("raw", ["zero", "0", "-2", " "])
    def test_ignored_values(self, monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
        """Non-integers and non-positive counts are ignored."""
        monkeypatch.setenv("VC_GAP_LAB_THREADS", raw)
        assert env_workers() is None

    def test_valid(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("VC_GAP_LAB_THREADS", "6")
        assert env_workers() == 6


class TestEffectiveDefaults:
    """Tests for the layered defaults."""

    def test_builtin(self) -> None:
        """Without a file or environment the built-in values apply."""
        assert effective_defaults() == get_default_config_template()

    def test_layering(self, isolated_user_config: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        """The file overrides built-ins and the environment overrides the file."""
        isolated_user_config.parent.mkdir(parents=True)
        isolated_user_config.write_text(yaml.safe_dump({"seed": 9, "workers": 2}))
        monkeypatch.setenv("VC_GAP_LAB_THREADS", "5")
        result = effective_defaults()
        assert result["seed"] == 9
        assert result["workers"] == 5
        assert result["tolerance"] == 1e-9
