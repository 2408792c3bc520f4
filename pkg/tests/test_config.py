import json

import pytest

from rfw2s import InvalidParameter, ReportIOError, TauOrder
from rfw2s.config import load_settings


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"alpha": 1.5, "n_t": 800, "tau_order": "zero"}))
    return path


def test_defaults_without_file():
    settings = load_settings()

    assert settings.alpha == 2.0
    assert settings.replicates == 0
    assert settings.tau_order == TauOrder.THETA_ONE


def test_file_values_are_loaded(settings_file):
    settings = load_settings(settings_file)

    assert settings.alpha == 1.5
    assert settings.n_t == 800
    assert settings.tau_order == TauOrder.ZERO


def test_overrides_win_and_none_is_ignored(settings_file):
    settings = load_settings(settings_file, {"alpha": 2.5, "n_t": None, "seed": 9})

    assert settings.alpha == 2.5
    assert settings.n_t == 800
    assert settings.seed == 9


def test_settings_build_configs():
    settings = load_settings(overrides={"n_t": 100, "p_t": 50, "lambda_t": 0.5, "gamma_ls": -0.3})

    teacher = settings.teacher_config()
    assert (teacher.n, teacher.p, teacher.lam) == (100, 50, 0.5)
    assert settings.scaling_params().gamma_ls == -0.3


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"alpah": 2.0}))

    with pytest.raises(InvalidParameter, match="alpah"):
        load_settings(path)


def test_out_of_range_value_is_rejected():
    with pytest.raises(InvalidParameter, match="alpha"):
        load_settings(overrides={"alpha": 0.5})


def test_malformed_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")

    with pytest.raises(InvalidParameter, match="not valid JSON"):
        load_settings(broken)
    with pytest.raises(InvalidParameter, match="single JSON object"):
        load_settings(listing)


def test_missing_file(tmp_path):
    with pytest.raises(ReportIOError, match="cannot read settings"):
        load_settings(tmp_path / "absent.json")
