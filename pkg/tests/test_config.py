import json

import pytest

from warpsoliton.config import CACHE_ENV, SolverConfig


def test_defaults_and_round_trip(tmp_path):
    cfg = SolverConfig()
    assert cfg.n_max == 25 and cfg.grid_points == 4000
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"grid_points": 2000, "eig_tol": 1e-5}))
    loaded = SolverConfig.from_file(path)
    assert loaded.grid_points == 2000 and loaded.n_max == 25
    assert SolverConfig.from_dict(loaded.to_dict()) == loaded


@pytest.mark.parametrize(
    "bad",
    [{"newton_tol": 0.0}, {"eig_tol": 0.1}, {"n_max": 5}, {"grid_points": 100}, {"R_max": 10}, {"whatever": 1}],
)
def test_invalid_values_rejected(bad):
    with pytest.raises((ValueError, TypeError)):
        SolverConfig.from_dict(bad)


def test_cache_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert SolverConfig().resolved_cache_dir() == tmp_path
    assert SolverConfig(cache_dir="/x").resolved_cache_dir().as_posix() == "/x"
