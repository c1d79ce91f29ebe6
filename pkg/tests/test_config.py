import json

import pytest
from pydantic import ValidationError

from physbound.config import SOLVER_CFG_ENV, SaddleConfig, SolverConfig, Tolerances, load_solver_config
from physbound.errors import ConfigError


def test_defaults(monkeypatch):
    monkeypatch.delenv(SOLVER_CFG_ENV, raising=False)
    cfg = load_solver_config()
    assert cfg == SolverConfig()
    assert cfg.backend == "cvxpy"
    assert cfg.tolerances.verify == 1e-8
    assert cfg.backoff[0] == 1.0 - 1e-9


def test_file_and_environment(tmp_path, monkeypatch):
    path = tmp_path / "solver.json"
    path.write_text(
        json.dumps({"solver": "SCS", "max_iters": 5000, "tolerances": {"certificate": 1e-4}}),
        encoding="utf-8",
    )
    cfg = load_solver_config(str(path))
    assert cfg.solver == "SCS"
    assert cfg.max_iters == 5000
    assert cfg.tolerances.certificate == 1e-4
    # untouched tolerances keep their defaults
    assert cfg.tolerances.psd == Tolerances().psd

    monkeypatch.setenv(SOLVER_CFG_ENV, str(path))
    assert load_solver_config() == cfg


def test_explicit_path_wins_over_environment(tmp_path, monkeypatch):
    env_path = tmp_path / "env.json"
    env_path.write_text(json.dumps({"solver": "SCS"}), encoding="utf-8")
    arg_path = tmp_path / "arg.json"
    arg_path.write_text(json.dumps({"verbose": True}), encoding="utf-8")
    monkeypatch.setenv(SOLVER_CFG_ENV, str(env_path))
    cfg = load_solver_config(str(arg_path))
    assert cfg.verbose is True
    assert cfg.solver == "CLARABEL"


@pytest.mark.parametrize(
    "content",
    ["{not json", json.dumps({"unknown": 1}), json.dumps({"max_iters": 0})],
)
def test_invalid_files(tmp_path, content):
    path = tmp_path / "solver.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_solver_config(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_solver_config(str(tmp_path / "nope.json"))


def test_saddle_config_bounds():
    assert SaddleConfig().step_primal == 0.05
    with pytest.raises(ValidationError):
        SaddleConfig(step_primal=0.0)
    with pytest.raises(ValidationError):
        SaddleConfig(iterations=0)
