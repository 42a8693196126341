from pathlib import Path
from typing import Any, Dict

import pytest

from disequilibrium.core.models import ModelParams
from disequilibrium.core.rng import SeedSpec
from disequilibrium.economy.welfare import OmegaSpec

BASE = dict(rho=0.9, sigma_eps=1.0, alpha=0.5, sigma_nu=1.0, sigma_eta=0.5, gamma=2.0)


def make_params(**changes: float) -> ModelParams:
    return ModelParams(**{**BASE, **changes})


def toml_text(sections: Dict[str, Dict[str, Any]]) -> str:
    lines = []
    for name, table in sections.items():
        lines.append(f"[{name}]")
        for key, value in table.items():
            lines.append(f"{key} = {value!r}")
        lines.append("")
    return "\n".join(lines)


@pytest.fixture
def base_params() -> ModelParams:
    return make_params()


@pytest.fixture
def sqrt_omega() -> OmegaSpec:
    return OmegaSpec(family="sqrt", scale=1.0)


@pytest.fixture
def seed() -> SeedSpec:
    return SeedSpec(master_seed=20240611, stream_id=0)


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a TOML run config; `model` entries override the base parameters."""

    def _write(name: str = "run.toml", model: Dict[str, Any] = None, **sections: Dict[str, Any]) -> Path:
        body = {"model": {**BASE, **(model or {})}, **sections}
        path = tmp_path / name
        path.write_text(toml_text(body), encoding="utf-8")
        return path

    return _write
