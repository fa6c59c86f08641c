"""Shared fixtures: the bundled scenario presets run once per session."""

from __future__ import annotations

import dataclasses

import pytest

from tethersim.cli import load_config
from tethersim.simengine import run

ESTIMATORS = ("rdo", "dob", "eso", "oracle")


def _run_preset(name):
    cfg = load_config(name)
    return {est: run(dataclasses.replace(cfg, estimator=est))
            for est in ESTIMATORS}


@pytest.fixture(scope="session")
def circle_runs():
    return _run_preset("circle")


@pytest.fixture(scope="session")
def helix_runs():
    return _run_preset("helix")


@pytest.fixture(scope="session")
def extraction_runs():
    return _run_preset("extraction")
