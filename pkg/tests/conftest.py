from __future__ import annotations

import pytest

from statorcm import SectionParams, WindingSpec, build_motor


@pytest.fixture(scope="session")
def default_spec() -> WindingSpec:
    return WindingSpec()


@pytest.fixture(scope="session")
def default_params() -> SectionParams:
    return SectionParams()


@pytest.fixture(scope="session")
def default_model(default_spec, default_params):
    return build_motor(default_spec, default_params)
