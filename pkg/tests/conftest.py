from __future__ import annotations

import pytest

from infradep import (
    accidental_model,
    attack_model,
    build_reachability_graph,
    cascading_only_model,
    common_cause_model,
    eliminate_vanishing,
)

MODEL_CTORS = {
    "accidental": accidental_model,
    "cascading-only": cascading_only_model,
    "common-cause": common_cause_model,
    "attack": attack_model,
}


@pytest.fixture(scope="session")
def models():
    return {name: ctor() for name, ctor in MODEL_CTORS.items()}


@pytest.fixture(scope="session")
def graphs(models):
    return {name: build_reachability_graph(m) for name, m in models.items()}


@pytest.fixture(scope="session")
def ctmcs(graphs):
    return {name: eliminate_vanishing(g) for name, g in graphs.items()}


@pytest.fixture(scope="session")
def model_a(models):
    return models["accidental"]


@pytest.fixture(scope="session")
def ctmc_a(ctmcs):
    return ctmcs["accidental"]
