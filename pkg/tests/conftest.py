import json
from pathlib import Path

import pytest

from featprobe.synth_bench import make_encoder_pair
from featprobe.tensor_store import save_feature_set

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def encoder_pair():
    """(structure, edge) synthetic pair, seed 0, shared across the suite."""
    return make_encoder_pair(seed=0)


@pytest.fixture(scope="session")
def pair_manifests(encoder_pair, tmp_path_factory):
    """The same pair saved to disk; returns the two manifest paths."""
    root = tmp_path_factory.mktemp("pair")
    structure, edge = encoder_pair
    return (
        save_feature_set(structure, root / "structure"),
        save_feature_set(edge, root / "edge"),
    )


@pytest.fixture(scope="session")
def cityscapes_profiles():
    return json.loads((FIXTURES / "cityscapes_profiles.json").read_text())


@pytest.fixture(scope="session")
def coco_profiles():
    return json.loads((FIXTURES / "coco_profiles.json").read_text())


@pytest.fixture(scope="session")
def outcome_pairs():
    return json.loads((FIXTURES / "outcome_pairs.json").read_text())
