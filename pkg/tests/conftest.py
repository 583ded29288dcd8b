import sys
from pathlib import Path

import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

torch.set_num_threads(1)


@pytest.fixture
def synth():
    from epo_ecpe.corpus import generate_synthetic
    return generate_synthetic(12, seed=3)
