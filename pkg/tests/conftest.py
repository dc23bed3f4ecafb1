"""Shared fixtures: the 10-blob planar reference instance and its panels."""

import numpy as np
import pytest

from kzcoreset.evaluate import standard_panel
from kzcoreset.metric import EuclideanBackend, PointSet, set_cost

REF_SEED = 20260301
REF_K = 10
REF_Z = 2


def make_reference_instance(per_blob=2000):
    """10 unit-variance Gaussian blobs on a 5x2 grid with spacing 12."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(REF_SEED)))
    centers = np.array([(12.0 * i, 12.0 * j) for i in range(5) for j in range(2)])
    pts = np.concatenate([c + rng.normal(size=(per_blob, 2)) for c in centers])
    return PointSet(EuclideanBackend(pts))


@pytest.fixture(scope="session")
def ref_instance():
    return make_reference_instance()


@pytest.fixture(scope="session")
def ref_panel(ref_instance):
    # 250 solutions of each generator kind, fixed before any build
    return standard_panel(ref_instance, REF_K, REF_Z, 0, 250)


@pytest.fixture(scope="session")
def ref_exact(ref_instance, ref_panel):
    return np.array([set_cost(ref_instance, S, REF_Z) for S in ref_panel])


@pytest.fixture
def line6():
    """Unit-spaced 1-d grid of six points."""
    return PointSet(EuclideanBackend(np.arange(6, dtype=float)))
