"""Shared fixtures: a small fast model plus the demo scene and bank."""

from __future__ import annotations

import numpy as np
import pytest

from logan import Session, instantiate_model
from logan.composer import attach_segmentation
from logan.demo import build_demo_bank, build_demo_segmentation

SMALL_MODEL_REF = "toy:7:8"   # 8 layers, 64x64 output: fast enough for CI


@pytest.fixture(scope="session")
def small_model():
    return instantiate_model(SMALL_MODEL_REF)


@pytest.fixture(scope="session")
def demo_segmentation(small_model):
    return build_demo_segmentation(small_model.output_resolution)


@pytest.fixture()
def fresh_session(small_model):
    return Session(small_model, seed=1)


@pytest.fixture()
def scene_session(small_model, demo_segmentation):
    session = Session(small_model, seed=1)
    attach_segmentation(session, demo_segmentation)
    return session


@pytest.fixture(scope="session")
def demo_bank(small_model, demo_segmentation):
    session = Session(small_model, seed=1)
    attach_segmentation(session, demo_segmentation)
    return build_demo_bank(session)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
