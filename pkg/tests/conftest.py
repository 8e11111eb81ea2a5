"""Shared fixtures.

The bundled line graph takes a couple of seconds to replay, so it is
session-scoped; treat it as read-only and ``copy()`` before mutating.
"""

from __future__ import annotations

import random

import pytest

from fbsdiag.bundled import example_line


@pytest.fixture(scope="session")
def line_graph():
    return example_line()


@pytest.fixture(scope="session")
def line_model():
    return example_line(with_records=False)


@pytest.fixture()
def rng():
    return random.Random(0xFB5)
