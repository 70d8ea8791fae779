from __future__ import annotations

import pytest

from plansteiner.generate import GenSpec, gen
from plansteiner.graphs import canonical_json, parse_instance


def load_instance(**kw):
    """Generate-and-parse helper; keyword args go to GenSpec."""
    return parse_instance(canonical_json(gen(GenSpec(**kw))))


@pytest.fixture
def mk():
    return load_instance
