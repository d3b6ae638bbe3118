from __future__ import annotations

import pytest

from eiscoh.numerics import PrecisionContext


@pytest.fixture(scope="session")
def ctx() -> PrecisionContext:
    return PrecisionContext(bits=384)


@pytest.fixture(scope="session")
def ctx_hi() -> PrecisionContext:
    return PrecisionContext(bits=768)
