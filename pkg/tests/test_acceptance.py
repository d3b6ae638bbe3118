"""One test per acceptance criterion, each printing its verdict line."""
from __future__ import annotations

import pytest

from eiscoh.acceptance import CRITERIA, run_criterion, run_suite
from eiscoh.numerics import DomainError


def test_registry_is_complete():
    assert len(CRITERIA) == 11
    assert len(set(CRITERIA)) == len(CRITERIA)


def test_unknown_criterion_rejected(ctx):
    with pytest.raises(DomainError):
        run_criterion("unknown-criterion", ctx)


def test_suite_subset_preserves_order(ctx):
    names = ("weight2-table", "fourier-constants")
    results = run_suite(ctx, names=names)
    assert tuple(r.name for r in results) == names
    assert all(r.passed for r in results)


@pytest.mark.parametrize("name", CRITERIA)
def test_criterion(name, ctx):
    result = run_criterion(name, ctx, seed=0)
    print(f"{result.name}: {'PASS' if result.passed else 'FAIL'} ({result.detail})")
    assert result.passed, f"{result.name}: {result.detail}"
