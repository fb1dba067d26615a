import json

import pytest
from approvaltests.approvals import verify  # type: ignore

from StochasticVlasov.base import SpecCache

ITEM = {"variant": "Canonical", "cutoff": {"N": 1, "M": 4}}


@pytest.fixture
def cache():
    return SpecCache()


@pytest.fixture
def cache_items(cache: SpecCache):
    cache.add("canonical N=1", ITEM)
    cache.add("blob l_N=0.05", ITEM)
    return cache


def _verify(athing):
    verify(json.dumps(athing, indent=4) + "\n")


def _verify_cache(cache: SpecCache):
    _verify(cache.cache)


def test_cache_is_empty(cache: SpecCache):
    _verify_cache(cache)


def test_add_cache(cache: SpecCache):
    cache.add("canonical N=1", ITEM)
    cache.add("blob l_N=0.05", ITEM)
    _verify_cache(cache)


def test_remove_item_no_item(cache: SpecCache):
    cache.remove("canonical N=1")
    _verify_cache(cache)


def test_remove_item(cache_items: SpecCache):
    cache_items.remove("canonical N=1")
    _verify_cache(cache_items)


def test_get_item(cache_items: SpecCache):
    _verify(cache_items.get("canonical N=1"))


def test_get_item_no_item(cache_items: SpecCache):
    _verify(cache_items.get("not-here"))


def test_get_or_create_builds_once(cache: SpecCache, mocker):
    factory = mocker.Mock(return_value=ITEM)
    assert cache.get_or_create(("kernel", 4, 0.05, 1.0), factory) is ITEM
    assert cache.get_or_create(("kernel", 4, 0.05, 1.0), factory) is ITEM
    factory.assert_called_once_with()
    assert len(cache) == 1
    cache.clear()
    assert len(cache) == 0
