import numpy as np

from sparseh2 import parallel


def test_substreams_are_reproducible_and_distinct():
    a = parallel.substream(1, parallel.NOISE, 0).random(5)
    np.testing.assert_array_equal(a, parallel.substream(1, parallel.NOISE, 0).random(5))
    assert not np.array_equal(a, parallel.substream(1, parallel.NOISE, 1).random(5))
    assert not np.array_equal(a, parallel.substream(1, parallel.EFFECTS, 0).random(5))
    assert not np.array_equal(a, parallel.substream(2, parallel.NOISE, 0).random(5))


def test_pmap_preserves_order():
    items = list(range(50))
    assert parallel.pmap(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert parallel.pmap(lambda x: x, [], workers=4) == []


def test_chunks_cover_range():
    assert parallel.chunks(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert parallel.chunks(0, 4) == []


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv(parallel.THREADS_ENV, "3")
    assert parallel.default_workers() == 3
    monkeypatch.setenv(parallel.THREADS_ENV, "junk")
    assert parallel.default_workers() >= 1
