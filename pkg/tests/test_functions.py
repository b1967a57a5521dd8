import numpy as np
import pytest

from roughmorrey import functions as F
from roughmorrey.errors import ConfigurationError


def test_seeded_family_is_reproducible(grid1):
    a = F.test_family(grid1, 42, count=6)
    b = F.test_family(grid1, 42, count=6)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    c = F.test_family(grid1, 43, count=6)
    assert not np.array_equal(a[2], c[2])


def test_family_respects_support(grid1):
    support = np.abs(grid1.coordinate()) <= 0.5
    for f in F.test_family(grid1, 1, count=6, support=support):
        assert np.all(f[~support] == 0) and np.any(f != 0)


def test_streams_are_independent_of_count(grid1):
    assert np.array_equal(F.test_family(grid1, 9, count=3)[2], F.test_family(grid1, 9, count=9)[2])


def test_make_function(grid1):
    f = F.make_function(grid1, {"kind": "indicator", "center": [0.0], "radius": 0.25})
    assert set(np.unique(f)) == {0.0, 1.0}
    with pytest.raises(ConfigurationError):
        F.make_function(grid1, {"kind": "nope"})
    with pytest.raises(ConfigurationError):
        F.make_function(grid1, {"kind": "bump", "colour": 3})


def test_interval_indicator(grid1):
    f = F.interval_indicator(grid1, -0.5, 0.5)
    assert f.sum() * grid1.h == pytest.approx(1.0, abs=2 * grid1.h)
