import math

import pytest

from steklov_fem.oracle import coth, disk_eigenvalue, disk_values, strip_mixed_eigenvalue, strip_values


def test_strip_first_value():
    assert strip_mixed_eigenvalue(1) == pytest.approx(3.1533481, abs=5e-8)
    assert strip_mixed_eigenvalue(1) == pytest.approx(math.pi / math.tanh(math.pi), rel=1e-15)


def test_strip_large_k_no_overflow():
    assert strip_mixed_eigenvalue(1000) == pytest.approx(1000 * math.pi, rel=1e-15)
    assert coth(800.0) == 1.0
    assert coth(1.0 + 1e-12) == pytest.approx(1.0 / math.tanh(1.0), rel=1e-14)
    assert coth(1.0) == pytest.approx(1.0 / math.tanh(1.0), rel=1e-15)


def test_strip_scaling():
    # dilating the strip by 2 halves every Steklov eigenvalue
    for k in (1, 2, 5):
        assert strip_mixed_eigenvalue(k, w=2.0, d=2.0) == pytest.approx(strip_mixed_eigenvalue(k) / 2, rel=1e-14)


def test_disk_sequence():
    assert [disk_eigenvalue(n) for n in range(7)] == [0, 1, 1, 2, 2, 3, 3]
    assert [v.value for v in disk_values(3)] == [0, 1, 1]
    assert [v.index for v in strip_values(3)] == [1, 2, 3]


def test_bad_indices():
    with pytest.raises(ValueError):
        strip_mixed_eigenvalue(0)
    with pytest.raises(ValueError):
        disk_eigenvalue(-1)
    with pytest.raises(ValueError):
        coth(0.0)
