import pickle

import pytest
from hypothesis import given, strategies as st

from ftqc_reaction.units import ZERO, Duration, ns, seconds, us

vals = st.floats(-1e3, 1e3, allow_nan=False)


@given(vals, vals)
def test_addition_matches_floats(a, b):
    assert (us(a) + us(b)).us == pytest.approx(a + b, abs=1e-9)


def test_unit_views():
    d = us(1.5)
    assert d.ns == pytest.approx(1500)
    assert d.s == pytest.approx(1.5e-6)
    assert ns(2500).to_ns_int() == 2500
    assert us(3) / us(1.5) == pytest.approx(2.0)
    assert (us(3) / 2).us == pytest.approx(1.5)
    assert us(1) < us(2) and ZERO == seconds(0)


def test_immutable_and_picklable():
    d = us(7)
    with pytest.raises(AttributeError):
        d._s = 1.0
    assert pickle.loads(pickle.dumps(d)) == d
    with pytest.raises(TypeError):
        Duration(d)
