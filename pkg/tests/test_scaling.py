import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinto_sim.errors import DomainError
from pinto_sim.jumpdyn import ballistic_apex
from pinto_sim.scaling import ScalingModel, jump_height, scaled_height


def test_jump_height_examples():
    assert jump_height(0.45 * 9.81, 0.118, 0.45) == pytest.approx(0.118, rel=1e-15)
    f = 1.42 / 0.118
    assert jump_height(f, 0.118, 0.45) == pytest.approx(0.3216, rel=5e-4)
    assert jump_height(f, 0.118, 0.45) == pytest.approx(ballistic_apex(1.42, 1.0, 0.45), rel=1e-12)
    assert jump_height(2 * f, 0.118, 0.45) == pytest.approx(2 * jump_height(f, 0.118, 0.45))
    with pytest.raises(DomainError):
        jump_height(-1, 0.1, 0.45)


def test_scaled_height_examples():
    m = ScalingModel(alpha=3.0)
    for s in (0.1, 0.5, 2.0, 7.0):
        assert scaled_height(m, s) == m.reference_height
    m = ScalingModel(alpha=3.5, reference_height=0.32)
    assert scaled_height(m, 0.5) == pytest.approx(0.2263, abs=5e-5)
    m = ScalingModel(alpha=2.2)
    assert scaled_height(m, 0.5) / m.reference_height == pytest.approx(0.5 ** -0.8, rel=1e-12)
    assert 0.5 ** -0.8 == pytest.approx(1.741, abs=5e-4)


def test_guards():
    with pytest.raises(DomainError):
        ScalingModel(alpha=1.0)
    with pytest.raises(DomainError):
        ScalingModel(alpha=5.0)
    with pytest.raises(DomainError):
        scaled_height(ScalingModel(), 0.0)


def test_exact_at_unit_scale():
    for a in np.linspace(1.5, 4.5, 13):
        m = ScalingModel(alpha=a, reference_height=0.1234567)
        assert scaled_height(m, 1.0) == 0.1234567


@settings(max_examples=100, deadline=None)
@given(a1=st.floats(1.5, 4.5), a2=st.floats(1.5, 4.5), s=st.floats(0.01, 0.99))
def test_monotone_in_alpha_below_unit_scale(a1, a2, s):
    lo, hi = sorted((a1, a2))
    if hi - lo < 1e-9:
        return
    assert scaled_height(ScalingModel(alpha=lo), s) >= scaled_height(ScalingModel(alpha=hi), s)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(1.5, 4.5), s1=st.floats(0.1, 10), s2=st.floats(0.1, 10))
def test_composition(a, s1, s2):
    m = ScalingModel(alpha=a)
    twice = scaled_height(ScalingModel(alpha=a, reference_height=scaled_height(m, s1)), s2)
    assert scaled_height(m, s1 * s2) == pytest.approx(twice, rel=1e-12)


def test_ballistic_apex():
    assert ballistic_apex(1.42, 1.0, 0.45) == pytest.approx(0.3216, rel=5e-3)
    assert ballistic_apex(0.0, 1.0, 0.45) == 0.0
    assert ballistic_apex(1.42, 0.5, 0.45) == pytest.approx(0.5 * ballistic_apex(1.42, 1.0, 0.45))
    with pytest.raises(DomainError):
        ballistic_apex(1.0, 1.0, 0.0)
