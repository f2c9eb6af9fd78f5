import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from monoapprox.budget import BudgetExceededError
from monoapprox.functions import (
    Affine,
    boxbslash,
    family_from_spec,
    is_monotone_on_grid,
    level_set_function,
    random_delta,
    sample_U,
    snap_to_grid,
    step_function,
    threshold,
)


def test_boxbslash_examples():
    f2 = boxbslash(2)
    assert f2((0.9, 0.8)) == 1.0
    assert f2((0.5, 0.5)) == 1.0  # sgn(0) = +1
    assert boxbslash(3)((0.1, 0.2, 0.3)) == -1.0


def test_boxbslash_batch_matches_scalar():
    f = boxbslash(3)
    rng = np.random.default_rng(0)
    points = rng.random((100, 3))
    assert np.array_equal(f.batch(points), [f(p) for p in points])


def test_step_function_examples():
    flat = step_function(1, 2, [0, 0])
    assert flat((0.2,)) == -1.0
    assert flat((0.7,)) == 0.0
    lifted = step_function(1, 2, [1, 1])
    assert lifted((0.2,)) == 0.0
    assert lifted((0.7,)) == 1.0
    plane = step_function(2, 2, [[0, 0], [0, 0]])
    assert plane((0.9, 0.9)) == pytest.approx(1 / 3)


def test_step_function_monotone_for_every_delta():
    for bits in product((0, 1), repeat=9):
        truth = step_function(2, 3, np.array(bits).reshape(3, 3))
        assert is_monotone_on_grid(truth, 2, 3)


def test_step_function_rejects_incomplete_delta():
    with pytest.raises(ValueError):
        step_function(2, 2, [[0, 1]])
    with pytest.raises(ValueError):
        step_function(1, 2, [0, 2])


def test_random_delta_reproducible():
    assert np.array_equal(random_delta(2, 3, 5), random_delta(2, 3, 5))


def test_level_set_examples():
    # No witness set: pure weight threshold at b.
    f = level_set_function(3, 1, 2, [])
    assert f((0.9, 0.9, 0.9)) == 1.0  # weight 3 > b
    assert f((0.9, 0.9, 0.1)) == -1.0  # weight 2 <= b, no witness
    # Full witness set with b = d: +1 exactly at weight >= t.
    full = level_set_function(3, 2, 3, [u for u in range(8) if bin(u).count("1") == 2])
    assert full((0.9, 0.9, 0.1)) == 1.0
    assert full((0.9, 0.1, 0.1)) == -1.0
    # Single witness not below the point.
    g = level_set_function(3, 1, 3, [(1, 0, 0)])
    assert g((0.1, 0.9, 0.9)) == -1.0
    assert g((0.9, 0.1, 0.1)) == 1.0


def test_level_set_rejects_wrong_weight_member():
    with pytest.raises(ValueError):
        level_set_function(3, 2, 3, [(1, 0, 0)])


def test_level_set_batch_matches_scalar():
    truth = level_set_function(4, 2, 3, sample_U(4, 2, 0.5, 7))
    rng = np.random.default_rng(1)
    points = rng.random((200, 4))
    assert np.array_equal(truth.batch(points), [truth(p) for p in points])


def test_level_set_monotone_under_bit_flips():
    # Exhaustive over the Boolean cube for several random draws.
    for seed in range(5):
        d = 6
        truth = level_set_function(d, 2, 4, sample_U(d, 2, 0.35, seed))
        for mask in range(1 << d):
            value = truth.value_on_vertex(mask)
            for j in range(d):
                if not mask >> j & 1:
                    assert truth.value_on_vertex(mask | 1 << j) >= value


def test_sample_U_membership_probability():
    members = sample_U(10, 2, 1.0, 0)
    assert len(members) == math.comb(10, 2)
    assert sample_U(10, 2, 0.0, 0) == frozenset()


def test_threshold_examples():
    assert threshold(lambda x: 0.0, 0.0)((0.5,)) == 1.0  # sgn(0) = +1
    ramp = Affine(1)
    cut = threshold(ramp, 0.0)
    assert cut((0.25,)) == -1.0
    assert cut((0.5,)) == 1.0
    assert threshold(ramp, -2.0)((0.1,)) == 1.0


@settings(max_examples=50)
@given(
    st.floats(-1.5, 1.5), st.floats(-1.5, 1.5),
    st.floats(0.0, 1.0), st.floats(0.0, 1.0),
)
def test_threshold_nonincreasing_in_t(t0, t1, x0, x1):
    low, high = sorted((t0, t1))
    oracle = boxbslash(2)
    assert threshold(oracle, low)((x0, x1)) >= threshold(oracle, high)((x0, x1))


def test_is_monotone_on_grid_examples():
    assert is_monotone_on_grid(boxbslash(3), 3, 4)
    assert not is_monotone_on_grid(lambda x: -x[0], 1, 4)


def test_is_monotone_budget():
    with pytest.raises(BudgetExceededError):
        is_monotone_on_grid(boxbslash(2), 2, 100, budget=100)


def test_snap_to_grid_is_piecewise_constant_and_monotone():
    snapped = snap_to_grid(boxbslash(2), 2, 2)
    assert snapped((0.30, 0.10)) == snapped((0.49, 0.24))
    assert is_monotone_on_grid(snapped, 2, 8)
    rng = np.random.default_rng(3)
    points = rng.random((100, 2))
    assert np.array_equal(snapped.batch(points), [snapped(p) for p in points])


def test_family_from_spec():
    assert family_from_spec("boxbslash", 2, 0)((0.9, 0.9)) == 1.0
    assert family_from_spec("affine", 2, 0)((0.5, 0.5)) == 0.0
    step = family_from_spec("step:m=4", 2, 11)
    assert is_monotone_on_grid(step, 2, 4)
    level = family_from_spec("levelset:t=1,b=2,p=0.5", 3, 11)
    assert level((0.9, 0.9, 0.9)) == 1.0
    with pytest.raises(ValueError):
        family_from_spec("unknown", 2, 0)
    with pytest.raises(ValueError):
        family_from_spec("levelset:t=1,bogus=2", 3, 0)
