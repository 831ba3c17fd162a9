import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entsource.temporal import (
    DEFAULT_DELTA_GROUP_INDEX,
    DEFAULT_FIBER_BIREFRINGENCE,
    WalkoffSpec,
    budget_to_csv,
    compensation_fiber_length,
    effective_length,
    fiber_delay,
    residual_delay,
    residual_indistinguishability,
    transform_limited_coherence_time,
    walkoff_budget,
    walkoff_delay,
)

C = 299_792_458.0


def test_effective_length_examples():
    assert effective_length(WalkoffSpec(49.0, 24.0)) == 37.0
    assert effective_length(WalkoffSpec(49.0, 0.0)) == 49.0
    assert effective_length(WalkoffSpec(49.0, 49.0)) == 24.5


def test_published_delay_and_fiber():
    spec = WalkoffSpec(49.0, 24.0)
    delay = walkoff_delay(spec)
    oracle = 0.07544 * 37e-3 / C * 1e12
    assert delay == pytest.approx(oracle, rel=1e-14)
    assert abs(delay - 9.31) <= 0.01
    fiber = compensation_fiber_length(delay, 4.016e-4)
    assert fiber == pytest.approx(oracle * 1e-12 * C / 4.016e-4, rel=1e-14)
    assert abs(fiber - 6.95) <= 0.01


def test_derived_constants_invert_published_values():
    # the constants are the published delay/fiber length pushed back through the relations
    assert 9.31e-12 * C / 37e-3 == pytest.approx(DEFAULT_DELTA_GROUP_INDEX, rel=2e-4)
    assert 9.31e-12 * C / 6.95 == pytest.approx(DEFAULT_FIBER_BIREFRINGENCE, rel=2e-4)


def test_round_trip_exact_for_published_spec():
    spec = WalkoffSpec(49.0, 24.0)
    fiber = compensation_fiber_length(walkoff_delay(spec), spec.fiber_birefringence)
    assert residual_delay(spec, fiber) == 0.0
    assert residual_indistinguishability(residual_delay(spec, fiber), spec.coherence_time_ps) == 1.0


@given(
    st.floats(1.0, 100.0),
    st.floats(0.0, 1.0),
    st.floats(1e-4, 0.5),
    st.floats(1e-5, 1e-2),
)
def test_perfect_compensation_any_spec(length, poled_frac, dn, b):
    spec = WalkoffSpec(length, length * poled_frac, delta_group_index=dn, fiber_birefringence=b)
    fiber = compensation_fiber_length(walkoff_delay(spec), b)
    assert abs(residual_delay(spec, fiber)) <= 1e-12 * max(1.0, walkoff_delay(spec))
    assert residual_indistinguishability(residual_delay(spec, fiber), 1.0) == pytest.approx(1.0, abs=1e-20)


@given(st.floats(1.0, 100.0), st.floats(0.0, 1.0))
def test_delay_linear_in_length(length, frac):
    a = WalkoffSpec(length, length * frac)
    b = WalkoffSpec(2 * length, 2 * length * frac)
    assert walkoff_delay(b) == pytest.approx(2 * walkoff_delay(a), rel=1e-14)


@given(st.floats(0.0, 100.0))
def test_fiber_length_linear_in_delay(d):
    b = DEFAULT_FIBER_BIREFRINGENCE
    assert compensation_fiber_length(2 * d, b) == pytest.approx(2 * compensation_fiber_length(d, b), rel=1e-14)
    assert fiber_delay(compensation_fiber_length(d, b), b) == pytest.approx(d, rel=1e-14, abs=1e-300)


def test_zero_cases():
    assert walkoff_delay(WalkoffSpec(49.0, 24.0, delta_group_index=0.0)) == 0.0
    assert compensation_fiber_length(0.0, 4.016e-4) == 0.0


@pytest.mark.parametrize("b", [0.0, -1e-4])
def test_nonpositive_birefringence(b):
    with pytest.raises(ValueError):
        compensation_fiber_length(9.31, b)


def test_group_index_pair():
    spec = WalkoffSpec(49.0, 24.0, group_index_h=2.2, group_index_v=2.12456)
    assert spec.group_index_difference == pytest.approx(0.07544, abs=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(delta_group_index=0.07, group_index_h=2.2, group_index_v=2.1),
        dict(group_index_h=2.2),
        dict(chip_length_mm=10.0, poled_length_mm=20.0),
        dict(poled_length_mm=-1.0),
        dict(fiber_birefringence=0.0),
        dict(coherence_time_ps=0.0),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        WalkoffSpec(**kwargs)


def test_residual_indistinguishability_examples():
    assert residual_indistinguishability(0.0, 14.2) == 1.0
    assert residual_indistinguishability(14.2, 14.2) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert residual_indistinguishability(100.0, 14.2) < 1e-6
    with pytest.raises(ValueError):
        residual_indistinguishability(1.0, 0.0)


def test_uncompensated_chip_loses_coherence():
    spec = WalkoffSpec(49.0, 24.0, coherence_time_ps=transform_limited_coherence_time(0.25, 1554.44))
    factor = residual_indistinguishability(residual_delay(spec, 0.0), spec.coherence_time_ps)
    assert factor == pytest.approx(math.exp(-walkoff_delay(spec) ** 2 / (2 * spec.coherence_time_ps ** 2)))
    assert factor < 0.9


def test_transform_limited_coherence_time():
    dnu = C * 0.25e-9 / (1554.44e-9) ** 2
    oracle = 2 * math.log(2) / math.pi / dnu * 1e12
    assert transform_limited_coherence_time(0.25, 1554.44) == pytest.approx(oracle, rel=1e-14)
    assert transform_limited_coherence_time(0.25, 1554.44) == pytest.approx(14.226, abs=1e-3)


def test_budget_csv():
    text = budget_to_csv(walkoff_budget(WalkoffSpec(49.0, 24.0)))
    lines = text.strip().split("\n")
    assert lines[0] == "quantity,value,unit"
    rows = {l.split(",")[0]: l.split(",") for l in lines[1:]}
    assert rows["effective_length"] == ["effective_length", "37.0", "mm"]
    assert float(rows["residual_delay"][1]) == 0.0
    assert rows["walkoff_delay"][2] == "ps"
