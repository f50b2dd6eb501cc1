"""Detuning schedules: construction, reversal, validation, serialization."""

import json
import math

import pytest

from cribtransfer.core import ConfigError
from cribtransfer.protocol import (
    KNOWN_ROLES,
    ProtocolSchedule,
    Segment,
    ValidationReport,
    build_adiabatic,
    build_reduced_sweep,
    build_staggered,
    dressed_root,
    reverse_schedule,
    schedule_json_schema,
    validate_schedule,
)


def test_segment_validation():
    with pytest.raises(ConfigError):
        Segment(-1.0, 0.0)
    with pytest.raises(ConfigError):
        Segment(1.0, 0.0, gradient_sign=2)
    with pytest.raises(ConfigError):
        Segment(1.0, (0.0, 1.0, 2.0))


def test_segment_ramp_evaluation():
    s = Segment(2.0, (10.0, 20.0))
    assert s.is_ramp
    assert s.detuning_endpoints() == (10.0, 20.0)
    assert s.detuning_at(0.0) == 10.0
    assert s.detuning_at(1.0) == 15.0
    assert s.detuning_at(5.0) == 20.0  # clamped past the end
    flat = Segment(1.0, 7.0)
    assert not flat.is_ramp
    assert flat.detuning_at(0.5) == 7.0


def test_schedule_needs_segments():
    with pytest.raises(ConfigError):
        ProtocolSchedule(())


def test_dressed_root_property():
    # x (distance - x) = coupling^2 at the returned point
    for dist, g in ((120.0, 6.0), (30.0, 5.0), (12.0, 6.0)):
        x = dressed_root(dist, g)
        assert x * (dist - x) == pytest.approx(g * g, rel=1e-12)
        assert x <= dist / 2
    with pytest.raises(ConfigError, match="need distance >= 2"):
        dressed_root(11.9, 6.0)


def test_staggered_schedule_durations():
    sched = build_staggered(20.0, 6.0)
    a, b, c = sched.segments
    assert a.duration == pytest.approx(math.pi / 12.0)  # quarter collective period
    assert b.duration == pytest.approx(math.pi / 2.0)   # quarter qubit period
    assert c.duration == 0.7
    assert a.role == "spin_exchange" and b.role == "qubit_exchange" and c.role == "park"
    assert all(s.gradient_sign == -1 for s in sched.segments)
    # the qubit-exchange point keeps the dressed cavity mode on the qubit
    assert b.cavity_detuning == pytest.approx(dressed_root(120.0, 6.0))
    assert b.common_spin_shift == 100.0
    assert c.cavity_detuning == 30.0  # parked above the spin line
    assert sched.metadata["kind"] == "staggered"
    assert sched.metadata["delta"] == 20.0


def test_staggered_trims_scale_only_their_stage():
    base = build_staggered(20.0, 6.0)
    trimmed = build_staggered(20.0, 6.0, trim_s=1.05)
    assert trimmed.segments[0].duration == pytest.approx(1.05 * base.segments[0].duration)
    assert trimmed.segments[1].duration == base.segments[1].duration
    trimmed_c = build_staggered(20.0, 6.0, trim_c=0.5)
    assert trimmed_c.segments[1].duration == pytest.approx(0.5 * base.segments[1].duration)
    assert trimmed_c.segments[0].duration == base.segments[0].duration


def test_builders_reject_bad_inputs():
    with pytest.raises(ConfigError):
        build_staggered(20.0, 0.0)
    with pytest.raises(ConfigError):
        build_staggered(20.0, 6.0, g=0.0)
    with pytest.raises(ConfigError):
        build_staggered(20.0, 6.0, trim_s=-0.1)
    with pytest.raises(ConfigError):
        build_adiabatic(20.0, 6.0, 0.0)
    with pytest.raises(ConfigError):
        build_reduced_sweep(20.0, 6.0, trim_c=-1.0)


def test_adiabatic_default_endpoints():
    sched = build_adiabatic(20.0, 6.0, 50.0)
    (seg,) = sched.segments
    assert seg.role == "sweep"
    assert seg.detuning_endpoints() == (20.0 + 48.0, -12.0)
    assert seg.duration == 50.0
    custom = build_adiabatic(20.0, 6.0, 10.0, start_offset=40.0, end_detuning=-5.0)
    assert custom.segments[0].detuning_endpoints() == (40.0, -5.0)


def test_reduced_sweep_parks_at_storage_point():
    sched = build_reduced_sweep(20.0, 6.0)
    std = build_staggered(20.0, 6.0)
    # same exchange stages
    assert sched.segments[0] == std.segments[0]
    assert sched.segments[1] == std.segments[1]
    # tail returns to the spin-line detuning instead of the high offset
    assert sched.segments[2].cavity_detuning == 20.0
    assert sched.segments[2].common_spin_shift == 100.0

    def span(s):
        pts = [p for seg in s.segments for p in seg.detuning_endpoints()]
        return max(pts) - min(pts)

    assert span(sched) == pytest.approx(span(std) - 10.0)
    assert span(sched) <= 26.0  # never travels past delta + kappa_sqrt_n


def test_reverse_schedule_mirrors_everything():
    fwd = ProtocolSchedule(
        (
            Segment(1.0, 5.0, -1, 0.0, "spin_exchange"),
            Segment(2.0, (3.0, 8.0), -1, 100.0, "sweep"),
        ),
        metadata={"delta": 5.0},
    )
    rev = reverse_schedule(fwd)
    assert rev.reversed_order
    assert [s.role for s in rev.segments] == ["sweep", "spin_exchange"]
    assert rev.segments[0].cavity_detuning == (8.0, 3.0)  # ramp mirrored
    assert all(s.gradient_sign == 1 for s in rev.segments)
    assert rev.total_duration == fwd.total_duration
    # involution
    back = reverse_schedule(rev)
    assert back.segments == fwd.segments
    assert not back.reversed_order


def test_reverse_of_staggered_runs_stages_backwards():
    rev = reverse_schedule(build_staggered(20.0, 6.0))
    assert [s.role for s in rev.segments] == ["park", "qubit_exchange", "spin_exchange"]


def test_validate_travel_budget():
    sched = build_staggered(20.0, 6.0)
    # active span: spin exchange at 20 to the dressed root near 0.3
    ok = validate_schedule(sched, travel_budget=25.0)
    assert ok.ok and isinstance(ok, ValidationReport)
    assert ok.travel_span == pytest.approx(20.0 - dressed_root(120.0, 6.0))
    tight = validate_schedule(sched, travel_budget=10.0)
    assert not tight.ok
    assert any("exceeds budget" in w for w in tight.warnings)


def test_validate_park_segments_excluded_from_span():
    sched = build_staggered(20.0, 6.0, park_offset=500.0)
    rep = validate_schedule(sched)
    assert rep.travel_span < 30.0  # the 520 park point does not count


def test_validate_warns_when_spin_line_sits_on_qubit():
    close = build_staggered(12.0, 6.0)
    rep = validate_schedule(close)
    assert any("polariton" in w for w in rep.warnings)
    far = validate_schedule(build_staggered(20.0, 6.0))
    assert far.ok


def test_validate_flags_zero_duration_active_segment():
    sched = ProtocolSchedule(
        (Segment(0.0, 5.0, -1, 0.0, "spin_exchange"), Segment(1.0, 5.0)),
        metadata={},
    )
    rep = validate_schedule(sched)
    assert any("zero duration" in w for w in rep.warnings)


def test_schedule_json_round_trip():
    sched = build_staggered(20.0, 6.0, trim_s=1.1)
    text = sched.to_json()
    back = ProtocolSchedule.from_json(text)
    assert back.segments == sched.segments
    assert back.metadata == sched.metadata
    assert back.reversed_order == sched.reversed_order
    # ramps survive the list <-> tuple conversion
    ad = build_adiabatic(20.0, 6.0, 5.0)
    assert ProtocolSchedule.from_json(ad.to_json()).segments == ad.segments


def test_schedule_json_rejects_unknown_schema():
    with pytest.raises(ConfigError, match="unknown schedule schema"):
        ProtocolSchedule.from_json(json.dumps({"schema": "nope", "segments": []}))


def test_json_schema_document_shape():
    doc = schedule_json_schema()
    assert doc["properties"]["schema"]["const"] == "cribtransfer.schedule/1"
    assert doc["properties"]["segments"]["minItems"] == 1
    assert set(KNOWN_ROLES) == {"spin_exchange", "qubit_exchange", "park", "sweep"}
