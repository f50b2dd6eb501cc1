"""Cavity-detuning schedules for the spin -> cavity -> qubit handoff.

A schedule is an ordered list of segments.  Within a segment the cavity
detuning is either constant or ramped linearly, the inhomogeneous gradient
has a fixed sign, and the whole spin line can be displaced by a common
shift (the control field that parks the spins far above the cavity while
the cavity talks to the qubit).  All frequencies are in units of the
cavity-qubit coupling G, times in 1/G.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .core import ConfigError

KNOWN_ROLES = ("spin_exchange", "qubit_exchange", "park", "sweep")


@dataclass(frozen=True)
class Segment:
    """One stage of the protocol.

    cavity_detuning is a number for a flat segment or an (initial, final)
    pair for a linear ramp.  gradient_sign multiplies the per-spin induced
    detunings; -1 keeps the storage-phase orientation, +1 is the flipped
    (echo) orientation.  common_spin_shift displaces every spin equally.
    """

    duration: float
    cavity_detuning: float | tuple[float, float]
    gradient_sign: int = -1
    common_spin_shift: float = 0.0
    role: str = "spin_exchange"

    def __post_init__(self):
        if self.duration < 0:
            raise ConfigError("segment duration must be >= 0")
        if self.gradient_sign not in (-1, 1):
            raise ConfigError("gradient_sign must be -1 or +1")
        cd = self.cavity_detuning
        if isinstance(cd, (list, tuple)):
            if len(cd) != 2:
                raise ConfigError("ramp cavity_detuning needs exactly (start, end)")
            object.__setattr__(self, "cavity_detuning", (float(cd[0]), float(cd[1])))
        else:
            object.__setattr__(self, "cavity_detuning", float(cd))

    @property
    def is_ramp(self) -> bool:
        return isinstance(self.cavity_detuning, tuple)

    def detuning_endpoints(self) -> tuple[float, float]:
        cd = self.cavity_detuning
        return cd if isinstance(cd, tuple) else (cd, cd)

    def detuning_at(self, s: float) -> float:
        """Cavity detuning at local time s in [0, duration]."""
        a, b = self.detuning_endpoints()
        if not self.is_ramp or self.duration == 0:
            return a
        frac = min(max(s / self.duration, 0.0), 1.0)
        return a + (b - a) * frac

    def as_dict(self) -> dict:
        cd = self.cavity_detuning
        return {
            "duration": self.duration,
            "cavity_detuning": list(cd) if isinstance(cd, tuple) else cd,
            "gradient_sign": self.gradient_sign,
            "common_spin_shift": self.common_spin_shift,
            "role": self.role,
        }


@dataclass(frozen=True)
class ProtocolSchedule:
    segments: tuple[Segment, ...]
    metadata: dict = field(default_factory=dict)
    reversed_order: bool = False

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ConfigError("schedule needs at least one segment")

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(
            {
                "schema": "cribtransfer.schedule/1",
                "reversed_order": self.reversed_order,
                "metadata": self.metadata,
                "segments": [s.as_dict() for s in self.segments],
            },
            indent=indent,
        )

    @staticmethod
    def from_json(text: str) -> "ProtocolSchedule":
        doc = json.loads(text)
        if doc.get("schema") != "cribtransfer.schedule/1":
            raise ConfigError(f"unknown schedule schema: {doc.get('schema')!r}")
        segs = []
        for raw in doc["segments"]:
            cd = raw["cavity_detuning"]
            segs.append(
                Segment(
                    duration=raw["duration"],
                    cavity_detuning=tuple(cd) if isinstance(cd, list) else cd,
                    gradient_sign=raw.get("gradient_sign", -1),
                    common_spin_shift=raw.get("common_spin_shift", 0.0),
                    role=raw.get("role", "spin_exchange"),
                )
            )
        return ProtocolSchedule(
            tuple(segs),
            metadata=doc.get("metadata", {}),
            reversed_order=doc.get("reversed_order", False),
        )


def schedule_json_schema() -> dict:
    """JSON Schema for the serialized schedule format."""
    num_or_ramp = {
        "oneOf": [
            {"type": "number"},
            {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        ]
    }
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "cribtransfer.schedule/1",
        "type": "object",
        "required": ["schema", "segments"],
        "properties": {
            "schema": {"const": "cribtransfer.schedule/1"},
            "reversed_order": {"type": "boolean"},
            "metadata": {"type": "object"},
            "segments": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["duration", "cavity_detuning"],
                    "properties": {
                        "duration": {"type": "number", "minimum": 0},
                        "cavity_detuning": num_or_ramp,
                        "gradient_sign": {"enum": [-1, 1]},
                        "common_spin_shift": {"type": "number"},
                        "role": {"type": "string"},
                    },
                },
            },
        },
    }


def dressed_root(distance: float, coupling: float) -> float:
    """Lower root of x(distance - x) = coupling^2.

    This is the cavity operating point that absorbs the dispersive pull of
    a collective spin line sitting `distance` above the bare qubit: parking
    the cavity here keeps the dressed cavity-like mode exactly resonant
    with the qubit.  Requires distance >= 2*coupling (no real root closer).
    """
    disc = distance * distance - 4.0 * coupling * coupling
    if disc < 0:
        raise ConfigError(
            f"no real dressed root: need distance >= 2*coupling, got {distance} < {2*coupling}"
        )
    return (distance - math.sqrt(disc)) / 2.0


def build_staggered(
    delta: float,
    kappa_sqrt_n: float,
    g: float = 1.0,
    trim_s: float = 1.0,
    trim_c: float = 1.0,
    spin_shift: float = 100.0,
    park_offset: float = 10.0,
    park_duration: float = 0.7,
) -> ProtocolSchedule:
    """Two half-swap stages plus a parked tail.

    Stage A holds the cavity on the spin line (detuning delta) for a
    quarter period of the collective vacuum Rabi oscillation, moving the
    excitation spins -> cavity.  Stage B lifts the spins out of the way by
    spin_shift and parks the cavity on the dressed root so the cavity and
    qubit swap for a quarter period of the g oscillation.  Stage C returns
    the cavity to a far-detuned point so the arrived excitation stays put.
    trim_s / trim_c scale the two swap durations (1.0 = exact quarter
    periods; sweeping them exposes the timing sensitivity).
    """
    if kappa_sqrt_n <= 0 or g <= 0:
        raise ConfigError("couplings must be > 0")
    if trim_s < 0 or trim_c < 0:
        raise ConfigError("trims must be >= 0")
    t_s = trim_s * math.pi / (2.0 * kappa_sqrt_n)
    t_c = trim_c * math.pi / (2.0 * g)
    segs = (
        Segment(t_s, delta, -1, 0.0, "spin_exchange"),
        Segment(t_c, dressed_root(delta + spin_shift, kappa_sqrt_n), -1, spin_shift, "qubit_exchange"),
        Segment(park_duration, delta + park_offset, -1, spin_shift, "park"),
    )
    meta = {
        "kind": "staggered",
        "delta": delta,
        "kappa_sqrt_n": kappa_sqrt_n,
        "g": g,
        "trim_s": trim_s,
        "trim_c": trim_c,
        "spin_shift": spin_shift,
    }
    return ProtocolSchedule(segs, metadata=meta)


def build_adiabatic(
    delta: float,
    kappa_sqrt_n: float,
    sweep_duration: float,
    start_offset: float | None = None,
    end_detuning: float | None = None,
) -> ProtocolSchedule:
    """Single linear chirp of the cavity through both resonances.

    Default endpoints: start at delta + 8*kappa_sqrt_n (well above the spin
    line) and finish at -2*kappa_sqrt_n (below the qubit), so the sweep
    crosses the spin line first and the qubit second, carrying the
    excitation along the adiabatic branch.
    """
    if kappa_sqrt_n <= 0:
        raise ConfigError("couplings must be > 0")
    if sweep_duration <= 0:
        raise ConfigError("sweep_duration must be > 0")
    start = delta + 8.0 * kappa_sqrt_n if start_offset is None else start_offset
    end = -2.0 * kappa_sqrt_n if end_detuning is None else end_detuning
    segs = (Segment(sweep_duration, (start, end), -1, 0.0, "sweep"),)
    meta = {
        "kind": "adiabatic",
        "delta": delta,
        "kappa_sqrt_n": kappa_sqrt_n,
        "sweep_duration": sweep_duration,
    }
    return ProtocolSchedule(segs, metadata=meta)


def build_reduced_sweep(
    delta: float,
    kappa_sqrt_n: float,
    g: float = 1.0,
    trim_s: float = 1.0,
    trim_c: float = 1.0,
    spin_shift: float = 100.0,
    park_duration: float = 0.7,
) -> ProtocolSchedule:
    """Staggered variant whose parked cavity returns to the storage point.

    Same two exchange stages as build_staggered, but the tail segment sits
    at the spin-exchange detuning (the spins are still parked high, so the
    cavity is idle there) instead of a dedicated offset above it.  The
    cavity then only ever travels between the dressed root and delta.
    """
    if kappa_sqrt_n <= 0 or g <= 0:
        raise ConfigError("couplings must be > 0")
    if trim_s < 0 or trim_c < 0:
        raise ConfigError("trims must be >= 0")
    t_s = trim_s * math.pi / (2.0 * kappa_sqrt_n)
    t_c = trim_c * math.pi / (2.0 * g)
    segs = (
        Segment(t_s, delta, -1, 0.0, "spin_exchange"),
        Segment(t_c, dressed_root(delta + spin_shift, kappa_sqrt_n), -1, spin_shift, "qubit_exchange"),
        Segment(park_duration, delta, -1, spin_shift, "park"),
    )
    meta = {
        "kind": "reduced-sweep",
        "delta": delta,
        "kappa_sqrt_n": kappa_sqrt_n,
        "g": g,
        "trim_s": trim_s,
        "trim_c": trim_c,
        "spin_shift": spin_shift,
    }
    return ProtocolSchedule(segs, metadata=meta)


def reverse_schedule(schedule: ProtocolSchedule) -> ProtocolSchedule:
    """Time-reverse a schedule: reversed segment order, mirrored ramps,
    negated gradient signs.  Applying it twice returns the original."""
    segs = []
    for s in reversed(schedule.segments):
        cd = s.cavity_detuning
        if isinstance(cd, tuple):
            cd = (cd[1], cd[0])
        segs.append(
            Segment(s.duration, cd, -s.gradient_sign, s.common_spin_shift, s.role)
        )
    return ProtocolSchedule(
        tuple(segs),
        metadata=dict(schedule.metadata),
        reversed_order=not schedule.reversed_order,
    )


@dataclass(frozen=True)
class ValidationReport:
    warnings: tuple[str, ...]
    travel_span: float

    @property
    def ok(self) -> bool:
        return not self.warnings


def validate_schedule(
    schedule: ProtocolSchedule,
    travel_budget: float | None = None,
) -> ValidationReport:
    """Static sanity checks on a schedule.

    Travel span is the detuning range the cavity must cover during the
    active (non-park) segments; parked dwell points are excluded because
    slewing to a parking spot has no timing constraint.  A budget smaller
    than the span produces a warning, as does operating the spin-exchange
    stage so close to the qubit that the lower polariton branch reaches it
    (delta < 3*kappa_sqrt_n, when those numbers are in the metadata).
    """
    warnings = []
    active = [s for s in schedule.segments if s.role != "park"]
    pool = active if active else list(schedule.segments)
    points = [p for s in pool for p in s.detuning_endpoints()]
    span = max(points) - min(points)
    if travel_budget is not None and span > travel_budget:
        warnings.append(
            f"cavity travel {span:.4g} exceeds budget {travel_budget:.4g}"
        )
    meta = schedule.metadata
    if "delta" in meta and "kappa_sqrt_n" in meta:
        if meta["delta"] < 3.0 * meta["kappa_sqrt_n"]:
            warnings.append(
                f"spin-exchange point delta={meta['delta']:.4g} is within "
                f"3*kappa_sqrt_n={3*meta['kappa_sqrt_n']:.4g} of the qubit; "
                "polariton leakage onto the qubit is not suppressed"
            )
    for i, s in enumerate(schedule.segments):
        if s.duration == 0 and s.role != "park":
            warnings.append(f"segment {i} ({s.role}) has zero duration")
    return ValidationReport(tuple(warnings), span)
